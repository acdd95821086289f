#include "qbcast/library.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qbcast {

namespace {
constexpr double kPi = std::numbers::pi;
cxd phase(double angle) { return std::polar(1.0, angle); }
}  // namespace

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    r = r * static_cast<double>(n - i) / static_cast<double>(i + 1);
  }
  return r;
}

DiagonalPhaseGate::DiagonalPhaseGate(std::size_t arity)
    : arity_(arity), diag_(Vector::Ones(static_cast<Eigen::Index>(std::size_t{1} << arity))) {
  if (arity == 0 || arity > 20) throw std::invalid_argument("phase gate arity out of range");
}

DiagonalPhaseGate DiagonalPhaseGate::identity(std::size_t arity) {
  return DiagonalPhaseGate(arity);
}

DiagonalPhaseGate DiagonalPhaseGate::cz_product(
    std::size_t arity, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  DiagonalPhaseGate g(arity);
  for (const auto& [u, v] : edges) g.add_entry({u, v}, -1.0);
  return g;
}

DiagonalPhaseGate DiagonalPhaseGate::ccz(std::size_t arity, std::size_t a,
                                         std::size_t b, std::size_t c) {
  DiagonalPhaseGate g(arity);
  g.add_entry({a, b, c}, -1.0);
  return g;
}

DiagonalPhaseGate& DiagonalPhaseGate::add_entry(const std::vector<std::size_t>& subset,
                                                cxd phase_value) {
  if (std::abs(std::abs(phase_value) - 1.0) > kAlgebraTol) {
    throw std::invalid_argument("phase entries must have unit modulus");
  }
  std::size_t mask = 0;
  for (std::size_t q : subset) {
    if (q >= arity_) throw std::invalid_argument("phase entry qubit out of range");
    mask |= std::size_t{1} << (arity_ - 1 - q);  // qubit 0 most significant
  }
  std::size_t total = std::size_t{1} << arity_;
  for (std::size_t x = 0; x < total; ++x) {
    if ((x & mask) == mask) diag_(static_cast<Eigen::Index>(x)) *= phase_value;
  }
  return *this;
}

bool DiagonalPhaseGate::is_identity() const {
  for (Eigen::Index i = 0; i < diag_.size(); ++i) {
    if (std::abs(diag_(i) - cxd{1.0, 0.0}) > kAlgebraTol) return false;
  }
  return true;
}

LocalOperator DiagonalPhaseGate::as_operator(const std::vector<std::size_t>& targets) const {
  if (targets.size() != arity_) throw std::invalid_argument("target count must match arity");
  return LocalOperator{targets, Matrix(diag_.asDiagonal())};
}

void Graph::validate() const {
  for (const auto& [u, v] : edges) {
    if (u >= num_vertices || v >= num_vertices) {
      throw std::invalid_argument("edge references missing vertex");
    }
    if (u == v) throw std::invalid_argument("self-loops not allowed");
  }
}

std::vector<std::size_t> Graph::neighbors(std::size_t v) const {
  std::vector<std::size_t> out;
  for (const auto& [a, b] : edges) {
    if (a == v) out.push_back(b);
    if (b == v) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool Graph::has_edge(std::size_t u, std::size_t v) const {
  for (const auto& [a, b] : edges) {
    if ((a == u && b == v) || (a == v && b == u)) return true;
  }
  return false;
}

PauliString::PauliString(int sign, std::string letters) : letters_(std::move(letters)) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
  phase_i_ = (sign == 1) ? 0 : 2;
  for (char c : letters_) {
    if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
      throw std::invalid_argument("invalid Pauli letter");
    }
  }
}

PauliString PauliString::parse(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty Pauli string");
  int sign = 1;
  std::size_t start = 0;
  if (text[0] == '+' || text[0] == '-') {
    sign = (text[0] == '-') ? -1 : 1;
    start = 1;
  }
  return PauliString(sign, text.substr(start));
}

int PauliString::sign() const {
  int p = ((phase_i_ % 4) + 4) % 4;
  if (p == 0) return 1;
  if (p == 2) return -1;
  throw std::runtime_error("Pauli string has imaginary phase");
}

PauliString PauliString::operator*(const PauliString& other) const {
  if (letters_.size() != other.letters_.size()) {
    throw std::invalid_argument("Pauli string length mismatch");
  }
  PauliString out;
  out.phase_i_ = phase_i_ + other.phase_i_;
  out.letters_.resize(letters_.size());
  auto idx = [](char c) { return c == 'I' ? 0 : c == 'X' ? 1 : c == 'Y' ? 2 : 3; };
  static const char prod[4][4] = {{'I', 'X', 'Y', 'Z'},
                                  {'X', 'I', 'Z', 'Y'},
                                  {'Y', 'Z', 'I', 'X'},
                                  {'Z', 'Y', 'X', 'I'}};
  // phase of sigma_a sigma_b = i^t sigma_c, per pair (a,b)
  static const int ph[4][4] = {{0, 0, 0, 0},
                               {0, 0, 1, 3},
                               {0, 3, 0, 1},
                               {0, 1, 3, 0}};
  for (std::size_t i = 0; i < letters_.size(); ++i) {
    int a = idx(letters_[i]);
    int b = idx(other.letters_[i]);
    out.letters_[i] = prod[a][b];
    out.phase_i_ += ph[a][b];
  }
  out.phase_i_ = ((out.phase_i_ % 4) + 4) % 4;
  return out;
}

bool PauliString::commutes_with(const PauliString& other) const {
  if (letters_.size() != other.letters_.size()) {
    throw std::invalid_argument("Pauli string length mismatch");
  }
  int anti = 0;
  for (std::size_t i = 0; i < letters_.size(); ++i) {
    char a = letters_[i], b = other.letters_[i];
    if (a != 'I' && b != 'I' && a != b) ++anti;
  }
  return anti % 2 == 0;
}

bool PauliString::is_identity() const {
  return std::all_of(letters_.begin(), letters_.end(), [](char c) { return c == 'I'; });
}

std::size_t PauliString::weight() const {
  return static_cast<std::size_t>(
      std::count_if(letters_.begin(), letters_.end(), [](char c) { return c != 'I'; }));
}

Matrix PauliString::matrix() const {
  Matrix m = Matrix::Identity(1, 1);
  for (char c : letters_) {
    Matrix p;
    switch (c) {
      case 'I': p = Matrix::Identity(2, 2); break;
      case 'X': p = pauli_x(); break;
      case 'Y': p = pauli_y(); break;
      default: p = pauli_z(); break;
    }
    Matrix next(m.rows() * 2, m.cols() * 2);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c2 = 0; c2 < m.cols(); ++c2) {
        next.block(r * 2, c2 * 2, 2, 2) = m(r, c2) * p;
      }
    }
    m = std::move(next);
  }
  cxd ph = std::pow(cxd{0.0, 1.0}, phase_i_);
  return ph * m;
}

std::pair<std::vector<int>, std::vector<int>> PauliString::symplectic() const {
  std::vector<int> x(letters_.size(), 0), z(letters_.size(), 0);
  for (std::size_t i = 0; i < letters_.size(); ++i) {
    if (letters_[i] == 'X' || letters_[i] == 'Y') x[i] = 1;
    if (letters_[i] == 'Z' || letters_[i] == 'Y') z[i] = 1;
  }
  return {x, z};
}

std::string PauliString::str() const {
  std::string s = (sign() == 1) ? "+" : "-";
  return s + letters_;
}

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << cxd{0, 0}, cxd{0, -1}, cxd{0, 1}, cxd{0, 0};
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Matrix hadamard() {
  Matrix m(2, 2);
  double s = 1.0 / std::sqrt(2.0);
  m << s, s, s, -s;
  return m;
}

Vector ket0() {
  Vector v(2);
  v << 1, 0;
  return v;
}

Vector ket1() {
  Vector v(2);
  v << 0, 1;
  return v;
}

Vector ket_plus() {
  Vector v(2);
  double s = 1.0 / std::sqrt(2.0);
  v << s, s;
  return v;
}

Vector ket_minus() {
  Vector v(2);
  double s = 1.0 / std::sqrt(2.0);
  v << s, -s;
  return v;
}

MeasurementBasis fourier_basis(std::size_t d, std::size_t target) {
  if (d < 2) throw std::invalid_argument("Fourier basis needs dimension >= 2");
  MeasurementBasis basis;
  basis.target = target;
  for (std::size_t n = 0; n < d; ++n) {
    Vector v(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) {
      v(static_cast<Eigen::Index>(k)) =
          phase(2.0 * kPi * static_cast<double>(n * k) / static_cast<double>(d)) /
          std::sqrt(static_cast<double>(d));
    }
    basis.vectors.push_back(std::move(v));
  }
  return basis;
}

MeasurementBasis computational_basis(std::size_t d, std::size_t target) {
  MeasurementBasis basis;
  basis.target = target;
  for (std::size_t n = 0; n < d; ++n) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(d));
    v(static_cast<Eigen::Index>(n)) = 1.0;
    basis.vectors.push_back(std::move(v));
  }
  return basis;
}

MeasurementBasis x_basis(std::size_t target) {
  MeasurementBasis basis;
  basis.target = target;
  basis.vectors = {ket_plus(), ket_minus()};
  return basis;
}

MeasurementBasis rotated_x_basis(double theta, std::size_t target) {
  // e^{-i theta X} = cos(theta) I - i sin(theta) X
  Matrix rot = std::cos(theta) * Matrix::Identity(2, 2) -
               cxd{0.0, 1.0} * std::sin(theta) * pauli_x();
  MeasurementBasis basis;
  basis.target = target;
  basis.vectors = {rot * ket0(), rot * ket1()};
  return basis;
}

LocalOperator sender_phase_gate(std::size_t d, std::size_t n, double theta,
                                std::size_t target) {
  if (d != n + 1) throw std::invalid_argument("sender qudit dimension must be N+1");
  Vector diag(static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < d; ++k) {
    diag(static_cast<Eigen::Index>(k)) =
        phase((2.0 * static_cast<double>(k) - static_cast<double>(n)) * theta);
  }
  return LocalOperator{{target}, Matrix(diag.asDiagonal())};
}

LocalOperator correction_gate(std::size_t modulus, long outcome_sum,
                              std::size_t target) {
  Vector diag(2);
  diag(0) = phase(2.0 * kPi * static_cast<double>(outcome_sum) / static_cast<double>(modulus));
  diag(1) = 1.0;
  return LocalOperator{{target}, Matrix(diag.asDiagonal())};
}

LocalOperator controlled_shift(std::size_t ctrl_dim, std::size_t tgt_dim,
                               int direction, std::size_t ctrl, std::size_t tgt) {
  if (ctrl_dim < 2 || tgt_dim < 2) throw std::invalid_argument("invalid dims");
  if (direction != 1 && direction != -1) throw std::invalid_argument("direction must be +-1");
  std::size_t total = ctrl_dim * tgt_dim;
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
  for (std::size_t k = 0; k < ctrl_dim; ++k) {
    for (std::size_t l = 0; l < tgt_dim; ++l) {
      long shifted = static_cast<long>(l) + direction * static_cast<long>(k);
      shifted = ((shifted % static_cast<long>(tgt_dim)) + static_cast<long>(tgt_dim)) %
                static_cast<long>(tgt_dim);
      std::size_t from = k * tgt_dim + l;
      std::size_t to = k * tgt_dim + static_cast<std::size_t>(shifted);
      m(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from)) = 1.0;
    }
  }
  return LocalOperator{{ctrl, tgt}, m};
}

StateVector dicke_state(std::size_t n, std::size_t k) {
  if (k > n) throw std::invalid_argument("Dicke k out of range");
  std::vector<std::size_t> dims(n, 2);
  std::size_t total = std::size_t{1} << n;
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(total));
  double norm = 1.0 / std::sqrt(binomial(n, k));
  for (std::size_t x = 0; x < total; ++x) {
    std::size_t zeros = 0;
    for (std::size_t b = 0; b < n; ++b) {
      if (!((x >> b) & 1)) ++zeros;
    }
    if (zeros == k) amps(static_cast<Eigen::Index>(x)) = norm;
  }
  return StateVector(std::move(dims), std::move(amps));
}

void BroadcastSpec::validate() const {
  if (num_receivers < 1) throw std::invalid_argument("need at least one receiver");
  if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > kAlgebraTol) {
    throw std::invalid_argument("|alpha|^2 + |beta|^2 must equal 1");
  }
  if (entangler && entangler->arity() != num_receivers) {
    throw std::invalid_argument("entangler arity must match receiver count");
  }
}

StateVector make_broadcast_state(const BroadcastSpec& spec) {
  spec.validate();
  std::size_t m = spec.num_senders;
  std::size_t n = spec.num_receivers;
  std::size_t d = spec.sender_dim();
  std::vector<std::size_t> dims(m, d);
  dims.insert(dims.end(), n, 2);
  std::size_t qubit_total = std::size_t{1} << n;
  std::size_t total = qubit_total;
  for (std::size_t j = 0; j < m; ++j) total *= d;
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(total));
  for (std::size_t k = 0; k <= n; ++k) {
    // Template weight sqrt(C(N,k)) times the Dicke normalization
    // 1/sqrt(C(N,k)) cancels: each component carries alpha^k beta^{N-k}.
    cxd coeff = std::pow(spec.alpha, static_cast<double>(k)) *
                std::pow(spec.beta, static_cast<double>(n - k));
    // sender block index: all senders at |k>
    std::size_t sender_idx = 0;
    for (std::size_t j = 0; j < m; ++j) sender_idx = sender_idx * d + k;
    for (std::size_t x = 0; x < qubit_total; ++x) {
      std::size_t zeros = 0;
      for (std::size_t b = 0; b < n; ++b) {
        if (!((x >> b) & 1)) ++zeros;
      }
      if (zeros != k) continue;
      cxd val = coeff;
      if (spec.entangler) val *= spec.entangler->entry(x);
      amps(static_cast<Eigen::Index>(sender_idx * qubit_total + x)) = val;
    }
  }
  return StateVector(std::move(dims), std::move(amps));
}

StateVector graph_state(const Graph& g) {
  g.validate();
  if (g.num_vertices < 1) throw std::invalid_argument("graph needs at least one vertex");
  std::size_t n = g.num_vertices;
  std::size_t total = std::size_t{1} << n;
  Vector amps(static_cast<Eigen::Index>(total));
  double norm = 1.0 / std::sqrt(static_cast<double>(total));
  for (std::size_t x = 0; x < total; ++x) {
    int sign = 1;
    for (const auto& [u, v] : g.edges) {
      bool bu = (x >> (n - 1 - u)) & 1;
      bool bv = (x >> (n - 1 - v)) & 1;
      if (bu && bv) sign = -sign;
    }
    amps(static_cast<Eigen::Index>(x)) = sign * norm;
  }
  return StateVector(std::vector<std::size_t>(n, 2), std::move(amps));
}

PauliString graph_stabilizer(const Graph& g, std::size_t v) {
  g.validate();
  if (v >= g.num_vertices) throw std::invalid_argument("vertex out of range");
  std::string letters(g.num_vertices, 'I');
  letters[v] = 'X';
  for (std::size_t u : g.neighbors(v)) letters[u] = 'Z';
  return PauliString(1, letters);
}

TrineSet trine_states() {
  TrineSet t;
  double s = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < 3; ++j) {
    double angle = (j == 0) ? 0.0 : (j == 1 ? 2.0 * kPi / 3.0 : -2.0 * kPi / 3.0);
    Vector psi(2), anti(2);
    psi << s * phase(angle), s * phase(-angle);
    anti << s * phase(angle), -s * phase(-angle);
    t.trine.push_back(std::move(psi));
    t.anti_trine.push_back(std::move(anti));
  }
  return t;
}

Povm anti_trine_povm(std::size_t target) {
  TrineSet t = trine_states();
  Povm povm;
  povm.target = target;
  for (const Vector& v : t.anti_trine) {
    povm.elements.push_back((2.0 / 3.0) * (v * v.adjoint()));
  }
  return povm;
}

BrickworkBlock brickwork_block() {
  BrickworkBlock b;
  b.graph.num_vertices = 10;
  b.graph.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4},
                   {5, 6}, {6, 7}, {7, 8}, {8, 9},
                   {2, 7}, {4, 9}};
  b.inputs = {0, 5};
  b.outputs = {4, 9};
  return b;
}

}  // namespace qbcast
