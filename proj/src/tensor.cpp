#include "qbcast/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qbcast {

namespace {

std::size_t checked_total_dim(const std::vector<std::size_t>& dims) {
  if (dims.empty()) throw std::invalid_argument("register needs at least one subsystem");
  std::size_t total = 1;
  for (std::size_t d : dims) {
    if (d < 2) throw std::invalid_argument("subsystem dimension must be >= 2");
    if (total > kMaxAmplitudes / d) {
      throw std::invalid_argument("register too large: product of dims exceeds 2^22");
    }
    total *= d;
  }
  return total;
}

void check_targets(const StateVector& state, const std::vector<std::size_t>& targets) {
  std::vector<std::size_t> sorted = targets;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("duplicate target subsystem");
  }
  for (std::size_t t : targets) {
    if (t >= state.num_subsystems()) throw std::out_of_range("target subsystem not found");
  }
}

}  // namespace

StateVector::StateVector(std::vector<std::size_t> dims, Vector amps)
    : dims_(std::move(dims)), amps_(std::move(amps)) {
  std::size_t total = checked_total_dim(dims_);
  if (static_cast<std::size_t>(amps_.size()) != total) {
    throw std::invalid_argument("amplitude array length does not match product of dims");
  }
  init_strides();
  normalize();
}

void StateVector::init_strides() {
  strides_.assign(dims_.size(), 1);
  for (std::size_t i = dims_.size(); i-- > 1;) {
    strides_[i - 1] = strides_[i] * dims_[i];
  }
}

void StateVector::normalize() {
  double n = amps_.norm();
  if (n < 1e-300) throw std::invalid_argument("cannot normalize zero vector");
  amps_ /= n;
}

StateVector StateVector::computational(std::vector<std::size_t> dims,
                                       const std::vector<std::size_t>& digits) {
  std::size_t total = checked_total_dim(dims);
  if (digits.size() != dims.size()) throw std::invalid_argument("digit count mismatch");
  std::size_t idx = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (digits[i] >= dims[i]) throw std::invalid_argument("digit out of range");
    idx = idx * dims[i] + digits[i];
  }
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(total));
  amps(static_cast<Eigen::Index>(idx)) = 1.0;
  return StateVector(std::move(dims), std::move(amps));
}

StateVector StateVector::product(std::vector<std::size_t> dims,
                                 const std::vector<Vector>& locals) {
  std::size_t total = checked_total_dim(dims);
  if (locals.size() != dims.size()) throw std::invalid_argument("local vector count mismatch");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (static_cast<std::size_t>(locals[i].size()) != dims[i]) {
      throw std::invalid_argument("local vector length does not match its dim");
    }
  }
  Vector amps = Vector::Ones(1);
  for (const Vector& v : locals) {
    Vector next(amps.size() * v.size());
    for (Eigen::Index a = 0; a < amps.size(); ++a) {
      for (Eigen::Index b = 0; b < v.size(); ++b) {
        next(a * v.size() + b) = amps(a) * v(b);
      }
    }
    amps = std::move(next);
  }
  (void)total;
  return StateVector(std::move(dims), std::move(amps));
}

std::size_t StateVector::stride(std::size_t i) const { return strides_.at(i); }

std::size_t StateVector::digit(std::size_t flat, std::size_t i) const {
  return (flat / strides_.at(i)) % dims_.at(i);
}

StateVector StateVector::tensor(const StateVector& other) const {
  std::vector<std::size_t> dims = dims_;
  dims.insert(dims.end(), other.dims_.begin(), other.dims_.end());
  Vector amps(amps_.size() * other.amps_.size());
  for (Eigen::Index a = 0; a < amps_.size(); ++a) {
    for (Eigen::Index b = 0; b < other.amps_.size(); ++b) {
      amps(a * other.amps_.size() + b) = amps_(a) * other.amps_(b);
    }
  }
  return StateVector(std::move(dims), std::move(amps));
}

StateVector StateVector::permuted(const std::vector<std::size_t>& perm) const {
  if (perm.size() != dims_.size()) throw std::invalid_argument("permutation size mismatch");
  std::vector<std::size_t> dims(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) dims[i] = dims_.at(perm[i]);
  std::vector<std::size_t> new_strides(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;) new_strides[i - 1] = new_strides[i] * dims[i];
  Vector amps(amps_.size());
  std::size_t total = total_dim();
  for (std::size_t old = 0; old < total; ++old) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      idx += digit(old, perm[i]) * new_strides[i];
    }
    amps(static_cast<Eigen::Index>(idx)) = amps_(static_cast<Eigen::Index>(old));
  }
  return StateVector(std::move(dims), std::move(amps));
}

bool LocalOperator::is_unitary(double tol) const {
  Matrix d = mat.adjoint() * mat - Matrix::Identity(mat.rows(), mat.cols());
  return d.cwiseAbs().maxCoeff() <= tol;
}

StateVector LocalOperator::apply(const StateVector& state) const {
  check_targets(state, targets);
  std::size_t block = 1;
  for (std::size_t t : targets) block *= state.dim(t);
  if (static_cast<std::size_t>(mat.rows()) != block ||
      static_cast<std::size_t>(mat.cols()) != block) {
    throw std::invalid_argument("operator matrix size does not match target dims");
  }

  // Flat-index offsets for each assignment of the target digits.
  std::vector<std::size_t> offsets(block, 0);
  for (std::size_t combo = 0; combo < block; ++combo) {
    std::size_t rem = combo;
    std::size_t off = 0;
    for (std::size_t k = targets.size(); k-- > 0;) {
      std::size_t d = state.dim(targets[k]);
      off += (rem % d) * state.stride(targets[k]);
      rem /= d;
    }
    offsets[combo] = off;
  }

  StateVector out = state;
  Vector scratch(static_cast<Eigen::Index>(block));
  std::size_t total = state.total_dim();
  for (std::size_t base = 0; base < total; ++base) {
    bool rest_base = true;
    for (std::size_t t : targets) {
      if (state.digit(base, t) != 0) { rest_base = false; break; }
    }
    if (!rest_base) continue;
    for (std::size_t c = 0; c < block; ++c) {
      scratch(static_cast<Eigen::Index>(c)) = state.amps()(static_cast<Eigen::Index>(base + offsets[c]));
    }
    Vector res = mat * scratch;
    for (std::size_t c = 0; c < block; ++c) {
      out.amps_(static_cast<Eigen::Index>(base + offsets[c])) = res(static_cast<Eigen::Index>(c));
    }
  }
  double n = out.amps_.norm();
  if (n > 1e-300) out.amps_ /= (is_unitary() ? n : 1.0);
  return out;
}

StateVector make_state(std::vector<std::size_t> dims, const Vector& amps) {
  return StateVector(std::move(dims), amps);
}

StateVector apply(const StateVector& state, const LocalOperator& op) {
  return op.apply(state);
}

bool MeasurementBasis::is_orthonormal(double tol) const {
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    for (std::size_t j = 0; j < vectors.size(); ++j) {
      cxd g = vectors[i].dot(vectors[j]);
      cxd expect = (i == j) ? cxd{1.0, 0.0} : cxd{0.0, 0.0};
      if (std::abs(g - expect) > tol) return false;
    }
  }
  return true;
}

bool Povm::is_valid(double tol) const {
  if (elements.empty()) return false;
  Matrix sum = Matrix::Zero(elements[0].rows(), elements[0].cols());
  for (const Matrix& e : elements) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(e);
    if (es.eigenvalues().minCoeff() < -1e-10) return false;
    sum += e;
  }
  Matrix d = sum - Matrix::Identity(sum.rows(), sum.cols());
  return d.cwiseAbs().maxCoeff() <= tol;
}

StateVector project_and_drop(const StateVector& state, std::size_t target,
                             const Vector& vec, double* prob_out) {
  check_targets(state, {target});
  std::size_t d = state.dim(target);
  if (static_cast<std::size_t>(vec.size()) != d) {
    throw std::invalid_argument("projection vector length mismatch");
  }
  std::vector<std::size_t> rest_dims;
  for (std::size_t i = 0; i < state.num_subsystems(); ++i) {
    if (i != target) rest_dims.push_back(state.dim(i));
  }
  std::size_t rest_total = state.total_dim() / d;
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(rest_total));
  std::size_t total = state.total_dim();
  std::size_t tstride = state.stride(target);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t td = (flat / tstride) % d;
    // flat index with target digit removed
    std::size_t hi = flat / (tstride * d);
    std::size_t lo = flat % tstride;
    std::size_t rest = hi * tstride + lo;
    amps(static_cast<Eigen::Index>(rest)) +=
        std::conj(vec(static_cast<Eigen::Index>(td))) * state.amp(flat);
  }
  double p = amps.squaredNorm();
  if (prob_out) *prob_out = p;
  if (rest_dims.empty()) {
    // Keep a trivial 2-level placeholder so callers always get a state.
    rest_dims.push_back(2);
    Vector a2 = Vector::Zero(2);
    a2(0) = (p > kProbFloor) ? amps(0) : cxd{1.0, 0.0};
    StateVector out(rest_dims, a2);
    return out;
  }
  if (p <= kProbFloor) {
    StateVector out = StateVector::computational(rest_dims, std::vector<std::size_t>(rest_dims.size(), 0));
    return out;
  }
  return StateVector(std::move(rest_dims), std::move(amps));
}

std::vector<Branch> enumerate_branches(const StateVector& state,
                                       const MeasurementBasis& basis,
                                       bool discard) {
  std::vector<Branch> branches;
  double total_p = 0.0;
  for (std::size_t j = 0; j < basis.vectors.size(); ++j) {
    Branch br;
    br.outcome = static_cast<int>(j);
    double p = 0.0;
    if (discard) {
      br.state = project_and_drop(state, basis.target, basis.vectors[j], &p);
    } else {
      // Collapse in place: (|v><v| (x) I)|psi>, renormalized when live.
      Matrix proj = basis.vectors[j] * basis.vectors[j].adjoint();
      StateVector projected = LocalOperator{{basis.target}, proj}.apply(state);
      p = projected.amps().squaredNorm();
      br.state = (p > kProbFloor)
                     ? StateVector(state.dims(), Vector(projected.amps() / std::sqrt(p)))
                     : state;
    }
    br.probability = (p > kProbFloor) ? p : 0.0;
    br.zero_prob = (p <= kProbFloor);
    total_p += p;
    branches.push_back(std::move(br));
  }
  if (total_p < kProbFloor) throw std::runtime_error("numerically invalid state: all outcomes have zero probability");
  return branches;
}

std::vector<Branch> enumerate_branches(const StateVector& state, const Povm& povm) {
  std::vector<Branch> branches;
  double total_p = 0.0;
  for (std::size_t j = 0; j < povm.elements.size(); ++j) {
    Matrix root = psd_sqrt(povm.elements[j]);
    LocalOperator op{{povm.target}, root};
    StateVector collapsed = op.apply(state);  // E^{1/2}|psi>, unnormalized
    double p = collapsed.amps().squaredNorm();
    if (p > kProbFloor) {
      collapsed = StateVector(collapsed.dims(), collapsed.amps() / std::sqrt(p));
    }
    Branch br;
    br.outcome = static_cast<int>(j);
    br.probability = (p > kProbFloor) ? p : 0.0;
    br.zero_prob = (p <= kProbFloor);
    br.state = collapsed;
    total_p += br.probability;
    branches.push_back(std::move(br));
  }
  if (total_p < kProbFloor) throw std::runtime_error("numerically invalid state: all outcomes have zero probability");
  return branches;
}

std::vector<Branch> enumerate_branches(const StateVector& state,
                                       const ProjectiveMeasurement& meas) {
  std::vector<Branch> branches;
  double total_p = 0.0;
  for (std::size_t j = 0; j < meas.subspaces.size(); ++j) {
    // P = sum |v><v| over the subspace basis.
    std::size_t d = state.dim(meas.target);
    Matrix proj = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (const Vector& v : meas.subspaces[j]) proj += v * v.adjoint();
    LocalOperator op{{meas.target}, proj};
    StateVector projected = op.apply(state);
    double p = projected.amps().squaredNorm();
    // op.apply leaves non-unitary results unnormalized
    Branch br;
    br.outcome = static_cast<int>(j);
    br.probability = (p > kProbFloor) ? p : 0.0;
    br.zero_prob = (p <= kProbFloor);
    if (p > kProbFloor) {
      Vector a = projected.amps() / std::sqrt(p);
      br.state = StateVector(state.dims(), a);
    } else {
      br.state = state;
    }
    total_p += br.probability;
    branches.push_back(std::move(br));
  }
  if (total_p < kProbFloor) throw std::runtime_error("numerically invalid state: all outcomes have zero probability");
  return branches;
}

namespace {

template <typename Branches>
Branch sample_from(Branches&& branches, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double r = unif(rng);
  double acc = 0.0;
  for (auto& br : branches) {
    acc += br.probability;
    if (r < acc && !br.zero_prob) return br;
  }
  for (auto it = branches.rbegin(); it != branches.rend(); ++it) {
    if (!it->zero_prob) return *it;
  }
  throw std::runtime_error("numerically invalid state: all outcomes have zero probability");
}

}  // namespace

Branch measure(const StateVector& state, const MeasurementBasis& basis,
               std::mt19937_64& rng, bool discard) {
  return sample_from(enumerate_branches(state, basis, discard), rng);
}

Branch measure(const StateVector& state, const Povm& povm, std::mt19937_64& rng) {
  return sample_from(enumerate_branches(state, povm), rng);
}

DensityMatrix partial_trace(const StateVector& state,
                            const std::vector<std::size_t>& keep) {
  if (keep.empty()) throw std::invalid_argument("keep set must be nonempty");
  check_targets(state, keep);
  std::size_t dkeep = 1;
  for (std::size_t k : keep) dkeep *= state.dim(k);
  std::size_t drest = state.total_dim() / dkeep;
  // Reshape psi into a (keep x rest) matrix A; rho = A A^dag.
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(dkeep), static_cast<Eigen::Index>(drest));
  std::vector<bool> kept(state.num_subsystems(), false);
  for (std::size_t k : keep) kept[k] = true;
  std::size_t total = state.total_dim();
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t ki = 0, ri = 0;
    for (std::size_t k : keep) ki = ki * state.dim(k) + state.digit(flat, k);
    for (std::size_t i = 0; i < state.num_subsystems(); ++i) {
      if (!kept[i]) ri = ri * state.dim(i) + state.digit(flat, i);
    }
    a(static_cast<Eigen::Index>(ki), static_cast<Eigen::Index>(ri)) = state.amp(flat);
  }
  DensityMatrix rho;
  for (std::size_t k : keep) rho.dims.push_back(state.dim(k));
  rho.mat = a * a.adjoint();
  return rho;
}

DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<std::size_t>& keep) {
  if (keep.empty()) throw std::invalid_argument("keep set must be nonempty");
  std::size_t n = rho.dims.size();
  for (std::size_t k : keep) {
    if (k >= n) throw std::out_of_range("target subsystem not found");
  }
  std::vector<std::size_t> strides(n, 1);
  for (std::size_t i = n; i-- > 1;) strides[i - 1] = strides[i] * rho.dims[i];
  std::vector<bool> kept(n, false);
  for (std::size_t k : keep) kept[k] = true;
  std::size_t dkeep = 1;
  for (std::size_t k : keep) dkeep *= rho.dims[k];
  DensityMatrix out;
  for (std::size_t k : keep) out.dims.push_back(rho.dims[k]);
  out.mat = Matrix::Zero(static_cast<Eigen::Index>(dkeep), static_cast<Eigen::Index>(dkeep));
  std::size_t total = rho.total_dim();
  auto keep_index = [&](std::size_t flat) {
    std::size_t ki = 0;
    for (std::size_t k : keep) ki = ki * rho.dims[k] + (flat / strides[k]) % rho.dims[k];
    return ki;
  };
  auto rest_index = [&](std::size_t flat) {
    std::size_t ri = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!kept[i]) ri = ri * rho.dims[i] + (flat / strides[i]) % rho.dims[i];
    }
    return ri;
  };
  for (std::size_t r = 0; r < total; ++r) {
    for (std::size_t c = 0; c < total; ++c) {
      if (rest_index(r) != rest_index(c)) continue;
      out.mat(static_cast<Eigen::Index>(keep_index(r)), static_cast<Eigen::Index>(keep_index(c))) +=
          rho.mat(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  }
  return out;
}

double fidelity(const StateVector& a, const StateVector& b) {
  if (a.dims() != b.dims()) throw std::invalid_argument("dimension mismatch");
  return std::norm(a.amps().dot(b.amps()));
}

double fidelity(const DensityMatrix& rho, const StateVector& b) {
  if (rho.dims != b.dims()) throw std::invalid_argument("dimension mismatch");
  return std::real(b.amps().dot(rho.mat * b.amps()));
}

bool equal_up_to_global_phase(const StateVector& a, const StateVector& b, double tol) {
  return overlap_abs(a, b) >= 1.0 - tol;
}

double overlap_abs(const StateVector& a, const StateVector& b) {
  if (a.dims() != b.dims()) throw std::invalid_argument("dimension mismatch");
  return std::abs(a.amps().dot(b.amps()));
}

double entanglement_entropy(const StateVector& state,
                            const std::vector<std::size_t>& keep) {
  DensityMatrix rho = partial_trace(state, keep);
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.mat);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    double lam = es.eigenvalues()(i);
    if (lam > 1e-15) s -= lam * std::log2(lam);
  }
  return s;
}

Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  Eigen::VectorXd vals = es.eigenvalues();
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    vals(i) = (vals(i) > 0.0) ? std::sqrt(vals(i)) : 0.0;
  }
  return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace qbcast
