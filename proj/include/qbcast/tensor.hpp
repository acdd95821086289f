#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qbcast {

using cxd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Tolerance for single algebraic identities (unitarity, norms, Gram matrices).
inline constexpr double kAlgebraTol = 1e-12;
// Tolerance for chained-operation checks (multi-step protocol outputs).
inline constexpr double kChainTol = 1e-10;
// Probabilities below this are treated as exactly zero.
inline constexpr double kProbFloor = 1e-14;
// Hard cap on register size: product of dims <= 2^22.
inline constexpr std::size_t kMaxAmplitudes = std::size_t{1} << 22;

/// Dense statevector over an ordered list of subsystems with per-subsystem
/// dimension. Amplitude indexing is mixed-radix with subsystem 0 the most
/// significant digit. Unit 2-norm after every public operation.
class StateVector {
 public:
  StateVector(std::vector<std::size_t> dims, Vector amps);

  /// Computational basis state |digits[0], digits[1], ...>.
  static StateVector computational(std::vector<std::size_t> dims,
                                   const std::vector<std::size_t>& digits);

  /// Tensor product of per-subsystem local vectors (each normalized here).
  static StateVector product(std::vector<std::size_t> dims,
                             const std::vector<Vector>& locals);

  std::size_t num_subsystems() const { return dims_.size(); }
  std::size_t dim(std::size_t i) const { return dims_.at(i); }
  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t total_dim() const { return static_cast<std::size_t>(amps_.size()); }
  const Vector& amps() const { return amps_; }
  cxd amp(std::size_t flat) const { return amps_(static_cast<Eigen::Index>(flat)); }

  /// Stride (in flat index units) of subsystem i.
  std::size_t stride(std::size_t i) const;
  /// Digit of subsystem i in flat index.
  std::size_t digit(std::size_t flat, std::size_t i) const;

  /// Tensor product of two registers, this register first.
  StateVector tensor(const StateVector& other) const;

  /// New state with subsystems reordered: new subsystem i is old perm[i].
  StateVector permuted(const std::vector<std::size_t>& perm) const;

 public:
  /// Empty placeholder; every factory/public operation yields a valid state.
  StateVector() = default;

 private:
  friend class LocalOperator;
  friend StateVector project_and_drop(const StateVector&, std::size_t,
                                      const Vector&, double*);
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> strides_;
  Vector amps_;
  void init_strides();
  void normalize();
};

/// Dense Hermitian matrix over retained subsystems.
struct DensityMatrix {
  std::vector<std::size_t> dims;
  Matrix mat;

  std::size_t total_dim() const { return static_cast<std::size_t>(mat.rows()); }
};

/// Operator acting on an ordered subset of subsystems.
struct LocalOperator {
  std::vector<std::size_t> targets;
  Matrix mat;

  bool is_unitary(double tol = kAlgebraTol) const;
  /// Apply to a state; targets must exist and sizes match.
  StateVector apply(const StateVector& state) const;
};

/// Orthonormal measurement basis on a single subsystem.
struct MeasurementBasis {
  std::size_t target = 0;
  std::vector<Vector> vectors;

  std::size_t arity() const { return vectors.size(); }
  bool is_orthonormal(double tol = kAlgebraTol) const;
};

/// POVM on a single subsystem: positive elements summing to identity.
struct Povm {
  std::size_t target = 0;
  std::vector<Matrix> elements;

  bool is_valid(double tol = kAlgebraTol) const;
};

/// Projective measurement on a single subsystem given by a partition of the
/// local space into orthogonal subspaces (each a list of orthonormal vectors).
struct ProjectiveMeasurement {
  std::size_t target = 0;
  std::vector<std::vector<Vector>> subspaces;
};

struct Branch {
  int outcome = 0;
  double probability = 0.0;
  bool zero_prob = false;
  StateVector state;
};

StateVector make_state(std::vector<std::size_t> dims, const Vector& amps);
StateVector apply(const StateVector& state, const LocalOperator& op);

/// All outcome branches of a basis measurement. If `discard` the measured
/// subsystem is removed from each branch state, otherwise it is left
/// collapsed onto the outcome vector. Zero-probability branches are retained
/// and flagged; their states are placeholders.
std::vector<Branch> enumerate_branches(const StateVector& state,
                                       const MeasurementBasis& basis,
                                       bool discard = false);
std::vector<Branch> enumerate_branches(const StateVector& state,
                                       const Povm& povm);
std::vector<Branch> enumerate_branches(const StateVector& state,
                                       const ProjectiveMeasurement& meas);

/// Sample one branch with Born probabilities; deterministic given the rng.
Branch measure(const StateVector& state, const MeasurementBasis& basis,
               std::mt19937_64& rng, bool discard = false);
Branch measure(const StateVector& state, const Povm& povm,
               std::mt19937_64& rng);

DensityMatrix partial_trace(const StateVector& state,
                            const std::vector<std::size_t>& keep);
DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<std::size_t>& keep);

double fidelity(const StateVector& a, const StateVector& b);
double fidelity(const DensityMatrix& rho, const StateVector& b);

bool equal_up_to_global_phase(const StateVector& a, const StateVector& b,
                              double tol = kChainTol);

/// Overlap magnitude |<a|b>|.
double overlap_abs(const StateVector& a, const StateVector& b);

/// Von Neumann entropy (base 2) of the reduced state on `keep`.
double entanglement_entropy(const StateVector& state,
                            const std::vector<std::size_t>& keep);

/// Principal square root of a positive semidefinite matrix.
Matrix psd_sqrt(const Matrix& m);

/// Project subsystem `target` onto `vec` and remove it. If `prob_out` is
/// non-null it receives the squared norm before renormalization; a zero
/// projection yields an all-zero placeholder state.
StateVector project_and_drop(const StateVector& state, std::size_t target,
                             const Vector& vec, double* prob_out = nullptr);

}  // namespace qbcast
