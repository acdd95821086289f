#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qbcast/tensor.hpp"

namespace qbcast {

/// Diagonal phase gate on `arity` qubits, built from (qubit subset, phase)
/// entries: each entry multiplies the amplitude of every computational basis
/// state whose subset bits are all 1 by its phase. CZ products, CCZ and
/// general multi-qubit phase gates share this representation.
class DiagonalPhaseGate {
 public:
  explicit DiagonalPhaseGate(std::size_t arity);

  static DiagonalPhaseGate identity(std::size_t arity);
  /// Product of CZ gates over the given qubit pairs.
  static DiagonalPhaseGate cz_product(std::size_t arity,
                                      const std::vector<std::pair<std::size_t, std::size_t>>& edges);
  /// Single CCZ on three qubits.
  static DiagonalPhaseGate ccz(std::size_t arity, std::size_t a, std::size_t b, std::size_t c);

  DiagonalPhaseGate& add_entry(const std::vector<std::size_t>& subset, cxd phase);

  std::size_t arity() const { return arity_; }
  const Vector& diagonal() const { return diag_; }
  /// Diagonal entry for the n-bit computational index x.
  cxd entry(std::size_t x) const { return diag_(static_cast<Eigen::Index>(x)); }
  bool is_identity() const;

  /// As a LocalOperator over the given qubit subsystem indices.
  LocalOperator as_operator(const std::vector<std::size_t>& targets) const;

 private:
  std::size_t arity_;
  Vector diag_;
};

/// Undirected graph; vertices 0..n-1, no self loops.
struct Graph {
  std::size_t num_vertices = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  void validate() const;
  std::vector<std::size_t> neighbors(std::size_t v) const;
  bool has_edge(std::size_t u, std::size_t v) const;
};

/// Signed Pauli string. Phase is tracked as a power of i so products of
/// strings stay closed; stabilizer use requires the phase to be real.
class PauliString {
 public:
  PauliString() = default;
  PauliString(int sign, std::string letters);
  /// Parse "+XZI" / "-YXZ" style text.
  static PauliString parse(const std::string& text);

  std::size_t num_qubits() const { return letters_.size(); }
  char letter(std::size_t i) const { return letters_.at(i); }
  const std::string& letters() const { return letters_; }
  int sign() const;
  int phase_power() const { return phase_i_; }

  PauliString operator*(const PauliString& other) const;
  bool commutes_with(const PauliString& other) const;
  bool is_identity() const;
  std::size_t weight() const;

  /// Dense matrix over all qubits (2^n).
  Matrix matrix() const;
  /// X/Z symplectic bit rows (x|z), one bit per qubit.
  std::pair<std::vector<int>, std::vector<int>> symplectic() const;

  std::string str() const;

 private:
  int phase_i_ = 0;  // overall phase i^phase_i_
  std::string letters_;
};

/// The three trine states and their orthogonal anti-trine partners.
struct TrineSet {
  std::vector<Vector> trine;
  std::vector<Vector> anti_trine;
};

// Single-qubit constants.
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
Matrix hadamard();
Vector ket0();
Vector ket1();
Vector ket_plus();
Vector ket_minus();

/// Discrete Fourier basis in dimension D: u_n[k] = e^{2 pi i nk/D}/sqrt(D).
MeasurementBasis fourier_basis(std::size_t d, std::size_t target = 0);

/// Computational basis on a d-level subsystem.
MeasurementBasis computational_basis(std::size_t d, std::size_t target = 0);

/// X basis {|+>, |->} on a qubit.
MeasurementBasis x_basis(std::size_t target = 0);

/// Rotated X-type basis {e^{-i theta X}|0>, e^{-i theta X}|1>}.
MeasurementBasis rotated_x_basis(double theta, std::size_t target = 0);

/// Sender phase gate on an (N+1)-level qudit: diag entries e^{i(2k-N)theta}.
LocalOperator sender_phase_gate(std::size_t d, std::size_t n, double theta,
                                std::size_t target = 0);

/// Receiver correction for broadcast measurements: on a qubit,
/// diag(e^{2 pi i s/(N+1)}, 1) with s the senders' outcome sum and d = N+1.
LocalOperator correction_gate(std::size_t modulus, long outcome_sum,
                              std::size_t target = 0);

/// Controlled modular shift |k>|l> -> |k>|l + dir*k mod tgt_dim>.
LocalOperator controlled_shift(std::size_t ctrl_dim, std::size_t tgt_dim,
                               int direction, std::size_t ctrl = 0,
                               std::size_t tgt = 1);

/// Dicke state |k; N-k>: symmetric N-qubit state with k qubits in |0>.
StateVector dicke_state(std::size_t n, std::size_t k);

/// Broadcast template over M senders and N receivers.
struct BroadcastSpec {
  std::size_t num_senders = 1;    // M >= 0
  std::size_t num_receivers = 1;  // N >= 1
  cxd alpha;
  cxd beta;
  std::optional<DiagonalPhaseGate> entangler;  // applied to the receiver block

  void validate() const;
  std::size_t sender_dim() const { return num_receivers + 1; }
};

/// |Psi^{(M,N)}> = sum_k alpha^k beta^{N-k} sqrt(C(N,k)) |k>^M (entangler)|k;N-k>.
/// Subsystem order: M sender qudits then N receiver qubits.
StateVector make_broadcast_state(const BroadcastSpec& spec);

/// U_CZ |+>^n for the graph's edge set.
StateVector graph_state(const Graph& g);

/// Graph-state stabilizer K_v = X_v prod_{<u,v>} Z_u.
PauliString graph_stabilizer(const Graph& g, std::size_t v);

TrineSet trine_states();

/// Anti-trine POVM with elements (2/3)|anti_j><anti_j|.
Povm anti_trine_povm(std::size_t target = 0);

/// The 10-vertex brickwork block. Vertices 0..9 map to the two rows
/// (0..4 top, 5..9 bottom); inputs {0,5}, outputs {4,9}.
struct BrickworkBlock {
  Graph graph;
  std::vector<std::size_t> inputs;
  std::vector<std::size_t> outputs;
};
BrickworkBlock brickwork_block();

double binomial(std::size_t n, std::size_t k);

}  // namespace qbcast
