#pragma once

#include <array>
#include <map>

#include "qbcast/protocol.hpp"

namespace qbcast {

// Basic broadcast: one sender distributes alpha e^{i theta}|0> + beta e^{-i theta}|1>
// to every receiver. Branch metrics: "fidelity" (overlap with the target product
// state), "match" (global-phase-free equality, 0/1).
struct BbpParams {
  cxd alpha;
  cxd beta;
  double theta = 0.0;
  std::size_t num_receivers = 2;
};
ProtocolResult run_bbp(const BbpParams& p, Mode mode, std::uint64_t seed = 0);

// Rotated-basis variant: the broadcast acts in the T-basis {T|0>, T|1>} of an
// arbitrary input qubit state psi. Extra metric "template_match" checks the
// tripartite pre-measurement state.
struct BbpRotatedParams {
  Matrix t_gate;  // 2x2 unitary
  Vector psi;     // input qubit state, unit norm
  double theta = 0.0;
};
ProtocolResult run_bbp_rotated(const BbpRotatedParams& p, Mode mode,
                               std::uint64_t seed = 0);

// M senders with individual angles; every sender measures, only active ones
// apply their phase gate. Corrected target uses the sum of active angles.
struct MultisenderParams {
  std::size_t num_senders = 2;
  std::size_t num_receivers = 2;
  cxd alpha;
  cxd beta;
  std::vector<double> thetas;  // one per sender
  std::vector<bool> active;    // empty = all active
};
ProtocolResult run_multisender(const MultisenderParams& p, Mode mode,
                               std::uint64_t seed = 0);

// Extend a broadcast template by one sender using a maximally entangled qudit
// pair; metric "fidelity" compares against the (M+1)-sender template.
struct AddSenderParams {
  std::size_t num_senders = 1;
  std::size_t num_receivers = 2;
  cxd alpha;
  cxd beta;
};
ProtocolResult add_sender(const AddSenderParams& p, Mode mode, std::uint64_t seed = 0);

// Remove a sender: she measures her qudit in the Fourier basis and the
// receivers correct. Metric "fidelity" compares against the (M-1)-sender
// template (or, with one sender, the bare receiver product state).
struct DeleteSenderParams {
  std::size_t num_senders = 2;
  std::size_t num_receivers = 2;
  cxd alpha;
  cxd beta;
  std::size_t which = 0;  // sender index to delete
};
ProtocolResult delete_sender(const DeleteSenderParams& p, Mode mode,
                             std::uint64_t seed = 0);

// Add a sender and immediately delete it again; "fidelity" compares against
// the original M-sender template on every branch.
ProtocolResult run_add_delete_roundtrip(const AddSenderParams& p, Mode mode,
                                        std::uint64_t seed = 0);

// Angle restricted to 2 pi k / K, encoded in a K-level qudit d that survives
// the protocol. Metrics: "fidelity" (joint receivers + d vs target),
// "d_fidelity" (reduced state of d vs its input). `uses` > 1 repeats the
// protocol with fresh receiver blocks against the same d.
struct PhaseRestrictedParams {
  std::size_t k = 0;
  std::size_t cap = 3;  // K
  std::size_t num_receivers = 2;
  cxd alpha;
  cxd beta;
  std::size_t uses = 1;
};
ProtocolResult send_phase_restricted(const PhaseRestrictedParams& p, Mode mode,
                                     std::uint64_t seed = 0);

// General angle theta with a K-level encoding state, two receivers.
//   Destructive: computational measurement of d; success iff outcome >= 2.
//   Projector:   binary {low two levels | rest} measurement; on a second use
//                the split moves to {low four | rest}.
//   Approximate: d is never measured; see phase_approx_outputs.
// Metrics: "success" (0/1 where applicable), "fidelity" (receiver product
// state vs alpha|0> + beta e^{-i theta}|1> per qubit, on success branches).
enum class PhaseVariant { Destructive, Projector, Approximate };
struct PhaseGeneralParams {
  double theta = 0.0;
  std::size_t cap = 8;  // K >= 3 (>= 5 for a projector second use)
  cxd alpha;
  cxd beta;
  PhaseVariant variant = PhaseVariant::Destructive;
  std::size_t uses = 1;
};
ProtocolResult send_phase_general(const PhaseGeneralParams& p, Mode mode,
                                  std::uint64_t seed = 0);

// Density-matrix outputs of the approximate variant (branch-independent).
struct PhaseApproxOutputs {
  DensityMatrix rho_b;       // one receiver qubit
  DensityMatrix rho_d;       // encoding qudit after one use
  double fidelity_d = 0.0;   // vs the input encoding state
  std::optional<DensityMatrix> rho_pair;  // b c b' c' after a second use
};
PhaseApproxOutputs phase_approx_outputs(const PhaseGeneralParams& p);

// Closed-form fidelity of the encoding state after one approximate use:
// 1 - 4|beta|^2 (1 - cos K theta) (K - 2 + |alpha|^2) / K^2.
double phase_fidelity_closed_form(cxd alpha, cxd beta, double theta, std::size_t cap);

// Trine label -> broadcast angle (e^{i theta}|0> + e^{-i theta}|1>)/sqrt(2).
double trine_angle(int label);

// Authentication: per round a random trine state is broadcast and every
// receiver applies the anti-trine POVM; an outcome equal to the sent label is
// impossible, so matching sequences authenticate the sender.
struct AuthParams {
  std::size_t rounds = 100;
  std::size_t num_receivers = 2;
  std::uint64_t seed = 0;
};
struct AuthReport {
  std::vector<int> sent;                   // per-round trine label
  std::vector<std::vector<int>> received;  // [receiver][round]
  bool never_matched = true;               // no receiver ever saw the sent label
  double pair_agreement_rate = 0.0;        // receivers 0 and 1
};
AuthReport run_authentication(const AuthParams& p);

// Exact per-round outcome distribution for two receivers given the sent label.
struct AuthDistribution {
  std::array<double, 3> single{};                 // one receiver's outcome
  std::array<std::array<double, 3>, 3> joint{};   // two receivers jointly
};
AuthDistribution auth_round_distribution(int sent_label);

// Three-state QKD over broadcast: Alice announces a label she did not send;
// each Bob who can rule out a second label infers the third and both map the
// hop sent->announced to a key bit.
enum class QkdStrategy { Projective, Povm };
struct QkdParams {
  std::size_t rounds = 1000;
  std::size_t num_receivers = 1;
  QkdStrategy strategy = QkdStrategy::Povm;
  std::uint64_t seed = 0;
};
struct QkdReport {
  std::size_t rounds = 0;
  std::vector<std::vector<int>> alice_keys;  // per Bob
  std::vector<std::vector<int>> bob_keys;    // per Bob
  std::vector<std::size_t> sifted;           // per Bob
  std::size_t disagreements = 0;
};
QkdReport run_qkd_pbc(const QkdParams& p);

// Key bit for a (sent, announced) pair: 0 for announced = sent+1 mod 3,
// 1 for announced = sent+2 mod 3, -1 otherwise.
int qkd_bit_from_hop(int sent, int announced);

// Broadcast with an entangling diagonal gate on the receiver block; the
// corrections commute with the entangler. Abort mode switches the senders to
// computational measurements and records the leftover receiver state.
struct GraphDistPhaseParams {
  BroadcastSpec spec;          // must carry an entangler
  std::vector<double> thetas;  // one per sender
  bool abort = false;
};
ProtocolResult run_graph_dist_phase(const GraphDistPhaseParams& p, Mode mode,
                                    std::uint64_t seed = 0);

// Distribute the joint +1 eigenstate of commuting independent Pauli
// generators via control qubits. Non-abort metrics: "stab_min" (smallest
// generator expectation after correction), "fidelity". Abort metric:
// "max_entropy" over all receiver bipartitions.
struct StabilizerBroadcastParams {
  std::vector<PauliString> generators;
  bool abort = false;
};
ProtocolResult run_stabilizer_broadcast(const StabilizerBroadcastParams& p, Mode mode,
                                        std::uint64_t seed = 0);

// Teleport diagonal Z-rotations onto vertices of an already distributed graph
// state via CZ-coupled ancillas measured in rotated X bases. Metrics:
// "decorated_match" (pre-correction, with Z^s byproducts), "fidelity".
struct TeleportPhaseParams {
  Graph graph;
  std::map<std::size_t, double> angles;  // vertex -> theta
};
ProtocolResult teleport_phase_gate(const TeleportPhaseParams& p, Mode mode,
                                   std::uint64_t seed = 0);

// Distribute a graph state while disconnecting the vertices outside `keep`:
// kept controls are X-measured, the rest Z-measured; receivers end with the
// reduced graph state next to computational leftovers. Metric: "fidelity".
struct GraphReductionParams {
  Graph graph;
  std::vector<std::size_t> keep;
};
ProtocolResult run_graph_reduction(const GraphReductionParams& p, Mode mode,
                                   std::uint64_t seed = 0);

// GHZ distribution. Star: broadcast the star graph state, Hadamard every
// leaf. Ring: receivers hold odd sites of a 2n-ring graph state, the sender
// X-measures the even sites. Metrics: "fidelity" to GHZ, "stab_min".
ProtocolResult run_ghz_star(std::size_t num_leaves, Mode mode, std::uint64_t seed = 0);
ProtocolResult run_ghz_ring(std::size_t n, Mode mode, std::uint64_t seed = 0);

}  // namespace qbcast
