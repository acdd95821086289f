#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qbcast/library.hpp"
#include "qbcast/tensor.hpp"

namespace qbcast {

enum class Mode { Enumerate, Sample };

enum class Role { Sender, Receiver, PhaseProvider };

struct Party {
  std::string name;
  Role role = Role::Sender;
};

/// One logged protocol event. Operations and measurements carry the acting
/// party and the touched subsystems; messages carry sender/recipient and an
/// integer payload. `depends_on` lists sequence numbers of earlier messages
/// a classically-controlled operation was conditioned on.
struct Event {
  enum class Kind { Operation, Measurement, Message, Note };
  Kind kind = Kind::Note;
  int seq = 0;
  std::string party;
  std::string description;
  std::vector<std::string> subsystems;
  int outcome = -1;
  double probability = 1.0;
  std::string msg_from, msg_to;
  std::vector<long> payload;
  std::vector<int> depends_on;
};

struct BranchReport {
  std::vector<int> outcomes;
  double probability = 0.0;
  bool zero_prob = false;
  std::optional<StateVector> final_state;
  std::map<std::string, double> metrics;
  std::vector<Event> events;
};

struct ProtocolResult {
  std::string name;
  Mode mode = Mode::Enumerate;
  std::vector<BranchReport> branches;

  double total_probability() const;
  /// Minimum over nonzero branches of the named metric.
  double min_metric(const std::string& key) const;
  double max_metric(const std::string& key) const;
  /// Probability-weighted sum of a 0/1 metric.
  double metric_probability(const std::string& key) const;
};

/// Execution context for one protocol branch. Tracks the register (labels,
/// dims, owners), the live state, the event log and the running branch
/// probability. Measurement outcomes are either sampled or forced by the
/// enumeration driver.
class Context {
 public:
  Context();

  void add_party(const std::string& name, Role role);

  /// Append a subsystem in the given local state, owned by `party`.
  void add_subsystem(const std::string& label, std::size_t dim,
                     const std::string& party, const Vector& local);
  /// Append a whole register block (entangled), assigning labels/owners.
  void set_state(StateVector state, const std::vector<std::string>& labels,
                 const std::vector<std::string>& owners);
  /// Append an entangled block to the existing register.
  void append_block(const StateVector& block, const std::vector<std::string>& labels,
                    const std::vector<std::string>& owners);

  const StateVector& state() const;
  std::size_t index_of(const std::string& label) const;
  bool has_subsystem(const std::string& label) const;
  std::size_t dim_of(const std::string& label) const;
  double branch_probability() const { return prob_; }
  bool dead() const { return dead_; }
  const std::vector<Event>& events() const { return events_; }

  /// Local unitary/projector applied by a party to its own subsystems.
  void apply_op(const std::string& party, const std::vector<std::string>& labels,
                const Matrix& mat, const std::string& description,
                const std::vector<int>& depends_on = {});

  /// Measure one subsystem in a basis. The measured subsystem is discarded
  /// when `discard` is set. Returns the outcome.
  int measure_in(const std::string& party, const std::string& label,
                 const MeasurementBasis& basis, const std::string& description,
                 bool discard = true);
  int measure_povm(const std::string& party, const std::string& label,
                   const Povm& povm, const std::string& description);
  int measure_projective(const std::string& party, const std::string& label,
                         const ProjectiveMeasurement& meas,
                         const std::string& description);

  /// Broadcast a classical payload; returns the message sequence number.
  int broadcast(const std::string& from, const std::vector<long>& payload,
                const std::string& description);
  int send(const std::string& from, const std::string& to,
           const std::vector<long>& payload, const std::string& description);

  void note(const std::string& text);

  /// Hand a subsystem to a new owner (qubit distribution).
  void transfer(const std::string& label, const std::string& to);

  /// State restricted to the given labels; requires the complement to have
  /// been measured out already (i.e. these are all remaining subsystems in
  /// this order up to permutation).
  StateVector state_of(const std::vector<std::string>& labels) const;

  // Outcome selection plumbing (used by the drivers below).
  struct Selector {
    const std::vector<int>* forced = nullptr;
    std::vector<int>* chosen = nullptr;
    std::vector<int>* arities = nullptr;
    bool sampling = false;
    std::uint64_t master_seed = 0;
  };
  Selector selector;

 private:
  int next_outcome(const std::string& party, const std::vector<double>& probs,
                   bool* zero_flag);
  void check_ownership(const std::string& party, const std::vector<std::string>& labels) const;

  std::map<std::string, Role> parties_;
  std::map<std::string, std::mt19937_64> rngs_;  // per-party sampling streams
  std::vector<std::string> labels_;
  std::vector<std::string> owners_;
  std::optional<StateVector> state_;
  std::vector<Event> events_;
  double prob_ = 1.0;
  bool dead_ = false;
  int seq_ = 0;
};

using ProtocolFn = std::function<void(Context&, BranchReport&)>;

/// Exhaustively enumerate every measurement-outcome branch of a protocol by
/// re-running it with forced outcomes (depth-first odometer). Probabilities
/// over all branches sum to 1; zero-probability branches are kept flagged.
ProtocolResult enumerate_protocol(const std::string& name, const ProtocolFn& fn);

/// Run one sampled branch with a seeded rng.
ProtocolResult sample_protocol(const std::string& name, const ProtocolFn& fn,
                               std::uint64_t seed);

ProtocolResult run_with_mode(const std::string& name, const ProtocolFn& fn,
                             Mode mode, std::uint64_t seed);

/// Deterministic per-party RNG stream split from a master seed.
std::mt19937_64 party_rng(std::uint64_t master_seed, const std::string& party);

/// Find a Pauli correction P with P S_k P^dag = (-1)^{flips[k]} S_k for all k
/// (i.e. P anticommutes with S_k exactly when flips[k] is set), minimizing
/// Pauli weight over the solution coset. Throws when no solution exists.
PauliString synthesize_pauli_correction(const std::vector<PauliString>& generators,
                                        const std::vector<int>& flips);

/// Transcript checks: every operation's subsystems owned by its party is
/// enforced at run time; this validates message-ordering causality.
bool transcript_causality_ok(const std::vector<Event>& events);

}  // namespace qbcast
