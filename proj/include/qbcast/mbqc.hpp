#pragma once

#include <array>
#include <functional>

#include "qbcast/library.hpp"
#include "qbcast/tensor.hpp"

namespace qbcast {

// Accumulated Pauli byproduct exponents on one logical wire (mod 2).
struct WireFlags {
  int x = 0;
  int z = 0;
};

// Chooses a measurement outcome given the Born probabilities.
using OutcomePick = std::function<int(const std::vector<double>&)>;

/// One brickwork block under measurement. Vertices 0..4 form the top row,
/// 5..9 the bottom row; the logical input sits on (0,5) and the output is
/// read off (4,9). The sender teleports Z rotations through CZ-coupled
/// ancillas; the receiver only ever measures in X.
class BrickworkSim {
 public:
  explicit BrickworkSim(const StateVector& psi_in);

  /// Couple a fresh ancilla to `vertex`, measure it in the rotated X basis
  /// and return the outcome s (the vertex gains Z^s e^{i theta Z}).
  int teleport_step(std::size_t vertex, double theta, const OutcomePick& pick);

  /// X-measure `vertex` and drop it; returns the outcome t.
  int x_measure_step(std::size_t vertex, const OutcomePick& pick);

  bool measured(std::size_t vertex) const;
  double probability() const { return prob_; }
  const StateVector& state() const { return state_; }
  /// Remaining output pair (top wire first); valid once the eight interior
  /// vertices are measured.
  StateVector output() const;

 private:
  std::size_t slot(std::size_t vertex) const;
  StateVector state_;
  std::array<long, 10> index_{};    // vertex -> subsystem slot, -1 once gone
  std::array<bool, 10> teleported_{};
  double prob_ = 1.0;
};

struct LogicalResult {
  StateVector output;  // wires (top, bottom)
  WireFlags top, bottom;
  std::vector<int> w;  // per measured vertex, column-major order
  double probability = 0.0;
};

// Outcome control for one block: force the w bits (sender outcomes pinned to
// 0) or sample both outcome sets from the rng.
struct BlockPlan {
  const std::vector<int>* forced_w = nullptr;
  std::mt19937_64* rng = nullptr;
};

/// Brickwork CNOT (top wire controls, bottom is the X-type target) with the
/// adaptive angle rule; input byproduct flags feed the angle signs and the
/// output flags use the closed forms.
LogicalResult run_cnot_block(const StateVector& psi_in, WireFlags top, WireFlags bottom,
                             const BlockPlan& plan);

/// Brickwork per-wire Euler rotation R(a,b,g) = e^{igZ} e^{ibX} e^{iaZ}.
LogicalResult run_rotation_block(const StateVector& psi_in,
                                 const std::array<double, 3>& top_angles,
                                 const std::array<double, 3>& bottom_angles,
                                 WireFlags top, WireFlags bottom,
                                 const BlockPlan& plan);

struct BlockSpec {
  enum class Kind { Cnot, Rotation };
  Kind kind = Kind::Cnot;
  std::array<double, 3> top_angles{};
  std::array<double, 3> bottom_angles{};
};

struct ProgramResult {
  StateVector output;
  WireFlags top, bottom;
  std::vector<std::vector<int>> w;  // per block
  Matrix target;                    // composed logical unitary (4x4)
  double probability = 0.0;
};

/// Run a block sequence, threading byproduct flags between blocks. Sampled
/// outcomes from the seed; `forced` (one w vector per block) pins them.
ProgramResult run_program(const std::vector<BlockSpec>& blocks, const StateVector& psi_in,
                          std::uint64_t seed);
ProgramResult run_program(const std::vector<BlockSpec>& blocks, const StateVector& psi_in,
                          const std::vector<std::vector<int>>& forced);

// Logical targets and byproduct handling.
Matrix cnot_matrix();
Matrix euler_rotation(double a, double b, double g);
/// Remove the leading X^x Z^z byproducts from a 2-wire state.
StateVector strip_byproducts(const StateVector& state, WireFlags top, WireFlags bottom);

}  // namespace qbcast
