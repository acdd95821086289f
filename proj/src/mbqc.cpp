#include <cmath>
#include <stdexcept>

#include "qbcast/mbqc.hpp"

namespace qbcast {
namespace {

constexpr double kQuarterPi = 0.78539816339744830962;

// Measured vertices in column-major order; (4,9) is the output pair.
constexpr std::array<std::size_t, 8> kMeasureOrder = {0, 5, 1, 6, 2, 7, 3, 8};

Matrix cz_matrix() {
  Matrix cz = Matrix::Identity(4, 4);
  cz(3, 3) = -1.0;
  return cz;
}

Matrix kron2(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    }
  }
  return out;
}

int sign_of(int exponent) { return (exponent % 2 == 0) ? 1 : -1; }

int pick_outcome(const BlockPlan& plan, std::size_t step, bool sender_side,
                 const std::vector<double>& probs, std::mt19937_64* rng) {
  if (plan.forced_w) {
    // Sender outcomes pinned to 0 so the forced bit lands entirely in t.
    return sender_side ? 0 : (*plan.forced_w)[step] & 1;
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double r = unif(*rng);
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < probs.size(); ++j) {
    acc += probs[j];
    if (r < acc) return static_cast<int>(j);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

BrickworkSim::BrickworkSim(const StateVector& psi_in) : state_(psi_in) {
  if (psi_in.num_subsystems() != 2 || psi_in.dim(0) != 2 || psi_in.dim(1) != 2) {
    throw std::invalid_argument("input must be a 2-qubit state");
  }
  StateVector plus({2}, ket_plus());
  for (int i = 0; i < 8; ++i) state_ = state_.tensor(plus);
  // Current order [v0, v5, +x8] -> vertex order 0..9.
  state_ = state_.permuted({0, 2, 3, 4, 5, 1, 6, 7, 8, 9});
  BrickworkBlock block = brickwork_block();
  Matrix cz = cz_matrix();
  for (const auto& [u, v] : block.graph.edges) {
    state_ = LocalOperator{{u, v}, cz}.apply(state_);
  }
  for (std::size_t v = 0; v < 10; ++v) index_[v] = static_cast<long>(v);
}

std::size_t BrickworkSim::slot(std::size_t vertex) const {
  if (vertex >= 10) throw std::invalid_argument("vertex out of range");
  if (index_[vertex] < 0) throw std::logic_error("vertex already measured");
  return static_cast<std::size_t>(index_[vertex]);
}

bool BrickworkSim::measured(std::size_t vertex) const {
  if (vertex >= 10) throw std::invalid_argument("vertex out of range");
  return index_[vertex] < 0;
}

int BrickworkSim::teleport_step(std::size_t vertex, double theta,
                                const OutcomePick& pick) {
  std::size_t v = slot(vertex);
  if (teleported_[vertex]) throw std::logic_error("vertex already teleported");
  teleported_[vertex] = true;
  StateVector plus({2}, ket_plus());
  state_ = state_.tensor(plus);
  std::size_t anc = state_.num_subsystems() - 1;
  state_ = LocalOperator{{anc, v}, cz_matrix()}.apply(state_);
  MeasurementBasis basis = rotated_x_basis(theta, anc);
  std::vector<Branch> branches = enumerate_branches(state_, basis, /*discard=*/true);
  std::vector<double> probs;
  for (const auto& b : branches) probs.push_back(b.probability);
  int s = pick(probs);
  prob_ *= probs[static_cast<std::size_t>(s)];
  state_ = branches[static_cast<std::size_t>(s)].state;
  return s;
}

int BrickworkSim::x_measure_step(std::size_t vertex, const OutcomePick& pick) {
  std::size_t v = slot(vertex);
  MeasurementBasis basis = x_basis(v);
  std::vector<Branch> branches = enumerate_branches(state_, basis, /*discard=*/true);
  std::vector<double> probs;
  for (const auto& b : branches) probs.push_back(b.probability);
  int t = pick(probs);
  prob_ *= probs[static_cast<std::size_t>(t)];
  state_ = branches[static_cast<std::size_t>(t)].state;
  index_[vertex] = -1;
  for (std::size_t u = 0; u < 10; ++u) {
    if (index_[u] > static_cast<long>(v)) --index_[u];
  }
  return t;
}

StateVector BrickworkSim::output() const {
  if (state_.num_subsystems() != 2) {
    throw std::logic_error("interior vertices still unmeasured");
  }
  std::size_t top = slot(4), bottom = slot(9);
  return (top == 0 && bottom == 1) ? state_ : state_.permuted({top, bottom});
}

namespace {

// Shared block driver: per measured vertex, teleport with the scheduled angle
// then X-measure. The angle rule sees the w bits gathered so far.
LogicalResult run_block(const StateVector& psi_in, WireFlags in_top, WireFlags in_bottom,
                        const BlockPlan& plan,
                        const std::function<double(std::size_t, const std::vector<int>&)>&
                            angle_rule) {
  if (!plan.forced_w && !plan.rng) throw std::invalid_argument("empty block plan");
  if (plan.forced_w && plan.forced_w->size() != 8) {
    throw std::invalid_argument("need eight forced outcomes");
  }
  BrickworkSim sim(psi_in);
  std::vector<int> w;
  for (std::size_t step = 0; step < kMeasureOrder.size(); ++step) {
    std::size_t vertex = kMeasureOrder[step];
    double theta = angle_rule(vertex, w);
    int s = sim.teleport_step(vertex, theta, [&](const std::vector<double>& probs) {
      return pick_outcome(plan, step, true, probs, plan.rng);
    });
    int t = sim.x_measure_step(vertex, [&](const std::vector<double>& probs) {
      return pick_outcome(plan, step, false, probs, plan.rng);
    });
    w.push_back(s ^ t);
  }
  // w order: v0, v5, v1, v6, v2, v7, v3, v8.
  LogicalResult res;
  res.output = sim.output();
  res.w = w;
  res.probability = sim.probability();
  int w1 = w[0], w6 = w[1], w2 = w[2], w7 = w[3], w3 = w[4], w8 = w[5], w4 = w[6],
      w9 = w[7];
  res.top.x = (w2 + w4 + in_top.x) & 1;
  res.top.z = (w1 + w3 + w9 + in_top.z) & 1;
  res.bottom.x = (w7 + w9 + in_bottom.x) & 1;
  res.bottom.z = (w4 + w6 + w8 + in_bottom.z) & 1;
  return res;
}

}  // namespace

LogicalResult run_cnot_block(const StateVector& psi_in, WireFlags top, WireFlags bottom,
                             const BlockPlan& plan) {
  auto angle_rule = [top, bottom](std::size_t vertex, const std::vector<int>& w) {
    // w bits so far, in measurement order: v0, v5, v1, v6, v2, v7, v3, v8.
    switch (vertex) {
      case 6:  // gamma
        return sign_of(w[1] + bottom.z) * kQuarterPi;
      case 2:  // beta
        return sign_of(w[2] + top.x) * kQuarterPi;
      case 8:  // alpha
        return sign_of(w[2] + w[1] + w[5] + top.x + bottom.z) * -kQuarterPi;
      default:
        return 0.0;
    }
  };
  return run_block(psi_in, top, bottom, plan, angle_rule);
}

LogicalResult run_rotation_block(const StateVector& psi_in,
                                 const std::array<double, 3>& top_angles,
                                 const std::array<double, 3>& bottom_angles,
                                 WireFlags top, WireFlags bottom,
                                 const BlockPlan& plan) {
  auto angle_rule = [top_angles, bottom_angles, top, bottom](
                        std::size_t vertex, const std::vector<int>& w) {
    // The effective sign of each teleported Z rotation is the wire's
    // accumulated X-byproduct exponent when the rotation lands: x for the
    // first column, w(first)+z after one H step, w(second)+x after two.
    switch (vertex) {
      case 0: return sign_of(top.x) * top_angles[0];
      case 1: return sign_of(w[0] + top.z) * top_angles[1];
      case 2: return sign_of(w[2] + top.x) * top_angles[2];
      case 5: return sign_of(bottom.x) * bottom_angles[0];
      case 6: return sign_of(w[1] + bottom.z) * bottom_angles[1];
      case 7: return sign_of(w[3] + bottom.x) * bottom_angles[2];
      default: return 0.0;
    }
  };
  return run_block(psi_in, top, bottom, plan, angle_rule);
}

ProgramResult run_program(const std::vector<BlockSpec>& blocks, const StateVector& psi_in,
                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  BlockPlan plan;
  plan.rng = &rng;
  ProgramResult res{psi_in, {}, {}, {}, Matrix::Identity(4, 4), 1.0};
  for (const auto& block : blocks) {
    LogicalResult lr =
        block.kind == BlockSpec::Kind::Cnot
            ? run_cnot_block(res.output, res.top, res.bottom, plan)
            : run_rotation_block(res.output, block.top_angles, block.bottom_angles,
                                 res.top, res.bottom, plan);
    res.output = lr.output;
    res.top = lr.top;
    res.bottom = lr.bottom;
    res.w.push_back(lr.w);
    res.probability *= lr.probability;
    Matrix u = block.kind == BlockSpec::Kind::Cnot
                   ? cnot_matrix()
                   : kron2(euler_rotation(block.top_angles[0], block.top_angles[1],
                                        block.top_angles[2]),
                          euler_rotation(block.bottom_angles[0], block.bottom_angles[1],
                                         block.bottom_angles[2]));
    res.target = u * res.target;
  }
  return res;
}

ProgramResult run_program(const std::vector<BlockSpec>& blocks, const StateVector& psi_in,
                          const std::vector<std::vector<int>>& forced) {
  if (forced.size() != blocks.size()) {
    throw std::invalid_argument("need one outcome vector per block");
  }
  ProgramResult res{psi_in, {}, {}, {}, Matrix::Identity(4, 4), 1.0};
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    BlockPlan plan;
    plan.forced_w = &forced[i];
    const auto& block = blocks[i];
    LogicalResult lr =
        block.kind == BlockSpec::Kind::Cnot
            ? run_cnot_block(res.output, res.top, res.bottom, plan)
            : run_rotation_block(res.output, block.top_angles, block.bottom_angles,
                                 res.top, res.bottom, plan);
    res.output = lr.output;
    res.top = lr.top;
    res.bottom = lr.bottom;
    res.w.push_back(lr.w);
    res.probability *= lr.probability;
    Matrix u = block.kind == BlockSpec::Kind::Cnot
                   ? cnot_matrix()
                   : kron2(euler_rotation(block.top_angles[0], block.top_angles[1],
                                        block.top_angles[2]),
                          euler_rotation(block.bottom_angles[0], block.bottom_angles[1],
                                         block.bottom_angles[2]));
    res.target = u * res.target;
  }
  return res;
}

Matrix cnot_matrix() {
  Matrix cx = Matrix::Zero(4, 4);
  cx(0, 0) = cx(1, 1) = cx(2, 3) = cx(3, 2) = 1.0;
  return cx;
}

Matrix euler_rotation(double a, double b, double g) {
  auto zrot = [](double t) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = std::polar(1.0, t);
    m(1, 1) = std::polar(1.0, -t);
    return m;
  };
  Matrix xrot = Matrix::Identity(2, 2) * std::cos(b);
  xrot(0, 1) = xrot(1, 0) = cxd(0.0, std::sin(b));
  return zrot(g) * xrot * zrot(a);
}

StateVector strip_byproducts(const StateVector& state, WireFlags top, WireFlags bottom) {
  StateVector out = state;
  auto strip_wire = [&out](std::size_t wire, WireFlags f) {
    // Invert X^x Z^z; the residual sign is a global phase.
    if (f.x) out = LocalOperator{{wire}, pauli_x()}.apply(out);
    if (f.z) out = LocalOperator{{wire}, pauli_z()}.apply(out);
  };
  strip_wire(0, top);
  strip_wire(1, bottom);
  return out;
}

}  // namespace qbcast
