#include <cmath>
#include <stdexcept>

#include "qbcast/protocols.hpp"

namespace qbcast {
namespace {

cxd phase(double angle) { return std::polar(1.0, angle); }

// Product state of n identical qubits with (unnormalized) components a0, a1.
StateVector receiver_product(std::size_t n, cxd a0, cxd a1) {
  Vector local(2);
  local << a0, a1;
  return StateVector::product(std::vector<std::size_t>(n, 2),
                              std::vector<Vector>(n, local));
}

std::string bob_name(std::size_t l) { return "bob" + std::to_string(l + 1); }
std::string bob_label(std::size_t l) { return "b" + std::to_string(l + 1); }
std::string alice_name(std::size_t j) { return "alice" + std::to_string(j + 1); }
std::string alice_label(std::size_t j) { return "a" + std::to_string(j + 1); }

// Set up the M-sender/N-receiver template with standard parties and labels.
void setup_template(Context& ctx, const BroadcastSpec& spec) {
  std::vector<std::string> labels, owners;
  for (std::size_t j = 0; j < spec.num_senders; ++j) {
    ctx.add_party(alice_name(j), Role::Sender);
    labels.push_back(alice_label(j));
    owners.push_back(alice_name(j));
  }
  for (std::size_t l = 0; l < spec.num_receivers; ++l) {
    ctx.add_party(bob_name(l), Role::Receiver);
    labels.push_back(bob_label(l));
    owners.push_back(bob_name(l));
  }
  ctx.set_state(make_broadcast_state(spec), labels, owners);
}

void verdict_against(const Context& ctx, BranchReport& rep, const StateVector& target,
                     const std::vector<std::string>& order) {
  if (ctx.dead()) return;
  StateVector fin = ctx.state_of(order);
  rep.metrics["fidelity"] = overlap_abs(fin, target);
  rep.metrics["match"] = equal_up_to_global_phase(fin, target) ? 1.0 : 0.0;
  rep.final_state = fin;
}

}  // namespace

ProtocolResult run_bbp(const BbpParams& p, Mode mode, std::uint64_t seed) {
  MultisenderParams mp;
  mp.num_senders = 1;
  mp.num_receivers = p.num_receivers;
  mp.alpha = p.alpha;
  mp.beta = p.beta;
  mp.thetas = {p.theta};
  ProtocolResult res = run_multisender(mp, mode, seed);
  res.name = "bbp";
  return res;
}

ProtocolResult run_multisender(const MultisenderParams& p, Mode mode,
                               std::uint64_t seed) {
  if (p.num_senders < 1) throw std::invalid_argument("need at least one sender");
  if (p.thetas.size() != p.num_senders) {
    throw std::invalid_argument("need one angle per sender");
  }
  std::vector<bool> active = p.active;
  if (active.empty()) active.assign(p.num_senders, true);
  if (active.size() != p.num_senders) throw std::invalid_argument("active flag count");

  auto fn = [p, active](Context& ctx, BranchReport& rep) {
    std::size_t m = p.num_senders, n = p.num_receivers, d = n + 1;
    BroadcastSpec spec{m, n, p.alpha, p.beta, std::nullopt};
    setup_template(ctx, spec);
    double theta_sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (!active[j]) continue;
      theta_sum += p.thetas[j];
      ctx.apply_op(alice_name(j), {alice_label(j)},
                   sender_phase_gate(d, n, p.thetas[j]).mat, "phase gate");
    }
    long outcome_sum = 0;
    std::vector<int> msgs;
    for (std::size_t j = 0; j < m; ++j) {
      int mj = ctx.measure_in(alice_name(j), alice_label(j), fourier_basis(d),
                              "Fourier measurement");
      outcome_sum += mj;
      msgs.push_back(ctx.broadcast(alice_name(j), {mj}, "announce outcome"));
    }
    std::vector<std::string> order;
    for (std::size_t l = 0; l < n; ++l) {
      ctx.apply_op(bob_name(l), {bob_label(l)}, correction_gate(d, outcome_sum).mat,
                   "phase correction", msgs);
      order.push_back(bob_label(l));
    }
    StateVector target = receiver_product(n, p.alpha * phase(theta_sum),
                                          p.beta * phase(-theta_sum));
    verdict_against(ctx, rep, target, order);
  };
  return run_with_mode("multisender", fn, mode, seed);
}

ProtocolResult run_bbp_rotated(const BbpRotatedParams& p, Mode mode,
                               std::uint64_t seed) {
  if (p.t_gate.rows() != 2 || p.t_gate.cols() != 2 ||
      !LocalOperator{{0}, p.t_gate}.is_unitary()) {
    throw std::invalid_argument("T must be a 2x2 unitary");
  }
  if (p.psi.size() != 2 || std::abs(p.psi.norm() - 1.0) > kAlgebraTol) {
    throw std::invalid_argument("psi must be a unit qubit state");
  }

  auto fn = [p](Context& ctx, BranchReport& rep) {
    const Matrix& t = p.t_gate;
    Vector rotated = t.adjoint() * p.psi;  // components mu, nu
    cxd mu = rotated(0), nu = rotated(1);

    ctx.add_party("alice", Role::Sender);
    ctx.add_party("bob", Role::Receiver);
    ctx.add_party("charlie", Role::Receiver);
    Vector qutrit0 = Vector::Zero(3);
    qutrit0(0) = 1.0;
    ctx.add_subsystem("a", 3, "alice", qutrit0);
    ctx.add_subsystem("b", 2, "alice", rotated);
    ctx.add_subsystem("c", 2, "alice", rotated);

    // Count |0> qubits into the qutrit: |b>|j> -> |b>|j + (1-b) mod 3>.
    Matrix count = Matrix::Zero(6, 6);
    for (std::size_t b = 0; b < 2; ++b) {
      for (std::size_t j = 0; j < 3; ++j) {
        std::size_t to = (j + 1 - b) % 3;
        count(static_cast<Eigen::Index>(b * 3 + to),
              static_cast<Eigen::Index>(b * 3 + j)) = 1.0;
      }
    }
    ctx.apply_op("alice", {"b", "a"}, count, "counting gate");
    ctx.apply_op("alice", {"c", "a"}, count, "counting gate");
    ctx.apply_op("alice", {"b"}, t, "basis rotation");
    ctx.apply_op("alice", {"c"}, t, "basis rotation");

    // The tripartite state should now match the broadcast template written in
    // the rotated basis.
    {
      BroadcastSpec spec{1, 2, mu, nu, std::nullopt};
      StateVector tmpl = make_broadcast_state(spec);
      tmpl = LocalOperator{{1}, t}.apply(tmpl);
      tmpl = LocalOperator{{2}, t}.apply(tmpl);
      rep.metrics["template_match"] =
          equal_up_to_global_phase(ctx.state_of({"a", "b", "c"}), tmpl) ? 1.0 : 0.0;
    }

    ctx.transfer("b", "bob");
    ctx.transfer("c", "charlie");
    ctx.apply_op("alice", {"a"}, sender_phase_gate(3, 2, p.theta).mat, "phase gate");
    int m = ctx.measure_in("alice", "a", fourier_basis(3), "Fourier measurement");
    int msg = ctx.broadcast("alice", {m}, "announce outcome");
    Matrix corr = t * correction_gate(3, m).mat * t.adjoint();
    ctx.apply_op("bob", {"b"}, corr, "rotated phase correction", {msg});
    ctx.apply_op("charlie", {"c"}, corr, "rotated phase correction", {msg});

    if (ctx.dead()) return;
    Matrix w = Matrix::Zero(2, 2);
    w(0, 0) = phase(p.theta);
    w(1, 1) = phase(-p.theta);
    Vector local = t * w * t.adjoint() * p.psi;
    StateVector target = StateVector::product({2, 2}, {local, local});
    verdict_against(ctx, rep, target, {"b", "c"});
  };
  return run_with_mode("bbp-rotated", fn, mode, seed);
}

namespace {

// Shared add-sender steps; leaves the register as [a1..aM, b1..bN, anew] with
// anew holding the (M+1)-th sender qudit.
void add_sender_steps(Context& ctx, const AddSenderParams& p) {
  std::size_t m = p.num_senders, n = p.num_receivers, d = n + 1;
  BroadcastSpec spec{m, n, p.alpha, p.beta, std::nullopt};
  setup_template(ctx, spec);

  ctx.add_party(alice_name(m), Role::Sender);
  Vector pair = Vector::Zero(static_cast<Eigen::Index>(d * d));
  for (std::size_t l = 0; l < d; ++l) {
    pair(static_cast<Eigen::Index>(l * d + l)) = 1.0 / std::sqrt(static_cast<double>(d));
  }
  StateVector pair_state({d, d}, pair);
  ctx.append_block(pair_state, {"ap", alice_label(m)},
                   {alice_name(m - 1), alice_name(m)});

  ctx.apply_op(alice_name(m - 1), {alice_label(m - 1), "ap"},
               controlled_shift(d, d, 1).mat, "controlled shift");
  int j = ctx.measure_in(alice_name(m - 1), "ap", computational_basis(d),
                         "pair measurement");
  int msg = ctx.send(alice_name(m - 1), alice_name(m), {j}, "announce outcome");

  // Relabel |j - k> -> |k>: negate-and-shift permutation.
  Matrix relabel = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < d; ++k) {
    std::size_t from = (static_cast<std::size_t>(j) + d - k % d) % d;
    relabel(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(from)) = 1.0;
  }
  ctx.apply_op(alice_name(m), {alice_label(m)}, relabel, "relabeling map", {msg});
}

std::vector<std::string> template_order(std::size_t m, std::size_t n) {
  std::vector<std::string> order;
  for (std::size_t j = 0; j < m; ++j) order.push_back(alice_label(j));
  for (std::size_t l = 0; l < n; ++l) order.push_back(bob_label(l));
  return order;
}

}  // namespace

ProtocolResult add_sender(const AddSenderParams& p, Mode mode, std::uint64_t seed) {
  if (p.num_senders < 1) throw std::invalid_argument("need at least one sender");
  auto fn = [p](Context& ctx, BranchReport& rep) {
    add_sender_steps(ctx, p);
    BroadcastSpec grown{p.num_senders + 1, p.num_receivers, p.alpha, p.beta, std::nullopt};
    verdict_against(ctx, rep, make_broadcast_state(grown),
                    template_order(p.num_senders + 1, p.num_receivers));
  };
  return run_with_mode("add-sender", fn, mode, seed);
}

ProtocolResult delete_sender(const DeleteSenderParams& p, Mode mode, std::uint64_t seed) {
  if (p.which >= p.num_senders) throw std::invalid_argument("sender index out of range");
  auto fn = [p](Context& ctx, BranchReport& rep) {
    std::size_t m = p.num_senders, n = p.num_receivers, d = n + 1;
    BroadcastSpec spec{m, n, p.alpha, p.beta, std::nullopt};
    setup_template(ctx, spec);
    int out = ctx.measure_in(alice_name(p.which), alice_label(p.which),
                             fourier_basis(d), "Fourier measurement");
    int msg = ctx.broadcast(alice_name(p.which), {out}, "announce outcome");
    std::vector<std::string> order;
    for (std::size_t j = 0; j < m; ++j) {
      if (j != p.which) order.push_back(alice_label(j));
    }
    for (std::size_t l = 0; l < n; ++l) {
      ctx.apply_op(bob_name(l), {bob_label(l)}, correction_gate(d, out).mat,
                   "phase correction", {msg});
      order.push_back(bob_label(l));
    }
    BroadcastSpec shrunk{m - 1, n, p.alpha, p.beta, std::nullopt};
    verdict_against(ctx, rep, make_broadcast_state(shrunk), order);
  };
  return run_with_mode("delete-sender", fn, mode, seed);
}

ProtocolResult run_add_delete_roundtrip(const AddSenderParams& p, Mode mode,
                                        std::uint64_t seed) {
  if (p.num_senders < 1) throw std::invalid_argument("need at least one sender");
  auto fn = [p](Context& ctx, BranchReport& rep) {
    std::size_t m = p.num_senders, n = p.num_receivers, d = n + 1;
    add_sender_steps(ctx, p);
    int out = ctx.measure_in(alice_name(m), alice_label(m), fourier_basis(d),
                             "Fourier measurement");
    int msg = ctx.broadcast(alice_name(m), {out}, "announce outcome");
    for (std::size_t l = 0; l < n; ++l) {
      ctx.apply_op(bob_name(l), {bob_label(l)}, correction_gate(d, out).mat,
                   "phase correction", {msg});
    }
    BroadcastSpec spec{m, n, p.alpha, p.beta, std::nullopt};
    verdict_against(ctx, rep, make_broadcast_state(spec), template_order(m, n));
  };
  return run_with_mode("add-delete-roundtrip", fn, mode, seed);
}

}  // namespace qbcast
