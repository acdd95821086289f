#include <cmath>
#include <stdexcept>

#include "qbcast/protocols.hpp"

namespace qbcast {
namespace {

constexpr double kPi = 3.14159265358979323846;

cxd phase(double angle) { return std::polar(1.0, angle); }

// (1/sqrt(K)) sum_j e^{i j angle} |j>, restricted to j >= low.
StateVector encoding_state(std::size_t cap, double angle, std::size_t low = 0) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(cap));
  for (std::size_t j = low; j < cap; ++j) {
    v(static_cast<Eigen::Index>(j)) = phase(angle * static_cast<double>(j));
  }
  return StateVector({cap}, v);
}

StateVector qubit_product(std::size_t n, cxd a0, cxd a1) {
  Vector local(2);
  local << a0, a1;
  return StateVector::product(std::vector<std::size_t>(n, 2),
                              std::vector<Vector>(n, local));
}

std::string use_label(const std::string& base, std::size_t use) {
  return use == 0 ? base : base + "'";
}

// One restricted-phase use: fresh sender + receivers against the shared d.
// Appends receiver labels (in order) to `order`.
void restricted_use(Context& ctx, const PhaseRestrictedParams& p, std::size_t use,
                    std::vector<std::string>& order) {
  std::size_t n = p.num_receivers, dd = n + 1;
  std::string alice = use_label("alice", use);
  ctx.add_party(alice, Role::Sender);
  std::vector<std::string> labels = {use_label("a", use)};
  std::vector<std::string> owners = {alice};
  std::vector<std::string> bobs;
  for (std::size_t l = 0; l < n; ++l) {
    std::string bob = use_label("bob" + std::to_string(l + 1), use);
    std::string lbl = use_label("b" + std::to_string(l + 1), use);
    ctx.add_party(bob, Role::Receiver);
    labels.push_back(lbl);
    owners.push_back(bob);
    bobs.push_back(bob);
    order.push_back(lbl);
  }
  BroadcastSpec spec{1, n, p.alpha, p.beta, std::nullopt};
  ctx.append_block(make_broadcast_state(spec), labels, owners);

  ctx.transfer("d", alice);
  ctx.apply_op(alice, {labels[0], "d"}, controlled_shift(dd, p.cap, 1).mat,
               "controlled shift");
  int m = ctx.measure_in(alice, labels[0], fourier_basis(dd), "Fourier measurement");
  int msg = ctx.broadcast(alice, {m}, "announce outcome");
  for (std::size_t l = 0; l < n; ++l) {
    ctx.apply_op(bobs[l], {labels[l + 1]}, correction_gate(dd, m).mat,
                 "phase correction", {msg});
  }
  ctx.transfer("d", "provider");
}

}  // namespace

ProtocolResult send_phase_restricted(const PhaseRestrictedParams& p, Mode mode,
                                     std::uint64_t seed) {
  if (p.k >= p.cap) throw std::invalid_argument("k must satisfy 0 <= k < K");
  if (p.cap < 2) throw std::invalid_argument("K must be at least 2");
  if (p.uses < 1 || p.uses > 2) throw std::invalid_argument("uses must be 1 or 2");

  auto fn = [p](Context& ctx, BranchReport& rep) {
    double angle = 2.0 * kPi * static_cast<double>(p.k) / static_cast<double>(p.cap);
    StateVector phi = encoding_state(p.cap, angle);
    ctx.add_party("provider", Role::PhaseProvider);
    ctx.append_block(phi, {"d"}, {"provider"});

    std::vector<std::string> order;
    for (std::size_t u = 0; u < p.uses; ++u) restricted_use(ctx, p, u, order);
    order.push_back("d");

    if (ctx.dead()) return;
    StateVector fin = ctx.state_of(order);
    // Each receiver ends in e^{-2 pi i k/K} alpha|0> + beta|1>.
    StateVector per_use = qubit_product(p.num_receivers, phase(-angle) * p.alpha, p.beta);
    StateVector target = per_use;
    for (std::size_t u = 1; u < p.uses; ++u) target = target.tensor(per_use);
    target = target.tensor(phi);
    rep.metrics["fidelity"] = overlap_abs(fin, target);
    rep.metrics["match"] = equal_up_to_global_phase(fin, target) ? 1.0 : 0.0;
    std::vector<std::size_t> d_index = {fin.num_subsystems() - 1};
    rep.metrics["d_fidelity"] = fidelity(partial_trace(fin, d_index), phi);
    rep.final_state = fin;
  };
  return run_with_mode("phase-restricted", fn, mode, seed);
}

namespace {

// One general-angle use: the three-level template on (a, b, c) against the
// shared d. Returns the (b, c) labels added.
std::vector<std::string> general_use(Context& ctx, const PhaseGeneralParams& p,
                                     std::size_t use) {
  std::string alice = use_label("alice", use);
  std::string bob = use_label("bob", use);
  std::string charlie = use_label("charlie", use);
  std::string la = use_label("a", use);
  std::string lb = use_label("b", use);
  std::string lc = use_label("c", use);
  ctx.add_party(alice, Role::Sender);
  ctx.add_party(bob, Role::Receiver);
  ctx.add_party(charlie, Role::Receiver);

  // alpha^2 |0>|00> + alpha beta |1>(|01> + |10>) + beta^2 |2>|11>
  // (the qutrit counts |1> qubits).
  Vector amps = Vector::Zero(12);
  amps(0) = p.alpha * p.alpha;
  amps(4 + 1) = p.alpha * p.beta;
  amps(4 + 2) = p.alpha * p.beta;
  amps(8 + 3) = p.beta * p.beta;
  ctx.append_block(StateVector({3, 2, 2}, amps), {la, lb, lc}, {alice, alice, alice});
  ctx.transfer(lb, bob);
  ctx.transfer(lc, charlie);

  ctx.transfer("d", alice);
  ctx.apply_op(alice, {la, "d"}, controlled_shift(3, p.cap, 1).mat, "controlled shift");
  int m = ctx.measure_in(alice, la, fourier_basis(3), "Fourier measurement");
  int msg = ctx.broadcast(alice, {m}, "announce outcome");
  Matrix corr = Matrix::Zero(2, 2);
  corr(0, 0) = 1.0;
  corr(1, 1) = phase(2.0 * kPi * static_cast<double>(m) / 3.0);
  ctx.apply_op(bob, {lb}, corr, "phase correction", {msg});
  ctx.apply_op(charlie, {lc}, corr, "phase correction", {msg});
  return {lb, lc};
}

ProjectiveMeasurement low_levels_split(std::size_t cap, std::size_t low) {
  ProjectiveMeasurement meas;
  std::vector<Vector> fail, success;
  for (std::size_t j = 0; j < cap; ++j) {
    Vector e = Vector::Zero(static_cast<Eigen::Index>(cap));
    e(static_cast<Eigen::Index>(j)) = 1.0;
    (j < low ? fail : success).push_back(e);
  }
  meas.subspaces = {fail, success};
  return meas;
}

}  // namespace

ProtocolResult send_phase_general(const PhaseGeneralParams& p, Mode mode,
                                  std::uint64_t seed) {
  if (p.cap < 3) throw std::invalid_argument("K must be at least 3");
  if (p.uses < 1 || p.uses > 2) throw std::invalid_argument("uses must be 1 or 2");
  if (p.uses == 2 && p.variant == PhaseVariant::Projector && p.cap < 5) {
    throw std::invalid_argument("a projector second use needs K >= 5");
  }
  if (p.uses == 2 && p.variant == PhaseVariant::Destructive) {
    throw std::invalid_argument("the destructive variant consumes d");
  }

  auto fn = [p](Context& ctx, BranchReport& rep) {
    ctx.add_party("provider", Role::PhaseProvider);
    ctx.append_block(encoding_state(p.cap, p.theta), {"d"}, {"provider"});

    std::vector<std::string> pair = general_use(ctx, p, 0);
    StateVector w2 = qubit_product(2, p.alpha, p.beta * phase(-p.theta));

    switch (p.variant) {
      case PhaseVariant::Destructive: {
        int k = ctx.measure_in("alice", "d", computational_basis(p.cap),
                               "encoding measurement");
        bool ok = k >= 2;
        rep.metrics["success"] = ok ? 1.0 : 0.0;
        if (ok && !ctx.dead()) {
          StateVector fin = ctx.state_of(pair);
          rep.metrics["fidelity"] = overlap_abs(fin, w2);
          rep.final_state = fin;
        }
        break;
      }
      case PhaseVariant::Projector: {
        int q = ctx.measure_projective("alice", "d", low_levels_split(p.cap, 2),
                                       "two-level projector");
        rep.metrics["success"] = (q == 1) ? 1.0 : 0.0;
        if (q != 1 || ctx.dead()) break;
        StateVector residual = encoding_state(p.cap, p.theta, 2);
        {
          StateVector fin = ctx.state_of({pair[0], pair[1], "d"});
          StateVector target = w2.tensor(residual);
          rep.metrics["fidelity"] = overlap_abs(fin, target);
          rep.metrics["d_residual_fidelity"] =
              fidelity(partial_trace(fin, {2}), residual);
          rep.final_state = fin;
        }
        if (p.uses == 2) {
          std::vector<std::string> pair2 = general_use(ctx, p, 1);
          int q2 = ctx.measure_projective("alice'", "d", low_levels_split(p.cap, 4),
                                          "four-level projector");
          rep.metrics["success2"] = (q2 == 1) ? 1.0 : 0.0;
          if (q2 != 1 || ctx.dead()) break;
          StateVector fin = ctx.state_of({pair[0], pair[1], pair2[0], pair2[1], "d"});
          StateVector target = w2.tensor(w2).tensor(encoding_state(p.cap, p.theta, 4));
          rep.metrics["fidelity2"] = overlap_abs(fin, target);
          rep.final_state = fin;
        }
        break;
      }
      case PhaseVariant::Approximate: {
        std::vector<std::string> order = pair;
        if (p.uses == 2) {
          std::vector<std::string> pair2 = general_use(ctx, p, 1);
          order.insert(order.end(), pair2.begin(), pair2.end());
        }
        order.push_back("d");
        if (ctx.dead()) break;
        StateVector fin = ctx.state_of(order);
        rep.metrics["d_fidelity"] = fidelity(
            partial_trace(fin, {fin.num_subsystems() - 1}),
            encoding_state(p.cap, p.theta));
        rep.final_state = fin;
        break;
      }
    }
  };
  return run_with_mode("phase-general", fn, mode, seed);
}

PhaseApproxOutputs phase_approx_outputs(const PhaseGeneralParams& params) {
  PhaseGeneralParams p = params;
  p.variant = PhaseVariant::Approximate;
  ProtocolResult res = send_phase_general(p, Mode::Enumerate);
  const BranchReport* branch = nullptr;
  for (const auto& b : res.branches) {
    if (!b.zero_prob && b.final_state) {
      branch = &b;
      break;
    }
  }
  if (!branch) throw std::runtime_error("no live branch");
  const StateVector& fin = *branch->final_state;
  PhaseApproxOutputs out;
  out.rho_b = partial_trace(fin, {0});
  std::size_t d_index = fin.num_subsystems() - 1;
  out.rho_d = partial_trace(fin, {d_index});
  out.fidelity_d = branch->metrics.at("d_fidelity");
  if (p.uses == 2) out.rho_pair = partial_trace(fin, {0, 1, 2, 3});
  return out;
}

double phase_fidelity_closed_form(cxd alpha, cxd beta, double theta, std::size_t cap) {
  double k = static_cast<double>(cap);
  return 1.0 - 4.0 * std::norm(beta) * (1.0 - std::cos(k * theta)) *
                   (k - 2.0 + std::norm(alpha)) / (k * k);
}

}  // namespace qbcast
