#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qbcast/protocols.hpp"

namespace qbcast {
namespace {

cxd phase(double angle) { return std::polar(1.0, angle); }

std::string bob_name(std::size_t l) { return "bob" + std::to_string(l + 1); }
std::string bob_label(std::size_t l) { return "b" + std::to_string(l + 1); }
std::string alice_name(std::size_t j) { return "alice" + std::to_string(j + 1); }
std::string alice_label(std::size_t j) { return "a" + std::to_string(j + 1); }

StateVector qubit_product(std::size_t n, cxd a0, cxd a1) {
  Vector local(2);
  local << a0, a1;
  return StateVector::product(std::vector<std::size_t>(n, 2),
                              std::vector<Vector>(n, local));
}

Matrix pauli_letter(char c) {
  switch (c) {
    case 'X': return pauli_x();
    case 'Y': return pauli_y();
    case 'Z': return pauli_z();
    default: return Matrix::Identity(2, 2);
  }
}

// Real expectation <psi|S|psi> of a Pauli string over the whole register.
double pauli_expectation(const StateVector& psi, const PauliString& s) {
  std::vector<std::size_t> all(psi.num_subsystems());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  StateVector applied = LocalOperator{all, s.matrix()}.apply(psi);
  return (psi.amps().adjoint() * applied.amps())(0).real();
}

// Joint +1 eigenstate: projectors (1 + S_k)/2 applied to |+...+>.
StateVector stabilizer_target(const std::vector<PauliString>& gens, std::size_t n) {
  std::size_t total = std::size_t{1} << n;
  Vector v = Vector::Constant(static_cast<Eigen::Index>(total),
                              1.0 / std::sqrt(static_cast<double>(total)));
  for (const auto& s : gens) v = v + s.matrix() * v;
  return StateVector(std::vector<std::size_t>(n, 2), v);
}

void validate_generators(const std::vector<PauliString>& gens) {
  if (gens.empty()) throw std::invalid_argument("need at least one generator");
  std::size_t n = gens[0].num_qubits();
  for (std::size_t i = 0; i < gens.size(); ++i) {
    if (gens[i].num_qubits() != n) throw std::invalid_argument("generator length mismatch");
    if (gens[i].phase_power() % 2 != 0) {
      throw std::invalid_argument("generators must have real sign");
    }
    for (std::size_t j = i + 1; j < gens.size(); ++j) {
      if (!gens[i].commutes_with(gens[j])) {
        throw std::invalid_argument("generators must commute");
      }
    }
  }
  // Independence over GF(2): the symplectic rows must have full rank. This
  // also excludes +-I from the group (no nonempty product has identity letters).
  std::vector<std::vector<int>> rows;
  for (const auto& g : gens) {
    auto [x, z] = g.symplectic();
    std::vector<int> row = x;
    row.insert(row.end(), z.begin(), z.end());
    rows.push_back(std::move(row));
  }
  std::size_t rank = 0;
  for (std::size_t c = 0; c < 2 * n && rank < rows.size(); ++c) {
    std::size_t pr = rows.size();
    for (std::size_t i = rank; i < rows.size(); ++i) {
      if (rows[i][c]) { pr = i; break; }
    }
    if (pr == rows.size()) continue;
    std::swap(rows[rank], rows[pr]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i != rank && rows[i][c]) {
        for (std::size_t j = 0; j < 2 * n; ++j) rows[i][j] ^= rows[rank][j];
      }
    }
    ++rank;
  }
  if (rank != gens.size()) {
    throw std::invalid_argument("generators must be independent");
  }
}

// Prepare and distribute the control-generator circuit: controls c1..cm with
// Alice, targets t1..tn handed to Bobs. Returns the control/target labels.
struct StabSetup {
  std::vector<std::string> controls;
  std::vector<std::string> targets;
};
StabSetup stabilizer_setup(Context& ctx, const std::vector<PauliString>& gens) {
  std::size_t m = gens.size();
  std::size_t n = gens[0].num_qubits();
  StabSetup setup;
  ctx.add_party("alice", Role::Sender);
  for (std::size_t k = 0; k < m; ++k) {
    std::string lbl = "c" + std::to_string(k + 1);
    ctx.add_subsystem(lbl, 2, "alice", ket_plus());
    setup.controls.push_back(lbl);
  }
  for (std::size_t i = 0; i < n; ++i) {
    ctx.add_party(bob_name(i), Role::Receiver);
    std::string lbl = "t" + std::to_string(i + 1);
    ctx.add_subsystem(lbl, 2, "alice", ket_plus());
    setup.targets.push_back(lbl);
  }
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<std::size_t> support;
    std::string sub_letters;
    for (std::size_t i = 0; i < n; ++i) {
      if (gens[k].letter(i) != 'I') {
        support.push_back(i);
        sub_letters.push_back(gens[k].letter(i));
      }
    }
    Matrix sub = PauliString(gens[k].sign(), sub_letters).matrix();
    Eigen::Index w = sub.rows();
    Matrix gate = Matrix::Zero(2 * w, 2 * w);
    gate.topLeftCorner(w, w) = Matrix::Identity(w, w);
    gate.bottomRightCorner(w, w) = sub;
    std::vector<std::string> labels = {setup.controls[k]};
    for (std::size_t i : support) labels.push_back(setup.targets[i]);
    ctx.apply_op("alice", labels, gate, "controlled generator");
  }
  for (std::size_t i = 0; i < n; ++i) ctx.transfer(setup.targets[i], bob_name(i));
  return setup;
}

// X-measure all controls, broadcast, apply the synthesized Pauli fix.
// Returns the outcome bits.
std::vector<int> stabilizer_correct(Context& ctx, const StabSetup& setup,
                                    const std::vector<PauliString>& gens) {
  std::vector<int> s;
  std::vector<int> msgs;
  for (std::size_t k = 0; k < setup.controls.size(); ++k) {
    int sk = ctx.measure_in("alice", setup.controls[k], x_basis(), "X measurement");
    s.push_back(sk);
    msgs.push_back(ctx.broadcast("alice", {sk}, "announce outcome"));
  }
  if (ctx.dead()) return s;
  PauliString fix = synthesize_pauli_correction(gens, s);
  for (std::size_t i = 0; i < fix.num_qubits(); ++i) {
    if (fix.letter(i) == 'I') continue;
    ctx.apply_op(bob_name(i), {setup.targets[i]}, pauli_letter(fix.letter(i)),
                 "Pauli correction", msgs);
  }
  return s;
}

void stabilizer_metrics(const Context& ctx, BranchReport& rep,
                        const std::vector<PauliString>& gens, std::size_t n) {
  StateVector fin = ctx.state();
  double stab_min = 1.0;
  for (const auto& g : gens) stab_min = std::min(stab_min, pauli_expectation(fin, g));
  rep.metrics["stab_min"] = stab_min;
  rep.metrics["fidelity"] = overlap_abs(fin, stabilizer_target(gens, n));
  rep.final_state = fin;
}

// Largest entanglement entropy over all bipartitions of the register.
double max_bipartite_entropy(const StateVector& psi) {
  std::size_t n = psi.num_subsystems();
  double worst = 0.0;
  for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
    if (!(mask & 1)) continue;  // fix subsystem 0 on one side
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n; ++i) {
      if ((mask >> i) & 1) keep.push_back(i);
    }
    worst = std::max(worst, entanglement_entropy(psi, keep));
  }
  return worst;
}

}  // namespace

ProtocolResult run_graph_dist_phase(const GraphDistPhaseParams& p, Mode mode,
                                    std::uint64_t seed) {
  if (!p.spec.entangler) throw std::invalid_argument("spec must carry an entangler");
  p.spec.validate();
  if (p.thetas.size() != p.spec.num_senders) {
    throw std::invalid_argument("need one angle per sender");
  }

  auto fn = [p](Context& ctx, BranchReport& rep) {
    std::size_t m = p.spec.num_senders, n = p.spec.num_receivers, d = n + 1;
    std::vector<std::string> labels, owners;
    for (std::size_t j = 0; j < m; ++j) {
      ctx.add_party(alice_name(j), Role::Sender);
      labels.push_back(alice_label(j));
      owners.push_back(alice_name(j));
    }
    for (std::size_t l = 0; l < n; ++l) {
      ctx.add_party(bob_name(l), Role::Receiver);
      labels.push_back(bob_label(l));
      owners.push_back(bob_name(l));
    }
    ctx.set_state(make_broadcast_state(p.spec), labels, owners);

    double theta_sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      theta_sum += p.thetas[j];
      ctx.apply_op(alice_name(j), {alice_label(j)},
                   sender_phase_gate(d, n, p.thetas[j]).mat, "phase gate");
    }

    if (p.abort) {
      for (std::size_t j = 0; j < m; ++j) {
        ctx.measure_in(alice_name(j), alice_label(j), computational_basis(d),
                       "abort measurement");
      }
      rep.metrics["abort"] = 1.0;
      if (!ctx.dead()) rep.final_state = ctx.state();
      return;
    }

    long outcome_sum = 0;
    std::vector<int> msgs;
    for (std::size_t j = 0; j < m; ++j) {
      int mj = ctx.measure_in(alice_name(j), alice_label(j), fourier_basis(d),
                              "Fourier measurement");
      outcome_sum += mj;
      msgs.push_back(ctx.broadcast(alice_name(j), {mj}, "announce outcome"));
    }
    for (std::size_t l = 0; l < n; ++l) {
      ctx.apply_op(bob_name(l), {bob_label(l)}, correction_gate(d, outcome_sum).mat,
                   "phase correction", msgs);
    }
    if (ctx.dead()) return;
    StateVector target = qubit_product(n, p.spec.alpha * phase(theta_sum),
                                       p.spec.beta * phase(-theta_sum));
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    target = p.spec.entangler->as_operator(all).apply(target);
    StateVector fin = ctx.state();
    rep.metrics["fidelity"] = overlap_abs(fin, target);
    rep.metrics["match"] = equal_up_to_global_phase(fin, target) ? 1.0 : 0.0;
    rep.final_state = fin;
  };
  return run_with_mode("graph-dist-phase", fn, mode, seed);
}

ProtocolResult run_stabilizer_broadcast(const StabilizerBroadcastParams& p, Mode mode,
                                        std::uint64_t seed) {
  validate_generators(p.generators);
  std::size_t n = p.generators[0].num_qubits();

  auto fn = [p, n](Context& ctx, BranchReport& rep) {
    StabSetup setup = stabilizer_setup(ctx, p.generators);
    if (p.abort) {
      for (const auto& c : setup.controls) {
        ctx.measure_in("alice", c, computational_basis(2), "Z measurement");
      }
      rep.metrics["abort"] = 1.0;
      if (!ctx.dead()) {
        rep.metrics["max_entropy"] = max_bipartite_entropy(ctx.state());
        rep.final_state = ctx.state();
      }
      return;
    }
    stabilizer_correct(ctx, setup, p.generators);
    if (ctx.dead()) return;
    stabilizer_metrics(ctx, rep, p.generators, n);
  };
  return run_with_mode("stab-broadcast", fn, mode, seed);
}

ProtocolResult teleport_phase_gate(const TeleportPhaseParams& p, Mode mode,
                                   std::uint64_t seed) {
  p.graph.validate();
  for (const auto& [v, theta] : p.angles) {
    (void)theta;
    if (v >= p.graph.num_vertices) throw std::invalid_argument("vertex not in graph");
  }

  auto fn = [p](Context& ctx, BranchReport& rep) {
    std::size_t n = p.graph.num_vertices;
    ctx.add_party("alice", Role::Sender);
    std::vector<std::string> labels, owners;
    for (std::size_t v = 0; v < n; ++v) {
      ctx.add_party(bob_name(v), Role::Receiver);
      labels.push_back("g" + std::to_string(v + 1));
      owners.push_back("alice");
    }
    ctx.set_state(graph_state(p.graph), labels, owners);

    Matrix cz = Matrix::Identity(4, 4);
    cz(3, 3) = -1.0;
    for (const auto& [v, theta] : p.angles) {
      (void)theta;
      std::string anc = "u" + std::to_string(v + 1);
      ctx.add_subsystem(anc, 2, "alice", ket_plus());
      ctx.apply_op("alice", {anc, labels[v]}, cz, "CZ coupling");
    }
    for (std::size_t v = 0; v < n; ++v) ctx.transfer(labels[v], bob_name(v));

    std::map<std::size_t, int> outcomes;
    std::vector<int> msgs;
    for (const auto& [v, theta] : p.angles) {
      std::string anc = "u" + std::to_string(v + 1);
      int s = ctx.measure_in("alice", anc, rotated_x_basis(theta),
                             "rotated X measurement");
      outcomes[v] = s;
      msgs.push_back(ctx.broadcast("alice", {static_cast<long>(v), s},
                                   "announce outcome"));
    }
    if (ctx.dead()) return;

    // Pre-correction state carries Z^s byproducts on the rotated target.
    StateVector decorated = graph_state(p.graph);
    StateVector corrected_target = decorated;
    for (const auto& [v, theta] : p.angles) {
      Matrix rot = Matrix::Zero(2, 2);
      rot(0, 0) = phase(theta);
      rot(1, 1) = phase(-theta);
      corrected_target = LocalOperator{{v}, rot}.apply(corrected_target);
      if (outcomes[v]) rot = pauli_z() * rot;
      decorated = LocalOperator{{v}, rot}.apply(decorated);
    }
    rep.metrics["decorated_match"] =
        equal_up_to_global_phase(ctx.state(), decorated) ? 1.0 : 0.0;

    for (const auto& [v, s] : outcomes) {
      if (s) ctx.apply_op(bob_name(v), {labels[v]}, pauli_z(), "Z correction", msgs);
    }
    StateVector fin = ctx.state();
    rep.metrics["fidelity"] = overlap_abs(fin, corrected_target);
    rep.final_state = fin;
  };
  return run_with_mode("phase-teleport", fn, mode, seed);
}

ProtocolResult run_graph_reduction(const GraphReductionParams& p, Mode mode,
                                   std::uint64_t seed) {
  p.graph.validate();
  std::size_t n = p.graph.num_vertices;
  if (p.keep.empty()) throw std::invalid_argument("must keep at least one vertex");
  std::vector<bool> kept(n, false);
  for (std::size_t v : p.keep) {
    if (v >= n) throw std::invalid_argument("kept vertex not in graph");
    kept[v] = true;
  }

  auto fn = [p, n, kept](Context& ctx, BranchReport& rep) {
    ctx.add_party("alice", Role::Sender);
    std::vector<std::string> ctrl(n), tgt(n);
    for (std::size_t v = 0; v < n; ++v) {
      ctx.add_party(bob_name(v), Role::Receiver);
      ctrl[v] = "a" + std::to_string(v + 1);
      ctx.add_subsystem(ctrl[v], 2, "alice", ket_plus());
    }
    Vector zero(2);
    zero << 1.0, 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      tgt[v] = "b" + std::to_string(v + 1);
      ctx.add_subsystem(tgt[v], 2, "alice", zero);
    }
    for (std::size_t v = 0; v < n; ++v) {
      PauliString kv = graph_stabilizer(p.graph, v);
      std::vector<std::size_t> support;
      std::string sub;
      for (std::size_t i = 0; i < n; ++i) {
        if (kv.letter(i) != 'I') {
          support.push_back(i);
          sub.push_back(kv.letter(i));
        }
      }
      Matrix mat = PauliString(1, sub).matrix();
      Eigen::Index w = mat.rows();
      Matrix gate = Matrix::Zero(2 * w, 2 * w);
      gate.topLeftCorner(w, w) = Matrix::Identity(w, w);
      gate.bottomRightCorner(w, w) = mat;
      std::vector<std::string> labels = {ctrl[v]};
      for (std::size_t i : support) labels.push_back(tgt[i]);
      ctx.apply_op("alice", labels, gate, "controlled stabilizer");
    }
    for (std::size_t v = 0; v < n; ++v) ctx.transfer(tgt[v], bob_name(v));

    std::vector<int> s(n, 0);
    std::vector<int> msgs;
    for (std::size_t v = 0; v < n; ++v) {
      if (kept[v]) {
        s[v] = ctx.measure_in("alice", ctrl[v], x_basis(), "X measurement");
      } else {
        s[v] = ctx.measure_in("alice", ctrl[v], computational_basis(2),
                              "Z measurement");
      }
      msgs.push_back(ctx.broadcast("alice", {static_cast<long>(v), s[v]},
                                   "announce outcome"));
    }
    if (ctx.dead()) return;

    // t(v): parity of Z outcomes on discarded neighbors; fix Z^{s+t} on kept.
    for (std::size_t v = 0; v < n; ++v) {
      if (!kept[v]) continue;
      int t = 0;
      for (std::size_t u : p.graph.neighbors(v)) {
        if (!kept[u]) t ^= s[u];
      }
      if ((s[v] ^ t) & 1) {
        ctx.apply_op(bob_name(v), {tgt[v]}, pauli_z(), "Z correction", msgs);
      }
    }

    // Target: reduced graph state on the kept block, computational leftovers
    // on the rest, in ascending vertex order.
    std::vector<std::size_t> kept_list, dropped;
    for (std::size_t v = 0; v < n; ++v) (kept[v] ? kept_list : dropped).push_back(v);
    Graph reduced;
    reduced.num_vertices = kept_list.size();
    auto pos = [&kept_list](std::size_t v) {
      return static_cast<std::size_t>(
          std::find(kept_list.begin(), kept_list.end(), v) - kept_list.begin());
    };
    for (const auto& [u, v] : p.graph.edges) {
      if (kept[u] && kept[v]) reduced.edges.emplace_back(pos(u), pos(v));
    }
    StateVector target = graph_state(reduced);
    if (!dropped.empty()) {
      std::vector<std::size_t> digits;
      for (std::size_t u : dropped) digits.push_back(static_cast<std::size_t>(s[u]));
      target = target.tensor(StateVector::computational(
          std::vector<std::size_t>(dropped.size(), 2), digits));
    }
    // Reorder [kept..., dropped...] -> ascending vertex order.
    std::vector<std::size_t> order;
    order.insert(order.end(), kept_list.begin(), kept_list.end());
    order.insert(order.end(), dropped.begin(), dropped.end());
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) {
      perm[i] = static_cast<std::size_t>(
          std::find(order.begin(), order.end(), i) - order.begin());
    }
    target = target.permuted(perm);

    StateVector fin = ctx.state();
    rep.metrics["fidelity"] = overlap_abs(fin, target);
    rep.metrics["match"] = equal_up_to_global_phase(fin, target) ? 1.0 : 0.0;
    rep.final_state = fin;
  };
  return run_with_mode("graph-reduce", fn, mode, seed);
}

ProtocolResult run_ghz_star(std::size_t num_leaves, Mode mode, std::uint64_t seed) {
  if (num_leaves < 2) throw std::invalid_argument("need at least two leaves");
  std::size_t n = num_leaves + 1;  // center is vertex 0
  Graph star;
  star.num_vertices = n;
  for (std::size_t l = 1; l < n; ++l) star.edges.emplace_back(0, l);
  std::vector<PauliString> gens;
  for (std::size_t v = 0; v < n; ++v) gens.push_back(graph_stabilizer(star, v));

  auto fn = [gens, n](Context& ctx, BranchReport& rep) {
    StabSetup setup = stabilizer_setup(ctx, gens);
    stabilizer_correct(ctx, setup, gens);
    if (ctx.dead()) return;
    for (std::size_t l = 1; l < n; ++l) {
      ctx.apply_op(bob_name(l), {setup.targets[l]}, hadamard(), "Hadamard");
    }
    StateVector fin = ctx.state();
    Vector ghz = Vector::Zero(static_cast<Eigen::Index>(std::size_t{1} << n));
    ghz(0) = 1.0;
    ghz(ghz.size() - 1) = 1.0;
    StateVector target(std::vector<std::size_t>(n, 2), ghz);
    rep.metrics["fidelity"] = overlap_abs(fin, target);
    double stab_min = 1.0;
    stab_min = std::min(stab_min, pauli_expectation(fin, PauliString(1, std::string(n, 'X'))));
    for (std::size_t i = 0; i + 1 < n; ++i) {
      std::string zz(n, 'I');
      zz[i] = 'Z';
      zz[i + 1] = 'Z';
      stab_min = std::min(stab_min, pauli_expectation(fin, PauliString(1, zz)));
    }
    rep.metrics["stab_min"] = stab_min;
    rep.final_state = fin;
  };
  return run_with_mode("ghz-star", fn, mode, seed);
}

ProtocolResult run_ghz_ring(std::size_t n, Mode mode, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("need at least two receivers");
  std::size_t verts = 2 * n;
  Graph ring;
  ring.num_vertices = verts;
  for (std::size_t v = 0; v < verts; ++v) ring.edges.emplace_back(v, (v + 1) % verts);

  auto fn = [ring, n, verts](Context& ctx, BranchReport& rep) {
    // Sites 1..2n: odd sites (even index) belong to the receivers, even sites
    // stay with the sender who X-measures them.
    ctx.add_party("alice", Role::Sender);
    std::vector<std::string> labels(verts), owners(verts);
    std::vector<std::string> odd_sites;
    for (std::size_t v = 0; v < verts; ++v) {
      labels[v] = "v" + std::to_string(v + 1);
      if (v % 2 == 0) {
        ctx.add_party(bob_name(v / 2), Role::Receiver);
        owners[v] = bob_name(v / 2);
        odd_sites.push_back(labels[v]);
      } else {
        owners[v] = "alice";
      }
    }
    ctx.set_state(graph_state(ring), labels, owners);

    std::vector<int> s;
    std::vector<int> msgs;
    for (std::size_t v = 1; v < verts; v += 2) {
      int sv = ctx.measure_in("alice", labels[v], x_basis(), "X measurement");
      s.push_back(sv);
      msgs.push_back(ctx.broadcast("alice", {sv}, "announce outcome"));
    }
    if (ctx.dead()) return;

    // GHZ generators on the receivers: X...X (sign fixed) and neighbor ZZ
    // pairs whose signs carry the measured even-site outcomes.
    std::vector<PauliString> gens = {PauliString(1, std::string(n, 'X'))};
    std::vector<int> flips = {0};
    for (std::size_t i = 0; i + 1 < n; ++i) {
      std::string zz(n, 'I');
      zz[i] = 'Z';
      zz[i + 1] = 'Z';
      gens.push_back(PauliString(1, zz));
      flips.push_back(s[i]);
    }
    PauliString fix = synthesize_pauli_correction(gens, flips);
    for (std::size_t i = 0; i < n; ++i) {
      if (fix.letter(i) == 'I') continue;
      ctx.apply_op(bob_name(i), {odd_sites[i]}, pauli_letter(fix.letter(i)),
                   "Pauli correction", msgs);
    }

    StateVector fin = ctx.state();
    Vector ghz = Vector::Zero(static_cast<Eigen::Index>(std::size_t{1} << n));
    ghz(0) = 1.0;
    ghz(ghz.size() - 1) = 1.0;
    StateVector target(std::vector<std::size_t>(n, 2), ghz);
    rep.metrics["fidelity"] = overlap_abs(fin, target);
    double stab_min = pauli_expectation(fin, PauliString(1, std::string(n, 'X')));
    for (std::size_t i = 0; i < n; ++i) {
      std::string zz(n, 'I');
      zz[i] = 'Z';
      zz[(i + 1) % n] = 'Z';
      if (n == 2 && i == 1) break;  // the two cyclic pairs coincide
      stab_min = std::min(stab_min, pauli_expectation(fin, PauliString(1, zz)));
    }
    rep.metrics["stab_min"] = stab_min;
    rep.final_state = fin;
  };
  return run_with_mode("ghz-ring", fn, mode, seed);
}

}  // namespace qbcast
