#include <cmath>
#include <stdexcept>

#include "qbcast/protocols.hpp"

namespace qbcast {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kHalf = 0.70710678118654752440;  // 1/sqrt(2)

std::string bob_name(std::size_t l) { return "bob" + std::to_string(l + 1); }
std::string bob_label(std::size_t l) { return "b" + std::to_string(l + 1); }

// Broadcast the trine state with the given label to n receivers, then run the
// per-receiver measurement step. Outcome layout: [fourier m, per-bob outcome].
ProtocolFn trine_round(int label, std::size_t n,
                       const std::function<int(Context&, std::size_t,
                                               const std::string&,
                                               const std::string&)>& measure_step) {
  return [label, n, measure_step](Context& ctx, BranchReport& rep) {
    std::size_t d = n + 1;
    ctx.add_party("alice", Role::Sender);
    std::vector<std::string> labels = {"a"};
    std::vector<std::string> owners = {"alice"};
    for (std::size_t l = 0; l < n; ++l) {
      ctx.add_party(bob_name(l), Role::Receiver);
      labels.push_back(bob_label(l));
      owners.push_back(bob_name(l));
    }
    BroadcastSpec spec{1, n, kHalf, kHalf, std::nullopt};
    ctx.set_state(make_broadcast_state(spec), labels, owners);
    ctx.apply_op("alice", {"a"}, sender_phase_gate(d, n, trine_angle(label)).mat,
                 "phase gate");
    int m = ctx.measure_in("alice", "a", fourier_basis(d), "Fourier measurement");
    int msg = ctx.broadcast("alice", {m}, "announce outcome");
    std::vector<int> outs;
    for (std::size_t l = 0; l < n; ++l) {
      ctx.apply_op(bob_name(l), {bob_label(l)}, correction_gate(d, m).mat,
                   "phase correction", {msg});
      outs.push_back(measure_step(ctx, l, bob_name(l), bob_label(l)));
    }
    rep.metrics["round_ok"] = ctx.dead() ? 0.0 : 1.0;
    for (std::size_t l = 0; l < n; ++l) {
      rep.metrics["out" + std::to_string(l)] = outs[l];
    }
  };
}

int povm_step(Context& ctx, std::size_t, const std::string& party,
              const std::string& label) {
  return ctx.measure_povm(party, label, anti_trine_povm(), "anti-trine POVM");
}

}  // namespace

double trine_angle(int label) {
  switch (label) {
    case 0: return 0.0;
    case 1: return -kPi / 3.0;
    case 2: return kPi / 3.0;
    default: throw std::invalid_argument("trine label must be 0, 1 or 2");
  }
}

AuthReport run_authentication(const AuthParams& p) {
  if (p.rounds < 1) throw std::invalid_argument("need at least one round");
  if (p.num_receivers < 1) throw std::invalid_argument("need at least one receiver");
  AuthReport rep;
  rep.received.resize(p.num_receivers);
  std::mt19937_64 alice = party_rng(p.seed, "alice-classical");
  std::mt19937_64 seeder = party_rng(p.seed, "round-seeds");
  std::uniform_int_distribution<int> pick(0, 2);
  std::size_t agree = 0;
  for (std::size_t r = 0; r < p.rounds; ++r) {
    int j = pick(alice);
    ProtocolResult res = sample_protocol(
        "auth-round", trine_round(j, p.num_receivers, povm_step), seeder());
    const std::vector<int>& outs = res.branches[0].outcomes;
    rep.sent.push_back(j);
    for (std::size_t l = 0; l < p.num_receivers; ++l) {
      int o = outs[1 + l];
      rep.received[l].push_back(o);
      if (o == j) rep.never_matched = false;
    }
    if (p.num_receivers >= 2 && outs[1] == outs[2]) ++agree;
  }
  if (p.num_receivers >= 2) {
    rep.pair_agreement_rate = static_cast<double>(agree) / static_cast<double>(p.rounds);
  }
  return rep;
}

AuthDistribution auth_round_distribution(int sent_label) {
  ProtocolResult res =
      enumerate_protocol("auth-round", trine_round(sent_label, 2, povm_step));
  AuthDistribution dist{};
  for (const auto& b : res.branches) {
    if (b.zero_prob) continue;
    int o1 = b.outcomes.at(1), o2 = b.outcomes.at(2);
    dist.single[static_cast<std::size_t>(o1)] += b.probability;
    dist.joint[static_cast<std::size_t>(o1)][static_cast<std::size_t>(o2)] +=
        b.probability;
  }
  return dist;
}

int qkd_bit_from_hop(int sent, int announced) {
  if (announced == (sent + 1) % 3) return 0;
  if (announced == (sent + 2) % 3) return 1;
  return -1;
}

QkdReport run_qkd_pbc(const QkdParams& p) {
  if (p.rounds < 1) throw std::invalid_argument("need at least one round");
  if (p.num_receivers < 1) throw std::invalid_argument("need at least one receiver");
  QkdReport rep;
  rep.rounds = p.rounds;
  rep.alice_keys.resize(p.num_receivers);
  rep.bob_keys.resize(p.num_receivers);
  rep.sifted.assign(p.num_receivers, 0);

  std::mt19937_64 alice = party_rng(p.seed, "alice-classical");
  std::mt19937_64 seeder = party_rng(p.seed, "round-seeds");
  std::vector<std::mt19937_64> bob_rngs;
  for (std::size_t l = 0; l < p.num_receivers; ++l) {
    bob_rngs.push_back(party_rng(p.seed, bob_name(l) + "-classical"));
  }
  std::uniform_int_distribution<int> pick3(0, 2);
  std::uniform_int_distribution<int> pick2(1, 2);

  TrineSet trine = trine_states();

  for (std::size_t r = 0; r < p.rounds; ++r) {
    int j = pick3(alice);
    int k = (j + pick2(alice)) % 3;  // announced: a label Alice did not send

    // Projective strategy: each Bob picks his basis label up front.
    std::vector<int> basis_pick(p.num_receivers, -1);
    std::function<int(Context&, std::size_t, const std::string&, const std::string&)>
        step;
    if (p.strategy == QkdStrategy::Projective) {
      for (std::size_t l = 0; l < p.num_receivers; ++l) {
        basis_pick[l] = pick3(bob_rngs[l]);
      }
      step = [&trine, &basis_pick](Context& ctx, std::size_t l,
                                   const std::string& party, const std::string& label) {
        MeasurementBasis basis;
        basis.vectors = {trine.trine[static_cast<std::size_t>(basis_pick[l])],
                         trine.anti_trine[static_cast<std::size_t>(basis_pick[l])]};
        return ctx.measure_in(party, label, basis, "trine/anti-trine basis");
      };
    } else {
      step = povm_step;
    }

    ProtocolResult res =
        sample_protocol("qkd-round", trine_round(j, p.num_receivers, step), seeder());
    const std::vector<int>& outs = res.branches[0].outcomes;

    for (std::size_t l = 0; l < p.num_receivers; ++l) {
      int ruled_out;  // a label this Bob knows was not sent
      if (p.strategy == QkdStrategy::Projective) {
        if (outs[1 + l] != 1) continue;  // trine outcome: announce failure
        ruled_out = basis_pick[l];
      } else {
        ruled_out = outs[1 + l];
      }
      if (ruled_out == k) continue;  // nothing to infer
      int inferred = 3 - k - ruled_out;
      int bob_bit = qkd_bit_from_hop(inferred, k);
      int alice_bit = qkd_bit_from_hop(j, k);
      rep.bob_keys[l].push_back(bob_bit);
      rep.alice_keys[l].push_back(alice_bit);
      ++rep.sifted[l];
      if (bob_bit != alice_bit) ++rep.disagreements;
    }
  }
  return rep;
}

}  // namespace qbcast
