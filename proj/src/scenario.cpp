#include "qbcast/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>

#include "qbcast/mbqc.hpp"

namespace qbcast {
namespace {

using nlohmann::json;

// Numbers pass through a fixed 17-significant-digit rendering so reports are
// reproducible byte for byte.
json num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return json::parse(buf);
}

json cnum(cxd v) { return json::array({num(v.real()), num(v.imag())}); }

cxd as_complex(const json& j) {
  if (j.is_number()) return cxd(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2) return cxd(j[0].get<double>(), j[1].get<double>());
  throw std::invalid_argument("expected a number or [re, im] pair");
}

double get_d(const json& p, const std::string& key, double fallback) {
  return p.contains(key) ? p.at(key).get<double>() : fallback;
}

std::size_t get_u(const json& p, const std::string& key, std::size_t fallback) {
  return p.contains(key) ? p.at(key).get<std::size_t>() : fallback;
}

bool get_b(const json& p, const std::string& key, bool fallback) {
  return p.contains(key) ? p.at(key).get<bool>() : fallback;
}

cxd get_c(const json& p, const std::string& key, cxd fallback) {
  return p.contains(key) ? as_complex(p.at(key)) : fallback;
}

std::vector<double> get_dlist(const json& p, const std::string& key,
                              std::vector<double> fallback) {
  if (!p.contains(key)) return fallback;
  return p.at(key).get<std::vector<double>>();
}

Vector parse_vec(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = as_complex(j[i]);
  return v;
}

Graph parse_graph(const json& p) {
  Graph g;
  g.num_vertices = get_u(p, "vertices", 0);
  if (p.contains("edges")) {
    for (const auto& e : p.at("edges"))
      g.edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
  }
  if (g.num_vertices == 0)
    for (const auto& [u, v] : g.edges) g.num_vertices = std::max({g.num_vertices, u + 1, v + 1});
  g.validate();
  return g;
}

json event_to_json(const Event& ev) {
  json j{{"seq", ev.seq}, {"party", ev.party}, {"what", ev.description}};
  switch (ev.kind) {
    case Event::Kind::Operation: j["kind"] = "op"; break;
    case Event::Kind::Measurement: j["kind"] = "measure"; break;
    case Event::Kind::Message: j["kind"] = "message"; break;
    case Event::Kind::Note: j["kind"] = "note"; break;
  }
  if (!ev.subsystems.empty()) j["subsystems"] = ev.subsystems;
  if (ev.kind == Event::Kind::Measurement) {
    j["outcome"] = ev.outcome;
    j["probability"] = num(ev.probability);
  }
  if (ev.kind == Event::Kind::Message) {
    j["from"] = ev.msg_from;
    if (!ev.msg_to.empty()) j["to"] = ev.msg_to;
    j["payload"] = ev.payload;
    if (!ev.depends_on.empty()) j["depends_on"] = ev.depends_on;
  }
  return j;
}

json branch_record(const BranchReport& br, bool transcript, long trial = -1) {
  json j{{"record", "branch"}};
  if (trial >= 0) j["trial"] = trial;
  j["outcomes"] = br.outcomes;
  j["probability"] = num(br.probability);
  if (br.zero_prob) j["zero_prob"] = true;
  json m = json::object();
  for (const auto& [k, v] : br.metrics) m[k] = num(v);
  j["metrics"] = m;
  if (transcript && !br.zero_prob) {
    json t = json::array();
    for (const auto& ev : br.events) t.push_back(event_to_json(ev));
    j["transcript"] = t;
  }
  return j;
}

// A verdict entry is re-derived from the stored raw value each time the
// report is assembled; nothing boolean is carried over from the runners.
void add_verdict(json& verdicts, const std::string& name, double value,
                 const std::string& op, double threshold) {
  bool pass = false;
  if (op == ">=") pass = value >= threshold;
  else if (op == "<=") pass = value <= threshold;
  else if (op == "==") pass = value == threshold;
  else if (op == "abs<=") pass = std::abs(value) <= threshold;
  else throw std::logic_error("unknown verdict op");
  verdicts[name] = json{{"value", num(value)}, {"op", op},
                        {"threshold", num(threshold)}, {"pass", pass}};
}

bool verdicts_pass(const json& verdicts) {
  return std::all_of(verdicts.begin(), verdicts.end(),
                     [](const json& v) { return v.at("pass").get<bool>(); });
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t trial) {
  auto rng = party_rng(master, "trial-" + std::to_string(trial));
  return rng();
}

using Runner = std::function<ProtocolResult(Mode, std::uint64_t)>;
using Judge = std::function<void(const std::vector<BranchReport>&, double total_prob, json&)>;

// Shared driver for every scenario that wraps a protocol runner: enumerate
// runs once exhaustively, sample runs `trials` independent seeded branches.
Report drive(const ScenarioConfig& cfg, bool transcript, const Runner& run,
             const Judge& judge) {
  Report rep;
  std::vector<BranchReport> branches;
  double total_prob = 0.0;
  if (cfg.mode == Mode::Enumerate) {
    ProtocolResult res = run(Mode::Enumerate, cfg.seed);
    total_prob = res.total_probability();
    for (const auto& br : res.branches) {
      rep.records.push_back(branch_record(br, transcript));
      if (!br.zero_prob) branches.push_back(br);
    }
    rep.summary["branches"] = rep.records.size();
    rep.summary["total_probability"] = num(total_prob);
  } else {
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      ProtocolResult res = run(Mode::Sample, trial_seed(cfg.seed, t));
      for (const auto& br : res.branches) {
        rep.records.push_back(branch_record(br, transcript, static_cast<long>(t)));
        branches.push_back(br);
      }
    }
    rep.summary["trials_run"] = cfg.trials;
    total_prob = 1.0;  // sampled branches are not exhaustive
  }
  // Aggregate every metric seen on a live branch.
  std::set<std::string> keys;
  for (const auto& br : branches)
    for (const auto& [k, v] : br.metrics) keys.insert(k);
  json agg = json::object();
  for (const auto& k : keys) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& br : branches) {
      auto it = br.metrics.find(k);
      if (it == br.metrics.end()) continue;
      lo = std::min(lo, it->second);
      hi = std::max(hi, it->second);
    }
    agg[k] = json{{"min", num(lo)}, {"max", num(hi)}};
  }
  rep.summary["metrics"] = agg;
  json verdicts = json::object();
  judge(branches, total_prob, verdicts);
  if (cfg.mode == Mode::Enumerate)
    add_verdict(verdicts, "total_probability", total_prob - 1.0, "abs<=", kChainTol);
  rep.summary["verdicts"] = verdicts;
  rep.passed = verdicts_pass(verdicts);
  rep.summary["pass"] = rep.passed;
  return rep;
}

double metric_min(const std::vector<BranchReport>& branches, const std::string& key,
                  double when_absent = 1.0) {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& br : branches) {
    auto it = br.metrics.find(key);
    if (it != br.metrics.end()) lo = std::min(lo, it->second);
  }
  return std::isfinite(lo) ? lo : when_absent;
}

double metric_weighted(const std::vector<BranchReport>& branches, const std::string& key) {
  double s = 0.0;
  for (const auto& br : branches) {
    auto it = br.metrics.find(key);
    if (it != br.metrics.end()) s += br.probability * it->second;
  }
  return s;
}

Judge fidelity_judge(std::vector<std::string> keys = {"fidelity"}, double tol = kChainTol) {
  return [keys, tol](const std::vector<BranchReport>& branches, double, json& verdicts) {
    for (const auto& k : keys)
      add_verdict(verdicts, k + "_min", metric_min(branches, k), ">=", 1.0 - tol);
  };
}

const double kHalf = 1.0 / std::sqrt(2.0);

Report run_bbp_scenario(const ScenarioConfig& cfg, bool transcript) {
  BbpParams p;
  p.alpha = get_c(cfg.params, "alpha", kHalf);
  p.beta = get_c(cfg.params, "beta", kHalf);
  p.theta = get_d(cfg.params, "theta", 0.0);
  p.num_receivers = get_u(cfg.params, "receivers", 2);
  return drive(cfg, transcript, [p](Mode m, std::uint64_t s) { return run_bbp(p, m, s); },
               fidelity_judge({"fidelity", "match"}));
}

Report run_bbp_rotated_scenario(const ScenarioConfig& cfg, bool transcript) {
  BbpRotatedParams p;
  p.t_gate = cfg.params.contains("t")
                 ? [&] {
                     Matrix t(2, 2);
                     const auto& rows = cfg.params.at("t");
                     for (int r = 0; r < 2; ++r)
                       for (int c = 0; c < 2; ++c) t(r, c) = as_complex(rows[r][c]);
                     return t;
                   }()
                 : hadamard();
  p.psi = cfg.params.contains("psi") ? parse_vec(cfg.params.at("psi"))
                                     : (Vector(2) << cxd(0.6), cxd(0.8)).finished();
  p.theta = get_d(cfg.params, "theta", 0.0);
  return drive(cfg, transcript,
               [p](Mode m, std::uint64_t s) { return run_bbp_rotated(p, m, s); },
               fidelity_judge({"fidelity", "match", "template_match"}));
}

Report run_multisender_scenario(const ScenarioConfig& cfg, bool transcript) {
  MultisenderParams p;
  p.num_senders = get_u(cfg.params, "senders", 2);
  p.num_receivers = get_u(cfg.params, "receivers", 2);
  p.alpha = get_c(cfg.params, "alpha", kHalf);
  p.beta = get_c(cfg.params, "beta", kHalf);
  p.thetas = get_dlist(cfg.params, "thetas", std::vector<double>(p.num_senders, 0.0));
  if (cfg.params.contains("active"))
    for (const auto& a : cfg.params.at("active")) p.active.push_back(a.get<bool>());
  return drive(cfg, transcript,
               [p](Mode m, std::uint64_t s) { return run_multisender(p, m, s); },
               fidelity_judge({"fidelity", "match"}));
}

Report run_add_sender_scenario(const ScenarioConfig& cfg, bool transcript, bool roundtrip) {
  AddSenderParams p;
  p.num_senders = get_u(cfg.params, "senders", 1);
  p.num_receivers = get_u(cfg.params, "receivers", 2);
  p.alpha = get_c(cfg.params, "alpha", kHalf);
  p.beta = get_c(cfg.params, "beta", kHalf);
  Runner run = roundtrip
                   ? Runner([p](Mode m, std::uint64_t s) { return run_add_delete_roundtrip(p, m, s); })
                   : Runner([p](Mode m, std::uint64_t s) { return add_sender(p, m, s); });
  return drive(cfg, transcript, run, fidelity_judge());
}

Report run_delete_sender_scenario(const ScenarioConfig& cfg, bool transcript) {
  DeleteSenderParams p;
  p.num_senders = get_u(cfg.params, "senders", 2);
  p.num_receivers = get_u(cfg.params, "receivers", 2);
  p.alpha = get_c(cfg.params, "alpha", kHalf);
  p.beta = get_c(cfg.params, "beta", kHalf);
  p.which = get_u(cfg.params, "which", 0);
  return drive(cfg, transcript,
               [p](Mode m, std::uint64_t s) { return delete_sender(p, m, s); },
               fidelity_judge());
}

Report run_phase_restricted_scenario(const ScenarioConfig& cfg, bool transcript) {
  PhaseRestrictedParams p;
  p.k = get_u(cfg.params, "k", 1);
  p.cap = get_u(cfg.params, "K", 3);
  p.num_receivers = get_u(cfg.params, "receivers", 2);
  p.alpha = get_c(cfg.params, "alpha", kHalf);
  p.beta = get_c(cfg.params, "beta", kHalf);
  p.uses = get_u(cfg.params, "uses", 1);
  return drive(cfg, transcript,
               [p](Mode m, std::uint64_t s) { return send_phase_restricted(p, m, s); },
               fidelity_judge({"fidelity", "d_fidelity"}, 1e-12));
}

PhaseGeneralParams parse_phase_general(const json& params, PhaseVariant fallback) {
  PhaseGeneralParams p;
  p.theta = get_d(params, "theta", 0.7);
  p.cap = get_u(params, "K", 8);
  p.alpha = get_c(params, "alpha", kHalf);
  p.beta = get_c(params, "beta", kHalf);
  p.uses = get_u(params, "uses", 1);
  p.variant = fallback;
  if (params.contains("variant")) {
    std::string v = params.at("variant").get<std::string>();
    if (v == "destructive") p.variant = PhaseVariant::Destructive;
    else if (v == "projector") p.variant = PhaseVariant::Projector;
    else if (v == "approximate") p.variant = PhaseVariant::Approximate;
    else throw std::invalid_argument("variant must be destructive|projector|approximate");
  }
  return p;
}

Report run_phase_general_scenario(const ScenarioConfig& cfg, bool transcript) {
  PhaseGeneralParams p = parse_phase_general(cfg.params, PhaseVariant::Destructive);
  double cap = static_cast<double>(p.cap);
  bool exact = cfg.mode == Mode::Enumerate;
  auto sp = std::make_shared<double>(0.0);
  Judge judge = [p, cap, exact, sp](const std::vector<BranchReport>& branches, double,
                                    json& verdicts) {
    add_verdict(verdicts, "fidelity_min", metric_min(branches, "fidelity"), ">=",
                1.0 - kChainTol);
    if (exact) {
      *sp = metric_weighted(branches, "success");
    } else {  // sampled runs report the observed success rate, no exact verdict
      double hits = 0.0, n = 0.0;
      for (const auto& br : branches) {
        auto it = br.metrics.find("success");
        if (it == br.metrics.end()) continue;
        hits += it->second;
        n += 1.0;
      }
      *sp = n > 0.0 ? hits / n : 0.0;
      return;
    }
    add_verdict(verdicts, "success_probability_exact", *sp - (cap - 2.0) / cap, "abs<=", 1e-12);
    if (p.variant == PhaseVariant::Projector && p.uses == 2) {
      add_verdict(verdicts, "fidelity2_min", metric_min(branches, "fidelity2"), ">=",
                  1.0 - kChainTol);
      // Second-use success conditioned on first-use success.
      double joint = metric_weighted(branches, "success2");
      add_verdict(verdicts, "success2_probability_exact",
                  joint / *sp - (cap - 4.0) / (cap - 2.0), "abs<=", 1e-12);
    }
  };
  Report rep = drive(cfg, transcript,
                     [p](Mode m, std::uint64_t s) { return send_phase_general(p, m, s); },
                     judge);
  rep.summary["success_probability"] = num(*sp);
  return rep;
}

Report run_phase_approx_scenario(const ScenarioConfig& cfg, bool) {
  PhaseGeneralParams p = parse_phase_general(cfg.params, PhaseVariant::Approximate);
  p.variant = PhaseVariant::Approximate;
  PhaseApproxOutputs out = phase_approx_outputs(p);
  double closed = phase_fidelity_closed_form(p.alpha, p.beta, p.theta, p.cap);
  Report rep;
  json rec{{"record", "approx"}, {"fidelity_d", num(out.fidelity_d)},
           {"closed_form", num(closed)}};
  json rb = json::array();
  for (int r = 0; r < out.rho_b.mat.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < out.rho_b.mat.cols(); ++c) row.push_back(cnum(out.rho_b.mat(r, c)));
    rb.push_back(row);
  }
  rec["rho_b"] = rb;
  rep.records.push_back(rec);
  rep.summary["fidelity_d"] = num(out.fidelity_d);
  rep.summary["closed_form"] = num(closed);
  json verdicts = json::object();
  add_verdict(verdicts, "closed_form_match", out.fidelity_d - closed, "abs<=", kChainTol);
  rep.summary["verdicts"] = verdicts;
  rep.passed = verdicts_pass(verdicts);
  rep.summary["pass"] = rep.passed;
  return rep;
}

Report run_auth_scenario(const ScenarioConfig& cfg, bool) {
  AuthParams p;
  p.rounds = get_u(cfg.params, "rounds", 100);
  p.num_receivers = get_u(cfg.params, "receivers", 2);
  p.seed = cfg.seed;
  AuthReport ar = run_authentication(p);
  Report rep;
  for (std::size_t r = 0; r < ar.sent.size(); ++r) {
    json rec{{"record", "round"}, {"round", r}, {"sent", ar.sent[r]}};
    json outs = json::array();
    for (const auto& recv : ar.received) outs.push_back(recv[r]);
    rec["received"] = outs;
    rep.records.push_back(rec);
  }
  // Exact single-round law, independent of the sampled run.
  double p_match = 0.0;
  for (int label = 0; label < 3; ++label) {
    AuthDistribution d = auth_round_distribution(label);
    p_match = std::max(p_match, d.single[static_cast<std::size_t>(label)]);
  }
  rep.summary["rounds"] = ar.sent.size();
  rep.summary["pair_agreement_rate"] = num(ar.pair_agreement_rate);
  json verdicts = json::object();
  add_verdict(verdicts, "never_matched", ar.never_matched ? 1.0 : 0.0, "==", 1.0);
  add_verdict(verdicts, "match_probability_zero", p_match, "abs<=", 1e-12);
  double n = static_cast<double>(ar.sent.size());
  double sigma = 0.5 / std::sqrt(n);
  add_verdict(verdicts, "pair_agreement_3sigma", ar.pair_agreement_rate - 0.5, "abs<=",
              3.0 * sigma);
  rep.summary["verdicts"] = verdicts;
  rep.passed = verdicts_pass(verdicts);
  rep.summary["pass"] = rep.passed;
  return rep;
}

Report run_qkd_scenario(const ScenarioConfig& cfg, bool) {
  QkdParams p;
  p.rounds = get_u(cfg.params, "rounds", 1000);
  p.num_receivers = get_u(cfg.params, "receivers", 1);
  p.seed = cfg.seed;
  std::string strat = cfg.params.contains("strategy")
                          ? cfg.params.at("strategy").get<std::string>()
                          : "povm";
  if (strat == "povm") p.strategy = QkdStrategy::Povm;
  else if (strat == "projective") p.strategy = QkdStrategy::Projective;
  else throw std::invalid_argument("strategy must be povm|projective");
  QkdReport qr = run_qkd_pbc(p);
  Report rep;
  double n = static_cast<double>(qr.rounds);
  json fracs = json::array();
  double worst_dev = 0.0;
  // POVM sifts half the rounds; the projective strategy sifts a quarter
  // (basis pick 2/3 relevant x collapse 3/4 informative x announcement 1/2).
  double expect = p.strategy == QkdStrategy::Povm ? 0.5 : 0.25;
  double sigma = std::sqrt(expect * (1.0 - expect) / n);
  for (std::size_t b = 0; b < qr.sifted.size(); ++b) {
    double f = static_cast<double>(qr.sifted[b]) / n;
    fracs.push_back(num(f));
    worst_dev = std::max(worst_dev, std::abs(f - expect));
    json rec{{"record", "bob"}, {"bob", b}, {"sifted", qr.sifted[b]},
             {"sifted_fraction", num(f)}};
    rep.records.push_back(rec);
  }
  rep.summary["rounds"] = qr.rounds;
  rep.summary["sifted_fractions"] = fracs;
  rep.summary["expected_fraction"] = num(expect);
  rep.summary["disagreements"] = qr.disagreements;
  json verdicts = json::object();
  add_verdict(verdicts, "zero_disagreement", static_cast<double>(qr.disagreements), "==", 0.0);
  add_verdict(verdicts, "sifted_fraction_3sigma", worst_dev, "<=", 3.0 * sigma);
  rep.summary["verdicts"] = verdicts;
  rep.passed = verdicts_pass(verdicts);
  rep.summary["pass"] = rep.passed;
  return rep;
}

Report run_graph_dist_scenario(const ScenarioConfig& cfg, bool transcript) {
  GraphDistPhaseParams p;
  p.spec.num_senders = get_u(cfg.params, "senders", 1);
  p.spec.num_receivers = get_u(cfg.params, "receivers", 3);
  p.spec.alpha = get_c(cfg.params, "alpha", kHalf);
  p.spec.beta = get_c(cfg.params, "beta", kHalf);
  std::string kind = cfg.params.contains("entangler")
                         ? cfg.params.at("entangler").get<std::string>()
                         : "cz";
  if (kind == "cz") {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    if (cfg.params.contains("edges"))
      for (const auto& e : cfg.params.at("edges"))
        edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
    else
      for (std::size_t i = 0; i + 1 < p.spec.num_receivers; ++i) edges.emplace_back(i, i + 1);
    p.spec.entangler = DiagonalPhaseGate::cz_product(p.spec.num_receivers, edges);
  } else if (kind == "ccz") {
    if (p.spec.num_receivers < 3) throw std::invalid_argument("ccz needs >= 3 receivers");
    p.spec.entangler = DiagonalPhaseGate::ccz(p.spec.num_receivers, 0, 1, 2);
  } else {
    throw std::invalid_argument("entangler must be cz|ccz");
  }
  p.thetas = get_dlist(cfg.params, "thetas", std::vector<double>(p.spec.num_senders, 0.0));
  p.abort = get_b(cfg.params, "abort", false);
  Judge judge = p.abort
                    ? Judge([](const std::vector<BranchReport>& branches, double, json& v) {
                        add_verdict(v, "all_aborted", metric_min(branches, "abort", 0.0), "==", 1.0);
                      })
                    : fidelity_judge();
  return drive(cfg, transcript,
               [p](Mode m, std::uint64_t s) { return run_graph_dist_phase(p, m, s); }, judge);
}

Report run_stab_broadcast_scenario(const ScenarioConfig& cfg, bool transcript) {
  StabilizerBroadcastParams p;
  if (!cfg.params.contains("generators"))
    throw std::invalid_argument("stab-broadcast requires a generators list");
  for (const auto& g : cfg.params.at("generators"))
    p.generators.push_back(PauliString::parse(g.get<std::string>()));
  p.abort = get_b(cfg.params, "abort", false);
  Judge judge = p.abort
                    ? Judge([](const std::vector<BranchReport>& branches, double, json& v) {
                        double worst = 0.0;
                        for (const auto& br : branches) {
                          auto it = br.metrics.find("max_entropy");
                          if (it != br.metrics.end()) worst = std::max(worst, it->second);
                        }
                        add_verdict(v, "max_entropy", worst, "<=", kChainTol);
                      })
                    : fidelity_judge({"fidelity", "stab_min"});
  return drive(cfg, transcript,
               [p](Mode m, std::uint64_t s) { return run_stabilizer_broadcast(p, m, s); },
               judge);
}

Report run_phase_teleport_scenario(const ScenarioConfig& cfg, bool transcript) {
  TeleportPhaseParams p;
  p.graph = parse_graph(cfg.params);
  if (p.graph.num_vertices == 0) {
    p.graph.num_vertices = 3;
    p.graph.edges = {{0, 1}, {1, 2}};
  }
  if (cfg.params.contains("angles"))
    for (const auto& [k, v] : cfg.params.at("angles").items())
      p.angles[std::stoul(k)] = v.get<double>();
  else
    p.angles[0] = 0.3;
  return drive(cfg, transcript,
               [p](Mode m, std::uint64_t s) { return teleport_phase_gate(p, m, s); },
               fidelity_judge({"fidelity", "decorated_match"}));
}

Report run_graph_reduce_scenario(const ScenarioConfig& cfg, bool transcript) {
  GraphReductionParams p;
  p.graph = parse_graph(cfg.params);
  if (p.graph.num_vertices == 0) {
    p.graph.num_vertices = 4;
    p.graph.edges = {{0, 1}, {1, 2}, {2, 3}};
  }
  p.keep = cfg.params.contains("keep")
               ? cfg.params.at("keep").get<std::vector<std::size_t>>()
               : std::vector<std::size_t>{0, 1};
  return drive(cfg, transcript,
               [p](Mode m, std::uint64_t s) { return run_graph_reduction(p, m, s); },
               fidelity_judge());
}

Report run_ghz_scenario(const ScenarioConfig& cfg, bool transcript, bool ring) {
  std::size_t n = get_u(cfg.params, ring ? "n" : "leaves", ring ? 3 : 3);
  Runner run = ring ? Runner([n](Mode m, std::uint64_t s) { return run_ghz_ring(n, m, s); })
                    : Runner([n](Mode m, std::uint64_t s) { return run_ghz_star(n, m, s); });
  return drive(cfg, transcript, run, fidelity_judge({"fidelity", "stab_min"}));
}

// --- MBQC scenarios -------------------------------------------------------

StateVector parse_two_qubit(const json& p) {
  Vector amps(4);
  if (p.contains("psi")) amps = parse_vec(p.at("psi"));
  else amps << cxd(0.6), cxd(0.0), cxd(0.8), cxd(0.0);
  return make_state({2, 2}, amps);
}

WireFlags parse_flags(const json& p, const std::string& xk, const std::string& zk) {
  WireFlags f;
  f.x = static_cast<int>(get_u(p, xk, 0));
  f.z = static_cast<int>(get_u(p, zk, 0));
  return f;
}

json mbqc_record(const LogicalResult& r, double fid, long trial) {
  json j{{"record", "branch"}};
  if (trial >= 0) j["trial"] = trial;
  j["w"] = r.w;
  j["flags"] = json{{"top", {r.top.x, r.top.z}}, {"bottom", {r.bottom.x, r.bottom.z}}};
  j["probability"] = num(r.probability);
  j["metrics"] = json{{"fidelity", num(fid)}};
  return j;
}

Report run_mbqc_block_scenario(const ScenarioConfig& cfg, bool, bool rotation) {
  StateVector psi = parse_two_qubit(cfg.params);
  WireFlags top = parse_flags(cfg.params, "top_x", "top_z");
  WireFlags bottom = parse_flags(cfg.params, "bottom_x", "bottom_z");
  std::array<double, 3> ta{}, ba{};
  if (rotation) {
    auto t = get_dlist(cfg.params, "top_angles", {0.3, -0.5, 1.1});
    auto b = get_dlist(cfg.params, "bottom_angles", {-0.2, 0.9, 0.4});
    if (t.size() != 3 || b.size() != 3)
      throw std::invalid_argument("angle lists must have three entries");
    std::copy(t.begin(), t.end(), ta.begin());
    std::copy(b.begin(), b.end(), ba.begin());
  }
  Matrix logical;
  if (rotation) {
    logical = Matrix(4, 4);
    Matrix rt = euler_rotation(ta[0], ta[1], ta[2]);
    Matrix rb = euler_rotation(ba[0], ba[1], ba[2]);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) logical.block(2 * i, 2 * j, 2, 2) = rt(i, j) * rb;
  } else {
    logical = cnot_matrix();
  }
  // Undo the input byproducts first: the block computes U X^x Z^z.
  StateVector target = strip_byproducts(psi, top, bottom);
  target = LocalOperator{{0, 1}, logical}.apply(target);

  auto run_one = [&](const BlockPlan& plan) {
    return rotation ? run_rotation_block(psi, ta, ba, top, bottom, plan)
                    : run_cnot_block(psi, top, bottom, plan);
  };
  Report rep;
  double min_fid = 1.0, total = 0.0;
  if (cfg.mode == Mode::Enumerate) {
    for (int wmask = 0; wmask < 256; ++wmask) {
      std::vector<int> w(8);
      for (int i = 0; i < 8; ++i) w[i] = (wmask >> i) & 1;
      BlockPlan plan;
      plan.forced_w = &w;
      LogicalResult r = run_one(plan);
      double fid = overlap_abs(strip_byproducts(r.output, r.top, r.bottom), target);
      min_fid = std::min(min_fid, fid);
      // A forced run pins each of the 8 sender outcomes to one of two equally
      // likely values with the same logical content; the w-class weight is
      // 2^8 times the single-path probability.
      r.probability *= 256.0;
      total += r.probability;
      rep.records.push_back(mbqc_record(r, fid, -1));
    }
    rep.summary["branches"] = 256;
    rep.summary["total_probability"] = num(total);
  } else {
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      std::mt19937_64 rng(trial_seed(cfg.seed, t));
      BlockPlan plan;
      plan.rng = &rng;
      LogicalResult r = run_one(plan);
      double fid = overlap_abs(strip_byproducts(r.output, r.top, r.bottom), target);
      min_fid = std::min(min_fid, fid);
      rep.records.push_back(mbqc_record(r, fid, static_cast<long>(t)));
    }
    total = 1.0;
    rep.summary["trials_run"] = cfg.trials;
  }
  json verdicts = json::object();
  add_verdict(verdicts, "fidelity_min", min_fid, ">=", 1.0 - kChainTol);
  if (cfg.mode == Mode::Enumerate)
    add_verdict(verdicts, "total_probability", total - 1.0, "abs<=", kChainTol);
  rep.summary["verdicts"] = verdicts;
  rep.passed = verdicts_pass(verdicts);
  rep.summary["pass"] = rep.passed;
  return rep;
}

Report run_mbqc_program_scenario(const ScenarioConfig& cfg, bool) {
  StateVector psi = parse_two_qubit(cfg.params);
  std::vector<BlockSpec> blocks;
  if (cfg.params.contains("blocks")) {
    for (const auto& b : cfg.params.at("blocks")) {
      BlockSpec spec;
      std::string kind = b.at("kind").get<std::string>();
      if (kind == "cnot") {
        spec.kind = BlockSpec::Kind::Cnot;
      } else if (kind == "rotation") {
        spec.kind = BlockSpec::Kind::Rotation;
        auto t = b.at("top").get<std::vector<double>>();
        auto bo = b.at("bottom").get<std::vector<double>>();
        if (t.size() != 3 || bo.size() != 3)
          throw std::invalid_argument("rotation block needs three angles per wire");
        std::copy(t.begin(), t.end(), spec.top_angles.begin());
        std::copy(bo.begin(), bo.end(), spec.bottom_angles.begin());
      } else {
        throw std::invalid_argument("block kind must be cnot|rotation");
      }
      blocks.push_back(spec);
    }
  } else {
    BlockSpec rot;
    rot.kind = BlockSpec::Kind::Rotation;
    rot.top_angles = {0.3, -0.5, 1.1};
    rot.bottom_angles = {-0.2, 0.9, 0.4};
    if (cfg.mode == Mode::Enumerate) blocks = {rot};
    else blocks = {rot, BlockSpec{}};
  }
  Report rep;
  double min_fid = 1.0;
  if (cfg.mode == Mode::Enumerate && blocks.size() > 1)
    throw std::invalid_argument("enumerate mode supports single-block programs only; use sample");
  if (cfg.mode == Mode::Enumerate) {
    for (int wmask = 0; wmask < 256; ++wmask) {
      std::vector<int> w(8);
      for (int i = 0; i < 8; ++i) w[i] = (wmask >> i) & 1;
      ProgramResult r = run_program(blocks, psi, std::vector<std::vector<int>>{w});
      StateVector want = LocalOperator{{0, 1}, r.target}.apply(psi);
      double fid = overlap_abs(strip_byproducts(r.output, r.top, r.bottom), want);
      min_fid = std::min(min_fid, fid);
      r.probability *= 256.0;  // w-class weight, see the block scenarios
      json rec{{"record", "branch"}, {"w", r.w}, {"probability", num(r.probability)},
               {"metrics", json{{"fidelity", num(fid)}}}};
      rep.records.push_back(rec);
    }
    rep.summary["branches"] = 256;
  } else {
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      ProgramResult r = run_program(blocks, psi, trial_seed(cfg.seed, t));
      StateVector want = LocalOperator{{0, 1}, r.target}.apply(psi);
      double fid = overlap_abs(strip_byproducts(r.output, r.top, r.bottom), want);
      min_fid = std::min(min_fid, fid);
      json rec{{"record", "branch"}, {"trial", t}, {"w", r.w},
               {"probability", num(r.probability)},
               {"metrics", json{{"fidelity", num(fid)}}}};
      rep.records.push_back(rec);
    }
    rep.summary["trials_run"] = cfg.trials;
  }
  json verdicts = json::object();
  add_verdict(verdicts, "fidelity_min", min_fid, ">=", 1.0 - kChainTol);
  rep.summary["verdicts"] = verdicts;
  rep.passed = verdicts_pass(verdicts);
  rep.summary["pass"] = rep.passed;
  return rep;
}

}  // namespace

ScenarioConfig parse_config(const json& j) {
  ScenarioConfig c;
  c.scenario = j.at("scenario").get<std::string>();
  if (j.contains("mode")) {
    std::string m = j.at("mode").get<std::string>();
    if (m == "enumerate") c.mode = Mode::Enumerate;
    else if (m == "sample") c.mode = Mode::Sample;
    else throw std::invalid_argument("mode must be enumerate|sample");
  }
  c.seed = j.contains("seed") ? j.at("seed").get<std::uint64_t>() : 0;
  c.trials = j.contains("trials") ? j.at("trials").get<std::size_t>() : 1;
  if (j.contains("params")) c.params = j.at("params");
  return c;
}

json config_to_json(const ScenarioConfig& c) {
  return json{{"scenario", c.scenario},
              {"mode", c.mode == Mode::Enumerate ? "enumerate" : "sample"},
              {"seed", c.seed},
              {"trials", c.trials},
              {"params", c.params}};
}

const std::vector<ScenarioInfo>& list_scenarios() {
  static const std::vector<ScenarioInfo> catalog = [] {
    auto schema = [](std::initializer_list<std::pair<const char*, const char*>> items) {
      json s = json::object();
      for (const auto& [k, v] : items) s[k] = v;
      return s;
    };
    std::vector<ScenarioInfo> v;
    v.push_back({"bbp",
                 "One sender broadcasts alpha e^{i theta}|0> + beta e^{-i theta}|1> to N receivers.",
                 schema({{"alpha", "complex, default 1/sqrt2"},
                         {"beta", "complex, default 1/sqrt2"},
                         {"theta", "angle, default 0"},
                         {"receivers", "N >= 1, default 2"}})});
    v.push_back({"bbp-rotated",
                 "Broadcast in the rotated basis {T|0>, T|1>} of an arbitrary input qubit.",
                 schema({{"t", "2x2 unitary, default Hadamard"},
                         {"psi", "input qubit amplitudes, default [0.6, 0.8]"},
                         {"theta", "angle, default 0"}})});
    v.push_back({"multisender",
                 "M senders contribute individual angles; the receivers correct to the summed angle.",
                 schema({{"senders", "M, default 2"},
                         {"receivers", "N, default 2"},
                         {"alpha", "complex"},
                         {"beta", "complex"},
                         {"thetas", "one angle per sender"},
                         {"active", "per-sender booleans, default all"}})});
    v.push_back({"add-sender",
                 "Grow an M-sender template to M+1 senders via a maximally entangled qudit pair.",
                 schema({{"senders", "M, default 1"},
                         {"receivers", "N, default 2"},
                         {"alpha", "complex"},
                         {"beta", "complex"}})});
    v.push_back({"delete-sender",
                 "Remove one sender by a Fourier measurement plus receiver corrections.",
                 schema({{"senders", "M, default 2"},
                         {"receivers", "N, default 2"},
                         {"which", "sender index, default 0"},
                         {"alpha", "complex"},
                         {"beta", "complex"}})});
    v.push_back({"phase-restricted",
                 "Deterministic phase distribution for angles 2 pi k/K, leaving the K-level encoding qudit intact.",
                 schema({{"k", "integer angle index"},
                         {"K", "qudit dimension, default 3"},
                         {"receivers", "N, default 2"},
                         {"uses", "1 or 2"},
                         {"alpha", "complex"},
                         {"beta", "complex"}})});
    v.push_back({"phase-general",
                 "Probabilistic distribution of an arbitrary angle from a K-level encoding state (success (K-2)/K).",
                 schema({{"theta", "angle"},
                         {"K", "levels >= 3, default 8"},
                         {"variant", "destructive|projector"},
                         {"uses", "1 or 2 (projector only)"},
                         {"alpha", "complex"},
                         {"beta", "complex"}})});
    v.push_back({"phase-approx",
                 "Approximate variant: the encoding qudit is reused unmeasured; its fidelity follows a closed form.",
                 schema({{"theta", "angle"},
                         {"K", "levels >= 3, default 8"},
                         {"uses", "1 or 2"},
                         {"alpha", "complex"},
                         {"beta", "complex"}})});
    v.push_back({"auth",
                 "Authentication: random trine broadcasts; receivers' anti-trine outcomes never equal the sent label.",
                 schema({{"rounds", "sampled rounds, default 100"},
                         {"receivers", "default 2"}})});
    v.push_back({"qkd",
                 "Three-state key distribution: announced hop sent->announced maps to the shared bit.",
                 schema({{"rounds", "default 1000"},
                         {"receivers", "default 1"},
                         {"strategy", "povm|projective"}})});
    v.push_back({"graph-dist-phase",
                 "Broadcast with a diagonal entangler (CZ product or CCZ) on the receiver block.",
                 schema({{"senders", "M, default 1"},
                         {"receivers", "N, default 3"},
                         {"entangler", "cz|ccz"},
                         {"edges", "CZ edge list, default a path"},
                         {"thetas", "one angle per sender"},
                         {"abort", "bool, default false"}})});
    v.push_back({"stab-broadcast",
                 "Distribute the joint +1 eigenstate of commuting Pauli generators via control qubits.",
                 schema({{"generators", "signed Pauli strings, e.g. [\"+XX\", \"+ZZ\"]"},
                         {"abort", "bool, default false"}})});
    v.push_back({"phase-teleport",
                 "Teleport Z rotations onto vertices of a distributed graph state via CZ-coupled ancillas.",
                 schema({{"vertices", "vertex count"},
                         {"edges", "graph edge list"},
                         {"angles", "map vertex -> angle"}})});
    v.push_back({"graph-reduce",
                 "Distribute a graph state while disconnecting the vertices outside the kept set.",
                 schema({{"vertices", "vertex count"},
                         {"edges", "graph edge list"},
                         {"keep", "kept vertex list"}})});
    v.push_back({"ghz-star",
                 "GHZ distribution from a star graph state with Hadamards on the leaves.",
                 schema({{"leaves", "N >= 2, default 3"}})});
    v.push_back({"ghz-ring",
                 "GHZ_n from a 2n-ring graph state by X-measuring alternate sites.",
                 schema({{"n", ">= 2, default 3"}})});
    v.push_back({"mbqc-cnot",
                 "One brickwork block running a CNOT with adaptive angles; byproducts tracked per wire.",
                 schema({{"psi", "4 input amplitudes"},
                         {"top_x", "input flag"}, {"top_z", "input flag"},
                         {"bottom_x", "input flag"}, {"bottom_z", "input flag"}})});
    v.push_back({"mbqc-rotation",
                 "One brickwork block running per-wire Euler rotations e^{igZ} e^{ibX} e^{iaZ}.",
                 schema({{"psi", "4 input amplitudes"},
                         {"top_angles", "[a, b, g]"},
                         {"bottom_angles", "[a, b, g]"}})});
    v.push_back({"mbqc-program",
                 "A block sequence (cnot/rotation) with byproduct flags threaded between blocks.",
                 schema({{"psi", "4 input amplitudes"},
                         {"blocks", "list of {kind, top, bottom}"}})});
    return v;
  }();
  return catalog;
}

std::string Report::to_jsonl() const {
  std::ostringstream out;
  for (const auto& r : records) out << r.dump() << "\n";
  out << summary.dump() << "\n";
  return out.str();
}

Report run_scenario(const ScenarioConfig& config, bool verbose_transcript) {
  bool known = std::any_of(list_scenarios().begin(), list_scenarios().end(),
                           [&](const ScenarioInfo& s) { return s.name == config.scenario; });
  if (!known) throw std::invalid_argument("unknown scenario: " + config.scenario);

  Report rep;
  const std::string& s = config.scenario;
  if (s == "bbp") rep = run_bbp_scenario(config, verbose_transcript);
  else if (s == "bbp-rotated") rep = run_bbp_rotated_scenario(config, verbose_transcript);
  else if (s == "multisender") rep = run_multisender_scenario(config, verbose_transcript);
  else if (s == "add-sender") rep = run_add_sender_scenario(config, verbose_transcript, false);
  else if (s == "delete-sender") rep = run_delete_sender_scenario(config, verbose_transcript);
  else if (s == "phase-restricted") rep = run_phase_restricted_scenario(config, verbose_transcript);
  else if (s == "phase-general") rep = run_phase_general_scenario(config, verbose_transcript);
  else if (s == "phase-approx") rep = run_phase_approx_scenario(config, verbose_transcript);
  else if (s == "auth") rep = run_auth_scenario(config, verbose_transcript);
  else if (s == "qkd") rep = run_qkd_scenario(config, verbose_transcript);
  else if (s == "graph-dist-phase") rep = run_graph_dist_scenario(config, verbose_transcript);
  else if (s == "stab-broadcast") rep = run_stab_broadcast_scenario(config, verbose_transcript);
  else if (s == "phase-teleport") rep = run_phase_teleport_scenario(config, verbose_transcript);
  else if (s == "graph-reduce") rep = run_graph_reduce_scenario(config, verbose_transcript);
  else if (s == "ghz-star") rep = run_ghz_scenario(config, verbose_transcript, false);
  else if (s == "ghz-ring") rep = run_ghz_scenario(config, verbose_transcript, true);
  else if (s == "mbqc-cnot") rep = run_mbqc_block_scenario(config, verbose_transcript, false);
  else if (s == "mbqc-rotation") rep = run_mbqc_block_scenario(config, verbose_transcript, true);
  else if (s == "mbqc-program") rep = run_mbqc_program_scenario(config, verbose_transcript);
  else throw std::invalid_argument("unknown scenario: " + s);

  json head{{"scenario", config.scenario},
            {"mode", config.mode == Mode::Enumerate ? "enumerate" : "sample"},
            {"seed", config.seed},
            {"trials", config.trials},
            {"params", config.params}};
  head["record"] = "summary";
  for (auto& [k, v] : rep.summary.items()) head[k] = v;
  rep.summary = std::move(head);
  return rep;
}

}  // namespace qbcast
