#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qbcast/protocols.hpp"

using namespace qbcast;

namespace {
const double kHalf = 1.0 / std::sqrt(2.0);

void check_perfect(const ProtocolResult& res) {
  CHECK(std::abs(res.total_probability() - 1.0) < kChainTol);
  CHECK(res.min_metric("fidelity") == doctest::Approx(1.0).epsilon(1e-12));
}
}  // namespace

TEST_CASE("entangled broadcast distributes graph-decorated templates") {
  BroadcastSpec spec;
  spec.num_senders = 1;
  spec.num_receivers = 3;
  spec.alpha = kHalf;
  spec.beta = kHalf;
  spec.entangler = DiagonalPhaseGate::cz_product(3, {{0, 1}, {1, 2}});
  GraphDistPhaseParams p{spec, {0.4}, false};
  check_perfect(run_graph_dist_phase(p, Mode::Enumerate));
}

TEST_CASE("ccz entangler also commutes with the corrections") {
  BroadcastSpec spec;
  spec.num_senders = 2;
  spec.num_receivers = 3;
  spec.alpha = cxd(0.6);
  spec.beta = cxd(0.0, 0.8);
  spec.entangler = DiagonalPhaseGate::ccz(3, 0, 1, 2);
  GraphDistPhaseParams p{spec, {0.9, -0.2}, false};
  check_perfect(run_graph_dist_phase(p, Mode::Enumerate));
}

TEST_CASE("aborted distribution leaves the receivers a known product state") {
  BroadcastSpec spec;
  spec.num_senders = 1;
  spec.num_receivers = 2;
  spec.alpha = kHalf;
  spec.beta = kHalf;
  spec.entangler = DiagonalPhaseGate::cz_product(2, {{0, 1}});
  GraphDistPhaseParams p{spec, {0.0}, true};
  ProtocolResult res = run_graph_dist_phase(p, Mode::Enumerate);
  CHECK(std::abs(res.total_probability() - 1.0) < kChainTol);
  CHECK(res.metric_probability("abort") == doctest::Approx(1.0));
}

TEST_CASE("stabilizer broadcast pins every generator to +1") {
  std::vector<std::vector<PauliString>> sets = {
      {PauliString::parse("+XX"), PauliString::parse("+ZZ")},
      {PauliString::parse("+XZI"), PauliString::parse("+ZXZ"),
       PauliString::parse("+IZX")},
      {PauliString::parse("+XXXX"), PauliString::parse("+ZZII"),
       PauliString::parse("+IZZI"), PauliString::parse("+IIZZ")},
  };
  for (const auto& gens : sets) {
    StabilizerBroadcastParams p{gens, false};
    ProtocolResult res = run_stabilizer_broadcast(p, Mode::Enumerate);
    check_perfect(res);
    CHECK(res.min_metric("stab_min") == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("aborted stabilizer broadcast leaves zero entanglement") {
  StabilizerBroadcastParams p{
      {PauliString::parse("+XZ"), PauliString::parse("+ZX")}, true};
  ProtocolResult res = run_stabilizer_broadcast(p, Mode::Enumerate);
  CHECK(std::abs(res.total_probability() - 1.0) < kChainTol);
  CHECK(res.max_metric("max_entropy") < kChainTol);
}

TEST_CASE("phase teleportation applies the requested Z rotations") {
  Graph path{3, {{0, 1}, {1, 2}}};
  TeleportPhaseParams p{path, {{0, 0.7}, {2, -1.1}}};
  check_perfect(teleport_phase_gate(p, Mode::Enumerate));

  Graph ring{4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}};
  TeleportPhaseParams q{ring, {{1, 2.0}}};
  check_perfect(teleport_phase_gate(q, Mode::Enumerate));
}

TEST_CASE("pre-correction teleportation branches carry the Z^s decoration") {
  Graph path{2, {{0, 1}}};
  TeleportPhaseParams p{path, {{0, 0.5}}};
  ProtocolResult res = teleport_phase_gate(p, Mode::Enumerate);
  for (const auto& br : res.branches) {
    if (br.zero_prob) continue;
    CHECK(br.metrics.at("decorated_match") == doctest::Approx(1.0));
  }
}

TEST_CASE("graph reduction yields the induced subgraph state") {
  Graph square{4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}};
  GraphReductionParams p{square, {0, 1}};
  check_perfect(run_graph_reduction(p, Mode::Enumerate));

  Graph star{4, {{0, 1}, {0, 2}, {0, 3}}};
  GraphReductionParams q{star, {1, 2, 3}};  // cut the hub: fully disconnected
  check_perfect(run_graph_reduction(q, Mode::Enumerate));
}

TEST_CASE("ghz distribution via star and ring graphs") {
  for (std::size_t n : {2u, 3u, 4u}) {
    ProtocolResult star = run_ghz_star(n, Mode::Enumerate);
    check_perfect(star);
    CHECK(star.min_metric("stab_min") == doctest::Approx(1.0).epsilon(1e-10));
  }
  for (std::size_t n : {2u, 3u}) {
    ProtocolResult ring = run_ghz_ring(n, Mode::Enumerate);
    check_perfect(ring);
  }
}

TEST_CASE("sampled graph protocols hit perfect branches too") {
  ProtocolResult star = run_ghz_star(3, Mode::Sample, 11);
  REQUIRE(star.branches.size() == 1);
  CHECK(star.branches[0].metrics.at("fidelity") == doctest::Approx(1.0));

  Graph path{3, {{0, 1}, {1, 2}}};
  GraphReductionParams p{path, {0, 1}};
  ProtocolResult red = run_graph_reduction(p, Mode::Sample, 12);
  REQUIRE(red.branches.size() == 1);
  CHECK(red.branches[0].metrics.at("fidelity") == doctest::Approx(1.0));
}
