#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qbcast/protocols.hpp"

using namespace qbcast;

namespace {
constexpr double kPi = 3.14159265358979323846;
const cxd kA(0.6, 0.0), kB(0.0, 0.8);
}  // namespace

TEST_CASE("restricted phases succeed deterministically for every k") {
  for (std::size_t cap : {3u, 4u, 8u}) {
    for (std::size_t k = 0; k < cap; ++k) {
      PhaseRestrictedParams p{k, cap, 2, kA, kB, 1};
      ProtocolResult res = send_phase_restricted(p, Mode::Enumerate);
      CHECK(std::abs(res.total_probability() - 1.0) < kChainTol);
      CHECK(res.min_metric("fidelity") == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(res.min_metric("d_fidelity") == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("the restricted encoding state survives repeated uses") {
  PhaseRestrictedParams p{2, 4, 1, kA, kB, 2};
  ProtocolResult res = send_phase_restricted(p, Mode::Enumerate);
  CHECK(std::abs(res.total_probability() - 1.0) < kChainTol);
  CHECK(res.min_metric("fidelity") == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.min_metric("d_fidelity") == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("destructive general phase succeeds with probability (K-2)/K") {
  for (std::size_t cap : {3u, 5u, 8u}) {
    PhaseGeneralParams p{0.77, cap, kA, kB, PhaseVariant::Destructive, 1};
    ProtocolResult res = send_phase_general(p, Mode::Enumerate);
    CHECK(std::abs(res.total_probability() - 1.0) < kChainTol);
    double sp = res.metric_probability("success");
    double want = (static_cast<double>(cap) - 2.0) / static_cast<double>(cap);
    CHECK(std::abs(sp - want) < 1e-12);
    for (const auto& br : res.branches) {
      if (br.zero_prob || br.metrics.at("success") < 0.5) continue;
      CHECK(br.metrics.at("fidelity") == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("projector variant keeps the same first-use success rate") {
  PhaseGeneralParams p{-1.1, 8, kA, kB, PhaseVariant::Projector, 1};
  ProtocolResult res = send_phase_general(p, Mode::Enumerate);
  CHECK(std::abs(res.metric_probability("success") - 6.0 / 8.0) < 1e-12);
  CHECK(res.min_metric("fidelity") == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("projector second use succeeds with conditional rate (K-4)/(K-2)") {
  std::size_t cap = 8;
  PhaseGeneralParams p{0.4, cap, kA, kB, PhaseVariant::Projector, 2};
  ProtocolResult res = send_phase_general(p, Mode::Enumerate);
  CHECK(std::abs(res.total_probability() - 1.0) < kChainTol);
  // both uses succeed with ((K-2)/K) * ((K-4)/(K-2)) = (K-4)/K
  double first = 0.0, both = 0.0;
  for (const auto& br : res.branches) {
    if (br.zero_prob || br.metrics.at("success") < 0.5) continue;
    first += br.probability;
    if (br.metrics.at("success2") > 0.5) {
      both += br.probability;
      CHECK(br.metrics.at("fidelity2") == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK(std::abs(first - 6.0 / 8.0) < 1e-12);
  CHECK(std::abs(both - 4.0 / 8.0) < 1e-12);
}

TEST_CASE("approximate variant matches its closed-form fidelity") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> uni(0.05, 0.95);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int trial = 0; trial < 20; ++trial) {
    double a2 = uni(rng);
    cxd alpha = std::polar(std::sqrt(a2), ang(rng));
    cxd beta = std::polar(std::sqrt(1.0 - a2), ang(rng));
    std::size_t cap = 3 + static_cast<std::size_t>(trial % 6);
    double theta = ang(rng);
    PhaseGeneralParams p{theta, cap, alpha, beta, PhaseVariant::Approximate, 1};
    PhaseApproxOutputs out = phase_approx_outputs(p);
    double want = phase_fidelity_closed_form(alpha, beta, theta, cap);
    CHECK(std::abs(out.fidelity_d - want) < 1e-10);
    CHECK(std::abs(out.rho_b.mat.trace().real() - 1.0) < kAlgebraTol);
    CHECK(std::abs(out.rho_d.mat.trace().real() - 1.0) < kAlgebraTol);
  }
}

TEST_CASE("cyclic angles make the approximate variant exact") {
  std::size_t cap = 6;
  double theta = 2.0 * kPi / static_cast<double>(cap);  // e^{iK theta} = 1
  PhaseGeneralParams p{theta, cap, kA, kB, PhaseVariant::Approximate, 1};
  PhaseApproxOutputs out = phase_approx_outputs(p);
  CHECK(out.fidelity_d == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sampled general phase reports an honest success flag") {
  PhaseGeneralParams p{0.9, 5, kA, kB, PhaseVariant::Destructive, 1};
  int hits = 0, n = 400;
  for (int t = 0; t < n; ++t) {
    ProtocolResult res =
        send_phase_general(p, Mode::Sample, 4000 + static_cast<std::uint64_t>(t));
    REQUIRE(res.branches.size() == 1);
    const auto& br = res.branches[0];
    if (br.metrics.at("success") > 0.5) {
      ++hits;
      CHECK(br.metrics.at("fidelity") == doctest::Approx(1.0));
    }
  }
  double rate = static_cast<double>(hits) / n;
  double want = 3.0 / 5.0;
  CHECK(std::abs(rate - want) < 4.0 * std::sqrt(want * (1.0 - want) / n));
}
