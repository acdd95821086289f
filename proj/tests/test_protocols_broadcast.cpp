#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qbcast/protocols.hpp"

using namespace qbcast;

namespace {
const double kHalf = 1.0 / std::sqrt(2.0);

void check_perfect(const ProtocolResult& res, std::size_t expected_branches) {
  REQUIRE(res.branches.size() == expected_branches);
  CHECK(std::abs(res.total_probability() - 1.0) < kChainTol);
  for (const auto& br : res.branches) {
    if (br.zero_prob) continue;
    CHECK(br.metrics.at("fidelity") == doctest::Approx(1.0).epsilon(1e-12));
  }
}
}  // namespace

TEST_CASE("basic broadcast reaches every receiver exactly") {
  BbpParams p{kHalf, kHalf, 0.9, 2};
  // the sender's (N+1)-ary Fourier measurement is the only branching point
  ProtocolResult res = run_bbp(p, Mode::Enumerate);
  check_perfect(res, 3);
  CHECK(res.metric_probability("match") == doctest::Approx(1.0));
  for (const auto& br : res.branches)
    CHECK(br.probability == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("broadcast works for unbalanced amplitudes and many receivers") {
  for (std::size_t n : {1u, 3u, 4u}) {
    BbpParams p{cxd(0.6), cxd(0.0, 0.8), -1.3, n};
    ProtocolResult res = run_bbp(p, Mode::Enumerate);
    check_perfect(res, n + 1);
  }
}

TEST_CASE("broadcast sampling lands on a perfect branch") {
  BbpParams p{cxd(0.28), std::sqrt(cxd(1.0 - 0.28 * 0.28)), 2.2, 3};
  ProtocolResult res = run_bbp(p, Mode::Sample, 99);
  REQUIRE(res.branches.size() == 1);
  CHECK(res.branches[0].metrics.at("fidelity") == doctest::Approx(1.0));
}

TEST_CASE("rotated-basis broadcast handles arbitrary input states") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Vector psi(2);
    psi << cxd(uni(rng), uni(rng)), cxd(uni(rng), uni(rng));
    psi.normalize();
    BbpRotatedParams p{hadamard(), psi, uni(rng)};
    ProtocolResult r = run_bbp_rotated(p, Mode::Enumerate);
    check_perfect(r, 3);
    for (const auto& br : r.branches)
      CHECK(br.metrics.at("template_match") == doctest::Approx(1.0));
  }
}

TEST_CASE("multisender angles add over active senders only") {
  MultisenderParams p;
  p.num_senders = 3;
  p.num_receivers = 2;
  p.alpha = cxd(0.6);
  p.beta = cxd(0.8);
  p.thetas = {0.3, -0.7, 1.9};
  p.active = {true, false, true};
  ProtocolResult res = run_multisender(p, Mode::Enumerate);
  // every sender measures a 3-level qudit
  check_perfect(res, 27);

  // the inactive sender's angle must not matter
  p.thetas[1] = 123.456;
  ProtocolResult res2 = run_multisender(p, Mode::Enumerate);
  check_perfect(res2, 27);
}

TEST_CASE("adding a sender reproduces the larger template") {
  for (std::size_t m : {1u, 2u}) {
    AddSenderParams p{m, 2, cxd(0.48), std::sqrt(cxd(1.0 - 0.48 * 0.48))};
    ProtocolResult res = add_sender(p, Mode::Enumerate);
    CHECK(std::abs(res.total_probability() - 1.0) < kChainTol);
    CHECK(res.min_metric("fidelity") == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("deleting a sender reproduces the smaller template") {
  for (std::size_t which : {0u, 1u}) {
    DeleteSenderParams p{2, 2, kHalf, cxd(0.0, kHalf), which};
    ProtocolResult res = delete_sender(p, Mode::Enumerate);
    CHECK(std::abs(res.total_probability() - 1.0) < kChainTol);
    CHECK(res.min_metric("fidelity") == doctest::Approx(1.0).epsilon(1e-12));
  }
  // deleting the only sender leaves the bare receiver product state
  DeleteSenderParams solo{1, 3, cxd(0.6), cxd(0.8), 0};
  ProtocolResult res = delete_sender(solo, Mode::Enumerate);
  CHECK(res.min_metric("fidelity") == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("add-then-delete roundtrip is the identity on the template") {
  AddSenderParams p{1, 3, cxd(0.0, 0.6), cxd(0.8)};
  ProtocolResult res = run_add_delete_roundtrip(p, Mode::Enumerate);
  CHECK(std::abs(res.total_probability() - 1.0) < kChainTol);
  CHECK(res.min_metric("fidelity") == doctest::Approx(1.0).epsilon(1e-12));

  ProtocolResult sampled = run_add_delete_roundtrip(p, Mode::Sample, 5);
  REQUIRE(sampled.branches.size() == 1);
  CHECK(sampled.branches[0].metrics.at("fidelity") == doctest::Approx(1.0));
}
