#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qbcast/protocols.hpp"

using namespace qbcast;

TEST_CASE("trine angles and anti-trine impossibility") {
  CHECK(trine_angle(0) == doctest::Approx(0.0));
  CHECK(trine_angle(1) == doctest::Approx(-M_PI / 3.0));
  CHECK(trine_angle(2) == doctest::Approx(M_PI / 3.0));
  for (int sent = 0; sent < 3; ++sent) {
    AuthDistribution d = auth_round_distribution(sent);
    CHECK(std::abs(d.single[static_cast<std::size_t>(sent)]) < 1e-14);
    double total = 0.0;
    for (int o = 0; o < 3; ++o) {
      total += d.single[static_cast<std::size_t>(o)];
      if (o != sent)
        CHECK(d.single[static_cast<std::size_t>(o)] == doctest::Approx(0.5).epsilon(1e-12));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("two receivers share the exact joint outcome law") {
  for (int sent = 0; sent < 3; ++sent) {
    AuthDistribution d = auth_round_distribution(sent);
    double total = 0.0, agree = 0.0;
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b) {
        double p = d.joint[a][b];
        total += p;
        if (a == b) agree += p;
        if (static_cast<int>(a) == sent || static_cast<int>(b) == sent)
          CHECK(std::abs(p) < 1e-14);
      }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    // both receivers land on one of the two allowed labels independently
    CHECK(agree == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("authentication runs never produce a forbidden match") {
  AuthParams p{500, 2, 2024};
  AuthReport rep = run_authentication(p);
  REQUIRE(rep.sent.size() == 500);
  REQUIRE(rep.received.size() == 2);
  CHECK(rep.never_matched);
  for (const auto& stream : rep.received)
    for (std::size_t r = 0; r < 500; ++r) CHECK(stream[r] != rep.sent[r]);
  // pair agreement has mean 1/2
  double sigma = std::sqrt(0.25 / 500.0);
  CHECK(std::abs(rep.pair_agreement_rate - 0.5) < 4.0 * sigma);
  // deterministic under the same seed
  AuthReport rep2 = run_authentication(p);
  CHECK(rep2.sent == rep.sent);
  CHECK(rep2.received == rep.received);
}

TEST_CASE("key bits follow the hop direction") {
  for (int sent = 0; sent < 3; ++sent) {
    CHECK(qkd_bit_from_hop(sent, (sent + 1) % 3) == 0);
    CHECK(qkd_bit_from_hop(sent, (sent + 2) % 3) == 1);
    CHECK(qkd_bit_from_hop(sent, sent) == -1);
  }
  CHECK(qkd_bit_from_hop(2, 0) == 0);
  CHECK(qkd_bit_from_hop(2, 1) == 1);
}

TEST_CASE("qkd keys agree exactly and sift near the expected rate") {
  for (QkdStrategy strat : {QkdStrategy::Povm, QkdStrategy::Projective}) {
    QkdParams p{2000, 1, strat, 77};
    QkdReport rep = run_qkd_pbc(p);
    CHECK(rep.disagreements == 0);
    REQUIRE(rep.alice_keys.size() == 1);
    CHECK(rep.alice_keys[0] == rep.bob_keys[0]);
    CHECK(rep.alice_keys[0].size() == rep.sifted[0]);
    double want = (strat == QkdStrategy::Povm) ? 0.5 : 0.25;
    double rate = static_cast<double>(rep.sifted[0]) / 2000.0;
    double sigma = std::sqrt(want * (1.0 - want) / 2000.0);
    CHECK(std::abs(rate - want) < 4.0 * sigma);
  }
}

TEST_CASE("qkd supports several receivers with independent keys") {
  QkdParams p{800, 3, QkdStrategy::Povm, 5};
  QkdReport rep = run_qkd_pbc(p);
  REQUIRE(rep.alice_keys.size() == 3);
  REQUIRE(rep.bob_keys.size() == 3);
  for (std::size_t b = 0; b < 3; ++b) {
    CHECK(rep.alice_keys[b] == rep.bob_keys[b]);
    CHECK(rep.sifted[b] > 0);
  }
  CHECK(rep.disagreements == 0);
}
