#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qbcast/library.hpp"

using namespace qbcast;

namespace {
constexpr double kPi = 3.14159265358979323846;
const double kHalf = 1.0 / std::sqrt(2.0);
}  // namespace

TEST_CASE("fourier basis is orthonormal with the right phases") {
  for (std::size_t d : {2u, 3u, 5u}) {
    MeasurementBasis f = fourier_basis(d);
    REQUIRE(f.arity() == d);
    CHECK(f.is_orthonormal());
    for (std::size_t n = 0; n < d; ++n)
      for (std::size_t k = 0; k < d; ++k) {
        cxd want = std::polar(1.0 / std::sqrt(static_cast<double>(d)),
                              2.0 * kPi * static_cast<double>(n * k) / static_cast<double>(d));
        CHECK(std::abs(f.vectors[n](static_cast<Eigen::Index>(k)) - want) < kAlgebraTol);
      }
  }
}

TEST_CASE("rotated x basis matches e^{-i theta X} columns") {
  double theta = 0.37;
  MeasurementBasis b = rotated_x_basis(theta);
  CHECK(b.is_orthonormal());
  // e^{-i theta X} = cos(theta) I - i sin(theta) X
  CHECK(std::abs(b.vectors[0](0) - cxd(std::cos(theta))) < kAlgebraTol);
  CHECK(std::abs(b.vectors[0](1) - cxd(0.0, -std::sin(theta))) < kAlgebraTol);
  CHECK(std::abs(b.vectors[1](0) - cxd(0.0, -std::sin(theta))) < kAlgebraTol);
  CHECK(std::abs(b.vectors[1](1) - cxd(std::cos(theta))) < kAlgebraTol);
}

TEST_CASE("sender phase gate diag e^{i(2k-N)theta}") {
  std::size_t n = 3, d = 4;
  double theta = 0.81;
  LocalOperator g = sender_phase_gate(d, n, theta);
  REQUIRE(g.mat.rows() == 4);
  for (std::size_t k = 0; k < d; ++k) {
    cxd want = std::polar(1.0, (2.0 * static_cast<double>(k) - static_cast<double>(n)) * theta);
    CHECK(std::abs(g.mat(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) - want) <
          kAlgebraTol);
  }
  CHECK_THROWS(sender_phase_gate(3, 3, theta));  // d must be N+1
}

TEST_CASE("correction gate phases |0> by e^{2 pi i s/d}") {
  LocalOperator c = correction_gate(3, 2);
  CHECK(std::abs(c.mat(0, 0) - std::polar(1.0, 4.0 * kPi / 3.0)) < kAlgebraTol);
  CHECK(std::abs(c.mat(1, 1) - cxd(1.0)) < kAlgebraTol);
  // correction undoes the Fourier projection phase on the broadcast template
  LocalOperator c0 = correction_gate(5, 5);  // full cycle = identity
  CHECK((c0.mat - Matrix::Identity(2, 2)).norm() < kAlgebraTol);
}

TEST_CASE("controlled shift acts modularly") {
  LocalOperator cs = controlled_shift(3, 3, 1);
  StateVector st = StateVector::computational({3, 3}, {2, 2});
  StateVector out = cs.apply(st);
  CHECK(std::abs(out.amp(2 * 3 + 1) - cxd(1.0)) < kAlgebraTol);  // |2,2> -> |2,1>
  LocalOperator back = controlled_shift(3, 3, -1);
  StateVector round = back.apply(out);
  CHECK(overlap_abs(round, st) > 1.0 - kAlgebraTol);
}

TEST_CASE("dicke states are symmetric and normalized") {
  StateVector d = dicke_state(3, 1);  // one |0>, two |1>
  double want = 1.0 / std::sqrt(3.0);
  CHECK(std::abs(d.amp(0b011) - want) < kAlgebraTol);
  CHECK(std::abs(d.amp(0b101) - want) < kAlgebraTol);
  CHECK(std::abs(d.amp(0b110) - want) < kAlgebraTol);
  CHECK(std::abs(d.amp(0b000)) < kAlgebraTol);
  CHECK_THROWS(dicke_state(2, 3));
}

TEST_CASE("broadcast template components are alpha^k beta^{N-k}") {
  cxd alpha(0.6, 0.0), beta(0.0, 0.8);
  BroadcastSpec spec{1, 2, alpha, beta, std::nullopt};
  StateVector st = make_broadcast_state(spec);
  REQUIRE(st.dims() == std::vector<std::size_t>({3, 2, 2}));
  CHECK(std::abs(st.amp(0 * 4 + 3) - beta * beta) < kAlgebraTol);          // k=0: |0>|11>
  CHECK(std::abs(st.amp(1 * 4 + 1) - alpha * beta) < kAlgebraTol);         // k=1: |1>|01>
  CHECK(std::abs(st.amp(1 * 4 + 2) - alpha * beta) < kAlgebraTol);         // k=1: |1>|10>
  CHECK(std::abs(st.amp(2 * 4 + 0) - alpha * alpha) < kAlgebraTol);        // k=2: |2>|00>
  CHECK(std::abs(st.amps().norm() - 1.0) < kAlgebraTol);
  BroadcastSpec bad{1, 2, 1.0, 1.0, std::nullopt};
  CHECK_THROWS(make_broadcast_state(bad));
}

TEST_CASE("multi-sender template correlates all sender qudits") {
  BroadcastSpec spec{2, 1, kHalf, kHalf, std::nullopt};
  StateVector st = make_broadcast_state(spec);  // dims {2,2,2}
  CHECK(std::abs(st.amp(0b001) - cxd(kHalf)) < kAlgebraTol);  // k=0: |00>|1>
  CHECK(std::abs(st.amp(0b110) - cxd(kHalf)) < kAlgebraTol);  // k=1: |11>|0>
  CHECK(std::abs(st.amp(0b010)) < kAlgebraTol);               // mismatched senders
}

TEST_CASE("diagonal phase gate: cz product and ccz entries") {
  DiagonalPhaseGate cz = DiagonalPhaseGate::cz_product(2, {{0, 1}});
  CHECK(std::abs(cz.entry(0b11) - cxd(-1.0)) < kAlgebraTol);
  CHECK(std::abs(cz.entry(0b10) - cxd(1.0)) < kAlgebraTol);
  DiagonalPhaseGate ccz = DiagonalPhaseGate::ccz(3, 0, 1, 2);
  for (std::size_t x = 0; x < 8; ++x)
    CHECK(std::abs(ccz.entry(x) - cxd(x == 7 ? -1.0 : 1.0)) < kAlgebraTol);
  CHECK(DiagonalPhaseGate::identity(2).is_identity());
  CHECK(!cz.is_identity());
}

TEST_CASE("graph state equals CZ product on all-plus") {
  Graph g{3, {{0, 1}, {1, 2}}};
  StateVector st = graph_state(g);
  DiagonalPhaseGate cz = DiagonalPhaseGate::cz_product(3, g.edges);
  StateVector plus = StateVector::product({2, 2, 2},
                                          {ket_plus(), ket_plus(), ket_plus()});
  StateVector want = cz.as_operator({0, 1, 2}).apply(plus);
  CHECK(overlap_abs(st, want) > 1.0 - kAlgebraTol);
  Graph bad{2, {{0, 0}}};
  CHECK_THROWS(bad.validate());
}

TEST_CASE("graph stabilizers fix the graph state") {
  Graph g{4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}};
  StateVector st = graph_state(g);
  for (std::size_t v = 0; v < 4; ++v) {
    PauliString k = graph_stabilizer(g, v);
    LocalOperator op{{0, 1, 2, 3}, k.matrix()};
    CHECK(overlap_abs(op.apply(st), st) > 1.0 - kAlgebraTol);
  }
}

TEST_CASE("pauli string algebra") {
  PauliString xx = PauliString::parse("+XX");
  PauliString zz = PauliString::parse("+ZZ");
  CHECK(xx.commutes_with(zz));
  PauliString xi = PauliString::parse("+XI");
  CHECK(!xi.commutes_with(zz));
  PauliString prod = xx * zz;  // XZ (x) XZ = (-iY)(-iY) -> -YY
  CHECK(prod.letters() == "YY");
  CHECK(prod.sign() == -1);
  CHECK((prod * prod).is_identity());
  CHECK(PauliString::parse("-YXZ").sign() == -1);
  CHECK(PauliString::parse("+IXI").weight() == 1);
  CHECK_THROWS(PauliString::parse("+AB"));
  // matrix includes the phase
  Matrix y = PauliString::parse("+Y").matrix();
  CHECK(std::abs(y(0, 1) - cxd(0.0, -1.0)) < kAlgebraTol);
  auto [xs, zs] = PauliString::parse("+XYZ").symplectic();
  CHECK(xs == std::vector<int>({1, 1, 0}));
  CHECK(zs == std::vector<int>({0, 1, 1}));
}

TEST_CASE("trine states: overlaps -1/2 and anti-trine orthogonality") {
  TrineSet ts = trine_states();
  REQUIRE(ts.trine.size() == 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      cxd ov = ts.trine[static_cast<std::size_t>(i)].adjoint() *
               ts.trine[static_cast<std::size_t>(j)];
      if (i == j) CHECK(std::abs(ov - cxd(1.0)) < kAlgebraTol);
      else CHECK(std::abs(ov + cxd(0.5)) < kAlgebraTol);
    }
    cxd anti = ts.anti_trine[static_cast<std::size_t>(i)].adjoint() *
               ts.trine[static_cast<std::size_t>(i)];
    CHECK(std::abs(anti) < kAlgebraTol);
  }
  Povm povm = anti_trine_povm();
  CHECK(povm.is_valid());
  Matrix sum = Matrix::Zero(2, 2);
  for (const auto& e : povm.elements) sum += e;
  CHECK((sum - Matrix::Identity(2, 2)).norm() < kAlgebraTol);
}

TEST_CASE("brickwork block layout") {
  BrickworkBlock b = brickwork_block();
  CHECK(b.graph.num_vertices == 10);
  CHECK(b.inputs == std::vector<std::size_t>({0, 5}));
  CHECK(b.outputs == std::vector<std::size_t>({4, 9}));
  CHECK(b.graph.has_edge(2, 7));
  CHECK(b.graph.has_edge(4, 9));
  CHECK(b.graph.has_edge(0, 1));
  CHECK(!b.graph.has_edge(0, 5));
  CHECK(b.graph.edges.size() == 10);
}

TEST_CASE("binomial coefficients") {
  CHECK(binomial(0, 0) == 1.0);
  CHECK(binomial(5, 2) == 10.0);
  CHECK(binomial(20, 10) == 184756.0);
}
