#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qbcast/protocol.hpp"

using namespace qbcast;

namespace {

const double kHalf = 1.0 / std::sqrt(2.0);

// Shared toy protocol: Alice holds |+>, measures Z, announces the bit; Bob
// flips his |0> when the bit is 1. Ends with a deterministic metric.
void bit_copy(Context& ctx, BranchReport& rep) {
  ctx.add_party("alice", Role::Sender);
  ctx.add_party("bob", Role::Receiver);
  ctx.add_subsystem("a", 2, "alice", ket_plus());
  ctx.add_subsystem("b", 2, "bob", ket0());
  int bit = ctx.measure_in("alice", "a", computational_basis(2), "z measurement");
  int msg = ctx.broadcast("alice", {bit}, "announce bit");
  if (bit == 1) ctx.apply_op("bob", {"b"}, pauli_x(), "conditional flip", {msg});
  StateVector target = StateVector::computational({2}, {static_cast<std::size_t>(bit)});
  rep.metrics["fidelity"] = fidelity(ctx.state_of({"b"}), target);
}

}  // namespace

TEST_CASE("enumeration visits every branch with exact probabilities") {
  ProtocolResult res = enumerate_protocol("bit-copy", bit_copy);
  REQUIRE(res.branches.size() == 2);
  CHECK(std::abs(res.total_probability() - 1.0) < kChainTol);
  for (const auto& br : res.branches) {
    CHECK(std::abs(br.probability - 0.5) < kAlgebraTol);
    CHECK(!br.zero_prob);
    CHECK(br.metrics.at("fidelity") == doctest::Approx(1.0));
  }
  CHECK(res.min_metric("fidelity") == doctest::Approx(1.0));
  CHECK(res.max_metric("fidelity") == doctest::Approx(1.0));
}

TEST_CASE("zero-probability branches are kept but flagged") {
  auto fn = [](Context& ctx, BranchReport& rep) {
    ctx.add_party("p", Role::Sender);
    ctx.add_subsystem("q", 2, "p", ket0());
    int o = ctx.measure_in("p", "q", computational_basis(2), "z");
    rep.metrics["outcome"] = o;
  };
  ProtocolResult res = enumerate_protocol("deterministic", fn);
  REQUIRE(res.branches.size() == 2);
  CHECK(!res.branches[0].zero_prob);
  CHECK(res.branches[0].probability == doctest::Approx(1.0));
  CHECK(res.branches[1].zero_prob);
  CHECK(res.branches[1].probability == 0.0);
  CHECK(std::abs(res.total_probability() - 1.0) < kChainTol);
}

TEST_CASE("dead branches skip later measurements cleanly") {
  auto fn = [](Context& ctx, BranchReport& rep) {
    ctx.add_party("p", Role::Sender);
    ctx.add_subsystem("q", 2, "p", ket0());
    ctx.add_subsystem("r", 2, "p", ket_plus());
    int a = ctx.measure_in("p", "q", computational_basis(2), "first");
    int b = ctx.measure_in("p", "r", x_basis(), "second");
    rep.metrics["sum"] = a + b;
  };
  ProtocolResult res = enumerate_protocol("dead-branch", fn);
  REQUIRE(res.branches.size() == 4);
  double live = 0.0;
  for (const auto& br : res.branches)
    if (!br.zero_prob) live += br.probability;
  CHECK(live == doctest::Approx(1.0));
}

TEST_CASE("sampling is deterministic per seed and matches a legal branch") {
  ProtocolResult a = sample_protocol("bit-copy", bit_copy, 1234);
  ProtocolResult b = sample_protocol("bit-copy", bit_copy, 1234);
  REQUIRE(a.branches.size() == 1);
  REQUIRE(b.branches.size() == 1);
  CHECK(a.branches[0].outcomes == b.branches[0].outcomes);
  CHECK(a.branches[0].metrics.at("fidelity") == doctest::Approx(1.0));

  ProtocolResult res = run_with_mode("bit-copy", bit_copy, Mode::Enumerate, 0);
  CHECK(res.branches.size() == 2);
  res = run_with_mode("bit-copy", bit_copy, Mode::Sample, 77);
  CHECK(res.branches.size() == 1);
}

TEST_CASE("sampled outcome frequencies track Born probabilities") {
  auto fn = [](Context& ctx, BranchReport& rep) {
    ctx.add_party("p", Role::Sender);
    Vector v(2);
    v << 0.6, 0.8;
    ctx.add_subsystem("q", 2, "p", v);
    rep.metrics["one"] = ctx.measure_in("p", "q", computational_basis(2), "z");
  };
  int ones = 0, n = 4000;
  for (int t = 0; t < n; ++t) {
    ProtocolResult res = sample_protocol("freq", fn, 9000 + static_cast<std::uint64_t>(t));
    ones += static_cast<int>(res.branches[0].metrics.at("one"));
  }
  double rate = static_cast<double>(ones) / n;
  CHECK(std::abs(rate - 0.64) < 4.0 * std::sqrt(0.64 * 0.36 / n));
}

TEST_CASE("ownership is enforced for operations and measurements") {
  auto bad_op = [](Context& ctx, BranchReport&) {
    ctx.add_party("alice", Role::Sender);
    ctx.add_party("bob", Role::Receiver);
    ctx.add_subsystem("b", 2, "bob", ket0());
    ctx.apply_op("alice", {"b"}, pauli_x(), "not hers");
  };
  CHECK_THROWS(enumerate_protocol("bad-op", bad_op));

  auto ok_after_transfer = [](Context& ctx, BranchReport&) {
    ctx.add_party("alice", Role::Sender);
    ctx.add_party("bob", Role::Receiver);
    ctx.add_subsystem("b", 2, "bob", ket0());
    ctx.transfer("b", "alice");
    ctx.apply_op("alice", {"b"}, pauli_x(), "hers now");
  };
  CHECK_NOTHROW(enumerate_protocol("transfer", ok_after_transfer));
}

TEST_CASE("events log messages, dependencies and causality") {
  ProtocolResult res = enumerate_protocol("bit-copy", bit_copy);
  const auto& events = res.branches[1].events;  // bit = 1 branch has the flip
  CHECK(transcript_causality_ok(events));
  bool saw_msg = false, saw_dep = false;
  int msg_seq = -1;
  for (const auto& e : events) {
    if (e.kind == Event::Kind::Message) {
      saw_msg = true;
      msg_seq = e.seq;
      CHECK(e.msg_from == "alice");
      CHECK(e.payload == std::vector<long>({1}));
    }
    if (e.kind == Event::Kind::Operation && !e.depends_on.empty()) {
      saw_dep = true;
      CHECK(e.depends_on == std::vector<int>({msg_seq}));
    }
  }
  CHECK(saw_msg);
  CHECK(saw_dep);
}

TEST_CASE("party rng streams are stable and distinct") {
  auto a1 = party_rng(42, "alice");
  auto a2 = party_rng(42, "alice");
  auto b = party_rng(42, "bob");
  auto a3 = party_rng(43, "alice");
  CHECK(a1() == a2());
  CHECK(party_rng(42, "alice")() != b());
  CHECK(party_rng(42, "alice")() != a3());
}

TEST_CASE("pauli correction synthesis solves the flip pattern") {
  std::vector<PauliString> gens = {PauliString::parse("+XX"), PauliString::parse("+ZZ")};
  PauliString p = synthesize_pauli_correction(gens, {1, 0});
  // must anticommute with XX, commute with ZZ
  CHECK(!p.commutes_with(gens[0]));
  CHECK(p.commutes_with(gens[1]));
  CHECK(p.weight() == 1);  // a single Z suffices

  PauliString id = synthesize_pauli_correction(gens, {0, 0});
  CHECK(id.is_identity());

  // X and Z on the same qubit: flipping only one of them needs the other letter
  std::vector<PauliString> one = {PauliString::parse("+X"), PauliString::parse("+Z")};
  PauliString y = synthesize_pauli_correction(one, {1, 1});
  CHECK(y.letters() == "Y");

  // unsatisfiable: single generator set {XI} with a flip on a fictitious
  // dependent generator is fine, but flipping I is impossible
  std::vector<PauliString> dep = {PauliString::parse("+XX"),
                                  PauliString::parse("+XX")};
  CHECK_THROWS(synthesize_pauli_correction(dep, {1, 0}));
}

TEST_CASE("state_of reorders remaining subsystems by label") {
  auto fn = [](Context& ctx, BranchReport& rep) {
    ctx.add_party("p", Role::Sender);
    ctx.add_subsystem("u", 2, "p", ket0());
    ctx.add_subsystem("v", 2, "p", ket1());
    StateVector uv = ctx.state_of({"u", "v"});
    StateVector vu = ctx.state_of({"v", "u"});
    rep.metrics["uv"] = std::abs(uv.amp(0b01));
    rep.metrics["vu"] = std::abs(vu.amp(0b10));
  };
  ProtocolResult res = enumerate_protocol("reorder", fn);
  CHECK(res.branches[0].metrics.at("uv") == doctest::Approx(1.0));
  CHECK(res.branches[0].metrics.at("vu") == doctest::Approx(1.0));
}
