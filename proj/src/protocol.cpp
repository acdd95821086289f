#include "qbcast/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qbcast {

double ProtocolResult::total_probability() const {
  double p = 0.0;
  for (const auto& b : branches) p += b.probability;
  return p;
}

double ProtocolResult::min_metric(const std::string& key) const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& b : branches) {
    if (b.zero_prob) continue;
    auto it = b.metrics.find(key);
    if (it != b.metrics.end()) m = std::min(m, it->second);
  }
  return m;
}

double ProtocolResult::max_metric(const std::string& key) const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& b : branches) {
    if (b.zero_prob) continue;
    auto it = b.metrics.find(key);
    if (it != b.metrics.end()) m = std::max(m, it->second);
  }
  return m;
}

double ProtocolResult::metric_probability(const std::string& key) const {
  double p = 0.0;
  for (const auto& b : branches) {
    if (b.zero_prob) continue;
    auto it = b.metrics.find(key);
    if (it != b.metrics.end() && it->second > 0.5) p += b.probability;
  }
  return p;
}

Context::Context() = default;

void Context::add_party(const std::string& name, Role role) { parties_[name] = role; }

void Context::add_subsystem(const std::string& label, std::size_t dim,
                            const std::string& party, const Vector& local) {
  StateVector block({dim}, local);
  append_block(block, {label}, {party});
}

void Context::set_state(StateVector state, const std::vector<std::string>& labels,
                        const std::vector<std::string>& owners) {
  if (labels.size() != state.num_subsystems() || owners.size() != labels.size()) {
    throw std::invalid_argument("label/owner count must match subsystem count");
  }
  state_ = std::move(state);
  labels_ = labels;
  owners_ = owners;
}

void Context::append_block(const StateVector& block, const std::vector<std::string>& labels,
                           const std::vector<std::string>& owners) {
  if (labels.size() != block.num_subsystems() || owners.size() != labels.size()) {
    throw std::invalid_argument("label/owner count must match subsystem count");
  }
  if (!state_) {
    state_ = block;
    labels_ = labels;
    owners_ = owners;
    return;
  }
  state_ = state_->tensor(block);
  labels_.insert(labels_.end(), labels.begin(), labels.end());
  owners_.insert(owners_.end(), owners.begin(), owners.end());
}

const StateVector& Context::state() const {
  if (!state_) throw std::runtime_error("context has no state");
  return *state_;
}

std::size_t Context::index_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw std::invalid_argument("unknown subsystem label: " + label);
  return static_cast<std::size_t>(it - labels_.begin());
}

bool Context::has_subsystem(const std::string& label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

std::size_t Context::dim_of(const std::string& label) const {
  return state().dim(index_of(label));
}

void Context::check_ownership(const std::string& party,
                              const std::vector<std::string>& labels) const {
  if (!parties_.count(party)) throw std::invalid_argument("unknown party: " + party);
  for (const auto& l : labels) {
    if (owners_.at(index_of(l)) != party) {
      throw std::logic_error("locality violation: " + party + " does not own " + l);
    }
  }
}

void Context::apply_op(const std::string& party, const std::vector<std::string>& labels,
                       const Matrix& mat, const std::string& description,
                       const std::vector<int>& depends_on) {
  check_ownership(party, labels);
  std::vector<std::size_t> targets;
  for (const auto& l : labels) targets.push_back(index_of(l));
  if (!dead_) {
    state_ = LocalOperator{targets, mat}.apply(*state_);
  }
  Event e;
  e.kind = Event::Kind::Operation;
  e.seq = ++seq_;
  e.party = party;
  e.description = description;
  e.subsystems = labels;
  e.depends_on = depends_on;
  events_.push_back(std::move(e));
}

int Context::next_outcome(const std::string& party, const std::vector<double>& probs,
                          bool* zero_flag) {
  int arity = static_cast<int>(probs.size());
  if (selector.arities) selector.arities->push_back(arity);
  int outcome;
  if (selector.forced) {
    std::size_t cursor = selector.chosen->size();
    outcome = (cursor < selector.forced->size()) ? (*selector.forced)[cursor] : 0;
  } else {
    auto it = rngs_.find(party);
    if (it == rngs_.end()) {
      it = rngs_.emplace(party, party_rng(selector.master_seed, party)).first;
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double r = unif(it->second);
    double total = 0.0;
    for (double p : probs) total += p;
    outcome = arity - 1;
    double acc = 0.0;
    for (int j = 0; j < arity; ++j) {
      acc += probs[static_cast<std::size_t>(j)] / total;
      if (r < acc) { outcome = j; break; }
    }
  }
  if (selector.chosen) selector.chosen->push_back(outcome);
  double p = probs[static_cast<std::size_t>(outcome)];
  *zero_flag = (p <= kProbFloor);
  prob_ *= p;
  if (*zero_flag) dead_ = true;
  return outcome;
}

int Context::measure_in(const std::string& party, const std::string& label,
                        const MeasurementBasis& basis, const std::string& description,
                        bool discard) {
  check_ownership(party, {label});
  std::size_t target = index_of(label);
  MeasurementBasis local = basis;
  local.target = target;
  std::vector<Branch> branches;
  std::vector<double> probs;
  if (dead_) {  // branch already has probability zero; keep arity bookkeeping
    probs.assign(local.arity(), 0.0);
  } else {
    branches = enumerate_branches(state(), local, discard);
    for (const auto& b : branches) probs.push_back(b.probability);
  }
  bool zero = false;
  int outcome = next_outcome(party, probs, &zero);
  if (!zero) state_ = branches[static_cast<std::size_t>(outcome)].state;
  if (discard) {
    labels_.erase(labels_.begin() + static_cast<std::ptrdiff_t>(target));
    owners_.erase(owners_.begin() + static_cast<std::ptrdiff_t>(target));
  }
  Event e;
  e.kind = Event::Kind::Measurement;
  e.seq = ++seq_;
  e.party = party;
  e.description = description;
  e.subsystems = {label};
  e.outcome = outcome;
  e.probability = probs[static_cast<std::size_t>(outcome)];
  events_.push_back(std::move(e));
  return outcome;
}

int Context::measure_povm(const std::string& party, const std::string& label,
                          const Povm& povm, const std::string& description) {
  check_ownership(party, {label});
  Povm local = povm;
  local.target = index_of(label);
  std::vector<Branch> branches;
  std::vector<double> probs;
  if (dead_) {
    probs.assign(local.elements.size(), 0.0);
  } else {
    branches = enumerate_branches(state(), local);
    for (const auto& b : branches) probs.push_back(b.probability);
  }
  bool zero = false;
  int outcome = next_outcome(party, probs, &zero);
  if (!zero) state_ = branches[static_cast<std::size_t>(outcome)].state;
  Event e;
  e.kind = Event::Kind::Measurement;
  e.seq = ++seq_;
  e.party = party;
  e.description = description;
  e.subsystems = {label};
  e.outcome = outcome;
  e.probability = probs[static_cast<std::size_t>(outcome)];
  events_.push_back(std::move(e));
  return outcome;
}

int Context::measure_projective(const std::string& party, const std::string& label,
                                const ProjectiveMeasurement& meas,
                                const std::string& description) {
  check_ownership(party, {label});
  ProjectiveMeasurement local = meas;
  local.target = index_of(label);
  std::vector<Branch> branches;
  std::vector<double> probs;
  if (dead_) {
    probs.assign(local.subspaces.size(), 0.0);
  } else {
    branches = enumerate_branches(state(), local);
    for (const auto& b : branches) probs.push_back(b.probability);
  }
  bool zero = false;
  int outcome = next_outcome(party, probs, &zero);
  if (!zero) state_ = branches[static_cast<std::size_t>(outcome)].state;
  Event e;
  e.kind = Event::Kind::Measurement;
  e.seq = ++seq_;
  e.party = party;
  e.description = description;
  e.subsystems = {label};
  e.outcome = outcome;
  e.probability = probs[static_cast<std::size_t>(outcome)];
  events_.push_back(std::move(e));
  return outcome;
}

int Context::broadcast(const std::string& from, const std::vector<long>& payload,
                       const std::string& description) {
  Event e;
  e.kind = Event::Kind::Message;
  e.seq = ++seq_;
  e.party = from;
  e.msg_from = from;
  e.msg_to = "*";
  e.payload = payload;
  e.description = description;
  events_.push_back(e);
  return e.seq;
}

int Context::send(const std::string& from, const std::string& to,
                  const std::vector<long>& payload, const std::string& description) {
  Event e;
  e.kind = Event::Kind::Message;
  e.seq = ++seq_;
  e.party = from;
  e.msg_from = from;
  e.msg_to = to;
  e.payload = payload;
  e.description = description;
  events_.push_back(e);
  return e.seq;
}

void Context::transfer(const std::string& label, const std::string& to) {
  if (!parties_.count(to)) throw std::invalid_argument("unknown party: " + to);
  std::size_t idx = index_of(label);
  Event e;
  e.kind = Event::Kind::Message;
  e.seq = ++seq_;
  e.party = owners_[idx];
  e.msg_from = owners_[idx];
  e.msg_to = to;
  e.description = "transfer " + label;
  e.subsystems = {label};
  events_.push_back(std::move(e));
  owners_[idx] = to;
}

void Context::note(const std::string& text) {
  Event e;
  e.kind = Event::Kind::Note;
  e.seq = ++seq_;
  e.description = text;
  events_.push_back(e);
}

StateVector Context::state_of(const std::vector<std::string>& labels) const {
  if (labels.size() != labels_.size()) {
    throw std::invalid_argument("state_of requires all remaining subsystems");
  }
  std::vector<std::size_t> perm;
  for (const auto& l : labels) perm.push_back(index_of(l));
  return state().permuted(perm);
}

ProtocolResult enumerate_protocol(const std::string& name, const ProtocolFn& fn) {
  ProtocolResult result;
  result.name = name;
  result.mode = Mode::Enumerate;
  std::vector<int> current;   // odometer over outcome choices
  std::vector<int> arities;
  while (true) {
    Context ctx;
    std::vector<int> chosen;
    arities.clear();
    ctx.selector.forced = &current;
    ctx.selector.chosen = &chosen;
    ctx.selector.arities = &arities;
    BranchReport report;
    fn(ctx, report);
    report.outcomes = chosen;
    report.probability = ctx.dead() ? 0.0 : ctx.branch_probability();
    report.zero_prob = ctx.dead();
    report.events = ctx.events();
    result.branches.push_back(std::move(report));
    current = chosen;
    // advance odometer
    while (!current.empty()) {
      std::size_t i = current.size() - 1;
      if (current[i] + 1 < arities[i]) {
        ++current[i];
        break;
      }
      current.pop_back();
      arities.pop_back();
    }
    if (current.empty()) break;
  }
  return result;
}

ProtocolResult sample_protocol(const std::string& name, const ProtocolFn& fn,
                               std::uint64_t seed) {
  ProtocolResult result;
  result.name = name;
  result.mode = Mode::Sample;
  Context ctx;
  std::vector<int> chosen;
  ctx.selector.sampling = true;
  ctx.selector.master_seed = seed;
  ctx.selector.chosen = &chosen;
  BranchReport report;
  fn(ctx, report);
  report.outcomes = chosen;
  report.probability = ctx.branch_probability();
  report.zero_prob = ctx.dead();
  report.events = ctx.events();
  result.branches.push_back(std::move(report));
  return result;
}

ProtocolResult run_with_mode(const std::string& name, const ProtocolFn& fn,
                             Mode mode, std::uint64_t seed) {
  return (mode == Mode::Enumerate) ? enumerate_protocol(name, fn)
                                   : sample_protocol(name, fn, seed);
}

std::mt19937_64 party_rng(std::uint64_t master_seed, const std::string& party) {
  // splitmix-style mix of the master seed with the party name hash
  std::uint64_t h = master_seed ^ 0x9e3779b97f4a7c15ULL;
  for (char c : party) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
  }
  return std::mt19937_64(h);
}

PauliString synthesize_pauli_correction(const std::vector<PauliString>& generators,
                                        const std::vector<int>& flips) {
  if (generators.empty()) throw std::invalid_argument("no generators");
  if (flips.size() != generators.size()) throw std::invalid_argument("flip count mismatch");
  std::size_t n = generators[0].num_qubits();
  std::size_t cols = 2 * n;  // candidate (x|z) bits
  std::size_t rows = generators.size();

  // Row k: symplectic product of candidate with S_k must equal flips[k].
  // <P, S> = sum_i (px_i * sz_i + pz_i * sx_i) mod 2.
  std::vector<std::vector<int>> a(rows, std::vector<int>(cols + 1, 0));
  for (std::size_t k = 0; k < rows; ++k) {
    auto [sx, sz] = generators[k].symplectic();
    for (std::size_t i = 0; i < n; ++i) {
      a[k][i] = sz[i];          // coefficient of px_i
      a[k][n + i] = sx[i];      // coefficient of pz_i
    }
    a[k][cols] = flips[k] & 1;
  }

  // Gaussian elimination over GF(2).
  std::vector<std::size_t> pivot_col(rows, cols);
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t pr = rows;
    for (std::size_t i = r; i < rows; ++i) {
      if (a[i][c]) { pr = i; break; }
    }
    if (pr == rows) continue;
    std::swap(a[r], a[pr]);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i != r && a[i][c]) {
        for (std::size_t j = 0; j <= cols; ++j) a[i][j] ^= a[r][j];
      }
    }
    pivot_col[r] = c;
    ++r;
  }
  for (std::size_t i = r; i < rows; ++i) {
    if (a[i][cols]) throw std::runtime_error("no Pauli correction exists for the requested sign flips");
  }

  // Particular solution: free variables zero.
  std::vector<int> sol(cols, 0);
  for (std::size_t i = 0; i < r; ++i) sol[pivot_col[i]] = a[i][cols];

  // Null-space basis: one vector per free column.
  std::vector<std::vector<int>> null_basis;
  std::vector<bool> is_pivot(cols, false);
  for (std::size_t i = 0; i < r; ++i) is_pivot[pivot_col[i]] = true;
  for (std::size_t c = 0; c < cols; ++c) {
    if (is_pivot[c]) continue;
    std::vector<int> v(cols, 0);
    v[c] = 1;
    for (std::size_t i = 0; i < r; ++i) v[pivot_col[i]] = a[i][c];
    null_basis.push_back(std::move(v));
  }

  auto to_pauli = [&](const std::vector<int>& bits) {
    std::string letters(n, 'I');
    for (std::size_t i = 0; i < n; ++i) {
      bool x = bits[i], z = bits[n + i];
      letters[i] = x ? (z ? 'Y' : 'X') : (z ? 'Z' : 'I');
    }
    return PauliString(1, letters);
  };

  // Enumerate the coset for the minimum-weight representative, capped so the
  // search stays cheap; beyond the cap the particular solution is returned.
  PauliString best = to_pauli(sol);
  if (null_basis.size() <= 16) {
    std::size_t combos = std::size_t{1} << null_basis.size();
    for (std::size_t m = 1; m < combos; ++m) {
      std::vector<int> cand = sol;
      for (std::size_t b = 0; b < null_basis.size(); ++b) {
        if ((m >> b) & 1) {
          for (std::size_t j = 0; j < cols; ++j) cand[j] ^= null_basis[b][j];
        }
      }
      PauliString p = to_pauli(cand);
      if (p.weight() < best.weight()) best = p;
    }
  }
  return best;
}

bool transcript_causality_ok(const std::vector<Event>& events) {
  for (const auto& e : events) {
    for (int dep : e.depends_on) {
      bool found = false;
      for (const auto& prior : events) {
        if (prior.seq == dep) {
          if (prior.seq >= e.seq) return false;
          if (prior.kind != Event::Kind::Message) return false;
          found = true;
          break;
        }
      }
      if (!found) return false;
    }
  }
  return true;
}

}  // namespace qbcast
