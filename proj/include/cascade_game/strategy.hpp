#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cascade_game/cascade.hpp"
#include "cascade_game/errors.hpp"
#include "cascade_game/grid.hpp"
#include "cascade_game/random.hpp"

namespace cascade_game {

// Expected payoffs closer than this are treated as equal when picking a
// best response, so floating-point noise cannot override the id tie-break.
inline constexpr double kTieTolerance = 1e-12;

// Probabilities of a mixed strategy must sum to one within this.
inline constexpr double kProbabilityTolerance = 1e-9;

enum class Side { Attacker, Defender };
enum class OracleKind { Exact, Greedy };

inline const char* to_string(Side s) { return s == Side::Attacker ? "attacker" : "defender"; }
inline const char* to_string(OracleKind k) { return k == OracleKind::Exact ? "exact" : "greedy"; }

struct PureStrategy {
  NodeSet nodes;
  int budget = 0;

  PureStrategy() = default;
  PureStrategy(NodeSet n, int b) : nodes(std::move(n)), budget(b) {
    if (b < 0) throw DomainError("negative budget");
    if (nodes.size() > static_cast<std::size_t>(b)) {
      throw DomainError("strategy " + to_string(nodes) + " exceeds budget " + std::to_string(b));
    }
  }

  friend bool operator==(const PureStrategy&, const PureStrategy&) = default;
};

struct WeightedStrategy {
  NodeSet nodes;
  double probability = 0.0;

  friend bool operator==(const WeightedStrategy&, const WeightedStrategy&) = default;
};

// Probability distribution over node sets. Only the support is stored.
struct MixedStrategy {
  std::vector<WeightedStrategy> support;

  static MixedStrategy pure(NodeSet nodes) { return MixedStrategy{{{std::move(nodes), 1.0}}}; }

  std::size_t size() const noexcept { return support.size(); }

  // Throws DomainError unless probabilities lie in [0, 1], sum to one and
  // node sets are distinct.
  void validate() const {
    if (support.empty()) throw DomainError("mixed strategy has empty support");
    double total = 0.0;
    std::set<NodeSet> seen;
    for (const auto& w : support) {
      if (!(w.probability >= 0.0 && w.probability <= 1.0 + kProbabilityTolerance)) {
        throw DomainError("probability out of range: " + std::to_string(w.probability));
      }
      if (!seen.insert(w.nodes).second) throw DomainError("duplicate support entry " + to_string(w.nodes));
      total += w.probability;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
      throw DomainError("probabilities sum to " + std::to_string(total) + ", not 1");
    }
  }

  friend bool operator==(const MixedStrategy&, const MixedStrategy&) = default;
};

// Initial network, its frozen capacities, and a memo of payoffs keyed by
// the effective removal set (attack minus defense). Not safe for
// concurrent use because the memo is filled lazily.
class PayoffOracle {
 public:
  PayoffOracle(GridNetwork g0, double alpha)
      : g0_(std::move(g0)), caps_(g0_, alpha), loads_(g0_.loads()) {}
  PayoffOracle(GridNetwork g0, CapacityMap caps)
      : g0_(std::move(g0)), caps_(std::move(caps)), loads_(g0_.loads()) {}

  const GridNetwork& network() const noexcept { return g0_; }
  const CapacityMap& capacities() const noexcept { return caps_; }
  const NodeSet& loads() const noexcept { return loads_; }
  double alpha() const noexcept { return caps_.alpha(); }

  std::size_t payoff(const NodeSet& attack, const NodeSet& defense) const {
    check_strategy_nodes(g0_, attack, "attack");
    check_strategy_nodes(g0_, defense, "defense");
    return removal_payoff(attack.minus(defense));
  }

  std::size_t removal_payoff(const NodeSet& removal) const {
    auto it = cache_.find(removal);
    if (it != cache_.end()) return it->second;
    ++evaluations_;
    const auto value = cascade_game::removal_payoff(g0_, caps_, removal);
    cache_.emplace(removal, value);
    return value;
  }

  std::size_t evaluations() const noexcept { return evaluations_; }

 private:
  GridNetwork g0_;
  CapacityMap caps_;
  NodeSet loads_;
  mutable std::map<NodeSet, std::size_t> cache_;
  mutable std::size_t evaluations_ = 0;
};

inline void check_mixed_nodes(const PayoffOracle& oracle, const MixedStrategy& mix, const char* what) {
  for (const auto& w : mix.support) check_strategy_nodes(oracle.network(), w.nodes, what);
}

inline double expected_payoff(const PayoffOracle& oracle, const MixedStrategy& attacks,
                              const MixedStrategy& defenses) {
  attacks.validate();
  defenses.validate();
  check_mixed_nodes(oracle, attacks, "attack");
  check_mixed_nodes(oracle, defenses, "defense");
  double total = 0.0;
  for (const auto& a : attacks.support) {
    double inner = 0.0;
    for (const auto& d : defenses.support) {
      inner += d.probability * static_cast<double>(oracle.removal_payoff(a.nodes.minus(d.nodes)));
    }
    total += a.probability * inner;
  }
  return total;
}

namespace detail {

// Expected payoff of one pure strategy for `side` against an opponent mix.
// Inputs are assumed validated.
inline double pure_vs_mix(const PayoffOracle& oracle, const NodeSet& mine, const MixedStrategy& opponent, Side side) {
  double total = 0.0;
  for (const auto& w : opponent.support) {
    const NodeSet removal = side == Side::Attacker ? mine.minus(w.nodes) : w.nodes.minus(mine);
    total += w.probability * static_cast<double>(oracle.removal_payoff(removal));
  }
  return total;
}

}  // namespace detail

// Number of subsets of an n-set with at most k elements, saturating at
// 2^62.
inline std::uint64_t subset_count(std::size_t n, std::size_t k) {
  constexpr unsigned __int128 cap = static_cast<unsigned __int128>(1) << 62;
  k = std::min(k, n);
  unsigned __int128 term = 1;
  unsigned __int128 total = 1;
  for (std::size_t j = 1; j <= k; ++j) {
    term = term * (n - j + 1) / j;
    if (term >= cap) return static_cast<std::uint64_t>(cap);
    total += term;
    if (total >= cap) return static_cast<std::uint64_t>(cap);
  }
  return static_cast<std::uint64_t>(total);
}

// C(n, k), saturating at 2^62.
inline std::uint64_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  if (k == 0) return 1;
  return subset_count(n, k) - subset_count(n, k - 1);
}

// Calls fn(subset) for each k-subset of `items` in lexicographic order.
template <typename Fn>
void for_each_combination(const std::vector<NodeId>& items, std::size_t k, Fn&& fn) {
  const std::size_t n = items.size();
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  std::vector<NodeId> pick(k);
  for (;;) {
    for (std::size_t i = 0; i < k; ++i) pick[i] = items[idx[i]];
    fn(NodeSet(pick));
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Calls fn(subset) for every subset of size <= k, grouped by size.
template <typename Fn>
void for_each_subset_up_to(const std::vector<NodeId>& items, std::size_t k, Fn&& fn) {
  for (std::size_t size = 0; size <= std::min(k, items.size()); ++size) for_each_combination(items, size, fn);
}

struct BestResponse {
  PureStrategy strategy;
  double value = 0.0;  // expected attacker payoff against the opponent mix
};

// The k_d nodes of highest nodal load; ties go to the smaller id.
inline PureStrategy dlb_defense(const GridNetwork& g0, int k_d) {
  if (k_d < 0 || static_cast<std::size_t>(k_d) > g0.node_count()) {
    throw DomainError("defender budget exceeds node count");
  }
  // Loads are bucketed at 1e-9 so round-off cannot reorder equal loads.
  std::vector<std::pair<long long, NodeId>> ranked;
  for (const auto& [id, load] : nodal_loads(g0)) ranked.emplace_back(-std::llround(load * 1e9), id);
  std::sort(ranked.begin(), ranked.end());
  std::vector<NodeId> chosen;
  for (int i = 0; i < k_d; ++i) chosen.push_back(ranked[static_cast<std::size_t>(i)].second);
  return PureStrategy(NodeSet(std::move(chosen)), k_d);
}

namespace detail {

// Shared greedy loop. The attacker maximizes, the defender minimizes; a node
// is accepted when it does not hurt its player (delta >= 0) and the best
// delta wins, smallest id on ties.
inline BestResponse greedy_response(const PayoffOracle& oracle, const MixedStrategy& opponent, int budget, Side side) {
  opponent.validate();
  check_mixed_nodes(oracle, opponent, side == Side::Attacker ? "defense" : "attack");
  if (budget < 0) throw DomainError("negative budget");
  const double ceiling = static_cast<double>(oracle.loads().size());

  NodeSet chosen;
  double current = pure_vs_mix(oracle, chosen, opponent, side);
  const auto done = [&] {
    if (chosen.size() >= static_cast<std::size_t>(budget)) return true;
    return side == Side::Defender ? current <= kTieTolerance : current >= ceiling - kTieTolerance;
  };
  while (!done()) {
    NodeId best = -1;
    double best_delta = 0.0;
    double best_value = current;
    for (NodeId i : oracle.network().nodes()) {
      if (chosen.contains(i)) continue;
      const double value = pure_vs_mix(oracle, chosen.with(i), opponent, side);
      const double delta = side == Side::Attacker ? value - current : current - value;
      if (delta < -kTieTolerance) continue;
      if (best < 0 || delta > best_delta + kTieTolerance) {
        best = i;
        best_delta = delta;
        best_value = value;
      }
    }
    if (best < 0) break;
    chosen.insert(best);
    current = best_value;
  }
  return {PureStrategy(std::move(chosen), budget), current};
}

}  // namespace detail

inline BestResponse greedy_defender_response(const PayoffOracle& oracle, const MixedStrategy& attacks, int k_d) {
  // One deterministic attack that fits the budget: defend all of it.
  if (attacks.support.size() == 1 && k_d >= 0 && attacks.support.front().nodes.size() <= static_cast<std::size_t>(k_d)) {
    attacks.validate();
    check_mixed_nodes(oracle, attacks, "attack");
    const NodeSet& a = attacks.support.front().nodes;
    return {PureStrategy(a, k_d), static_cast<double>(oracle.removal_payoff({}))};
  }
  return detail::greedy_response(oracle, attacks, k_d, Side::Defender);
}

inline BestResponse greedy_attacker_response(const PayoffOracle& oracle, const MixedStrategy& defenses, int k_a) {
  return detail::greedy_response(oracle, defenses, k_a, Side::Attacker);
}

inline constexpr std::uint64_t kDefaultEnumerationLimit = 100000;

// Exhaustive best response over every node set of size <= budget. Ties go
// to the lexicographically smallest set.
inline BestResponse exact_best_response(const PayoffOracle& oracle, const MixedStrategy& opponent, int budget,
                                        Side side, std::uint64_t limit = kDefaultEnumerationLimit) {
  opponent.validate();
  check_mixed_nodes(oracle, opponent, side == Side::Attacker ? "defense" : "attack");
  if (budget < 0) throw DomainError("negative budget");
  const auto& nodes = oracle.network().nodes();
  const auto count = subset_count(nodes.size(), static_cast<std::size_t>(budget));
  if (count > limit) {
    throw CapacityError("exact " + std::string(to_string(side)) + " best response needs " + std::to_string(count) +
                        " candidate sets (limit " + std::to_string(limit) + "); use the greedy oracle");
  }
  bool have = false;
  NodeSet best;
  double best_value = 0.0;
  for_each_subset_up_to(nodes, static_cast<std::size_t>(budget), [&](const NodeSet& s) {
    const double v = detail::pure_vs_mix(oracle, s, opponent, side);
    const double gain = side == Side::Attacker ? v - best_value : best_value - v;
    if (!have || gain > kTieTolerance || (gain >= -kTieTolerance && s < best)) {
      have = true;
      best = s;
      best_value = v;
    }
  });
  return {PureStrategy(std::move(best), budget), best_value};
}

inline BestResponse best_response(const PayoffOracle& oracle, const MixedStrategy& opponent, int budget, Side side,
                                  OracleKind kind, std::uint64_t limit = kDefaultEnumerationLimit) {
  if (kind == OracleKind::Exact) return exact_best_response(oracle, opponent, budget, side, limit);
  return detail::greedy_response(oracle, opponent, budget, side);
}

struct UniformAttackOptions {
  std::uint64_t enumeration_limit = kDefaultEnumerationLimit;
  std::size_t sample_size = 1000;
  std::uint64_t seed = 0;
};

// True when uniform_load_attack returns the exact distribution.
inline bool uniform_attack_is_exact(const GridNetwork& g0, int k_a, const UniformAttackOptions& opt = {}) {
  return binomial(g0.loads().size(), static_cast<std::size_t>(k_a)) <= opt.enumeration_limit;
}

// Uniform distribution over the k_a-subsets of the load nodes, or a seeded
// sample of distinct subsets with equal weight when there are too many.
inline MixedStrategy uniform_load_attack(const GridNetwork& g0, int k_a, const UniformAttackOptions& opt = {}) {
  const auto loads = g0.loads();
  if (k_a < 0 || static_cast<std::size_t>(k_a) > loads.size()) {
    throw DomainError("attacker budget " + std::to_string(k_a) + " exceeds load count " + std::to_string(loads.size()));
  }
  std::vector<NodeSet> picks;
  if (uniform_attack_is_exact(g0, k_a, opt)) {
    for_each_combination(loads.ids(), static_cast<std::size_t>(k_a), [&](const NodeSet& s) { picks.push_back(s); });
  } else {
    const std::uint64_t total = binomial(loads.size(), static_cast<std::size_t>(k_a));
    const std::size_t want = static_cast<std::size_t>(std::min<std::uint64_t>(std::max<std::size_t>(opt.sample_size, 1), total));
    Rng rng(opt.seed);
    std::set<NodeSet> drawn;
    std::vector<NodeId> pool = loads.ids();
    while (drawn.size() < want) {
      for (std::size_t i = 0; i < static_cast<std::size_t>(k_a); ++i) {
        std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
      }
      drawn.insert(NodeSet(std::vector<NodeId>(pool.begin(), pool.begin() + k_a)));
    }
    picks.assign(drawn.begin(), drawn.end());
  }
  MixedStrategy mix;
  const double p = 1.0 / static_cast<double>(picks.size());
  for (auto& s : picks) mix.support.push_back({std::move(s), p});
  return mix;
}

}  // namespace cascade_game
