#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cascade_game/errors.hpp"
#include "cascade_game/lp.hpp"
#include "cascade_game/strategy.hpp"

namespace cascade_game {

// Payoff table over explicit attack and defense option lists:
// entry(a, d) = p(attacks[a], defenses[d]). Entries come from the
// oracle's removal-set memo when an oracle is attached.
class PayoffMatrix {
 public:
  explicit PayoffMatrix(const PayoffOracle& oracle) : oracle_(&oracle) {}

  PayoffMatrix(const PayoffOracle& oracle, const std::vector<NodeSet>& attacks, const std::vector<NodeSet>& defenses)
      : oracle_(&oracle) {
    for (const auto& d : defenses) add_defense(d);
    for (const auto& a : attacks) add_attack(a);
  }

  // Bare numeric game; options are unlabelled and cannot be extended.
  explicit PayoffMatrix(lp::Matrix entries) : entries_(std::move(entries)) {
    const std::size_t cols = entries_.empty() ? 0 : entries_.front().size();
    for (const auto& row : entries_) {
      if (row.size() != cols) throw DomainError("ragged payoff matrix");
    }
  }

  std::size_t attack_count() const noexcept { return entries_.size(); }
  std::size_t defense_count() const noexcept { return entries_.empty() ? defenses_.size() : entries_.front().size(); }
  const std::vector<NodeSet>& attacks() const noexcept { return attacks_; }
  const std::vector<NodeSet>& defenses() const noexcept { return defenses_; }
  const lp::Matrix& entries() const noexcept { return entries_; }
  double at(std::size_t a, std::size_t d) const { return entries_.at(a).at(d); }

  bool has_attack(const NodeSet& s) const { return std::find(attacks_.begin(), attacks_.end(), s) != attacks_.end(); }
  bool has_defense(const NodeSet& s) const {
    return std::find(defenses_.begin(), defenses_.end(), s) != defenses_.end();
  }

  // Returns false (and changes nothing) when the option is already present.
  bool add_attack(const NodeSet& s) {
    require_oracle();
    if (has_attack(s)) return false;
    check_strategy_nodes(oracle_->network(), s, "attack");
    std::vector<double> row;
    row.reserve(defenses_.size());
    for (const auto& d : defenses_) row.push_back(static_cast<double>(oracle_->removal_payoff(s.minus(d))));
    attacks_.push_back(s);
    entries_.push_back(std::move(row));
    return true;
  }

  bool add_defense(const NodeSet& s) {
    require_oracle();
    if (has_defense(s)) return false;
    check_strategy_nodes(oracle_->network(), s, "defense");
    for (std::size_t a = 0; a < attacks_.size(); ++a) {
      entries_[a].push_back(static_cast<double>(oracle_->removal_payoff(attacks_[a].minus(s))));
    }
    defenses_.push_back(s);
    return true;
  }

 private:
  void require_oracle() const {
    if (oracle_ == nullptr) throw DomainError("payoff matrix has no oracle to evaluate new options");
  }

  const PayoffOracle* oracle_ = nullptr;
  std::vector<NodeSet> attacks_;
  std::vector<NodeSet> defenses_;
  lp::Matrix entries_;
};

// Value of a restricted game plus one player's optimal weights, indexed
// like that player's option list.
struct RestrictedSolution {
  double value = 0.0;
  std::vector<double> weights;
};

// Defender LP: minimize p subject to p >= sum_d x_d entry(a, d) for every
// attack a, with x a distribution over defenses.
inline RestrictedSolution solve_restricted_defender(const PayoffMatrix& m) {
  if (m.attack_count() == 0 || m.defense_count() == 0) throw DomainError("empty payoff matrix");
  auto sol = lp::solve_column_minimizer(m.entries());
  return {sol.value, std::move(sol.mix)};
}

// Attacker LP: maximize p subject to p <= sum_a z_a entry(a, d) for every
// defense d. Solved as the minimizing column player of the negated
// transpose.
inline RestrictedSolution solve_restricted_attacker(const PayoffMatrix& m) {
  if (m.attack_count() == 0 || m.defense_count() == 0) throw DomainError("empty payoff matrix");
  lp::Matrix flipped(m.defense_count(), std::vector<double>(m.attack_count()));
  for (std::size_t a = 0; a < m.attack_count(); ++a) {
    for (std::size_t d = 0; d < m.defense_count(); ++d) flipped[d][a] = -m.at(a, d);
  }
  auto sol = lp::solve_column_minimizer(flipped);
  return {-sol.value, std::move(sol.mix)};
}

// Drops numerically-zero weights and renormalizes.
inline MixedStrategy to_mixed_strategy(const std::vector<NodeSet>& options, const std::vector<double>& weights) {
  if (options.size() != weights.size()) throw DomainError("weights do not match option list");
  MixedStrategy mix;
  double total = 0.0;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (weights[i] > 1e-12) {
      mix.support.push_back({options[i], weights[i]});
      total += weights[i];
    }
  }
  if (mix.support.empty()) throw Error("restricted solution has empty support");
  for (auto& w : mix.support) w.probability /= total;
  return mix;
}

struct IterationDiagnostics {
  int iteration = 0;
  double restricted_value = 0.0;
  double attacker_response_value = 0.0;  // attacker best response vs defender mix
  double defender_response_value = 0.0;  // defender best response vs attacker mix
  std::size_t attack_options = 0;
  std::size_t defense_options = 0;
  double seconds = 0.0;
};

struct GameSolution {
  double value = 0.0;
  MixedStrategy attacker_mix;
  MixedStrategy defender_mix;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
  std::vector<IterationDiagnostics> diagnostics;
};

struct DoubleOracleOptions {
  int max_iters = 200;
  OracleKind oracle = OracleKind::Exact;
  std::uint64_t enumeration_limit = kDefaultEnumerationLimit;
  // Greedy oracles only: stop (unconverged) after this many consecutive
  // iterations with an identical restricted value. 0 disables.
  int stall_window = 3;
};

// Double oracle: both restricted option sets start as {empty set}; each
// round solves both restricted LPs, asks each side's oracle for a best
// response to the other's mix, and stops once both responses are already
// in the restricted sets.
inline GameSolution double_oracle(const PayoffOracle& oracle, int k_a, int k_d, const DoubleOracleOptions& opt = {}) {
  const auto n = oracle.network().node_count();
  if (k_a < 0 || k_d < 0 || static_cast<std::size_t>(k_a) > n || static_cast<std::size_t>(k_d) > n) {
    throw DomainError("budgets must lie in [0, |V|]");
  }
  if (opt.max_iters < 1) throw DomainError("max_iters must be at least 1");

  PayoffMatrix matrix(oracle, {NodeSet{}}, {NodeSet{}});
  GameSolution out;
  for (int iter = 1; iter <= opt.max_iters; ++iter) {
    const auto start = std::chrono::steady_clock::now();
    const auto def = solve_restricted_defender(matrix);
    const auto atk = solve_restricted_attacker(matrix);
    out.value = def.value;
    out.defender_mix = to_mixed_strategy(matrix.defenses(), def.weights);
    out.attacker_mix = to_mixed_strategy(matrix.attacks(), atk.weights);
    out.iterations = iter;

    const auto attack = best_response(oracle, out.defender_mix, k_a, Side::Attacker, opt.oracle, opt.enumeration_limit);
    const auto defense = best_response(oracle, out.attacker_mix, k_d, Side::Defender, opt.oracle, opt.enumeration_limit);

    IterationDiagnostics diag;
    diag.iteration = iter;
    diag.restricted_value = def.value;
    diag.attacker_response_value = attack.value;
    diag.defender_response_value = defense.value;
    diag.attack_options = matrix.attack_count();
    diag.defense_options = matrix.defense_count();

    const bool known = matrix.has_attack(attack.strategy.nodes) && matrix.has_defense(defense.strategy.nodes);
    if (!known) {
      matrix.add_attack(attack.strategy.nodes);
      matrix.add_defense(defense.strategy.nodes);
    }
    diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.diagnostics.push_back(diag);

    if (known) {
      out.converged = true;
      break;
    }
    if (opt.oracle == OracleKind::Greedy && opt.stall_window > 0 &&
        out.diagnostics.size() >= static_cast<std::size_t>(opt.stall_window)) {
      const auto tail = out.diagnostics.end() - opt.stall_window;
      const bool flat = std::all_of(tail, out.diagnostics.end(), [&](const IterationDiagnostics& d) {
        return std::abs(d.restricted_value - tail->restricted_value) <= kTieTolerance;
      });
      if (flat) {
        out.stalled = true;
        break;
      }
    }
  }
  return out;
}

inline constexpr std::uint64_t kDefaultFullGameLimit = 4'000'000;

// Solves the complete game over every budget-feasible pair of node sets.
inline GameSolution solve_full_enumeration(const PayoffOracle& oracle, int k_a, int k_d,
                                           std::uint64_t limit = kDefaultFullGameLimit) {
  if (k_a < 0 || k_d < 0) throw DomainError("negative budget");
  const auto& nodes = oracle.network().nodes();
  const auto n_att = subset_count(nodes.size(), static_cast<std::size_t>(k_a));
  const auto n_def = subset_count(nodes.size(), static_cast<std::size_t>(k_d));
  if (n_att > limit || n_def > limit || n_att * n_def > limit) {
    throw CapacityError("full game has " + std::to_string(n_att) + " x " + std::to_string(n_def) +
                        " strategy pairs (limit " + std::to_string(limit) + ")");
  }
  std::vector<NodeSet> attacks, defenses;
  for_each_subset_up_to(nodes, static_cast<std::size_t>(k_a), [&](const NodeSet& s) { attacks.push_back(s); });
  for_each_subset_up_to(nodes, static_cast<std::size_t>(k_d), [&](const NodeSet& s) { defenses.push_back(s); });

  const auto start = std::chrono::steady_clock::now();
  PayoffMatrix matrix(oracle, attacks, defenses);
  const auto def = solve_restricted_defender(matrix);
  const auto atk = solve_restricted_attacker(matrix);

  GameSolution out;
  out.value = def.value;
  out.defender_mix = to_mixed_strategy(defenses, def.weights);
  out.attacker_mix = to_mixed_strategy(attacks, atk.weights);
  out.iterations = 1;
  out.converged = true;
  IterationDiagnostics diag;
  diag.iteration = 1;
  diag.restricted_value = def.value;
  diag.attacker_response_value = def.value;
  diag.defender_response_value = atk.value;
  diag.attack_options = attacks.size();
  diag.defense_options = defenses.size();
  diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.diagnostics.push_back(diag);
  return out;
}

}  // namespace cascade_game
