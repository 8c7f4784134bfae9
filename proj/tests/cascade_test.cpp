#include <gtest/gtest.h>

#include <set>

#include "cascade_game/cascade.hpp"
#include "support/instances.hpp"
#include "support/naive_paths.hpp"

using namespace cascade_game;
using namespace cascade_game::testing;

namespace {

std::vector<NodeSet> all_subsets(const GridNetwork& g) {
  std::vector<NodeSet> out;
  const auto& ids = g.nodes();
  for (std::uint32_t mask = 0; mask < (1u << ids.size()); ++mask) {
    std::vector<NodeId> pick;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (mask & (1u << i)) pick.push_back(ids[i]);
    }
    out.emplace_back(pick);
  }
  return out;
}

}  // namespace

TEST(EdgeLoads, P3SinglePath) {
  const auto loads = edge_loads(p3());
  EXPECT_EQ(loads.at({0, 1}), 1.0);
  EXPECT_EQ(loads.at({1, 2}), 1.0);
}

TEST(EdgeLoads, V2SplitsBetweenNearestSources) {
  const auto loads = edge_loads(v2());
  EXPECT_EQ(loads.at({0, 2}), 0.5);
  EXPECT_EQ(loads.at({1, 2}), 0.5);
}

TEST(EdgeLoads, K22AllHalf) {
  const auto loads = edge_loads(k22());
  ASSERT_EQ(loads.size(), 4u);
  for (const auto& [e, v] : loads) EXPECT_EQ(v, 0.5) << e.u << "-" << e.v;
}

TEST(EdgeLoads, UnservedLoadContributesNothing) {
  GridNetwork g;
  g.add_node(0, Role::Load);
  g.add_node(1, Role::Transmission);
  g.add_edge(0, 1);
  EXPECT_EQ(edge_loads(g).at({0, 1}), 0.0);
}

TEST(EdgeLoads, MatchesNaiveEnumeration) {
  Rng rng(101);
  for (int trial = 0; trial < 60; ++trial) {
    const auto g = random_grid(rng, 4 + static_cast<int>(rng.below(5)), 0.3);
    const auto fast = edge_loads(g);
    const auto slow = naive_edge_loads(g);
    ASSERT_EQ(fast.size(), slow.size());
    for (const auto& [e, v] : slow) EXPECT_NEAR(fast.at(e), v, 1e-9);
  }
}

TEST(NodalLoads, P3InteriorOnly) {
  const auto loads = nodal_loads(p3());
  EXPECT_EQ(loads.at(0), 0.0);
  EXPECT_EQ(loads.at(1), 1.0);
  EXPECT_EQ(loads.at(2), 0.0);
}

TEST(NodalLoads, K22HasNoInteriorNodes) {
  for (const auto& [v, load] : nodal_loads(k22())) EXPECT_EQ(load, 0.0) << v;
}

TEST(NodalLoads, V2LoadIsAlwaysAnEndpoint) { EXPECT_EQ(nodal_loads(v2()).at(2), 0.0); }

TEST(NodalLoads, MatchesNaiveEnumeration) {
  Rng rng(202);
  for (int trial = 0; trial < 60; ++trial) {
    const auto g = random_grid(rng, 4 + static_cast<int>(rng.below(5)), 0.3);
    const auto fast = nodal_loads(g);
    const auto slow = naive_nodal_loads(g);
    for (const auto& [v, load] : slow) EXPECT_NEAR(fast.at(v), load, 1e-9);
  }
}

TEST(Capacities, ScaleInitialLoad) {
  const auto v = capacities(v2(), 0.5);
  EXPECT_EQ(v.at({0, 2}), 0.75);
  EXPECT_EQ(v.at({1, 2}), 0.75);
  const auto p = capacities(p3(), 0.0);
  EXPECT_EQ(p.at({0, 1}), 1.0);
  EXPECT_EQ(p.at({1, 2}), 1.0);
  for (const auto& [e, c] : capacities(k22(), 3.0).values()) EXPECT_EQ(c, 2.0);
}

TEST(Capacities, NegativeMarginIsDomainError) { EXPECT_THROW(capacities(v2(), -0.1), DomainError); }

TEST(FailureStep, InitiallyStable) {
  const auto caps = capacities(v2(), 0.5);
  EXPECT_EQ(failure_step(v2(), caps), v2());
}

TEST(FailureStep, OverloadAfterLosingASource) {
  const auto g = remove_nodes(v2(), {0});
  const auto next = failure_step(g, capacities(v2(), 0.5));
  EXPECT_EQ(next.edge_count(), 0u);
  EXPECT_EQ(next.node_count(), 2u);
}

TEST(FailureStep, EqualLoadAndCapacitySurvives) {
  // Load 1 against capacity (1 + 1) * 0.5 = 1.
  const auto g = remove_nodes(v2(), {0});
  EXPECT_EQ(failure_step(g, capacities(v2(), 1.0)), g);
}

TEST(FailureStep, MissingCapacityIsDomainError) {
  auto g = v2();
  const auto caps = capacities(g, 0.5);
  g.add_edge(0, 1);
  EXPECT_THROW(failure_step(g, caps), DomainError);
}

TEST(CascadeFixpoint, StableNetworkHasNoRounds) {
  const auto trace = cascade_fixpoint(v2(), capacities(v2(), 0.5));
  EXPECT_TRUE(trace.rounds.empty());
  EXPECT_EQ(trace.final_network, v2());
}

TEST(CascadeFixpoint, OneRoundAfterSourceLoss) {
  const auto trace = cascade_fixpoint(remove_nodes(v2(), {0}), capacities(v2(), 0.5));
  ASSERT_EQ(trace.rounds.size(), 1u);
  EXPECT_EQ(trace.rounds[0], (std::vector<Edge>{{1, 2}}));
  EXPECT_EQ(trace.final_network.edge_count(), 0u);
}

TEST(CascadeFixpoint, BoundedIdempotentAndDisjoint) {
  Rng rng(303);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g0 = random_grid(rng, 5 + static_cast<int>(rng.below(6)), 0.3);
    const double alpha = static_cast<double>(rng.below(5)) * 0.25;
    const auto caps = capacities(g0, alpha);
    const auto g = remove_nodes(g0, {static_cast<NodeId>(rng.below(g0.node_count()))});
    const auto trace = cascade_fixpoint(g, caps);
    EXPECT_LE(trace.rounds.size(), g.edge_count() + 1);
    EXPECT_EQ(failure_step(trace.final_network, caps), trace.final_network);
    EXPECT_TRUE(cascade_fixpoint(trace.final_network, caps).rounds.empty());
    std::set<Edge> seen;
    for (const auto& round : trace.rounds) {
      EXPECT_FALSE(round.empty());
      for (const Edge& e : round) EXPECT_TRUE(seen.insert(e).second);
    }
    EXPECT_EQ(trace.final_network.edge_count() + seen.size(), g.edge_count());
  }
}

TEST(CascadeFixpoint, InitialNetworkIsStable) {
  Rng rng(404);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g0 = random_grid(rng, 4 + static_cast<int>(rng.below(7)), 0.3);
    for (double alpha : {0.0, 0.1, 0.5, 1.0, 3.0}) {
      EXPECT_EQ(failure_step(g0, capacities(g0, alpha)), g0);
    }
  }
}

TEST(Payoff, V2AttackCascades) {
  const auto g0 = v2();
  const auto caps = capacities(g0, 0.5);
  EXPECT_EQ(payoff(g0, caps, {0}, {}), 1u);
  EXPECT_EQ(payoff(g0, caps, {0}, {0}), 0u);
}

TEST(Payoff, V2BoundaryAtAlphaOne) {
  const auto g0 = v2();
  const auto caps = capacities(g0, 1.0);
  EXPECT_EQ(payoff(g0, caps, {0}, {}), 0u);
  EXPECT_EQ(payoff(g0, caps, {0, 1}, {}), 1u);
}

TEST(Payoff, SetCoverInstanceHasNoCascade) {
  const auto inst = generate_set_cover_instance(sc1_sets(), 3, 1);
  const auto caps = capacities(inst.network, inst.alpha);
  EXPECT_EQ(payoff(inst.network, caps, {0}, {}), 1u);
}

TEST(Payoff, RemovedLoadsCount) {
  const auto inst = generate_vertex_cover_instance(3, {{0, 1}, {1, 2}, {0, 2}}, 2);
  const auto caps = capacities(inst.network, inst.alpha);
  EXPECT_EQ(payoff(inst.network, caps, {0, 1}, {}), 3u);
}

TEST(Payoff, UnknownStrategyNodeIsRejected) {
  const auto caps = capacities(v2(), 0.5);
  EXPECT_THROW(payoff(v2(), caps, {7}, {}), ReferenceError);
  EXPECT_THROW(payoff(v2(), caps, {}, {7}), ReferenceError);
}

TEST(Payoff, DependsOnlyOnEffectiveRemoval) {
  Rng rng(505);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g0 = random_grid(rng, 5, 0.3);
    const auto caps = capacities(g0, 0.5);
    const auto subsets = all_subsets(g0);
    for (const auto& a : subsets) {
      for (std::size_t j = 0; j < subsets.size(); j += 3) {
        const auto& d = subsets[j];
        EXPECT_EQ(payoff(g0, caps, a, d), payoff(g0, caps, a.minus(d), {}));
      }
    }
  }
}

TEST(Payoff, NotSubmodularOnV2) {
  // With the load defended, losing both sources costs 1 while losing either
  // alone costs nothing.
  const auto g0 = v2();
  const auto caps = capacities(g0, 1.0);
  const NodeSet defended{2};
  const auto p = [&](const NodeSet& a) { return static_cast<int>(payoff(g0, caps, a, defended)); };
  EXPECT_EQ(p({0, 1}) - p({0}), 1);
  EXPECT_EQ(p({1}) - p({}), 0);
}

TEST(Payoff, NotSupermodularOnP3) {
  // Removing the middle node already disconnects t; adding s to the attack
  // gains nothing although s alone would.
  const auto g0 = p3();
  const auto caps = capacities(g0, 0.0);
  const auto p = [&](const NodeSet& a) { return static_cast<int>(payoff(g0, caps, a, {})); };
  EXPECT_LT(p({0, 1}) - p({1}), p({0}) - p({}));
}
