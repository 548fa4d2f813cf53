#include <gtest/gtest.h>

#include <map>

#include "support.hpp"

using namespace cqdo;
using namespace cqdo::testing;

namespace {

std::map<NodeId, double> as_map(const BunchSet& bunches, NodeId v) {
    auto sorted = bunches.sorted_bunch(v);
    return {sorted.begin(), sorted.end()};
}

}  // namespace

TEST(Levels, OverrideAcceptedVerbatim) {
    auto levels = sample_levels(p5(), 4, 1, p5_levels());
    EXPECT_EQ(levels.level, (std::vector<std::uint8_t>{0, 2, 0, 3, 0}));
    EXPECT_EQ(levels.members(1), (std::vector<NodeId>{b, d}));
    EXPECT_EQ(levels.members(3), (std::vector<NodeId>{d}));
}

TEST(Levels, OverrideMustBeNestedWithNonemptyTop) {
    EXPECT_THROW(levels_from_sets(5, 4, {{b}, {b, d}, {d}}), std::invalid_argument);
    EXPECT_THROW(levels_from_sets(5, 4, {{b, d}, {b, d}, {}}), std::invalid_argument);
    EXPECT_THROW(levels_from_sets(5, 4, {{b, d}, {b, d}}), std::invalid_argument);
    EXPECT_THROW(levels_from_sets(5, 4, {{b, 9}, {b}, {b}}), std::invalid_argument);
}

TEST(Levels, SingleNodeForcedIntoTopLevel) {
    auto levels = sample_levels(1, 2, 42);
    EXPECT_EQ(levels.members(1), std::vector<NodeId>{0});
}

TEST(Levels, DeterministicAndNested) {
    for (int k : {2, 3, 5, 8}) {
        auto x = sample_levels(300, k, 9);
        auto y = sample_levels(300, k, 9);
        EXPECT_EQ(x.level, y.level);
        EXPECT_FALSE(x.members(k - 1).empty());
        for (int i = 1; i < k; ++i) {
            for (auto v : x.members(i)) {
                EXPECT_TRUE(x.in_level(v, i - 1));
            }
        }
    }
}

TEST(Levels, InvalidK) {
    EXPECT_THROW(sample_levels(10, 1, 1), std::invalid_argument);
    EXPECT_THROW(sample_levels(10, 65, 1), std::invalid_argument);
}

TEST(Pivots, FixtureValues) {
    auto g = p5();
    auto levels = sample_levels(g, 4, 1, p5_levels());
    auto pv = compute_pivots(g, levels);
    EXPECT_EQ(pv.pivot(c, 1), b);  // b and d tie at distance 1
    EXPECT_EQ(pv.dist(c, 1), 1.0);
    EXPECT_EQ(pv.pivot(a, 3), d);
    EXPECT_EQ(pv.dist(a, 3), 3.0);
    for (NodeId v = 0; v < 5; ++v) {
        EXPECT_EQ(pv.pivot(v, 0), v);
        EXPECT_EQ(pv.dist(v, 0), 0.0);
        EXPECT_EQ(pv.pivot(v, 4), kNoNode);
        EXPECT_TRUE(std::isinf(pv.dist(v, 4)));
    }
}

TEST(Pivots, ExactNearestInLevelOnRandomGraphs) {
    for (const auto& w : small_graphs(12, 80, 300)) {
        auto ex = exact_all_pairs(w.graph, 1);
        for (int k : {3, 5}) {
            auto levels = sample_levels(w.graph, k, 17);
            auto pv = compute_pivots(w.graph, levels);
            for (NodeId v = 0; v < w.graph.num_nodes(); ++v) {
                for (int i = 0; i < k; ++i) {
                    double best = kInfinity;
                    NodeId arg = kNoNode;
                    for (auto u : levels.members(i)) {
                        if (ex(v, u) < best) {
                            best = ex(v, u);
                            arg = u;
                        }
                    }
                    EXPECT_EQ(pv.dist(v, i), best) << w.name;
                    EXPECT_EQ(pv.pivot(v, i), arg) << w.name << " v=" << v << " i=" << i;
                    if (i > 0) {
                        EXPECT_LE(pv.dist(v, i - 1), pv.dist(v, i));
                    }
                }
            }
        }
    }
}

TEST(Bunches, FixtureValues) {
    auto o = p5_oracle();
    EXPECT_EQ(as_map(o.bunches, a), (std::map<NodeId, double>{{a, 0}, {b, 1}, {d, 3}}));
    EXPECT_EQ(as_map(o.bunches, e), (std::map<NodeId, double>{{e, 0}, {d, 1}}));
    for (NodeId v = 0; v < 5; ++v) {
        EXPECT_EQ(o.bunches.distance(v, v), std::optional<double>(0.0));
    }
}

TEST(Bunches, MatchBruteForceDefinition) {
    for (const auto& w : small_graphs(16, 100, 400)) {
        auto ex = exact_all_pairs(w.graph, 1);
        for (int k : {2, 4, 6}) {
            auto levels = sample_levels(w.graph, k, 23);
            auto pv = compute_pivots(w.graph, levels);
            auto bunches = compute_bunches(w.graph, levels, pv);
            for (NodeId v = 0; v < w.graph.num_nodes(); ++v) {
                std::map<NodeId, double> want;
                for (NodeId u = 0; u < w.graph.num_nodes(); ++u) {
                    int lu = levels.level[u];
                    if (ex(v, u) < pv.dist(v, lu + 1)) {
                        want[u] = ex(v, u);
                    }
                }
                ASSERT_EQ(as_map(bunches, v), want) << w.name << " k=" << k << " v=" << v;
            }
        }
    }
}

TEST(TzQuery, FixtureTrace) {
    auto o = p5_oracle();
    auto r = tz_query(o.pivots, o.bunches, a, e);
    EXPECT_EQ(r.distance, 4.0);
    EXPECT_EQ(r.walk, 1);  // w = p_1(e) = d is found in B(a)
    EXPECT_EQ(tz_query(o.pivots, o.bunches, c, c).distance, 0.0);
    EXPECT_EQ(tz_query(o.pivots, o.bunches, a, b).distance, 1.0);
}

TEST(TzQuery, DisconnectedIsInfinite) {
    auto g = from_edge_list(std::string("4\n0 1 1\n2 3 1\n"));
    auto levels = levels_from_sets(4, 2, {{1}});
    auto pv = compute_pivots(g, levels);
    auto bunches = compute_bunches(g, levels, pv);
    EXPECT_TRUE(std::isinf(tz_query(pv, bunches, 0, 3).distance));
    EXPECT_TRUE(std::isinf(tz_query(pv, bunches, 3, 0).distance));
    EXPECT_EQ(tz_query(pv, bunches, 2, 3).distance, 1.0);
}

TEST(TzQuery, StretchOnRandomGraphs) {
    for (const auto& w : small_graphs(12, 120, 500)) {
        auto ex = exact_all_pairs(w.graph, 1);
        for (int k : {2, 3, 4, 7}) {
            auto levels = sample_levels(w.graph, k, 5);
            auto pv = compute_pivots(w.graph, levels);
            auto bunches = compute_bunches(w.graph, levels, pv);
            for (NodeId s = 0; s < w.graph.num_nodes(); ++s) {
                for (NodeId t = 0; t < w.graph.num_nodes(); ++t) {
                    double got = tz_query(pv, bunches, s, t).distance;
                    ASSERT_TRUE(approx_le(ex(s, t), got) && approx_le(got, (2 * k - 1) * ex(s, t)))
                        << w.name << " k=" << k << " s=" << s << " t=" << t;
                }
            }
        }
    }
}

TEST(Bunches, SizeWithinSlackOfExpectation) {
    GeneratorParams p{.family = Family::gnp, .n = 400, .p = 0.02, .w_min = 1, .w_max = 1e6};
    auto g = generate(p, 3);
    for (int k : {2, 3, 4}) {
        double total = 0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            auto levels = sample_levels(g, k, seed);
            auto pv = compute_pivots(g, levels);
            total += static_cast<double>(compute_bunches(g, levels, pv).total_size());
        }
        EXPECT_LE(total / 10, 4 * k * std::pow(400.0, 1.0 + 1.0 / k));
    }
}
