#include <gtest/gtest.h>

#include "support.hpp"

using namespace cqdo;
using namespace cqdo::testing;

TEST(SnapUp, PowersOfTwo) {
    EXPECT_EQ(snap_up_pow2(4.0), 4.0);
    EXPECT_EQ(snap_up_pow2(3.0), 4.0);
    EXPECT_EQ(snap_up_pow2(0.0), 0.0);
    EXPECT_EQ(snap_up_pow2(0.3), 0.5);
    EXPECT_EQ(snap_up_pow2(1e6), 1048576.0);
}

TEST(SnapEstimator, FixtureValues) {
    auto g = p5();
    auto est = snap_estimator(exact_all_pairs(g, 1));
    EXPECT_EQ(est->estimate(a, e), 4.0);
    EXPECT_EQ(est->estimate(a, d), 4.0);
    EXPECT_EQ(est->estimate(c, c), 0.0);
    EXPECT_EQ(est->stretch_bound(), 2.0);
    auto values = est->value_set();
    EXPECT_EQ(std::vector<double>(values.begin(), values.end()), (std::vector<double>{0, 1, 2, 4}));
}

TEST(SnapEstimator, DisconnectedIsInfinite) {
    auto est = snap_estimator(exact_all_pairs(from_edge_list(std::string("3\n0 1 1\n")), 1));
    EXPECT_TRUE(std::isinf(est->estimate(0, 2)));
}

TEST(SnapEstimator, ContractAndValueSetSize) {
    for (const auto& w : small_graphs(12, 150, 900)) {
        auto ex = exact_all_pairs(w.graph, 1);
        auto est = snap_estimator(ex);
        auto values = est->value_set();
        double lo = kInfinity, hi = 0;
        for (NodeId s = 0; s < ex.num_nodes(); ++s) {
            for (NodeId t = 0; t < ex.num_nodes(); ++t) {
                double dist = ex(s, t);
                double got = est->estimate(s, t);
                ASSERT_EQ(got, est->estimate(t, s));
                if (std::isinf(dist)) {
                    ASSERT_TRUE(std::isinf(got));
                    continue;
                }
                ASSERT_LE(dist, got);
                ASSERT_LE(got, 2 * dist);
                ASSERT_TRUE(std::binary_search(values.begin(), values.end(), got));
                if (dist > 0) {
                    lo = std::min(lo, dist);
                    hi = std::max(hi, dist);
                }
            }
        }
        // The bound counts the nonzero powers; {0} rides on top.
        EXPECT_LE(static_cast<double>(values.size() - 1), std::log2(hi / lo) + 2) << w.name;
    }
}

TEST(StretchInjector, IdentityAtAlphaOne) {
    GeneratorParams p{.family = Family::gnp, .n = 80, .p = 0.08, .w_min = 1, .w_max = 1e6};
    auto g = generate(p, 2);
    auto base = snap_estimator(exact_all_pairs(g, 1));
    auto inj = stretch_injector(*base, 1.0, 9, 4);
    for (NodeId s = 0; s < 80; ++s) {
        for (NodeId t = 0; t < 80; ++t) {
            EXPECT_EQ(inj->estimate(s, t), snap_up_pow2(base->estimate(s, t)));
        }
    }
}

TEST(StretchInjector, ContractAtAlpha32) {
    GeneratorParams p{.family = Family::geometric, .n = 150, .w_min = 1, .w_max = std::pow(4.0, 15)};
    auto g = generate(p, 4);
    auto ex = exact_all_pairs(g, 1);
    auto inj = stretch_injector(*snap_estimator(ex), 32.0, 77, 4);
    EXPECT_EQ(inj->stretch_bound(), 128.0);
    auto values = inj->value_set();
    for (NodeId s = 0; s < 150; ++s) {
        for (NodeId t = 0; t < 150; ++t) {
            double dist = ex(s, t);
            double got = inj->estimate(s, t);
            ASSERT_EQ(got, inj->estimate(t, s));
            if (std::isinf(dist)) {
                ASSERT_TRUE(std::isinf(got));
                continue;
            }
            ASSERT_LE(dist, got);
            ASSERT_LE(got, 128.0 * 4 * dist);
            ASSERT_LE(got, inj->stretch_bound() * dist);
            ASSERT_TRUE(std::binary_search(values.begin(), values.end(), got));
        }
    }
}

TEST(StretchInjector, DeterministicPerSeed) {
    auto ex = exact_all_pairs(generate({.family = Family::path, .n = 30, .weights = WeightScheme::powers}, 1), 1);
    auto base = snap_estimator(ex);
    auto x = stretch_injector(*base, 16.0, 5, 6);
    auto y = stretch_injector(*base, 16.0, 5, 6);
    auto z = stretch_injector(*base, 16.0, 6, 6);
    EXPECT_EQ(x->table(), y->table());
    EXPECT_NE(x->table(), z->table());
}

TEST(StretchInjector, BudgetEnforced) {
    auto base = snap_estimator(exact_all_pairs(p5(), 1));
    EXPECT_THROW(stretch_injector(*base, 257.0, 1, 4), std::invalid_argument);
    EXPECT_NO_THROW(stretch_injector(*base, 256.0, 1, 4));
    EXPECT_THROW(stretch_injector(*base, 0.5, 1, 4), std::invalid_argument);
}

TEST(TableEstimator, RejectsBadTables) {
    EXPECT_THROW(TableEstimator(2, {0, 1}, {0, 1, 1}, 2.0, {}), std::invalid_argument);
    EXPECT_THROW(TableEstimator(1, {1, 0}, {0}, 2.0, {}), std::invalid_argument);
    EXPECT_THROW(TableEstimator(1, {0}, {3}, 2.0, {}), std::invalid_argument);
}
