#ifndef CQDO_ORACLE_HPP
#define CQDO_ORACLE_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cqdo/aux_tables.hpp"
#include "cqdo/estimator.hpp"
#include "cqdo/graph.hpp"
#include "cqdo/scale_index.hpp"
#include "cqdo/thorup_zwick.hpp"

namespace cqdo {

/*
 * Loop bounds and the scale threshold of the legitimate-pair search. The
 * defaults are tuned for estimators of stretch up to 128k; an estimator with
 * stretch c*k needs about log2(c) more steps in each loop.
 */
struct QueryParams {
    int window_floor = -9;            // loop A scans offsets 2 down to floor + 1
    double threshold_divisor = 256.0; // loop B stops at or below estimate / divisor
    int loop_b_cap = 12;
    int loop_c_cap = 10;

    static QueryParams for_stretch_constant(double c) {
        const int b = std::max(0, static_cast<int>(std::ceil(std::log2(std::max(c, 1.0)))));
        return {-(b + 2), std::ldexp(1.0, b + 1), b + 5, b + 3};
    }
};

/*
 * Every preprocessed table, plus the estimator that seeded the scale.
 */
struct Oracle {
    int k = 0;
    LevelAssignment levels;
    PivotTable pivots;
    BunchSet bunches;
    DeltaTables deltas;
    std::optional<XIndexTable> xindex;
    GlobalScale scale;
    NodeScaleTable node_scales;
    std::shared_ptr<const CoarseEstimator> estimator;
    QueryParams params;

    std::size_t num_nodes() const { return pivots.num_nodes(); }
    bool tz_only() const { return k < 4 || !xindex.has_value(); }
};

// Derived tables from (levels, pivots, bunches, estimator values).
inline void build_derived_tables(Oracle& o) {
    o.deltas = compute_delta_tables(o.pivots, o.k);
    o.xindex = compute_x_indices(o.deltas, o.k);
    o.scale = build_global_scale(o.bunches, o.pivots, o.estimator->value_set());
    o.node_scales = build_node_scales(o.pivots, o.scale);
}

struct BuildOptions {
    int k = 4;
    std::uint64_t seed = 1;
    std::optional<std::vector<std::vector<NodeId>>> level_override;
    QueryParams params;
};

struct BuildTimings {
    double levels_ms = 0;
    double pivots_ms = 0;
    double bunches_ms = 0;
    double derived_ms = 0;
    double total_ms = 0;
};

inline Oracle build_oracle(const Graph& g, const BuildOptions& opts, std::shared_ptr<const CoarseEstimator> estimator,
                           BuildTimings* timings = nullptr) {
    if (!estimator || estimator->num_nodes() != g.num_nodes()) {
        throw std::invalid_argument("build_oracle: estimator does not match the graph");
    }
    using clock = std::chrono::steady_clock;
    auto ms = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double, std::milli>(b - a).count();
    };
    auto t0 = clock::now();
    Oracle o;
    o.k = opts.k;
    o.estimator = std::move(estimator);
    o.params = opts.params;
    o.levels = sample_levels(g, opts.k, opts.seed, opts.level_override);
    auto t1 = clock::now();
    o.pivots = compute_pivots(g, o.levels);
    auto t2 = clock::now();
    o.bunches = compute_bunches(g, o.levels, o.pivots);
    auto t3 = clock::now();
    build_derived_tables(o);
    auto t4 = clock::now();
    if (timings) {
        *timings = {ms(t0, t1), ms(t1, t2), ms(t2, t3), ms(t3, t4), ms(t0, t4)};
    }
    return o;
}

}  // namespace cqdo

#endif  // CQDO_ORACLE_HPP
