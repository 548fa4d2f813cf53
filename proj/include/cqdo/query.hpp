#ifndef CQDO_QUERY_HPP
#define CQDO_QUERY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "cqdo/oracle.hpp"

namespace cqdo {

// Which return fired: findleg lines 2/5/11/14/17/18 or estimate lines 2-5.
enum class Branch : std::uint8_t {
    none,
    identical,
    disconnected,
    findleg_2,
    findleg_5,
    findleg_11,
    findleg_14,
    findleg_17,
    findleg_18,
    estimate_2,
    estimate_3,
    estimate_4,
    estimate_5,
};

enum class FallbackReason : std::uint8_t {
    none,
    tz_only,          // k < 4
    incomplete_node,  // some pivot distance of s or t is ∞
    unknown_scale,    // estimate not in D
    window_miss,      // loop A found nothing (findleg line 5)
    list_underrun,    // loop B ran off the bottom of L_s above the threshold
    list_overrun,     // loop C ran off the top of L_s
    absent_even_map,  // an L_s entry reached only by odd levels
    loop_cap,         // iteration cap exceeded
    not_legitimate,   // emitted pair failed the bunch-membership condition
    all_none,         // every checkind in estimate returned NONE
    uncertified,      // candidate distance lacks a proof of (2k-1) stretch
    anomaly,          // a bunch lookup that must succeed did not
};

inline std::string_view to_string(Branch b) {
    switch (b) {
    case Branch::none: return "none";
    case Branch::identical: return "identical";
    case Branch::disconnected: return "disconnected";
    case Branch::findleg_2: return "findleg_2";
    case Branch::findleg_5: return "findleg_5";
    case Branch::findleg_11: return "findleg_11";
    case Branch::findleg_14: return "findleg_14";
    case Branch::findleg_17: return "findleg_17";
    case Branch::findleg_18: return "findleg_18";
    case Branch::estimate_2: return "estimate_2";
    case Branch::estimate_3: return "estimate_3";
    case Branch::estimate_4: return "estimate_4";
    case Branch::estimate_5: return "estimate_5";
    }
    return "?";
}

inline std::string_view to_string(FallbackReason r) {
    switch (r) {
    case FallbackReason::none: return "none";
    case FallbackReason::tz_only: return "tz_only";
    case FallbackReason::incomplete_node: return "incomplete_node";
    case FallbackReason::unknown_scale: return "unknown_scale";
    case FallbackReason::window_miss: return "window_miss";
    case FallbackReason::list_underrun: return "list_underrun";
    case FallbackReason::list_overrun: return "list_overrun";
    case FallbackReason::absent_even_map: return "absent_even_map";
    case FallbackReason::loop_cap: return "loop_cap";
    case FallbackReason::not_legitimate: return "not_legitimate";
    case FallbackReason::all_none: return "all_none";
    case FallbackReason::uncertified: return "uncertified";
    case FallbackReason::anomaly: return "anomaly";
    }
    return "?";
}

struct QueryStats {
    int loop_a_iters = 0;
    int loop_b_iters = 0;
    int loop_c_iters = 0;
    int checkind_calls = 0;  // outside loop C, whose calls loop_c_iters counts
    Branch branch = Branch::none;
    bool fallback_used = false;
    FallbackReason reason = FallbackReason::none;
    bool swapped = false;
    int tz_walk = 0;

    int counter_sum() const { return loop_a_iters + loop_b_iters + loop_c_iters + checkind_calls; }
};

struct QueryResult {
    double distance = kInfinity;
    QueryStats stats;
};

/*
 * A checkind hit. rule names the branch that produced it:
 *   1  p_{j-2}(s) ∈ B(t)         2  p_{j-1}(t) ∈ B(s)
 *   3  i = k-2, p_i(s) ∈ B(t)    4  i = k-2, via p_{k-1}(t)
 *   5  i = k-1, via p_{k-1}(s)
 * with j = I(i, s).
 */
struct CheckindHit {
    double value;
    int rule;
    int j;
};

struct LegitimatePair {
    int i1 = -1;
    int i2 = -1;

    friend bool operator==(const LegitimatePair&, const LegitimatePair&) = default;
};

struct FindlegResult {
    enum class Kind { distance, pair, fallback };

    Kind kind = Kind::fallback;
    double distance = -1.0;
    LegitimatePair pair;
    NodeId s = 0;  // orientation after the optional swap
    NodeId t = 0;
    bool swapped = false;
    Branch branch = Branch::none;
    FallbackReason reason = FallbackReason::none;
    double lower_bound = 0.0;  // proven lower bound on dist(s, t) gathered on the way
};

namespace detail {

struct CheckOutcome {
    std::optional<CheckindHit> hit;
    bool anomaly = false;
};

inline CheckOutcome checkind(const Oracle& o, NodeId s, NodeId t, int i) {
    const auto& pv = o.pivots;
    const auto& b = o.bunches;
    const int k = o.k;
    const int j = o.deltas.argmax(s, i);

    NodeId w = pv.pivot(s, j - 2);
    if (auto d = b.distance(t, w)) {
        return {CheckindHit{pv.dist(s, j - 2) + *d, 1, j}};
    }
    w = pv.pivot(t, j - 1);
    if (auto d = b.distance(s, w)) {
        return {CheckindHit{pv.dist(t, j - 1) + *d, 2, j}};
    }
    if (i == k - 2) {
        w = pv.pivot(s, i);
        if (auto d = b.distance(t, w)) {
            return {CheckindHit{pv.dist(s, i) + *d, 3, j}};
        }
        w = pv.pivot(t, k - 1);
        if (auto d = b.distance(s, w)) {
            return {CheckindHit{pv.dist(t, k - 1) + *d, 4, j}};
        }
        return {std::nullopt, true};
    }
    if (i == k - 1) {
        w = pv.pivot(s, k - 1);
        if (auto d = b.distance(t, w)) {
            return {CheckindHit{pv.dist(s, k - 1) + *d, 5, j}};
        }
        return {std::nullopt, true};
    }
    return {};
}

/*
 * True when the hit is provably within (2k-1) dist(s, t), given that
 * dist(s, t) >= lb. Rules 3-5 always are. Rules 1 and 2 are bounded by
 * 2 pdist(s, j-2) + 3 dist (rule 1: + dist), and rule 2 also by
 * 2 pdist(t, j-1) + dist.
 */
inline bool certified(const Oracle& o, NodeId s, NodeId t, const CheckindHit& hit, double lb) {
    const double k = o.k;
    if (hit.rule >= 3 || hit.value <= (2 * k - 1) * lb) {
        return true;
    }
    const double near_s = 2.0 * o.pivots.dist(s, hit.j - 2);
    if (hit.rule == 1) {
        return near_s <= (2 * k - 2) * lb;
    }
    const double near_t = 2.0 * o.pivots.dist(t, hit.j - 1);
    return near_s <= (2 * k - 4) * lb || near_t <= (2 * k - 2) * lb;
}

inline double none_bound(const Oracle& o, NodeId s, int i) { return o.deltas.max_delta(s, i) / 2.0; }

}  // namespace detail

/*
 * checkind(s, t, i) for even i in [2, k-1]. nullopt is NONE, which implies
 * i < k-2 and dist(s, t) >= max_delta(s, i) / 2.
 */
inline std::optional<CheckindHit> checkind(const Oracle& o, NodeId s, NodeId t, int i) {
    if (i < 2 || i > o.k - 1 || i % 2 != 0) {
        throw std::invalid_argument("checkind: index must be even and in [2, k-1]");
    }
    if (s >= o.num_nodes() || t >= o.num_nodes()) {
        throw std::invalid_argument("checkind: node out of range");
    }
    if (!o.deltas.complete(s) || !o.deltas.complete(t)) {
        throw std::invalid_argument("checkind: node has an undefined pivot");
    }
    auto out = detail::checkind(o, s, t, i);
    if (out.anomaly) {
        throw std::domain_error("checkind: s and t are not connected");
    }
    return out.hit;
}

/*
 * Legitimate-pair search. Returns an exact or (2k-1)-approximate distance,
 * a legitimate pair (i1, i2) for the oriented (s, t), or a fallback signal.
 * Precondition: k >= 4, s != t, connected, both nodes complete.
 */
inline FindlegResult findleg(const Oracle& o, NodeId s, NodeId t, QueryStats* stats_out = nullptr) {
    QueryStats local;
    QueryStats& st = stats_out ? *stats_out : local;
    FindlegResult r;
    const auto& p = o.params;
    const double k = o.k;

    auto finish_distance = [&](double d, Branch b) {
        r.kind = FindlegResult::Kind::distance;
        r.distance = d;
        r.branch = b;
        st.branch = b;
        r.s = s;
        r.t = t;
        return r;
    };
    auto fallback = [&](FallbackReason why, Branch b = Branch::none) {
        r.kind = FindlegResult::Kind::fallback;
        r.reason = why;
        r.branch = b;
        st.branch = b;
        st.reason = why;
        r.s = s;
        r.t = t;
        return r;
    };

    const double e = o.estimator->estimate(s, t);

    // Line 2: exact distance on a bunch hit.
    if (auto d = o.bunches.distance(s, t)) {
        return finish_distance(*d, Branch::findleg_2);
    }
    if (auto d = o.bunches.distance(t, s)) {
        return finish_distance(*d, Branch::findleg_2);
    }

    double& lb = r.lower_bound;
    lb = e / o.estimator->stretch_bound();
    // t ∉ B(s) means dist(s, t) >= pdist(s, level(t) + 1), and symmetrically.
    for (auto [a, b] : {std::pair{s, t}, std::pair{t, s}}) {
        double bound = o.pivots.dist(a, o.levels.level[b] + 1);
        if (std::isfinite(bound)) {
            lb = std::max(lb, bound);
        }
    }

    // Line 1.
    const auto dt = o.scale.up_index(e);
    if (!dt) {
        return fallback(FallbackReason::unknown_scale);
    }

    // Lines 3-4 (loop A): a scale value within the window held by H_s or H_t.
    int i = 2;
    bool found1 = false;
    std::uint32_t cur = 0;
    while (i > p.window_floor && !found1) {
        ++st.loop_a_iters;
        cur = o.scale.clamp_position(static_cast<long long>(*dt) + i).first;
        if (o.node_scales[s].find(cur) || o.node_scales[t].find(cur)) {
            found1 = true;
        } else {
            --i;
        }
    }
    if (!found1) {
        return fallback(FallbackReason::window_miss, Branch::findleg_5);
    }

    // Line 6.
    if (!o.node_scales[s].find(cur)) {
        std::swap(s, t);
        r.swapped = true;
        st.swapped = true;
    }
    const auto& ls = o.node_scales[s];

    // Lines 7-9 (loop B): walk down L_s to the first value <= e / divisor.
    const long long start = *ls.find(cur);
    const double threshold = e / p.threshold_divisor;
    long long offset = 0;
    std::size_t min_slot = 0;
    for (;;) {
        auto [slot, clamped] = ls.clamp_slot(start + offset);
        if (o.scale.at(ls.list[slot]) <= threshold) {
            min_slot = slot;
            break;
        }
        if (clamped) {
            return fallback(FallbackReason::list_underrun);
        }
        if (++st.loop_b_iters > p.loop_b_cap) {
            return fallback(FallbackReason::loop_cap);
        }
        --offset;
    }

    // Lines 10-11.
    const int i_min = ls.even_hi[min_slot];
    if (i_min < 0) {
        return fallback(FallbackReason::absent_even_map);
    }
    ++st.checkind_calls;
    auto c11 = detail::checkind(o, s, t, i_min);
    if (c11.anomaly) {
        return fallback(FallbackReason::anomaly);
    }
    if (c11.hit) {
        if (!detail::certified(o, s, t, *c11.hit, lb)) {
            return fallback(FallbackReason::uncertified, Branch::findleg_11);
        }
        return finish_distance(c11.hit->value, Branch::findleg_11);
    }
    lb = std::max(lb, detail::none_bound(o, s, i_min));

    // Lines 12-13 (loop C): walk up L_s until checkind fires.
    long long ell = 0;
    bool found2 = false;
    std::size_t hit_slot = 0;
    int hit_index = 0;
    auto slot_pos = [&](long long q) { return ls.list[ls.clamp_slot(q).first]; };
    while (!found2 && slot_pos(static_cast<long long>(min_slot) + ell - 2) < *dt) {
        if (++st.loop_c_iters > p.loop_c_cap) {
            return fallback(FallbackReason::loop_cap);
        }
        auto [slot, clamped] = ls.clamp_slot(static_cast<long long>(min_slot) + ell);
        if (clamped) {
            return fallback(FallbackReason::list_overrun);
        }
        const int idx = ls.even_hi[slot];
        if (idx < 0) {
            return fallback(FallbackReason::absent_even_map);
        }
        auto c = detail::checkind(o, s, t, idx);
        if (c.anomaly) {
            return fallback(FallbackReason::anomaly);
        }
        if (c.hit) {
            found2 = true;
            hit_slot = slot;
            hit_index = idx;
        } else {
            lb = std::max(lb, detail::none_bound(o, s, idx));
            ++ell;
        }
    }

    // Line 14.
    if (!found2) {
        if (e <= (2 * k - 1) * lb) {
            return finish_distance(e, Branch::findleg_14);
        }
        return fallback(FallbackReason::uncertified, Branch::findleg_14);
    }

    // Lines 15-17.
    const int i2 = o.deltas.argmax(s, hit_index);
    const int i1 = ls.even_lo[hit_slot];
    ++st.checkind_calls;
    auto c17 = detail::checkind(o, s, t, i1);
    if (c17.anomaly) {
        return fallback(FallbackReason::anomaly);
    }
    if (c17.hit) {
        if (!detail::certified(o, s, t, *c17.hit, lb)) {
            return fallback(FallbackReason::uncertified, Branch::findleg_17);
        }
        return finish_distance(c17.hit->value, Branch::findleg_17);
    }
    lb = std::max(lb, detail::none_bound(o, s, i1));

    // Line 18. The pair is emitted only if p_{j-2}(s) ∈ B(t) or
    // p_{j-1}(t) ∈ B(s) for j = I(i2, s).
    const int j2 = o.deltas.argmax(s, i2);
    if (!o.bunches.contains(t, o.pivots.pivot(s, j2 - 2)) && !o.bunches.contains(s, o.pivots.pivot(t, j2 - 1))) {
        return fallback(FallbackReason::not_legitimate, Branch::findleg_18);
    }
    r.kind = FindlegResult::Kind::pair;
    r.pair = {i1, i2};
    r.branch = Branch::findleg_18;
    st.branch = Branch::findleg_18;
    r.s = s;
    r.t = t;
    return r;
}

/*
 * Final estimate from a legitimate pair: the first checkind hit among
 * x1(i1, s), x2(i1, s), x3(i1, s), i2. nullopt signals fallback.
 * lower_bound is any proven lower bound on dist(s, t) known to the caller.
 */
inline std::optional<double> estimate_from_pair(const Oracle& o, NodeId s, NodeId t, LegitimatePair pair,
                                                QueryStats* stats_out = nullptr, double lower_bound = 0.0) {
    QueryStats local;
    QueryStats& st = stats_out ? *stats_out : local;
    if (!o.xindex) {
        st.reason = FallbackReason::tz_only;
        return std::nullopt;
    }
    if (pair.i1 < 2 || pair.i1 > o.k - 1 || pair.i1 % 2 != 0 || pair.i2 < 2 || pair.i2 > o.k - 1 || pair.i2 % 2 != 0) {
        throw std::invalid_argument("estimate_from_pair: indices must be even and in [2, k-1]");
    }
    // Legitimacy gives dist(s, t) >= max_delta(s, i1) / 2.
    double lb = std::max(lower_bound, detail::none_bound(o, s, pair.i1));
    const auto& x = o.xindex->at(s, pair.i1);
    const std::pair<int, Branch> steps[] = {
        {x.x1, Branch::estimate_2},
        {x.x2, Branch::estimate_3},
        {x.x3, Branch::estimate_4},
        {pair.i2, Branch::estimate_5},
    };
    for (auto [idx, line] : steps) {
        ++st.checkind_calls;
        auto c = detail::checkind(o, s, t, idx);
        if (c.anomaly) {
            st.reason = FallbackReason::anomaly;
            return std::nullopt;
        }
        if (c.hit) {
            st.branch = line;
            if (!detail::certified(o, s, t, *c.hit, lb)) {
                st.reason = FallbackReason::uncertified;
                return std::nullopt;
            }
            return c.hit->value;
        }
        lb = std::max(lb, detail::none_bound(o, s, idx));
    }
    st.reason = FallbackReason::all_none;
    return std::nullopt;
}

/*
 * Constant-time query with the pivot walk as the fallback. Always within
 * [dist, (2k-1) dist]; ∞ for disconnected pairs.
 */
inline QueryResult query(const Oracle& o, NodeId s, NodeId t) {
    QueryResult r;
    auto& st = r.stats;
    if (s >= o.num_nodes() || t >= o.num_nodes()) {
        throw std::invalid_argument("query: node out of range");
    }
    if (s == t) {
        r.distance = 0.0;
        st.branch = Branch::identical;
        return r;
    }
    if (!std::isfinite(o.estimator->estimate(s, t))) {
        st.branch = Branch::disconnected;
        return r;
    }

    auto walk = [&](FallbackReason why) {
        st.fallback_used = true;
        if (st.reason == FallbackReason::none) {
            st.reason = why;
        }
        auto tz = tz_query(o.pivots, o.bunches, s, t);
        st.tz_walk = tz.walk;
        r.distance = tz.distance;
        return r;
    };

    if (o.tz_only() || !o.deltas.complete(s) || !o.deltas.complete(t)) {
        if (auto d = o.bunches.distance(s, t)) {
            r.distance = *d;
            st.branch = Branch::findleg_2;
            return r;
        }
        if (auto d = o.bunches.distance(t, s)) {
            r.distance = *d;
            st.branch = Branch::findleg_2;
            return r;
        }
        return walk(o.tz_only() ? FallbackReason::tz_only : FallbackReason::incomplete_node);
    }

    auto leg = findleg(o, s, t, &st);
    switch (leg.kind) {
    case FindlegResult::Kind::distance:
        r.distance = leg.distance;
        return r;
    case FindlegResult::Kind::fallback:
        return walk(leg.reason);
    case FindlegResult::Kind::pair:
        break;
    }
    if (auto d = estimate_from_pair(o, leg.s, leg.t, leg.pair, &st, leg.lower_bound)) {
        r.distance = *d;
        return r;
    }
    return walk(st.reason);
}

}  // namespace cqdo

#endif  // CQDO_QUERY_HPP
