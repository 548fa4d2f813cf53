#ifndef CQDO_AUDIT_HPP
#define CQDO_AUDIT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cqdo/oracle.hpp"
#include "cqdo/query.hpp"

namespace cqdo {

struct AuditOptions {
    enum class Mode { all_pairs, sample };

    Mode mode = Mode::all_pairs;
    std::size_t samples = 1000;  // sample mode only
    std::uint64_t seed = 1;
    std::string graph_descriptor;
    std::size_t max_recorded_violations = 200;
    std::size_t all_pairs_limit = 2000;    // exact APSP ceiling
    std::size_t brute_force_limit = 500;   // bunch recomputation from scratch
    std::size_t bellman_ford_limit = 100;
    std::size_t triangle_limit = 50;
    int offset_range = 12;
};

struct Violation {
    std::string check;
    std::string detail;
};

struct CheckTally {
    std::uint64_t evaluated = 0;
    std::uint64_t failed = 0;
};

struct CounterMaxima {
    int loop_a = 0;
    int loop_b = 0;
    int loop_c = 0;
    int checkind_calls = 0;
    int counter_sum = 0;

    void observe(const QueryStats& s) {
        loop_a = std::max(loop_a, s.loop_a_iters);
        loop_b = std::max(loop_b, s.loop_b_iters);
        loop_c = std::max(loop_c, s.loop_c_iters);
        checkind_calls = std::max(checkind_calls, s.checkind_calls);
        counter_sum = std::max(counter_sum, s.counter_sum());
    }
};

struct AuditReport {
    std::string graph;
    std::size_t n = 0;
    std::size_t m = 0;
    int k = 0;
    EstimatorConfig estimator;
    double estimator_stretch = 0;
    std::uint64_t level_seed = 0;
    std::uint64_t audit_seed = 0;
    std::string mode;

    std::uint64_t pairs_audited = 0;
    std::uint64_t connected_pairs = 0;
    double worst_stretch = 1.0;
    std::vector<std::pair<std::string, std::uint64_t>> stretch_histogram;
    std::uint64_t fallbacks = 0;
    double fallback_rate = 0;
    std::map<std::string, std::uint64_t> fallback_reasons;
    std::map<std::string, std::uint64_t> branches;
    CounterMaxima counters_all;
    CounterMaxima counters_constant_path;  // queries answered without fallback
    std::uint64_t constant_path_queries = 0;
    int tz_walk_max = 0;
    double tz_walk_mean = 0;
    std::uint64_t legitimate_pairs = 0;
    std::uint64_t bunch_entries = 0;
    double bunch_bound = 0;  // k * n^(1 + 1/k)

    std::map<std::string, CheckTally> checks;
    std::uint64_t violation_count = 0;
    std::vector<Violation> violations;

    bool ok() const { return violation_count == 0; }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["graph"] = graph;
        j["n"] = n;
        j["m"] = m;
        j["k"] = k;
        j["estimator"] = {{"kind", std::string(to_string(estimator.kind))},
                          {"alpha", estimator.alpha},
                          {"seed", estimator.seed},
                          {"stretch_bound", estimator_stretch}};
        j["seeds"] = {{"levels", level_seed}, {"audit", audit_seed}};
        j["mode"] = mode;
        j["pairs_audited"] = pairs_audited;
        j["connected_pairs"] = connected_pairs;
        j["worst_stretch"] = worst_stretch;
        auto hist = nlohmann::json::array();
        for (const auto& [label, count] : stretch_histogram) {
            hist.push_back({{"bin", label}, {"count", count}});
        }
        j["stretch_histogram"] = hist;
        j["fallbacks"] = fallbacks;
        j["fallback_rate"] = fallback_rate;
        j["fallback_reasons"] = fallback_reasons;
        j["branches"] = branches;
        auto counters = [](const CounterMaxima& c) {
            return nlohmann::json{{"loop_a", c.loop_a},
                                  {"loop_b", c.loop_b},
                                  {"loop_c", c.loop_c},
                                  {"checkind_calls", c.checkind_calls},
                                  {"counter_sum", c.counter_sum}};
        };
        j["counter_maxima"] = {{"all_queries", counters(counters_all)},
                               {"constant_path", counters(counters_constant_path)}};
        j["constant_path_queries"] = constant_path_queries;
        j["tz_walk"] = {{"max", tz_walk_max}, {"mean", tz_walk_mean}};
        j["legitimate_pairs"] = legitimate_pairs;
        j["bunches"] = {{"entries", bunch_entries},
                        {"bound", bunch_bound},
                        {"ratio", bunch_bound > 0 ? static_cast<double>(bunch_entries) / bunch_bound : 0.0}};
        nlohmann::json cj = nlohmann::json::object();
        for (const auto& [name, t] : checks) {
            cj[name] = {{"evaluated", t.evaluated}, {"failed", t.failed}};
        }
        j["checks"] = cj;
        j["violation_count"] = violation_count;
        auto vj = nlohmann::json::array();
        for (const auto& v : violations) {
            vj.push_back({{"check", v.check}, {"detail", v.detail}});
        }
        j["violations"] = vj;
        return j;
    }

    // One row per named check.
    std::string checks_csv() const {
        std::ostringstream out;
        out << "check,evaluated,failed\n";
        for (const auto& [name, t] : checks) {
            out << name << ',' << t.evaluated << ',' << t.failed << '\n';
        }
        return out.str();
    }
};

// Every check name the audit can emit, so reports always list all of them.
inline const std::vector<std::string>& audit_check_names() {
    static const std::vector<std::string> names{
        "graph.exact_symmetry",      "graph.zero_diagonal",       "graph.triangle",
        "graph.bellman_ford",        "levels.nested",             "pivots.level_zero",
        "pivots.monotone",           "pivots.exact",              "bunches.self",
        "bunches.exact_distances",   "bunches.definition",        "tz.stretch",
        "delta.definition",          "delta.monotone",            "delta.argmax",
        "delta.idempotent",          "xindex.brute_force",        "xindex.minimality",
        "xindex.well_defined",       "xindex.ordering",           "scale.candidates",
        "scale.filter_soundness",    "scale.spacing",             "scale.membership",
        "scale.offset_navigation",   "scale.node_lists",          "scale.even_maps",
        "estimator.contract",        "estimator.value_set",       "estimator.symmetry",
        "estimator.value_set_size",  "query.identical",           "query.disconnected",
        "query.stretch",             "query.bunch_exact",         "query.loop_caps",
        "query.checkind_calls",      "query.fallback_integrity",  "checkind.trichotomy",
        "checkind.gap_disjunction",  "findleg.distance",          "findleg.legitimate_pair",
        "estimate.stretch",
    };
    return names;
}

namespace detail {

class AuditRecorder {
public:
    AuditRecorder(AuditReport& report, std::size_t cap) : report_(report), cap_(cap) {
        for (const auto& name : audit_check_names()) {
            report_.checks[name];
        }
    }

    // Returns ok so callers can chain.
    bool expect(const std::string& check, bool ok, const std::string& detail_if_failed = {}) {
        auto& t = report_.checks[check];
        ++t.evaluated;
        if (!ok) {
            ++t.failed;
            ++report_.violation_count;
            if (report_.violations.size() < cap_) {
                report_.violations.push_back({check, detail_if_failed});
            }
        }
        return ok;
    }

    template <class F>
    bool expect_lazy(const std::string& check, bool ok, F&& detail) {
        return expect(check, ok, ok ? std::string{} : detail());
    }

private:
    AuditReport& report_;
    std::size_t cap_;
};

inline std::string fmt(double x) {
    std::ostringstream out;
    out.precision(17);
    out << x;
    return out.str();
}

inline std::string pair_tag(NodeId s, NodeId t) { return "s=" + std::to_string(s) + " t=" + std::to_string(t); }

// Exact distances, either all pairs or lazily per source.
class ExactRows {
public:
    ExactRows(const Graph& g, bool all_pairs) : g_(g) {
        if (all_pairs) {
            full_ = exact_all_pairs(g, 1);
        }
    }

    bool has_all_pairs() const { return full_.has_value(); }
    const ExactOracle* all_pairs() const { return full_ ? &*full_ : nullptr; }

    double operator()(NodeId s, NodeId t) {
        if (full_) {
            return (*full_)(s, t);
        }
        auto it = rows_.find(s);
        if (it == rows_.end()) {
            it = rows_.emplace(s, dijkstra(g_, s)).first;
        }
        return it->second[t];
    }

private:
    const Graph& g_;
    std::optional<ExactOracle> full_;
    std::unordered_map<NodeId, std::vector<double>> rows_;
};

inline std::vector<double> bellman_ford(const Graph& g, NodeId source) {
    std::vector<double> dist(g.num_nodes(), kInfinity);
    dist[source] = 0.0;
    for (std::size_t round = 0; round + 1 < g.num_nodes(); ++round) {
        bool changed = false;
        for (const auto& e : g.edges()) {
            if (dist[e.u] + e.w < dist[e.v]) {
                dist[e.v] = dist[e.u] + e.w;
                changed = true;
            }
            if (dist[e.v] + e.w < dist[e.u]) {
                dist[e.u] = dist[e.v] + e.w;
                changed = true;
            }
        }
        if (!changed) {
            break;
        }
    }
    return dist;
}

inline bool near(double a, double b) {
    if (std::isinf(a) || std::isinf(b)) {
        return a == b;
    }
    return std::abs(a - b) <= tolerance_for(std::max(std::abs(a), std::abs(b)));
}

inline bool within_stretch(double dist, double value, double stretch) {
    if (std::isinf(dist)) {
        return std::isinf(value);
    }
    return approx_le(dist, value) && approx_le(value, stretch * dist);
}

}  // namespace detail

/*
 * Audits every table of the oracle against exact distances from g and runs
 * the query contract over the selected pairs. Deterministic for fixed inputs.
 */
inline AuditReport audit(const Graph& g, const Oracle& o, const AuditOptions& opt = {}) {
    using detail::fmt;
    using detail::near;
    using detail::pair_tag;

    const std::size_t n = g.num_nodes();
    const int k = o.k;
    if (o.num_nodes() != n) {
        throw std::invalid_argument("audit: oracle and graph sizes differ");
    }
    if (opt.mode == AuditOptions::Mode::all_pairs && n > opt.all_pairs_limit) {
        throw std::invalid_argument("audit: all-pairs mode is limited to n <= " + std::to_string(opt.all_pairs_limit));
    }

    AuditReport rep;
    rep.graph = opt.graph_descriptor;
    rep.n = n;
    rep.m = g.num_edges();
    rep.k = k;
    rep.estimator = o.estimator->config();
    rep.estimator_stretch = o.estimator->stretch_bound();
    rep.level_seed = o.levels.seed;
    rep.audit_seed = opt.seed;
    rep.mode = opt.mode == AuditOptions::Mode::all_pairs ? "all-pairs" : "sample " + std::to_string(opt.samples);
    rep.bunch_entries = o.bunches.total_size();
    rep.bunch_bound = k * std::pow(static_cast<double>(n), 1.0 + 1.0 / k);
    detail::AuditRecorder rec(rep, opt.max_recorded_violations);

    // Pairs under audit.
    std::vector<std::pair<NodeId, NodeId>> pairs;
    if (opt.mode == AuditOptions::Mode::all_pairs) {
        pairs.reserve(n * n);
        for (NodeId s = 0; s < n; ++s) {
            for (NodeId t = 0; t < n; ++t) {
                pairs.emplace_back(s, t);
            }
        }
    } else {
        std::mt19937_64 rng(opt.seed);
        std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
        for (std::size_t q = 0; q < opt.samples; ++q) {
            NodeId s = pick(rng);
            NodeId t = pick(rng);
            pairs.emplace_back(s, t);
        }
    }

    detail::ExactRows exact(g, n <= opt.all_pairs_limit);
    const ExactOracle* full = exact.all_pairs();

    // Nodes whose per-node tables are checked: all of them when exact
    // distances are available everywhere, otherwise the sampled sources.
    std::vector<NodeId> nodes;
    if (full) {
        for (NodeId v = 0; v < n; ++v) {
            nodes.push_back(v);
        }
    } else {
        std::set<NodeId> seen;
        for (auto [s, t] : pairs) {
            seen.insert(s);
        }
        nodes.assign(seen.begin(), seen.end());
    }

    // graph-core
    if (full) {
        for (NodeId u = 0; u < n; ++u) {
            rec.expect("graph.zero_diagonal", (*full)(u, u) == 0.0, "u=" + std::to_string(u));
            for (NodeId v = u + 1; v < n; ++v) {
                rec.expect_lazy("graph.exact_symmetry", near((*full)(u, v), (*full)(v, u)),
                                [&] { return pair_tag(u, v); });
            }
        }
        if (n <= opt.triangle_limit) {
            for (NodeId u = 0; u < n; ++u) {
                for (NodeId v = 0; v < n; ++v) {
                    for (NodeId w = 0; w < n; ++w) {
                        rec.expect_lazy("graph.triangle", approx_le((*full)(u, w), (*full)(u, v) + (*full)(v, w)),
                                        [&] { return pair_tag(u, w) + " via " + std::to_string(v); });
                    }
                }
            }
        }
        if (n <= opt.bellman_ford_limit) {
            for (NodeId u = 0; u < n; ++u) {
                auto bf = detail::bellman_ford(g, u);
                for (NodeId v = 0; v < n; ++v) {
                    rec.expect_lazy("graph.bellman_ford", near(bf[v], (*full)(u, v)),
                                    [&] { return pair_tag(u, v) + " bf=" + fmt(bf[v]); });
                }
            }
        }
    }

    // tz-base: levels
    {
        bool top = false;
        bool in_range = true;
        for (NodeId v = 0; v < n; ++v) {
            top |= o.levels.level[v] == k - 1;
            in_range &= o.levels.level[v] < k;
        }
        rec.expect("levels.nested", top && in_range && o.levels.k == k, "A_{k-1} empty or level out of range");
    }

    // tz-base: pivots and bunches
    for (NodeId v : nodes) {
        // Exact distance from v to each level set, by brute force.
        std::vector<double> to_level(static_cast<std::size_t>(k), kInfinity);
        for (NodeId u = 0; u < n; ++u) {
            double d = exact(v, u);
            for (int i = 0; i <= o.levels.level[u]; ++i) {
                to_level[i] = std::min(to_level[i], d);
            }
        }
        rec.expect("pivots.level_zero", o.pivots.pivot(v, 0) == v && o.pivots.dist(v, 0) == 0.0,
                   "v=" + std::to_string(v));
        for (int i = 0; i < k; ++i) {
            if (i > 0) {
                rec.expect_lazy("pivots.monotone", o.pivots.dist(v, i - 1) <= o.pivots.dist(v, i),
                                [&] { return "v=" + std::to_string(v) + " i=" + std::to_string(i); });
            }
            NodeId p = o.pivots.pivot(v, i);
            double pd = o.pivots.dist(v, i);
            bool ok = near(pd, to_level[i]);
            if (p == kNoNode) {
                ok &= std::isinf(to_level[i]);
            } else {
                ok &= p < n && o.levels.in_level(p, i) && near(pd, exact(v, p));
            }
            rec.expect_lazy("pivots.exact", ok, [&] {
                return "v=" + std::to_string(v) + " i=" + std::to_string(i) + " stored=" + fmt(pd) +
                       " exact=" + fmt(to_level[i]);
            });
        }

        rec.expect("bunches.self", o.bunches.distance(v, v) == std::optional<double>(0.0), "v=" + std::to_string(v));
        for (const auto& [u, d] : o.bunches.sorted_bunch(v)) {
            rec.expect_lazy("bunches.exact_distances", u < n && near(d, exact(v, u)), [&] {
                return "v=" + std::to_string(v) + " u=" + std::to_string(u) + " stored=" + fmt(d) +
                       " exact=" + fmt(exact(v, u));
            });
        }
        if (n <= opt.brute_force_limit) {
            for (NodeId u = 0; u < n; ++u) {
                const int lu = o.levels.level[u];
                const double radius = lu + 1 < k ? to_level[lu + 1] : kInfinity;
                const double d = exact(v, u);
                if (std::isinf(d)) {
                    rec.expect("bunches.definition", !o.bunches.contains(v, u),
                               "v=" + std::to_string(v) + " u=" + std::to_string(u) + " unreachable member");
                    continue;
                }
                if (std::isfinite(radius) && near(d, radius)) {
                    continue;  // on the boundary; floating rounding decides either way
                }
                const bool should = d < radius;
                rec.expect_lazy("bunches.definition", o.bunches.contains(v, u) == should, [&] {
                    return "v=" + std::to_string(v) + " u=" + std::to_string(u) + (should ? " missing" : " spurious");
                });
            }
        }
    }

    // aux-tables: gaps and argmax
    for (NodeId v : nodes) {
        if (!o.deltas.complete(v)) {
            continue;
        }
        double best = 0.0;
        int best_i = 0;
        for (int j = 2; j < k; ++j) {
            if (j % 2 == 0) {
                const double gap = o.pivots.dist(v, j) - o.pivots.dist(v, j - 2);
                rec.expect_lazy("delta.definition", o.deltas.delta(v, j) == gap && gap >= 0.0, [&] {
                    return "v=" + std::to_string(v) + " j=" + std::to_string(j);
                });
                if (best_i == 0 || gap > best) {
                    best = gap;
                    best_i = j;
                }
            }
            rec.expect_lazy("delta.definition", o.deltas.max_delta(v, j) == best, [&] {
                return "v=" + std::to_string(v) + " j=" + std::to_string(j) + " max mismatch";
            });
            if (j > 2) {
                rec.expect_lazy("delta.monotone", o.deltas.max_delta(v, j - 1) <= o.deltas.max_delta(v, j),
                                [&] { return "v=" + std::to_string(v) + " j=" + std::to_string(j); });
            }
            const int a = o.deltas.argmax(v, j);
            rec.expect_lazy("delta.argmax",
                            a == best_i && a % 2 == 0 && a >= 2 && a <= j &&
                                o.deltas.delta(v, a) == o.deltas.max_delta(v, j),
                            [&] { return "v=" + std::to_string(v) + " j=" + std::to_string(j); });
            rec.expect_lazy("delta.idempotent", o.deltas.argmax(v, a) == a,
                            [&] { return "v=" + std::to_string(v) + " j=" + std::to_string(j); });
        }
    }

    // aux-tables: jump indices
    if (o.xindex) {
        for (NodeId v : nodes) {
            if (!o.deltas.complete(v)) {
                continue;
            }
            auto D = [&](int j) { return o.deltas.max_delta(v, j); };
            auto satisfying = [&](int from, auto ok) {
                std::vector<int> xs;
                for (int x = from; x <= k - 1; x += 2) {
                    if (ok(x)) {
                        xs.push_back(x);
                    }
                }
                return xs;
            };
            for (int i = 2; i <= k - 1; i += 2) {
                const auto& x = o.xindex->at(v, i);
                const std::string tag = "v=" + std::to_string(v) + " i=" + std::to_string(i);
                auto ok1 = [&](int c) { return (c - i) * (D(c) - D(i)) >= (k - c - 2) * D(i); };
                auto s1 = satisfying(i, ok1);
                const int x1 = x.x1;
                auto ok2 = [&](int c) { return (c - x1) * (D(c) - D(x1)) >= (k - c - 2) * D(x1); };
                auto s2 = satisfying(x1, ok2);
                const int x2 = x.x2;
                auto ok3 = [&](int c) { return (c - x2) * (D(c) - D(x2)) >= x1 * (D(x2) - D(x1)); };
                auto s3 = satisfying(x2, ok3);
                const int x3 = x.x3;

                rec.expect("xindex.well_defined", !s1.empty() && !s2.empty() && x.x3_saturated == s3.empty(), tag);
                rec.expect("xindex.brute_force",
                           !s1.empty() && x1 == s1.front() && !s2.empty() && x2 == s2.front() &&
                               x3 == (s3.empty() ? max_even_index(k) : s3.front()),
                           tag);
                bool minimal = ok1(x1) && ok2(x2) && (x.x3_saturated || ok3(x3));
                minimal &= !(x1 - 2 >= i && ok1(x1 - 2));
                minimal &= !(x2 - 2 >= x1 && ok2(x2 - 2));
                minimal &= x.x3_saturated || !(x3 - 2 >= x2 && ok3(x3 - 2));
                rec.expect("xindex.minimality", minimal, tag);
                rec.expect("xindex.ordering",
                           i <= x1 && x1 <= x2 && x2 <= x3 && x3 <= k - 1 && x1 % 2 == 0 && x2 % 2 == 0 &&
                               x3 % 2 == 0,
                           tag);
            }
        }
    }

    // scale-index
    {
        const auto& D = o.scale.values();
        const auto& Dt = o.scale.filtered();
        auto expect_D = tz_distance_values(o.pivots, o.bunches);
        auto ev = o.estimator->value_set();
        expect_D.insert(expect_D.end(), ev.begin(), ev.end());
        std::erase_if(expect_D, [](double d) { return !std::isfinite(d); });
        for (auto& d : expect_D) {
            d = d == 0.0 ? 0.0 : d;
        }
        std::sort(expect_D.begin(), expect_D.end());
        expect_D.erase(std::unique(expect_D.begin(), expect_D.end()), expect_D.end());
        rec.expect("scale.candidates", expect_D == D, "D differs from the candidate distances");

        for (double d : D) {
            auto up = o.scale.up_index(d);
            bool ok = up && *up < Dt.size() && d <= Dt[*up] && Dt[*up] <= 2.0 * d;
            // Smallest Dt value >= d.
            ok = ok && (*up == 0 || Dt[*up - 1] < d);
            rec.expect_lazy("scale.filter_soundness", ok, [&] { return "d=" + fmt(d); });
        }
        for (std::size_t j = 0; j + 1 < Dt.size(); ++j) {
            rec.expect_lazy("scale.spacing", Dt[j] == 0.0 || Dt[j] <= Dt[j + 1] / 2.0,
                            [&] { return "j=" + std::to_string(j); });
        }
        for (double x : Dt) {
            rec.expect_lazy("scale.membership", std::binary_search(D.begin(), D.end(), x),
                            [&] { return "Dt value " + fmt(x) + " not in D"; });
        }
        // Offsets on the global scale, against a one-step-at-a-time walk.
        const int R = opt.offset_range;
        for (std::uint32_t j = 0; j < Dt.size(); ++j) {
            for (int off = -R; off <= R; ++off) {
                std::size_t pos = j;
                bool clamped = false;
                for (int step = 0; step < std::abs(off); ++step) {
                    if (off > 0) {
                        pos + 1 < Dt.size() ? static_cast<void>(++pos) : static_cast<void>(clamped = true);
                    } else {
                        pos > 0 ? static_cast<void>(--pos) : static_cast<void>(clamped = true);
                    }
                }
                auto got = o.scale.offset_at(j, off);
                rec.expect_lazy("scale.offset_navigation", got.value == Dt[pos] && got.clamped == clamped, [&] {
                    return "global j=" + std::to_string(j) + " off=" + std::to_string(off);
                });
            }
        }
        for (NodeId u : nodes) {
            const auto& ns = o.node_scales[u];
            std::vector<double> want;
            for (int i = 1; i < k; ++i) {
                double d = o.pivots.dist(u, i);
                if (std::isfinite(d)) {
                    auto j = o.scale.up_index(d);
                    if (!rec.expect("scale.node_lists", j && *j < Dt.size(),
                                    "u=" + std::to_string(u) + " pivot distance " + fmt(d) + " not in D")) {
                        continue;
                    }
                    want.push_back(Dt[*j]);
                }
            }
            std::sort(want.begin(), want.end());
            want.erase(std::unique(want.begin(), want.end()), want.end());
            auto have = o.node_scales.values(o.scale, u);
            rec.expect("scale.node_lists", want == have, "u=" + std::to_string(u));
            for (auto p : ns.list) {
                rec.expect("scale.membership", p < Dt.size(), "u=" + std::to_string(u) + " L_u position out of range");
            }
            for (std::size_t slot = 0; slot < ns.list.size() && slot < have.size(); ++slot) {
                int hi = -1;
                int lo = -1;
                for (int i = 2; i < k; i += 2) {
                    double d = o.pivots.dist(u, i);
                    auto j = std::isfinite(d) ? o.scale.up_index(d) : std::nullopt;
                    if (j && *j < Dt.size() && Dt[*j] == have[slot]) {
                        hi = i;
                        if (lo < 0) {
                            lo = i;
                        }
                    }
                }
                auto maps = o.node_scales.even_maps(o.scale, u, have[slot]);
                bool ok = hi < 0 ? !maps.has_value() : (maps && maps->hi == hi && maps->lo == lo);
                rec.expect("scale.even_maps", ok, "u=" + std::to_string(u) + " slot=" + std::to_string(slot));
                for (int off = -R; off <= R; ++off) {
                    long long want_pos = static_cast<long long>(slot) + off;
                    bool clamped = want_pos < 0 || want_pos >= static_cast<long long>(have.size());
                    want_pos = std::clamp<long long>(want_pos, 0, static_cast<long long>(have.size()) - 1);
                    auto got = o.node_scales.offset(o.scale, u, have[slot], off);
                    rec.expect_lazy("scale.offset_navigation",
                                    got.value == have[static_cast<std::size_t>(want_pos)] && got.clamped == clamped,
                                    [&] {
                                        return "u=" + std::to_string(u) + " slot=" + std::to_string(slot) +
                                               " off=" + std::to_string(off);
                                    });
                }
            }
        }
    }

    // coarse estimator
    {
        const double S = o.estimator->stretch_bound();
        auto values = o.estimator->value_set();
        for (auto [s, t] : pairs) {
            const double d = exact(s, t);
            const double e = o.estimator->estimate(s, t);
            rec.expect_lazy("estimator.contract", detail::within_stretch(d, e, S), [&] {
                return pair_tag(s, t) + " dist=" + fmt(d) + " estimate=" + fmt(e);
            });
            if (std::isfinite(e)) {
                rec.expect_lazy("estimator.value_set", std::binary_search(values.begin(), values.end(), e),
                                [&] { return pair_tag(s, t) + " estimate=" + fmt(e); });
            }
            rec.expect("estimator.symmetry", e == o.estimator->estimate(t, s), pair_tag(s, t));
        }
        if (full && o.estimator->config().kind == EstimatorKind::snap) {
            double lo = kInfinity;
            double hi = 0.0;
            for (NodeId u = 0; u < n; ++u) {
                for (double d : full->row(u)) {
                    if (std::isfinite(d) && d > 0.0) {
                        lo = std::min(lo, d);
                        hi = std::max(hi, d);
                    }
                }
            }
            // Nonzero values only; the zero estimate is always present.
            const auto nonzero = std::count_if(values.begin(), values.end(), [](double x) { return x > 0.0; });
            const double limit = hi > 0.0 ? std::log2(hi / lo) + 2.0 : 0.0;
            rec.expect("estimator.value_set_size", static_cast<double>(nonzero) <= limit,
                       "nonzero size " + std::to_string(nonzero) + " > " + fmt(limit));
        }
    }

    // tz-base stretch and the constant-time query
    const double stretch = 2.0 * k - 1.0;
    const int cap_a = 2 - o.params.window_floor;
    std::vector<std::uint64_t> hist(7, 0);
    const double hist_edges[] = {1.0, 1.5, 2.0, 3.0, 5.0, stretch};
    std::uint64_t walk_sum = 0;
    // A damaged oracle can make the query path throw; that counts as a failed query.
    auto audit_pair = [&](NodeId s, NodeId t) {
        ++rep.pairs_audited;
        const double d = exact(s, t);
        auto tz = tz_query(o.pivots, o.bunches, s, t);
        if (s != t) {
            rec.expect_lazy("tz.stretch", detail::within_stretch(d, tz.distance, stretch), [&] {
                return pair_tag(s, t) + " dist=" + fmt(d) + " tz=" + fmt(tz.distance);
            });
            rep.tz_walk_max = std::max(rep.tz_walk_max, tz.walk);
            walk_sum += static_cast<std::uint64_t>(tz.walk);
        }

        auto q = query(o, s, t);
        const auto& st = q.stats;
        rep.branches[std::string(to_string(st.branch))]++;
        rep.counters_all.observe(st);
        if (s == t) {
            rec.expect("query.identical", q.distance == 0.0 && st.counter_sum() == 0, pair_tag(s, t));
            return;
        }
        if (std::isinf(d) || std::isinf(q.distance)) {
            rec.expect_lazy("query.disconnected", std::isinf(d) && std::isinf(q.distance), [&] {
                return pair_tag(s, t) + " dist=" + fmt(d) + " query=" + fmt(q.distance);
            });
            if (std::isinf(d)) {
                return;
            }
        }
        ++rep.connected_pairs;
        const bool sound = detail::within_stretch(d, q.distance, stretch);
        rec.expect_lazy("query.stretch", sound, [&] {
            return pair_tag(s, t) + " dist=" + fmt(d) + " query=" + fmt(q.distance) + " branch=" +
                   std::string(to_string(st.branch)) + " fallback=" + std::to_string(st.fallback_used);
        });
        if (d > 0.0) {
            double ratio = q.distance / d;
            rep.worst_stretch = std::max(rep.worst_stretch, ratio);
            std::size_t bin = 0;
            if (near(q.distance, d)) {
                bin = 0;
            } else {
                bin = 1;
                while (bin < 6 && ratio > hist_edges[bin]) {
                    ++bin;
                }
            }
            ++hist[bin];
        } else {
            ++hist[0];
        }
        if (o.bunches.contains(s, t) || o.bunches.contains(t, s)) {
            rec.expect_lazy("query.bunch_exact", near(q.distance, d),
                            [&] { return pair_tag(s, t) + " dist=" + fmt(d) + " query=" + fmt(q.distance); });
        }
        rec.expect_lazy("query.checkind_calls", st.checkind_calls <= 6,
                        [&] { return pair_tag(s, t) + " calls=" + std::to_string(st.checkind_calls); });
        if (st.fallback_used) {
            ++rep.fallbacks;
            rep.fallback_reasons[std::string(to_string(st.reason))]++;
            rec.expect_lazy("query.fallback_integrity",
                            q.distance == tz.distance && st.tz_walk == tz.walk && st.reason != FallbackReason::none,
                            [&] { return pair_tag(s, t); });
        } else {
            ++rep.constant_path_queries;
            rep.counters_constant_path.observe(st);
            rec.expect_lazy("query.fallback_integrity", st.reason == FallbackReason::none && st.tz_walk == 0,
                            [&] { return pair_tag(s, t); });
            rec.expect_lazy("query.loop_caps",
                            st.loop_a_iters <= cap_a && st.loop_b_iters <= o.params.loop_b_cap &&
                                st.loop_c_iters <= o.params.loop_c_cap,
                            [&] {
                                return pair_tag(s, t) + " a=" + std::to_string(st.loop_a_iters) +
                                       " b=" + std::to_string(st.loop_b_iters) +
                                       " c=" + std::to_string(st.loop_c_iters);
                            });
        }

        // checkind and the gap claim, over every even index.
        if (!o.deltas.complete(s) || !o.deltas.complete(t)) {
            return;
        }
        for (int i = 2; i <= k - 1; i += 2) {
            auto c = detail::checkind(o, s, t, i);
            const std::string tag = pair_tag(s, t) + " i=" + std::to_string(i);
            if (c.anomaly) {
                rec.expect("checkind.trichotomy", false, tag + " missing top-level bunch entry");
            } else if (!c.hit) {
                rec.expect_lazy("checkind.trichotomy",
                                i < k - 2 && approx_le(o.deltas.max_delta(s, i) / 2.0, d),
                                [&] { return tag + " NONE with dist=" + fmt(d); });
            } else {
                const double v = c.hit->value;
                const double bound = std::max(stretch * d, 2.0 * o.pivots.dist(s, i - 2) + 3.0 * d);
                rec.expect_lazy("checkind.trichotomy", approx_le(d, v) && approx_le(v, bound), [&] {
                    return tag + " value=" + fmt(v) + " dist=" + fmt(d) + " rule=" + std::to_string(c.hit->rule);
                });
            }
            const bool disj = approx_le(o.deltas.delta(s, i) / 2.0, d) ||
                              o.bunches.contains(t, o.pivots.pivot(s, i - 2)) ||
                              o.bunches.contains(s, o.pivots.pivot(t, i - 1));
            rec.expect("checkind.gap_disjunction", disj, tag);
        }

        // findleg on its own, so the pair it emits can be checked.
        if (o.tz_only() || st.branch == Branch::disconnected) {
            return;
        }
        auto leg = findleg(o, s, t);
        if (leg.kind == FindlegResult::Kind::distance) {
            rec.expect_lazy("findleg.distance", detail::within_stretch(d, leg.distance, stretch), [&] {
                return pair_tag(s, t) + " value=" + fmt(leg.distance) + " branch=" + std::string(to_string(leg.branch));
            });
        } else if (leg.kind == FindlegResult::Kind::pair) {
            ++rep.legitimate_pairs;
            const NodeId a = leg.s;
            const NodeId b = leg.t;
            const auto [i1, i2] = leg.pair;
            bool ok = i1 % 2 == 0 && i2 % 2 == 0 && i1 >= 2 && i2 >= 2 && i1 <= k - 1 && i2 <= k - 1;
            ok = ok && approx_le(o.deltas.max_delta(a, i1) / 2.0, d);
            if (ok) {
                const int j = o.deltas.argmax(a, i2);
                ok = o.bunches.contains(b, o.pivots.pivot(a, j - 2)) || o.bunches.contains(a, o.pivots.pivot(b, j - 1));
                ok = ok && approx_le(o.pivots.dist(a, i2), 2.0 * o.pivots.dist(a, i1));
            }
            rec.expect_lazy("findleg.legitimate_pair", ok, [&] {
                return pair_tag(a, b) + " i1=" + std::to_string(i1) + " i2=" + std::to_string(i2);
            });
            if (auto est = estimate_from_pair(o, a, b, leg.pair, nullptr, leg.lower_bound)) {
                rec.expect_lazy("estimate.stretch", detail::within_stretch(d, *est, stretch),
                                [&] { return pair_tag(a, b) + " value=" + fmt(*est) + " dist=" + fmt(d); });
            }
        }
    };
    for (auto [s, t] : pairs) {
        try {
            audit_pair(s, t);
        } catch (const std::exception& err) {
            rec.expect("query.stretch", false, pair_tag(s, t) + " threw: " + err.what());
        }
    }

    const char* labels[] = {"exact", "(1,1.5]", "(1.5,2]", "(2,3]", "(3,5]", "(5,2k-1]", ">2k-1"};
    for (std::size_t b = 0; b < hist.size(); ++b) {
        rep.stretch_histogram.emplace_back(labels[b], hist[b]);
    }
    rep.fallback_rate = rep.connected_pairs ? static_cast<double>(rep.fallbacks) / rep.connected_pairs : 0.0;
    const auto non_identical = static_cast<double>(std::count_if(pairs.begin(), pairs.end(),
                                                                 [](auto p) { return p.first != p.second; }));
    rep.tz_walk_mean = non_identical > 0 ? static_cast<double>(walk_sum) / non_identical : 0.0;
    return rep;
}

}  // namespace cqdo

#endif  // CQDO_AUDIT_HPP
