#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cqdo/audit.hpp"
#include "cqdo/generators.hpp"
#include "cqdo/oracle.hpp"
#include "cqdo/query.hpp"

using namespace cqdo;

namespace {

struct Workload {
    Graph graph;
    std::string name;
};

// Sums check tallies over many audit reports.
class Ledger {
public:
    void add(const AuditReport& r, const std::string& tag) {
        ++reports_;
        for (const auto& [name, t] : r.checks) {
            auto& mine = checks_[name];
            mine.evaluated += t.evaluated;
            mine.failed += t.failed;
        }
        violations_ += r.violation_count;
        legitimate_pairs_ += r.legitimate_pairs;
        for (const auto& v : r.violations) {
            if (examples_.size() < 5) {
                examples_.push_back(tag + " " + v.check + ": " + v.detail);
            }
        }
    }

    CheckTally tally(const std::string& name) const {
        auto it = checks_.find(name);
        return it == checks_.end() ? CheckTally{} : it->second;
    }

    // True when every listed check ran at least once and never failed.
    bool clean(std::initializer_list<const char*> names, std::string& detail) const {
        std::ostringstream out;
        bool ok = true;
        for (const char* name : names) {
            auto t = tally(name);
            out << name << " " << t.failed << "/" << t.evaluated << " failed; ";
            ok = ok && t.evaluated > 0 && t.failed == 0;
        }
        detail = out.str();
        return ok;
    }

    std::size_t reports() const { return reports_; }
    std::uint64_t violations() const { return violations_; }
    std::uint64_t legitimate_pairs() const { return legitimate_pairs_; }
    const std::vector<std::string>& examples() const { return examples_; }

private:
    std::map<std::string, CheckTally> checks_;
    std::size_t reports_ = 0;
    std::uint64_t violations_ = 0;
    std::uint64_t legitimate_pairs_ = 0;
    std::vector<std::string> examples_;
};

struct Outcome {
    int number;
    std::string title;
    bool pass;
    std::string detail;
};

std::vector<Outcome> outcomes;

void report(int number, const std::string& title, bool pass, const std::string& detail) {
    outcomes.push_back({number, title, pass, detail});
    std::cout << "CRITERION " << number << " " << title << ": " << (pass ? "PASS" : "FAIL") << "\n"
              << "    " << detail << std::endl;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Graph make_graph(Family family, std::size_t n, WeightScheme weights, double w_max, std::uint64_t seed) {
    GeneratorParams p;
    p.family = family;
    p.n = n;
    p.weights = weights;
    p.w_min = 1.0;
    p.w_max = w_max;
    if (family == Family::grid) {
        p.rows = static_cast<std::size_t>(std::max(2.0, std::floor(std::sqrt(static_cast<double>(n)))));
        p.cols = n / p.rows;
    }
    if (family == Family::gnp) {
        p.p = std::min(1.0, 6.0 / static_cast<double>(n));
    }
    return generate(p, seed);
}

// Mixed families with integer weights in [1, 1e6].
std::vector<Workload> mixed_graphs(std::size_t per_family, std::size_t lo, std::size_t hi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> size(lo, hi);
    std::vector<Workload> out;
    for (auto family : {Family::path, Family::grid, Family::gnp, Family::geometric}) {
        for (std::size_t i = 0; i < per_family; ++i) {
            const std::size_t n = size(rng);
            const std::uint64_t s = rng();
            auto g = make_graph(family, n, WeightScheme::uniform, 1e6, s);
            out.push_back({std::move(g), std::string(to_string(family)) + "/n" + std::to_string(n) + "/s" +
                                             std::to_string(s % 100000)});
        }
    }
    return out;
}

AuditReport build_and_audit(const Workload& w, int k, std::uint64_t seed, const ExactOracle& ex, double alpha = 1.0) {
    std::shared_ptr<const CoarseEstimator> est = snap_estimator(ex);
    if (alpha > 1.0) {
        est = stretch_injector(*est, alpha, seed, k);
    }
    BuildOptions opts;
    opts.k = k;
    opts.seed = seed;
    auto o = build_oracle(w.graph, opts, est);
    AuditOptions ao;
    ao.graph_descriptor = w.name;
    return audit(w.graph, o, ao);
}

std::string fmt(double x, int precision = 3) {
    std::ostringstream out;
    out << std::setprecision(precision) << x;
    return out.str();
}

}  // namespace

int main() {
    const auto started = std::chrono::steady_clock::now();

    // Main audit pool: 32 graphs, n in [50, 400], k in {4, 5, 6, 8}.
    Ledger main_pool;
    double main_worst = 1.0;
    {
        auto graphs = mixed_graphs(8, 50, 400, 2024);
        std::uint64_t seed = 1;
        for (const auto& w : graphs) {
            auto ex = exact_all_pairs(w.graph, 1);
            for (int k : {4, 5, 6, 8}) {
                auto r = build_and_audit(w, k, seed++, ex);
                main_worst = std::max(main_worst, r.worst_stretch);
                main_pool.add(r, w.name + "/k" + std::to_string(k));
            }
        }
        std::cout << "# main pool: " << main_pool.reports() << " audits over " << graphs.size() << " graphs, "
                  << main_pool.violations() << " violations, " << fmt(seconds_since(started), 4) << " s"
                  << std::endl;
    }

    // Small pool for the exhaustive checkind audits: 24 graphs with n <= 100.
    Ledger small_pool;
    {
        auto graphs = mixed_graphs(6, 30, 100, 77);
        std::uint64_t seed = 1000;
        for (const auto& w : graphs) {
            auto ex = exact_all_pairs(w.graph, 1);
            for (int k : {4, 6, 8}) {
                small_pool.add(build_and_audit(w, k, seed++, ex), w.name + "/k" + std::to_string(k));
            }
        }
    }

    // Unit weights with large k put several even pivot distances on one
    // scale value, which is where findleg emits pairs.
    Ledger pair_pool;
    {
        std::uint64_t seed = 1;
        for (std::uint64_t s : {1, 2, 3}) {
            for (auto family : {Family::grid, Family::path}) {
                Workload w{make_graph(family, 150, WeightScheme::unit, 1.0, s),
                           std::string(to_string(family)) + "/unit/s" + std::to_string(s)};
                auto ex = exact_all_pairs(w.graph, 1);
                for (int k : {8, 10}) {
                    pair_pool.add(build_and_audit(w, k, seed++, ex), w.name + "/k" + std::to_string(k));
                }
            }
        }
    }

    // Wide weight ranges under the stretch injector at the edge of its budget.
    Ledger wide_pool;
    double wide_worst = 1.0;
    std::uint64_t wide_fallbacks = 0;
    std::uint64_t wide_connected = 0;
    {
        std::uint64_t seed = 500;
        const double w_max = std::pow(4.0, 20);
        std::vector<Workload> graphs;
        for (std::uint64_t s : {1, 2}) {
            graphs.push_back({make_graph(Family::geometric, 200, WeightScheme::log_uniform, w_max, s),
                              "geometric/log/s" + std::to_string(s)});
            graphs.push_back({make_graph(Family::gnp, 200, WeightScheme::log_uniform, w_max, s),
                              "gnp/log/s" + std::to_string(s)});
        }
        graphs.push_back({generate({.family = Family::path, .n = 60, .weights = WeightScheme::powers}, 1),
                          "path/powers/n60"});
        for (const auto& w : graphs) {
            auto ex = exact_all_pairs(w.graph, 1);
            for (int k : {4, 6}) {
                // Budget: alpha * S <= 128k with S = 2 for the snapped base.
                const double alpha = 64.0 * k;
                auto r = build_and_audit(w, k, seed++, ex, alpha);
                wide_worst = std::max(wide_worst, r.worst_stretch);
                wide_fallbacks += r.fallbacks;
                wide_connected += r.connected_pairs;
                wide_pool.add(r, w.name + "/k" + std::to_string(k) + "/alpha" + fmt(alpha));
            }
        }
    }

    const std::vector<std::pair<const char*, const Ledger*>> pools{
        {"main", &main_pool}, {"small", &small_pool}, {"unit", &pair_pool}, {"wide", &wide_pool}};

    // 1. Stretch soundness.
    {
        std::string detail;
        bool ok = main_pool.clean({"query.stretch", "query.disconnected", "query.identical"}, detail);
        ok = ok && main_pool.reports() >= 120;
        report(1, "stretch soundness", ok,
               std::to_string(main_pool.reports()) + " all-pairs audits (32 graphs x k in {4,5,6,8}); " + detail +
                   "worst stretch " + fmt(main_worst, 6) + "; all-check violations " +
                   std::to_string(main_pool.violations()));
        for (const auto& e : main_pool.examples()) {
            std::cout << "    violation: " << e << "\n";
        }
    }

    // 2. Exactness on bunch hits.
    {
        std::string detail;
        bool ok = main_pool.clean({"query.bunch_exact"}, detail);
        report(2, "exactness on bunch hits", ok, detail);
    }

    // 3. Constant work across k, against the growing pivot walk.
    {
        bool ok = true;
        std::ostringstream detail;
        std::map<int, int> max_sum;
        std::map<int, double> walk_mean;
        std::map<int, int> walk_max;
        std::uint64_t constant_total = 0;
        for (std::size_t n : {500, 2000}) {
            auto g = make_graph(Family::gnp, n, WeightScheme::uniform, 1e6, 31 + n);
            auto ex = exact_all_pairs(g, 1);
            auto base = snap_estimator(ex);
            for (int k = 4; k <= 16; ++k) {
                BuildOptions opts;
                opts.k = k;
                opts.seed = 7 * k + n;
                auto o = build_oracle(g, opts, base);
                std::mt19937_64 rng(k * 1000 + n);
                std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
                std::uint64_t walk_sum = 0;
                const int queries = 20000;
                for (int q = 0; q < queries; ++q) {
                    const NodeId s = pick(rng);
                    const NodeId t = pick(rng);
                    auto r = query(o, s, t);
                    auto tz = tz_query(o.pivots, o.bunches, s, t);
                    walk_sum += static_cast<std::uint64_t>(tz.walk);
                    walk_max[k] = std::max(walk_max[k], tz.walk);
                    const double d = ex(s, t);
                    if (!(approx_le(d, r.distance) && approx_le(r.distance, (2.0 * k - 1.0) * d))) {
                        ok = false;
                    }
                    const auto& st = r.stats;
                    if (st.fallback_used) {
                        continue;
                    }
                    ++constant_total;
                    if (st.loop_a_iters > 11 || st.loop_b_iters > 12 || st.loop_c_iters > 10 ||
                        st.checkind_calls > 6) {
                        ok = false;
                    }
                    max_sum[k] = std::max(max_sum[k], st.counter_sum());
                }
                walk_mean[k] = std::max(walk_mean[k], static_cast<double>(walk_sum) / queries);
            }
        }
        int lowest = 1 << 30;
        int highest = 0;
        detail << "max non-fallback counter sum by k:";
        for (int k = 4; k <= 16; ++k) {
            detail << " " << k << ":" << max_sum[k];
            lowest = std::min(lowest, max_sum[k]);
            highest = std::max(highest, max_sum[k]);
        }
        detail << "; mean tz walk by k:";
        for (int k = 4; k <= 16; ++k) {
            detail << " " << k << ":" << fmt(walk_mean[k]);
        }
        const bool caps_ok = ok;
        const bool identical = lowest == highest;
        const bool bounded = highest <= 11 + 12 + 10 + 6;
        const bool walk_grows = walk_mean[16] > walk_mean[4] && walk_max[16] > walk_max[4];
        detail << "; caps and stretch " << (caps_ok ? "hold" : "BROKEN") << " on " << constant_total
               << " non-fallback queries; max sum identical across k: " << (identical ? "yes" : "no")
               << "; max sum <= 39: " << (bounded ? "yes" : "no") << "; tz walk grows with k: "
               << (walk_grows ? "yes" : "no");
        report(3, "constant-work bound", caps_ok && identical && walk_grows, detail.str());
    }

    // 4. Geometric filter.
    {
        std::string detail;
        bool ok = true;
        for (auto [label, l] : pools) {
            std::string d;
            ok = l->clean({"scale.filter_soundness", "scale.spacing"}, d) && ok;
            detail += std::string(label) + ": " + d;
        }
        report(4, "geometric filter", ok, detail);
    }

    // 5 and 6. checkind trichotomy and the gap disjunction on small graphs.
    {
        std::string detail;
        bool ok = small_pool.clean({"checkind.trichotomy"}, detail);
        report(5, "checkind trichotomy", ok && small_pool.reports() >= 60,
               std::to_string(small_pool.reports()) + " exhaustive audits (24 graphs, n <= 100); " + detail);
        ok = small_pool.clean({"checkind.gap_disjunction"}, detail);
        report(6, "gap disjunction", ok, detail);
    }

    // 7. Legitimate pairs.
    {
        std::uint64_t emitted = 0;
        CheckTally legit;
        CheckTally est;
        for (auto [label, l] : pools) {
            emitted += l->legitimate_pairs();
            auto t = l->tally("findleg.legitimate_pair");
            legit.evaluated += t.evaluated;
            legit.failed += t.failed;
            t = l->tally("estimate.stretch");
            est.evaluated += t.evaluated;
            est.failed += t.failed;
        }
        report(7, "legitimate pairs", emitted > 0 && legit.failed == 0 && est.failed == 0,
               std::to_string(emitted) + " pairs emitted, " + std::to_string(legit.failed) +
                   " failed the definition, " + std::to_string(est.failed) + "/" + std::to_string(est.evaluated) +
                   " estimates out of stretch");
    }

    // 8. x-index well-definedness.
    {
        std::string detail;
        bool ok = true;
        for (auto [label, l] : pools) {
            std::string d;
            ok = l->clean({"xindex.brute_force", "xindex.well_defined"}, d) && ok;
            detail += std::string(label) + ": " + d;
        }
        report(8, "x-index well-definedness", ok, detail);
    }

    // 9. Bunch size against 4 k n^(1 + 1/k), averaged over 10 seeds.
    {
        bool ok = true;
        std::ostringstream detail;
        const std::vector<std::pair<std::size_t, int>> cells{{200, 4}, {200, 8}, {500, 4}, {500, 6},
                                                             {1000, 5}, {2000, 4}, {2000, 16}};
        for (auto [n, k] : cells) {
            auto g = make_graph(Family::gnp, n, WeightScheme::uniform, 1e6, n + k);
            double total = 0;
            const int seeds = 10;
            for (int s = 1; s <= seeds; ++s) {
                auto levels = sample_levels(g, k, static_cast<std::uint64_t>(s));
                auto pivots = compute_pivots(g, levels);
                total += static_cast<double>(compute_bunches(g, levels, pivots).total_size());
            }
            const double mean = total / seeds;
            const double bound = 4.0 * k * std::pow(static_cast<double>(n), 1.0 + 1.0 / k);
            ok = ok && mean <= bound;
            detail << "n=" << n << " k=" << k << " mean " << fmt(mean, 6) << " / bound " << fmt(bound, 6) << "; ";
        }
        report(9, "bunch size", ok, detail.str());
    }

    // 10. Fallback keeps correctness; the constant path runs on the power path.
    {
        std::string detail;
        bool ok = wide_pool.clean({"query.stretch", "query.fallback_integrity"}, detail);
        detail += "worst stretch " + fmt(wide_worst, 6) + "; fallback rate " +
                  fmt(wide_connected ? static_cast<double>(wide_fallbacks) / wide_connected : 0.0) + " over " +
                  std::to_string(wide_connected) + " connected pairs; ";
        std::size_t completed = 0;
        std::map<std::string, std::size_t> branches;
        for (double alpha : {1.0, 32.0}) {
            auto g = generate({.family = Family::path, .n = 40, .weights = WeightScheme::powers, .base = 4.0}, 1);
            auto ex = exact_all_pairs(g, 1);
            std::shared_ptr<const CoarseEstimator> est = snap_estimator(ex);
            if (alpha > 1.0) {
                est = stretch_injector(*est, alpha, 1, 6);
            }
            BuildOptions opts;
            opts.k = 6;
            opts.seed = 1;
            auto o = build_oracle(g, opts, est);
            std::size_t here = 0;
            for (NodeId s = 0; s < 40; ++s) {
                for (NodeId t = 0; t < 40; ++t) {
                    auto r = query(o, s, t);
                    ok = ok && approx_le(ex(s, t), r.distance) && approx_le(r.distance, 11.0 * ex(s, t));
                    const auto b = r.stats.branch;
                    if (!r.stats.fallback_used && b != Branch::identical && b != Branch::findleg_2) {
                        ++here;
                        branches[std::string(to_string(b))]++;
                    }
                }
            }
            detail += "power path n=40 k=6 alpha " + fmt(alpha) + ": " + std::to_string(here) +
                      " pairs on the constant path; ";
            completed += here;
        }
        for (const auto& [b, c] : branches) {
            detail += b + "=" + std::to_string(c) + " ";
        }
        report(10, "fallback keeps correctness", ok && completed > 0, detail);
    }

    std::size_t passed = 0;
    for (const auto& o : outcomes) {
        passed += o.pass ? 1 : 0;
    }
    std::cout << "# " << passed << "/" << outcomes.size() << " criteria passed in " << fmt(seconds_since(started), 4)
              << " s" << std::endl;
    return passed == outcomes.size() ? 0 : 1;
}
