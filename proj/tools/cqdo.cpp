#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
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
#include "cqdo/snapshot.hpp"

using namespace cqdo;
using json = nlohmann::json;

namespace {

Graph read_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open graph file " + path);
    }
    return from_edge_list(in);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw std::runtime_error("cannot write " + path);
    }
}

// One line per level set A_1 .. A_{k-1}, node ids separated by spaces.
std::vector<std::vector<NodeId>> read_level_override(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open level override " + path);
    }
    std::vector<std::vector<NodeId>> sets;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::istringstream fields(line);
        std::vector<NodeId> set;
        long long id = 0;
        while (fields >> id) {
            if (id < 0) {
                throw std::runtime_error("level override: negative node id");
            }
            set.push_back(static_cast<NodeId>(id));
        }
        if (!fields.eof()) {
            throw std::runtime_error("level override: malformed line '" + line + "'");
        }
        sets.push_back(std::move(set));
    }
    return sets;
}

json stats_json(const QueryStats& st) {
    return {{"loop_a", st.loop_a_iters},
            {"loop_b", st.loop_b_iters},
            {"loop_c", st.loop_c_iters},
            {"checkind_calls", st.checkind_calls},
            {"counter_sum", st.counter_sum()},
            {"branch", std::string(to_string(st.branch))},
            {"fallback", st.fallback_used},
            {"reason", std::string(to_string(st.reason))},
            {"swapped", st.swapped},
            {"tz_walk", st.tz_walk}};
}

json distance_json(double d) { return std::isfinite(d) ? json(d) : json("inf"); }

json build_summary(const Graph& g, const Oracle& o, const BuildTimings& t) {
    const double n = static_cast<double>(g.num_nodes());
    std::size_t list_entries = 0;
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        list_entries += o.node_scales[u].list.size();
    }
    std::size_t complete = 0;
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        complete += o.deltas.complete(u) ? 1 : 0;
    }
    std::vector<std::size_t> level_sizes(static_cast<std::size_t>(o.k), 0);
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        for (int i = 0; i <= o.levels.level[u]; ++i) {
            ++level_sizes[static_cast<std::size_t>(i)];
        }
    }
    const auto cfg = o.estimator->config();
    return {{"n", g.num_nodes()},
            {"m", g.num_edges()},
            {"k", o.k},
            {"tz_only", o.tz_only()},
            {"estimator",
             {{"kind", std::string(to_string(cfg.kind))},
              {"alpha", cfg.alpha},
              {"seed", cfg.seed},
              {"stretch_bound", o.estimator->stretch_bound()},
              {"values", o.estimator->value_set().size()}}},
            {"params",
             {{"window_floor", o.params.window_floor},
              {"threshold_divisor", o.params.threshold_divisor},
              {"loop_b_cap", o.params.loop_b_cap},
              {"loop_c_cap", o.params.loop_c_cap}}},
            {"tables",
             {{"level_sizes", level_sizes},
              {"pivot_entries", g.num_nodes() * static_cast<std::size_t>(o.k + 1)},
              {"bunch_entries", o.bunches.total_size()},
              {"bunch_bound", o.k * std::pow(n, 1.0 + 1.0 / o.k)},
              {"complete_nodes", complete},
              {"scale_values", o.scale.values().size()},
              {"filtered_scale_values", o.scale.size()},
              {"node_list_entries", list_entries}}},
            {"timings_ms",
             {{"levels", t.levels_ms},
              {"pivots", t.pivots_ms},
              {"bunches", t.bunches_ms},
              {"derived", t.derived_ms},
              {"total", t.total_ms}}}};
}

double percentile(std::vector<double> xs, double q) {
    if (xs.empty()) {
        return 0.0;
    }
    std::sort(xs.begin(), xs.end());
    auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(xs.size())));
    return xs[std::min(xs.size() - 1, idx == 0 ? 0 : idx - 1)];
}

json latency_json(const std::vector<double>& ns) {
    return {{"p50", percentile(ns, 0.50)},
            {"p90", percentile(ns, 0.90)},
            {"p99", percentile(ns, 0.99)},
            {"max", percentile(ns, 1.0)}};
}

struct GenerateArgs {
    GeneratorParams params;
    std::string family = "gnp";
    std::string weights;
    std::uint64_t seed = 1;
    std::string out;
};

struct BuildArgs {
    std::string graph;
    int k = 4;
    std::uint64_t seed = 1;
    std::string estimator = "snap";
    double alpha = 1.0;
    std::uint64_t estimator_seed = 1;
    std::string level_override;
    std::string out;
    std::string summary;
};

struct QueryArgs {
    std::string snapshot;
    std::vector<NodeId> pair;
    std::string pairs_file;
};

struct AuditArgs {
    std::string snapshot;
    std::string graph;
    std::string mode = "all-pairs";
    std::size_t samples = 1000;
    std::uint64_t seed = 1;
    std::string out;
    std::string csv;
};

struct BenchArgs {
    std::string snapshot;
    std::size_t queries = 10000;
    std::uint64_t seed = 1;
    int repeat = 8;
    std::string out;
    std::string summary;
};

int run_generate(GenerateArgs& a) {
    a.params.family = parse_family(a.family);
    if (!a.weights.empty()) {
        a.params.weights = parse_weight_scheme(a.weights);
    }
    auto g = generate(a.params, a.seed);
    if (a.out.empty()) {
        write_edge_list(std::cout, g);
    } else {
        std::ofstream out(a.out);
        if (!out) {
            throw std::runtime_error("cannot write " + a.out);
        }
        write_edge_list(out, g);
    }
    return 0;
}

int run_build(const BuildArgs& a) {
    auto g = read_graph(a.graph);
    std::shared_ptr<const CoarseEstimator> est = snap_estimator(exact_all_pairs(g));
    if (a.estimator == "inject") {
        est = stretch_injector(*est, a.alpha, a.estimator_seed, a.k);
    } else if (a.estimator != "snap") {
        throw std::invalid_argument("unknown estimator " + a.estimator);
    }
    BuildOptions opts;
    opts.k = a.k;
    opts.seed = a.seed;
    if (!a.level_override.empty()) {
        opts.level_override = read_level_override(a.level_override);
    }
    BuildTimings timings;
    auto o = build_oracle(g, opts, est, &timings);
    save_snapshot(o, a.out);
    auto summary = build_summary(g, o, timings).dump(2) + "\n";
    if (a.summary.empty()) {
        std::cout << summary;
    } else {
        write_text(a.summary, summary);
    }
    return 0;
}

int run_query(const QueryArgs& a) {
    auto o = load_snapshot(a.snapshot);
    std::vector<std::pair<NodeId, NodeId>> pairs;
    if (a.pair.size() == 2) {
        pairs.emplace_back(a.pair[0], a.pair[1]);
    }
    if (!a.pairs_file.empty()) {
        std::ifstream in(a.pairs_file);
        if (!in) {
            throw std::runtime_error("cannot open " + a.pairs_file);
        }
        NodeId s = 0;
        NodeId t = 0;
        while (in >> s >> t) {
            pairs.emplace_back(s, t);
        }
    }
    for (auto [s, t] : pairs) {
        auto r = query(o, s, t);
        auto tz = tz_query(o.pivots, o.bunches, s, t);
        json line{{"s", s},
                  {"t", t},
                  {"distance", distance_json(r.distance)},
                  {"tz_distance", distance_json(tz.distance)},
                  {"stats", stats_json(r.stats)}};
        std::cout << line.dump() << '\n';
    }
    return 0;
}

int run_audit(const AuditArgs& a) {
    auto o = load_snapshot(a.snapshot);
    auto g = read_graph(a.graph);
    if (g.num_nodes() != o.num_nodes()) {
        throw std::invalid_argument("graph and snapshot disagree on the node count");
    }
    AuditOptions opt;
    if (a.mode == "sample") {
        opt.mode = AuditOptions::Mode::sample;
    } else if (a.mode != "all-pairs") {
        throw std::invalid_argument("unknown audit mode " + a.mode);
    }
    opt.samples = a.samples;
    opt.seed = a.seed;
    opt.graph_descriptor = a.graph;
    auto report = audit(g, o, opt);
    auto text = report.to_json().dump(2) + "\n";
    if (a.out.empty()) {
        std::cout << text;
    } else {
        write_text(a.out, text);
    }
    if (!a.csv.empty()) {
        write_text(a.csv, report.checks_csv());
    }
    std::cerr << "audit: " << report.pairs_audited << " pairs, worst stretch " << report.worst_stretch
              << ", fallback rate " << report.fallback_rate << ", " << report.violation_count << " violations\n";
    return report.ok() ? 0 : 1;
}

int run_bench(const BenchArgs& a) {
    using clock = std::chrono::steady_clock;
    auto o = load_snapshot(a.snapshot);
    const auto n = o.num_nodes();
    std::mt19937_64 rng(a.seed);
    std::uniform_int_distribution<NodeId> pick(0, n == 0 ? 0 : static_cast<NodeId>(n - 1));
    const int repeat = std::max(1, a.repeat);

    std::ostringstream csv;
    csv << "s,t,distance,tz_distance,branch,fallback,reason,loop_a,loop_b,loop_c,checkind_calls,counter_sum,"
           "tz_walk,query_ns,tz_ns\n";
    std::vector<double> query_ns;
    std::vector<double> tz_ns;
    std::vector<double> constant_ns;
    CounterMaxima all;
    CounterMaxima constant_path;
    std::map<int, std::uint64_t> sum_histogram;
    std::map<int, std::uint64_t> walk_histogram;
    std::uint64_t fallbacks = 0;
    volatile double sink = 0;
    for (std::size_t q = 0; q < a.queries && n > 0; ++q) {
        const NodeId s = pick(rng);
        const NodeId t = pick(rng);
        QueryResult r;
        auto t0 = clock::now();
        for (int rep = 0; rep < repeat; ++rep) {
            r = query(o, s, t);
            sink = sink + r.distance;
        }
        auto t1 = clock::now();
        TzResult tz;
        for (int rep = 0; rep < repeat; ++rep) {
            tz = tz_query(o.pivots, o.bunches, s, t);
            sink = sink + tz.distance;
        }
        auto t2 = clock::now();
        const double qn = std::chrono::duration<double, std::nano>(t1 - t0).count() / repeat;
        const double tn = std::chrono::duration<double, std::nano>(t2 - t1).count() / repeat;
        query_ns.push_back(qn);
        tz_ns.push_back(tn);
        const auto& st = r.stats;
        all.observe(st);
        walk_histogram[tz.walk]++;
        if (st.fallback_used) {
            ++fallbacks;
        } else {
            constant_path.observe(st);
            constant_ns.push_back(qn);
            sum_histogram[st.counter_sum()]++;
        }
        csv << s << ',' << t << ',' << r.distance << ',' << tz.distance << ',' << to_string(st.branch) << ','
            << st.fallback_used << ',' << to_string(st.reason) << ',' << st.loop_a_iters << ','
            << st.loop_b_iters << ',' << st.loop_c_iters << ',' << st.checkind_calls << ',' << st.counter_sum()
            << ',' << tz.walk << ',' << qn << ',' << tn << '\n';
    }
    if (!a.out.empty()) {
        write_text(a.out, csv.str());
    }
    auto counters = [](const CounterMaxima& c) {
        return json{{"loop_a", c.loop_a},
                    {"loop_b", c.loop_b},
                    {"loop_c", c.loop_c},
                    {"checkind_calls", c.checkind_calls},
                    {"counter_sum", c.counter_sum}};
    };
    auto histogram = [](const std::map<int, std::uint64_t>& h) {
        json out = json::object();
        for (auto [value, count] : h) {
            out[std::to_string(value)] = count;
        }
        return out;
    };
    json summary{{"queries", query_ns.size()},
                 {"k", o.k},
                 {"n", n},
                 {"seed", a.seed},
                 {"repeat", repeat},
                 {"fallbacks", fallbacks},
                 {"counter_maxima", {{"all_queries", counters(all)}, {"constant_path", counters(constant_path)}}},
                 {"constant_path_counter_sum_histogram", histogram(sum_histogram)},
                 {"tz_walk_histogram", histogram(walk_histogram)},
                 {"latency_ns",
                  {{"query", latency_json(query_ns)},
                   {"query_constant_path", latency_json(constant_ns)},
                   {"tz_query", latency_json(tz_ns)}}}};
    auto text = summary.dump(2) + "\n";
    if (a.summary.empty()) {
        std::cout << text;
    } else {
        write_text(a.summary, text);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constant-query distance oracle: build, query, audit and benchmark"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate_cmd = app.add_subcommand("generate", "Write a synthetic graph as an edge list");
    generate_cmd->add_option("--family", gen.family, "path, grid, gnp or geometric")->required();
    generate_cmd->add_option("--n", gen.params.n, "Node count (path, gnp, geometric)");
    generate_cmd->add_option("--rows", gen.params.rows, "Grid rows");
    generate_cmd->add_option("--cols", gen.params.cols, "Grid columns");
    generate_cmd->add_option("--p", gen.params.p, "Edge probability (gnp)");
    generate_cmd->add_option("--radius", gen.params.radius, "Connection radius (geometric, 0 picks a default)");
    generate_cmd->add_option("--weights", gen.weights, "unit, uniform, log or powers (default per family)");
    generate_cmd->add_option("--w-min", gen.params.w_min, "Smallest weight");
    generate_cmd->add_option("--w-max", gen.params.w_max, "Largest weight");
    generate_cmd->add_option("--base", gen.params.base, "Base for power weights");
    generate_cmd->add_option("--seed", gen.seed, "Generator seed");
    generate_cmd->add_option("--out", gen.out, "Output path (stdout when omitted)");

    BuildArgs build;
    auto* build_cmd = app.add_subcommand("build", "Preprocess a graph into a snapshot");
    build_cmd->add_option("--graph", build.graph, "Edge-list file")->required();
    build_cmd->add_option("--k", build.k, "Stretch parameter, stretch is 2k-1")->check(CLI::Range(2, 64));
    build_cmd->add_option("--seed", build.seed, "Level sampling seed");
    build_cmd->add_option("--estimator", build.estimator, "Coarse estimator")->check(CLI::IsMember({"snap", "inject"}));
    build_cmd->add_option("--alpha", build.alpha, "Stretch inflation for the inject estimator");
    build_cmd->add_option("--estimator-seed", build.estimator_seed, "Seed for the inject estimator");
    build_cmd->add_option("--level-override", build.level_override, "File with the sets A_1 .. A_{k-1}, one per line");
    build_cmd->add_option("--out", build.out, "Snapshot path")->required();
    build_cmd->add_option("--summary", build.summary, "Build summary JSON path (stdout when omitted)");

    QueryArgs q;
    auto* query_cmd = app.add_subcommand("query", "Answer distance queries from a snapshot");
    query_cmd->add_option("--snapshot", q.snapshot, "Snapshot path")->required();
    query_cmd->add_option("pair", q.pair, "Source and target")->expected(2);
    query_cmd->add_option("--pairs", q.pairs_file, "File of 's t' lines");

    AuditArgs au;
    auto* audit_cmd = app.add_subcommand("audit", "Check a snapshot against exact distances");
    audit_cmd->add_option("--snapshot", au.snapshot, "Snapshot path")->required();
    audit_cmd->add_option("--graph", au.graph, "Edge-list file the snapshot was built from")->required();
    audit_cmd->add_option("--mode", au.mode, "all-pairs or sample")->check(CLI::IsMember({"all-pairs", "sample"}));
    audit_cmd->add_option("--samples", au.samples, "Pair count in sample mode");
    audit_cmd->add_option("--seed", au.seed, "Pair sampling seed");
    audit_cmd->add_option("--out", au.out, "Report JSON path (stdout when omitted)");
    audit_cmd->add_option("--csv", au.csv, "Per-check CSV path");

    BenchArgs be;
    auto* bench_cmd = app.add_subcommand("bench", "Time random queries and record work counters");
    bench_cmd->add_option("--snapshot", be.snapshot, "Snapshot path")->required();
    bench_cmd->add_option("--queries", be.queries, "Number of random pairs");
    bench_cmd->add_option("--seed", be.seed, "Pair sampling seed");
    bench_cmd->add_option("--repeat", be.repeat, "Timed repetitions per pair");
    bench_cmd->add_option("--out", be.out, "Per-query CSV path");
    bench_cmd->add_option("--summary", be.summary, "Summary JSON path (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*generate_cmd) {
            return run_generate(gen);
        }
        if (*build_cmd) {
            return run_build(build);
        }
        if (*query_cmd) {
            return run_query(q);
        }
        if (*audit_cmd) {
            return run_audit(au);
        }
        if (*bench_cmd) {
            return run_bench(be);
        }
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    }
    return 0;
}
