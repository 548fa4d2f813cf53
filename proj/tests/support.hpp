#ifndef CQDO_TESTS_SUPPORT_HPP
#define CQDO_TESTS_SUPPORT_HPP

#include <cmath>
#include <memory>
#include <vector>

#include "cqdo/generators.hpp"
#include "cqdo/oracle.hpp"

namespace cqdo::testing {

// Node names of the five-node path a-b-c-d-e.
inline constexpr NodeId a = 0, b = 1, c = 2, d = 3, e = 4;

inline Graph p5() {
    return from_edge_list(std::string("5\n0 1 1\n1 2 1\n2 3 1\n3 4 1\n"));
}

// A_1 = {b, d}, A_2 = {b, d}, A_3 = {d}.
inline std::vector<std::vector<NodeId>> p5_levels() { return {{b, d}, {b, d}, {d}}; }

inline Oracle p5_oracle() {
    auto g = p5();
    BuildOptions opts;
    opts.k = 4;
    opts.level_override = p5_levels();
    return build_oracle(g, opts, snap_estimator(exact_all_pairs(g, 1)));
}

// Reference shortest paths by edge relaxation, independent of the heap code.
inline std::vector<double> bellman_ford(const Graph& g, NodeId source) {
    std::vector<double> dist(g.num_nodes(), kInfinity);
    dist[source] = 0.0;
    for (std::size_t round = 0; round < g.num_nodes(); ++round) {
        for (const auto& edge : g.edges()) {
            dist[edge.v] = std::min(dist[edge.v], dist[edge.u] + edge.w);
            dist[edge.u] = std::min(dist[edge.u], dist[edge.v] + edge.w);
        }
    }
    return dist;
}

struct Workload {
    Graph graph;
    std::string name;
};

// Small mixed-family graphs with weights in [1, 1e6].
inline std::vector<Workload> small_graphs(std::size_t count, std::size_t max_n, std::uint64_t seed) {
    std::vector<Workload> out;
    const Family families[] = {Family::path, Family::grid, Family::gnp, Family::geometric};
    for (std::size_t q = 0; q < count; ++q) {
        GeneratorParams p;
        p.family = families[q % 4];
        p.n = 20 + (q * 37) % (max_n - 19);
        p.w_min = 1.0;
        p.w_max = 1e6;
        if (p.family == Family::grid) {
            p.rows = 4 + q % 5;
            p.cols = std::max<std::size_t>(2, p.n / p.rows);
        }
        if (p.family == Family::gnp) {
            p.p = std::min(1.0, 4.0 / static_cast<double>(p.n));
        }
        out.push_back({generate(p, seed + q), std::string(to_string(p.family)) + "#" + std::to_string(q)});
    }
    return out;
}

}  // namespace cqdo::testing

#endif  // CQDO_TESTS_SUPPORT_HPP
