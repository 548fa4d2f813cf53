#ifndef CQDO_THORUP_ZWICK_HPP
#define CQDO_THORUP_ZWICK_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cqdo/graph.hpp"

namespace cqdo {

/*
 * Nested samples V = A_0 ⊇ A_1 ⊇ ... ⊇ A_{k-1} ⊋ A_k = ∅, stored as the
 * maximal level of every node.
 */
struct LevelAssignment {
    int k = 0;
    std::vector<std::uint8_t> level;
    std::uint64_t seed = 0;  // seed that produced the accepted draw

    std::size_t num_nodes() const { return level.size(); }
    bool in_level(NodeId v, int i) const { return static_cast<int>(level[v]) >= i; }

    std::vector<NodeId> members(int i) const {
        std::vector<NodeId> out;
        for (NodeId v = 0; v < level.size(); ++v) {
            if (in_level(v, i)) {
                out.push_back(v);
            }
        }
        return out;
    }
};

inline constexpr int kMaxLevels = 64;
inline constexpr int kResampleAttempts = 64;

// Explicit sets A_1..A_{k-1}, used to inject fixtures. Must be nested with
// A_{k-1} nonempty.
inline LevelAssignment levels_from_sets(std::size_t n, int k, const std::vector<std::vector<NodeId>>& sets) {
    if (k < 2 || k > kMaxLevels) {
        throw std::invalid_argument("levels: k must be in [2, 64]");
    }
    if (sets.size() != static_cast<std::size_t>(k - 1)) {
        throw std::invalid_argument("levels: override must list exactly k-1 sets (A_1..A_{k-1})");
    }
    std::vector<std::vector<bool>> member(k, std::vector<bool>(n, false));
    member[0].assign(n, true);
    for (int i = 1; i < k; ++i) {
        for (auto v : sets[i - 1]) {
            if (v >= n) {
                throw std::invalid_argument("levels: override node id out of range");
            }
            member[i][v] = true;
        }
    }
    LevelAssignment out{k, std::vector<std::uint8_t>(n, 0), 0};
    for (NodeId v = 0; v < n; ++v) {
        int top = 0;
        for (int i = 1; i < k; ++i) {
            if (member[i][v]) {
                if (!member[i - 1][v]) {
                    throw std::invalid_argument("levels: override sets are not nested at A_" + std::to_string(i));
                }
                top = i;
            }
        }
        out.level[v] = static_cast<std::uint8_t>(top);
    }
    if (sets[k - 2].empty()) {
        throw std::invalid_argument("levels: A_{k-1} must be nonempty");
    }
    return out;
}

inline LevelAssignment levels_from_node_levels(int k, const std::vector<std::uint8_t>& node_levels) {
    if (k < 2 || k > kMaxLevels) {
        throw std::invalid_argument("levels: k must be in [2, 64]");
    }
    bool top_nonempty = false;
    for (auto l : node_levels) {
        if (l >= k) {
            throw std::invalid_argument("levels: node level must be < k");
        }
        top_nonempty |= (l == k - 1);
    }
    if (!top_nonempty) {
        throw std::invalid_argument("levels: A_{k-1} must be nonempty");
    }
    return {k, node_levels, 0};
}

/*
 * Each promotion A_{i-1} -> A_i keeps a node with probability n^{-1/k}.
 * A draw with empty A_{k-1} is discarded and redrawn with seed+1.
 */
inline LevelAssignment sample_levels(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2 || k > kMaxLevels) {
        throw std::invalid_argument("sample_levels: k must be in [2, 64]");
    }
    if (n == 0) {
        throw std::invalid_argument("sample_levels: graph has no nodes");
    }
    const double keep = std::pow(static_cast<double>(n), -1.0 / k);
    for (int attempt = 0; attempt < kResampleAttempts; ++attempt) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(attempt);
        std::mt19937_64 rng(s);
        std::bernoulli_distribution promote(keep);
        LevelAssignment out{k, std::vector<std::uint8_t>(n, 0), s};
        std::vector<NodeId> current(n);
        for (NodeId v = 0; v < n; ++v) {
            current[v] = v;
        }
        for (int i = 1; i < k && !current.empty(); ++i) {
            std::vector<NodeId> next;
            for (auto v : current) {
                if (promote(rng)) {
                    next.push_back(v);
                    out.level[v] = static_cast<std::uint8_t>(i);
                }
            }
            current = std::move(next);
        }
        bool top_nonempty = std::any_of(out.level.begin(), out.level.end(),
                                        [k](std::uint8_t l) { return l == k - 1; });
        if (top_nonempty) {
            return out;
        }
    }
    throw std::runtime_error("sample_levels: A_{k-1} empty after " + std::to_string(kResampleAttempts) +
                             " attempts");
}

inline LevelAssignment sample_levels(const Graph& g, int k, std::uint64_t seed,
                                     const std::optional<std::vector<std::vector<NodeId>>>& override_sets = {}) {
    if (override_sets) {
        auto out = levels_from_sets(g.num_nodes(), k, *override_sets);
        out.seed = seed;
        return out;
    }
    return sample_levels(g.num_nodes(), k, seed);
}

/*
 * p_i(v) and dist(v, p_i(v)) for 0 <= i < k. Level k is the empty sentinel:
 * pivot kNoNode, distance ∞.
 */
class PivotTable {
public:
    PivotTable() = default;
    PivotTable(std::size_t n, int k)
        : n_(n), k_(k), pivot_(n * static_cast<std::size_t>(k), kNoNode), dist_(n * static_cast<std::size_t>(k), kInfinity) {}

    int k() const { return k_; }
    std::size_t num_nodes() const { return n_; }

    NodeId pivot(NodeId v, int i) const { return i >= k_ ? kNoNode : pivot_[slot(v, i)]; }
    double dist(NodeId v, int i) const { return i >= k_ ? kInfinity : dist_[slot(v, i)]; }

    void set(NodeId v, int i, NodeId p, double d) {
        pivot_[slot(v, i)] = p;
        dist_[slot(v, i)] = d;
    }

private:
    std::size_t slot(NodeId v, int i) const { return static_cast<std::size_t>(v) * k_ + i; }

    std::size_t n_ = 0;
    int k_ = 0;
    std::vector<NodeId> pivot_;
    std::vector<double> dist_;
};

// One multi-source shortest-path run per level; ties go to the smallest id.
inline PivotTable compute_pivots(const Graph& g, const LevelAssignment& levels) {
    PivotTable table(g.num_nodes(), levels.k);
    for (int i = 0; i < levels.k; ++i) {
        auto sources = levels.members(i);
        auto nearest = nearest_source(g, sources);
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
            table.set(v, i, nearest.source[v], nearest.dist[v]);
        }
    }
    return table;
}

/*
 * B(v) with exact distances, one hash map per node.
 */
class BunchSet {
public:
    BunchSet() = default;
    explicit BunchSet(std::size_t n) : maps_(n) {}

    std::size_t num_nodes() const { return maps_.size(); }

    bool contains(NodeId v, NodeId u) const { return maps_[v].count(u) != 0; }

    std::optional<double> distance(NodeId v, NodeId u) const {
        const auto& m = maps_[v];
        if (auto it = m.find(u); it != m.end()) {
            return it->second;
        }
        return std::nullopt;
    }

    const std::unordered_map<NodeId, double>& bunch(NodeId v) const { return maps_[v]; }

    // Entries of B(v) ordered by node id.
    std::vector<std::pair<NodeId, double>> sorted_bunch(NodeId v) const {
        std::vector<std::pair<NodeId, double>> out(maps_[v].begin(), maps_[v].end());
        std::sort(out.begin(), out.end());
        return out;
    }

    void insert(NodeId v, NodeId u, double d) { maps_[v][u] = d; }

    std::size_t total_size() const {
        std::size_t total = 0;
        for (const auto& m : maps_) {
            total += m.size();
        }
        return total;
    }

private:
    std::vector<std::unordered_map<NodeId, double>> maps_;
};

/*
 * Bunches via clusters: C(w) = { v : dist(w, v) < pdist(v, l(w) + 1) } is
 * grown by a Dijkstra from w that only relaxes nodes meeting the bound, and
 * B(v) = { w : v ∈ C(w) }.
 */
inline BunchSet compute_bunches(const Graph& g, const LevelAssignment& levels, const PivotTable& pivots) {
    const auto n = g.num_nodes();
    BunchSet bunches(n);
    std::vector<double> dist(n, kInfinity);
    std::vector<NodeId> touched;
    using Item = std::pair<double, NodeId>;
    for (NodeId w = 0; w < n; ++w) {
        const int bound_level = levels.level[w] + 1;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        if (!(0.0 < pivots.dist(w, bound_level))) {
            continue;
        }
        dist[w] = 0.0;
        touched.push_back(w);
        heap.emplace(0.0, w);
        while (!heap.empty()) {
            auto [d, u] = heap.top();
            heap.pop();
            if (d > dist[u]) {
                continue;
            }
            bunches.insert(u, w, d);
            for (const auto& arc : g.neighbors(u)) {
                double nd = d + arc.weight;
                auto x = arc.target;
                if (nd < dist[x] && nd < pivots.dist(x, bound_level)) {
                    if (dist[x] == kInfinity) {
                        touched.push_back(x);
                    }
                    dist[x] = nd;
                    heap.emplace(nd, x);
                }
            }
        }
        for (auto x : touched) {
            dist[x] = kInfinity;
        }
        touched.clear();
    }
    return bunches;
}

struct TzResult {
    double distance = kInfinity;
    int walk = 0;  // pivot-walk iterations
};

// The O(k) pivot walk; ∞ when s and t are disconnected.
inline TzResult tz_query(const PivotTable& pivots, const BunchSet& bunches, NodeId s, NodeId t) {
    NodeId w = s;
    int j = 0;
    std::optional<double> tail = bunches.distance(t, w);
    while (!tail) {
        ++j;
        if (j >= pivots.k()) {
            return {kInfinity, j};
        }
        std::swap(s, t);
        w = pivots.pivot(s, j);
        if (w == kNoNode) {
            return {kInfinity, j};
        }
        tail = bunches.distance(t, w);
    }
    return {pivots.dist(s, j) + *tail, j};
}

}  // namespace cqdo

#endif  // CQDO_THORUP_ZWICK_HPP
