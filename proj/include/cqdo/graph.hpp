#ifndef CQDO_GRAPH_HPP
#define CQDO_GRAPH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cqdo {

using NodeId = std::uint32_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

// Audit comparisons: absolute 1e-9, widened relative to magnitude once a
// double can no longer resolve 1e-9 (weights spanning 4^40 and the like).
inline double tolerance_for(double magnitude) {
    return std::max(1e-9, 1e-12 * std::abs(magnitude));
}

inline bool approx_le(double a, double b) {
    if (a <= b) {
        return true;
    }
    return a - b <= tolerance_for(std::max(std::abs(a), std::abs(b)));
}

struct Edge {
    NodeId u;
    NodeId v;
    double w;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct Arc {
    NodeId target;
    double weight;
};

/*
 * Immutable undirected graph with non-negative weights in CSR form.
 * Parallel edges are collapsed to their minimum weight.
 */
class Graph {
public:
    Graph() = default;

    std::size_t num_nodes() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t num_edges() const { return edges_.size(); }

    std::span<const Arc> neighbors(NodeId u) const {
        return {arcs_.data() + offsets_[u], arcs_.data() + offsets_[u + 1]};
    }

    // Canonical edge list: u < v, sorted by (u, v).
    const std::vector<Edge>& edges() const { return edges_; }

    friend class GraphBuilder;

private:
    std::vector<std::size_t> offsets_;
    std::vector<Arc> arcs_;
    std::vector<Edge> edges_;
};

class GraphBuilder {
public:
    explicit GraphBuilder(std::size_t n) : n_(n) {
        if (n >= kNoNode) {
            throw std::invalid_argument("graph: node count too large");
        }
    }

    std::size_t num_nodes() const { return n_; }

    void add_edge(NodeId u, NodeId v, double w) {
        if (u >= n_ || v >= n_) {
            throw std::invalid_argument("graph: node id out of range");
        }
        if (u == v) {
            throw std::invalid_argument("graph: self-loop rejected");
        }
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw std::invalid_argument("graph: weight must be finite and non-negative");
        }
        if (u > v) {
            std::swap(u, v);
        }
        auto key = (static_cast<std::uint64_t>(u) << 32) | v;
        auto [it, inserted] = weights_.try_emplace(key, w);
        if (!inserted) {
            it->second = std::min(it->second, w);
        }
    }

    Graph build() const {
        Graph g;
        g.edges_.reserve(weights_.size());
        for (const auto& [key, w] : weights_) {
            g.edges_.push_back({static_cast<NodeId>(key >> 32), static_cast<NodeId>(key & 0xffffffffu), w});
        }
        std::sort(g.edges_.begin(), g.edges_.end(),
                  [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });

        std::vector<std::size_t> degree(n_, 0);
        for (const auto& e : g.edges_) {
            ++degree[e.u];
            ++degree[e.v];
        }
        g.offsets_.assign(n_ + 1, 0);
        for (std::size_t i = 0; i < n_; ++i) {
            g.offsets_[i + 1] = g.offsets_[i] + degree[i];
        }
        g.arcs_.resize(g.offsets_[n_]);
        std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
        for (const auto& e : g.edges_) {
            g.arcs_[fill[e.u]++] = {e.v, e.w};
            g.arcs_[fill[e.v]++] = {e.u, e.w};
        }
        return g;
    }

private:
    std::size_t n_;
    std::unordered_map<std::uint64_t, double> weights_;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/*
 * Edge-list text format: first record "n", then one "u v w" record per edge.
 * Whitespace separated; '#' starts a comment that runs to end of line.
 */
inline Graph from_edge_list(std::istream& in) {
    std::string raw;
    std::size_t line_no = 0;
    bool have_header = false;
    std::size_t n = 0;
    std::vector<std::tuple<std::size_t, long long, long long, double>> records;

    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) {
            raw.erase(hash);
        }
        std::istringstream fields(raw);
        std::vector<std::string> tokens;
        for (std::string tok; fields >> tok;) {
            tokens.push_back(tok);
        }
        if (tokens.empty()) {
            continue;
        }
        if (!have_header) {
            if (tokens.size() != 1) {
                throw ParseError(line_no, "expected node count header");
            }
            std::size_t used = 0;
            long long value = 0;
            try {
                value = std::stoll(tokens[0], &used);
            } catch (const std::exception&) {
                throw ParseError(line_no, "malformed node count '" + tokens[0] + "'");
            }
            if (used != tokens[0].size() || value < 0) {
                throw ParseError(line_no, "malformed node count '" + tokens[0] + "'");
            }
            n = static_cast<std::size_t>(value);
            have_header = true;
            continue;
        }
        if (tokens.size() != 3) {
            throw ParseError(line_no, "expected 'u v w'");
        }
        long long u = 0;
        long long v = 0;
        double w = 0;
        try {
            std::size_t used_u = 0;
            std::size_t used_v = 0;
            std::size_t used_w = 0;
            u = std::stoll(tokens[0], &used_u);
            v = std::stoll(tokens[1], &used_v);
            w = std::stod(tokens[2], &used_w);
            if (used_u != tokens[0].size() || used_v != tokens[1].size() || used_w != tokens[2].size()) {
                throw std::invalid_argument("trailing characters");
            }
        } catch (const std::exception&) {
            throw ParseError(line_no, "malformed edge record");
        }
        records.emplace_back(line_no, u, v, w);
    }
    if (!have_header) {
        throw ParseError(line_no, "missing node count header");
    }

    GraphBuilder builder(n);
    for (const auto& [line, u, v, w] : records) {
        if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(v) >= n) {
            throw ParseError(line, "node id out of range [0, " + std::to_string(n) + ")");
        }
        if (u == v) {
            throw ParseError(line, "self-loop");
        }
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ParseError(line, "negative or non-finite weight");
        }
        builder.add_edge(static_cast<NodeId>(u), static_cast<NodeId>(v), w);
    }
    return builder.build();
}

inline Graph from_edge_list(const std::string& text) {
    std::istringstream in(text);
    return from_edge_list(in);
}

inline void write_edge_list(std::ostream& out, const Graph& g) {
    auto old_precision = out.precision(17);
    out << g.num_nodes() << '\n';
    for (const auto& e : g.edges()) {
        out << e.u << ' ' << e.v << ' ' << e.w << '\n';
    }
    out.precision(old_precision);
}

inline std::vector<double> dijkstra(const Graph& g, NodeId source) {
    if (source >= g.num_nodes()) {
        throw std::invalid_argument("dijkstra: source out of range");
    }
    std::vector<double> dist(g.num_nodes(), kInfinity);
    using Item = std::pair<double, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0.0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) {
            continue;
        }
        for (const auto& arc : g.neighbors(u)) {
            double nd = d + arc.weight;
            if (nd < dist[arc.target]) {
                dist[arc.target] = nd;
                heap.emplace(nd, arc.target);
            }
        }
    }
    return dist;
}

struct NearestSource {
    std::vector<double> dist;
    std::vector<NodeId> source;  // kNoNode when unreachable
};

// Multi-source shortest paths. Each node is labelled with its nearest source,
// ties broken toward the smallest source id.
inline NearestSource nearest_source(const Graph& g, std::span<const NodeId> sources) {
    const auto n = g.num_nodes();
    NearestSource out{std::vector<double>(n, kInfinity), std::vector<NodeId>(n, kNoNode)};
    using Item = std::tuple<double, NodeId, NodeId>;  // (dist, source, node)
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (auto s : sources) {
        if (out.dist[s] > 0.0 || s < out.source[s]) {
            out.dist[s] = 0.0;
            out.source[s] = s;
            heap.emplace(0.0, s, s);
        }
    }
    while (!heap.empty()) {
        auto [d, src, u] = heap.top();
        heap.pop();
        if (d != out.dist[u] || src != out.source[u]) {
            continue;
        }
        for (const auto& arc : g.neighbors(u)) {
            double nd = d + arc.weight;
            auto v = arc.target;
            if (nd < out.dist[v] || (nd == out.dist[v] && src < out.source[v])) {
                out.dist[v] = nd;
                out.source[v] = src;
                heap.emplace(nd, src, v);
            }
        }
    }
    return out;
}

/*
 * Dense all-pairs exact distances. Test and audit oracle only: O(n^2) space.
 */
class ExactOracle {
public:
    ExactOracle() = default;
    ExactOracle(std::size_t n, std::vector<double> dist) : n_(n), dist_(std::move(dist)) {}

    std::size_t num_nodes() const { return n_; }
    double operator()(NodeId u, NodeId v) const { return dist_[static_cast<std::size_t>(u) * n_ + v]; }
    std::span<const double> row(NodeId u) const { return {dist_.data() + static_cast<std::size_t>(u) * n_, n_}; }

private:
    std::size_t n_ = 0;
    std::vector<double> dist_;
};

inline ExactOracle exact_all_pairs(const Graph& g, unsigned workers = std::thread::hardware_concurrency()) {
    const auto n = g.num_nodes();
    std::vector<double> dist(n * n);
    auto run = [&](std::size_t begin, std::size_t step) {
        for (std::size_t s = begin; s < n; s += step) {
            auto row = dijkstra(g, static_cast<NodeId>(s));
            std::copy(row.begin(), row.end(), dist.begin() + static_cast<std::ptrdiff_t>(s * n));
        }
    };
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        run(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(run, w, workers);
        }
    }
    return ExactOracle(n, std::move(dist));
}

}  // namespace cqdo

#endif  // CQDO_GRAPH_HPP
