#ifndef CQDO_AUX_TABLES_HPP
#define CQDO_AUX_TABLES_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cqdo/thorup_zwick.hpp"

namespace cqdo {

/*
 * Per-node pivot gaps.
 *
 *   delta(u, j)     = pdist(u, j) - pdist(u, j - 2)          even j in [2, k-1]
 *   max_delta(u, j) = max of delta(u, i) over even i in [2, j]   (0 for j < 2)
 *   argmax(u, j)    = smallest even i in [2, j] attaining max_delta(u, j)
 *
 * A node is complete when all its pivot distances are finite. Gap tables of
 * incomplete nodes (components with no A_{k-1} member) are filled but never
 * consulted by the constant-time query.
 */
class DeltaTables {
public:
    DeltaTables() = default;
    DeltaTables(std::size_t n, int k)
        : n_(n), k_(k), delta_(n * static_cast<std::size_t>(k), 0.0), max_delta_(n * static_cast<std::size_t>(k), 0.0),
          argmax_(n * static_cast<std::size_t>(k), 0), complete_(n, 1) {}

    int k() const { return k_; }
    std::size_t num_nodes() const { return n_; }

    double delta(NodeId u, int j) const { return delta_[slot(u, j)]; }
    double max_delta(NodeId u, int j) const { return max_delta_[slot(u, j)]; }
    int argmax(NodeId u, int j) const { return argmax_[slot(u, j)]; }
    bool complete(NodeId u) const { return complete_[u] != 0; }

    void set(NodeId u, int j, double delta, double max_delta, int argmax) {
        delta_[slot(u, j)] = delta;
        max_delta_[slot(u, j)] = max_delta;
        argmax_[slot(u, j)] = static_cast<std::uint8_t>(argmax);
    }
    void set_complete(NodeId u, bool c) { complete_[u] = c ? 1 : 0; }

private:
    std::size_t slot(NodeId u, int j) const { return static_cast<std::size_t>(u) * k_ + j; }

    std::size_t n_ = 0;
    int k_ = 0;
    std::vector<double> delta_;
    std::vector<double> max_delta_;
    std::vector<std::uint8_t> argmax_;
    std::vector<std::uint8_t> complete_;
};

inline DeltaTables compute_delta_tables(const PivotTable& pivots, int k) {
    const auto n = pivots.num_nodes();
    DeltaTables tables(n, k);
    for (NodeId u = 0; u < n; ++u) {
        bool complete = true;
        for (int i = 0; i < k; ++i) {
            complete &= std::isfinite(pivots.dist(u, i));
        }
        tables.set_complete(u, complete);

        double best = 0.0;
        int best_index = 0;
        for (int j = 2; j < k; ++j) {
            double gap = 0.0;
            if (j % 2 == 0) {
                double hi = pivots.dist(u, j);
                double lo = pivots.dist(u, j - 2);
                gap = std::isfinite(hi) ? hi - lo : kInfinity;
                if (best_index == 0 || gap > best) {
                    best = gap;
                    best_index = j;
                }
            }
            tables.set(u, j, gap, best, best_index);
        }
    }
    return tables;
}

/*
 * Jump indices for the final estimate. For node v and even i in [2, k-1]:
 *
 *   x1: min even x >= i  with (x - i)(D_x - D_i)      >= (k - x - 2) D_i
 *   x2: min even x >= x1 with (x - x1)(D_x - D_x1)    >= (k - x - 2) D_x1
 *   x3: min even x >= x2 with (x - x2)(D_x - D_x2)    >= x1 (D_x2 - D_x1)
 *       or the largest even index <= k-1 when none qualifies (saturated)
 *
 * where D_j = max_delta(v, j). x1 and x2 always exist: the largest even
 * index makes the left side >= 0 and the right side <= 0.
 */
struct XIndices {
    std::uint8_t x1 = 0;
    std::uint8_t x2 = 0;
    std::uint8_t x3 = 0;
    bool x3_saturated = false;
};

class XIndexTable {
public:
    XIndexTable() = default;
    XIndexTable(std::size_t n, int k) : n_(n), k_(k), entries_(n * static_cast<std::size_t>(k)) {}

    int k() const { return k_; }
    std::size_t num_nodes() const { return n_; }

    const XIndices& at(NodeId v, int i) const { return entries_[static_cast<std::size_t>(v) * k_ + i]; }
    XIndices& at(NodeId v, int i) { return entries_[static_cast<std::size_t>(v) * k_ + i]; }

private:
    std::size_t n_ = 0;
    int k_ = 0;
    std::vector<XIndices> entries_;
};

inline int max_even_index(int k) { return (k - 1) % 2 == 0 ? k - 1 : k - 2; }

namespace detail {

template <class Pred>
std::optional<int> first_even_from(int from, int k, Pred ok) {
    for (int x = from; x <= k - 1; x += 2) {
        if (ok(x)) {
            return x;
        }
    }
    return std::nullopt;
}

}  // namespace detail

// Absent for k < 4: the constant-time path is then disabled entirely.
inline std::optional<XIndexTable> compute_x_indices(const DeltaTables& deltas, int k) {
    if (k < 4) {
        return std::nullopt;
    }
    const auto n = deltas.num_nodes();
    XIndexTable table(n, k);
    const int top = max_even_index(k);
    for (NodeId v = 0; v < n; ++v) {
        for (int i = 2; i <= k - 1; i += 2) {
            auto& e = table.at(v, i);
            if (!deltas.complete(v)) {
                e = {static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(i), false};
                continue;
            }
            auto D = [&](int j) { return deltas.max_delta(v, j); };
            int x1 = detail::first_even_from(i, k, [&](int x) {
                         return (x - i) * (D(x) - D(i)) >= (k - x - 2) * D(i);
                     }).value_or(top);
            int x2 = detail::first_even_from(x1, k, [&](int x) {
                         return (x - x1) * (D(x) - D(x1)) >= (k - x - 2) * D(x1);
                     }).value_or(top);
            auto x3 = detail::first_even_from(x2, k, [&](int x) {
                return (x - x2) * (D(x) - D(x2)) >= x1 * (D(x2) - D(x1));
            });
            e.x1 = static_cast<std::uint8_t>(x1);
            e.x2 = static_cast<std::uint8_t>(x2);
            e.x3 = static_cast<std::uint8_t>(x3.value_or(top));
            e.x3_saturated = !x3.has_value();
        }
    }
    return table;
}

}  // namespace cqdo

#endif  // CQDO_AUX_TABLES_HPP
