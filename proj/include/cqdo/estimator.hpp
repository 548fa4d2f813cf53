#ifndef CQDO_ESTIMATOR_HPP
#define CQDO_ESTIMATOR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cqdo/graph.hpp"

namespace cqdo {

enum class EstimatorKind : std::uint8_t { snap = 0, inject = 1, custom = 2 };

inline std::string_view to_string(EstimatorKind k) {
    switch (k) {
    case EstimatorKind::snap: return "snap";
    case EstimatorKind::inject: return "inject";
    case EstimatorKind::custom: return "custom";
    }
    return "?";
}

struct EstimatorConfig {
    EstimatorKind kind = EstimatorKind::snap;
    double alpha = 1.0;
    std::uint64_t seed = 0;
};

/*
 * Coarse constant-time distance estimator consumed by the query engine.
 *
 * Contract, for every connected pair (s, t):
 *   dist(s, t) <= estimate(s, t) <= stretch_bound() * dist(s, t)
 *   estimate(s, t) is a member of value_set() and equals estimate(t, s)
 * Disconnected pairs estimate to ∞. The value set must be known before the
 * oracle is built, since it seeds the global distance scale.
 */
class CoarseEstimator {
public:
    virtual ~CoarseEstimator() = default;

    virtual double estimate(NodeId s, NodeId t) const = 0;
    virtual double stretch_bound() const = 0;
    virtual std::span<const double> value_set() const = 0;  // ascending, finite
    virtual EstimatorConfig config() const = 0;
    virtual std::size_t num_nodes() const = 0;
};

// Smallest power of two >= d; 0 stays 0.
inline double snap_up_pow2(double d) {
    if (d == 0.0 || !std::isfinite(d)) {
        return d;
    }
    int e = 0;
    double m = std::frexp(d, &e);  // d = m * 2^e, m in [0.5, 1)
    return m == 0.5 ? d : std::ldexp(1.0, e);
}

/*
 * Estimator backed by a dense per-pair table of indices into its value set.
 */
class TableEstimator final : public CoarseEstimator {
public:
    static constexpr std::uint16_t kUnreachable = 0xffff;

    TableEstimator(std::size_t n, std::vector<double> value_set, std::vector<std::uint16_t> table, double stretch,
                   EstimatorConfig config)
        : n_(n), values_(std::move(value_set)), table_(std::move(table)), stretch_(stretch), config_(config) {
        if (table_.size() != n_ * n_) {
            throw std::invalid_argument("estimator: table size mismatch");
        }
        if (values_.size() >= kUnreachable) {
            throw std::invalid_argument("estimator: value set too large");
        }
        if (!std::is_sorted(values_.begin(), values_.end()) ||
            std::adjacent_find(values_.begin(), values_.end()) != values_.end()) {
            throw std::invalid_argument("estimator: value set must be strictly ascending");
        }
        for (auto idx : table_) {
            if (idx != kUnreachable && idx >= values_.size()) {
                throw std::invalid_argument("estimator: table index out of range");
            }
        }
    }

    double estimate(NodeId s, NodeId t) const override {
        auto idx = table_[static_cast<std::size_t>(s) * n_ + t];
        return idx == kUnreachable ? kInfinity : values_[idx];
    }
    double stretch_bound() const override { return stretch_; }
    std::span<const double> value_set() const override { return values_; }
    EstimatorConfig config() const override { return config_; }
    std::size_t num_nodes() const override { return n_; }

    const std::vector<std::uint16_t>& table() const { return table_; }

private:
    std::size_t n_;
    std::vector<double> values_;
    std::vector<std::uint16_t> table_;
    double stretch_;
    EstimatorConfig config_;
};

namespace detail {

// Powers of two covering [lo, hi] (both positive), plus 0.
inline std::vector<double> pow2_ladder(double lo, double hi) {
    std::vector<double> out{0.0};
    if (!(lo > 0.0)) {
        return out;
    }
    for (double v = snap_up_pow2(lo); v <= snap_up_pow2(hi); v *= 2.0) {
        out.push_back(v);
    }
    return out;
}

inline std::uint16_t index_in(const std::vector<double>& values, double v) {
    auto it = std::lower_bound(values.begin(), values.end(), v);
    return static_cast<std::uint16_t>(it - values.begin());
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/*
 * Desk-scale stand-in: estimate(s, t) is dist(s, t) rounded up to a power of
 * two. Stretch 2; the value set is {0} plus the powers of two between the
 * smallest nonzero distance and the diameter.
 */
inline std::shared_ptr<TableEstimator> snap_estimator(const ExactOracle& exact) {
    const auto n = exact.num_nodes();
    double lo = kInfinity;
    double hi = 0.0;
    for (NodeId s = 0; s < n; ++s) {
        for (double d : exact.row(s)) {
            if (std::isfinite(d) && d > 0.0) {
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
        }
    }
    auto values = detail::pow2_ladder(lo, hi);
    std::vector<std::uint16_t> table(n * n, TableEstimator::kUnreachable);
    for (NodeId s = 0; s < n; ++s) {
        for (NodeId t = 0; t < n; ++t) {
            // Snap the smaller-id row's value so rounding asymmetry cannot split a pair.
            double d = s <= t ? exact(s, t) : exact(t, s);
            if (std::isfinite(d)) {
                table[static_cast<std::size_t>(s) * n + t] = detail::index_in(values, snap_up_pow2(d));
            }
        }
    }
    return std::make_shared<TableEstimator>(n, std::move(values), std::move(table), 2.0,
                                            EstimatorConfig{EstimatorKind::snap, 1.0, 0});
}

/*
 * Inflates a base estimator by a deterministic per-pair factor in [1, alpha]
 * and rounds up to a power of two. Stretch becomes 2 * alpha * base stretch.
 * Configuration requires alpha * (base stretch) <= 128 k.
 */
inline std::shared_ptr<TableEstimator> stretch_injector(const CoarseEstimator& base, double alpha, std::uint64_t seed,
                                                        int k) {
    if (!(alpha >= 1.0) || !std::isfinite(alpha)) {
        throw std::invalid_argument("stretch_injector: alpha must be >= 1");
    }
    if (alpha * base.stretch_bound() > 128.0 * k) {
        throw std::invalid_argument("stretch_injector: alpha * base stretch exceeds 128k");
    }
    const auto n = base.num_nodes();
    auto base_values = base.value_set();
    double lo = kInfinity;
    double hi = 0.0;
    for (double v : base_values) {
        if (v > 0.0) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    auto values = detail::pow2_ladder(lo, hi * alpha);
    std::vector<std::uint16_t> table(n * n, TableEstimator::kUnreachable);
    for (NodeId s = 0; s < n; ++s) {
        for (NodeId t = 0; t < n; ++t) {
            double b = base.estimate(std::min(s, t), std::max(s, t));
            if (!std::isfinite(b)) {
                continue;
            }
            auto key = (static_cast<std::uint64_t>(std::min(s, t)) << 32) | std::max(s, t);
            double u = static_cast<double>(detail::splitmix64(seed ^ detail::splitmix64(key)) >> 11) * 0x1.0p-53;
            double factor = 1.0 + (alpha - 1.0) * u;
            table[static_cast<std::size_t>(s) * n + t] = detail::index_in(values, snap_up_pow2(b * factor));
        }
    }
    return std::make_shared<TableEstimator>(n, std::move(values), std::move(table),
                                            2.0 * alpha * base.stretch_bound(),
                                            EstimatorConfig{EstimatorKind::inject, alpha, seed});
}

}  // namespace cqdo

#endif  // CQDO_ESTIMATOR_HPP
