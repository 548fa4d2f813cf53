#ifndef CQDO_SCALE_INDEX_HPP
#define CQDO_SCALE_INDEX_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cqdo/thorup_zwick.hpp"

namespace cqdo {

struct OffsetValue {
    double value;
    bool clamped;
};

/*
 * Global distance scale.
 *
 * D is every candidate distance (bunch distances, pivot distances at levels
 * 1..k-1, and the coarse estimator's output values). The filtered scale Dt
 * keeps, scanning D downward, each x whose predecessor in Dt exceeds 2x.
 * up(d) for d in D is the smallest Dt value >= d, and d <= up(d) <= 2d.
 */
class GlobalScale {
public:
    GlobalScale() = default;

    const std::vector<double>& values() const { return all_; }
    const std::vector<double>& filtered() const { return filtered_; }
    std::size_t size() const { return filtered_.size(); }
    double at(std::size_t j) const { return filtered_[j]; }

    std::optional<std::uint32_t> index_of(double dt) const {
        if (auto it = filtered_index_.find(key(dt)); it != filtered_index_.end()) {
            return it->second;
        }
        return std::nullopt;
    }

    std::optional<std::uint32_t> up_index(double d) const {
        if (auto it = up_.find(key(d)); it != up_.end()) {
            return it->second;
        }
        return std::nullopt;
    }

    // D̃(d); only defined for d in D.
    double up(double d) const {
        auto j = up_index(d);
        if (!j) {
            throw std::out_of_range("scale: value is not in D");
        }
        return filtered_[*j];
    }

    // The offset-th element after position j, clamped to the ends.
    OffsetValue offset_at(std::uint32_t j, int offset) const {
        auto [pos, clamped] = clamp_position(static_cast<long long>(j) + offset);
        return {filtered_[pos], clamped};
    }

    std::pair<std::uint32_t, bool> clamp_position(long long p) const {
        const long long last = static_cast<long long>(filtered_.size()) - 1;
        if (p < 0) {
            return {0u, true};
        }
        if (p > last) {
            return {static_cast<std::uint32_t>(last), true};
        }
        return {static_cast<std::uint32_t>(p), false};
    }

    double offset(double dt, int offset) const {
        auto j = index_of(dt);
        if (!j) {
            throw std::out_of_range("scale: value is not in the filtered scale");
        }
        return offset_at(*j, offset).value;
    }

    static GlobalScale build(std::vector<double> candidates);

    // Rebuild from serialized arrays; the filter and up map are recomputed.
    static GlobalScale from_values(std::vector<double> all) { return build(std::move(all)); }

private:
    static double key(double d) { return d == 0.0 ? 0.0 : d; }  // folds -0.0

    std::vector<double> all_;
    std::vector<double> filtered_;
    std::unordered_map<double, std::uint32_t> filtered_index_;
    std::unordered_map<double, std::uint32_t> up_;
};

inline GlobalScale GlobalScale::build(std::vector<double> candidates) {
    GlobalScale s;
    for (auto& d : candidates) {
        if (std::isnan(d) || d < 0.0) {
            throw std::invalid_argument("scale: candidate distances must be non-negative");
        }
        d = key(d);
    }
    std::erase_if(candidates, [](double d) { return !std::isfinite(d); });
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    s.all_ = std::move(candidates);

    for (auto it = s.all_.rbegin(); it != s.all_.rend(); ++it) {
        if (s.filtered_.empty() || s.filtered_.back() > 2.0 * *it) {
            s.filtered_.push_back(*it);
        }
    }
    std::reverse(s.filtered_.begin(), s.filtered_.end());
    for (std::uint32_t j = 0; j < s.filtered_.size(); ++j) {
        s.filtered_index_.emplace(s.filtered_[j], j);
    }

    // Parallel traversal of D and Dt, both ascending.
    std::size_t i = 0;
    for (std::size_t j = 0; j < s.all_.size();) {
        if (s.all_[j] <= s.filtered_[i]) {
            s.up_.emplace(s.all_[j], static_cast<std::uint32_t>(i));
            ++j;
        } else {
            ++i;
        }
    }
    return s;
}

// D_TZ: bunch distances plus pivot distances at levels 1..k-1.
inline std::vector<double> tz_distance_values(const PivotTable& pivots, const BunchSet& bunches) {
    std::vector<double> out;
    for (NodeId v = 0; v < pivots.num_nodes(); ++v) {
        for (const auto& [u, d] : bunches.bunch(v)) {
            out.push_back(d);
        }
        for (int i = 1; i < pivots.k(); ++i) {
            out.push_back(pivots.dist(v, i));
        }
    }
    return out;
}

inline GlobalScale build_global_scale(const BunchSet& bunches, const PivotTable& pivots,
                                      std::span<const double> estimator_values) {
    auto values = tz_distance_values(pivots, bunches);
    values.insert(values.end(), estimator_values.begin(), estimator_values.end());
    return GlobalScale::build(std::move(values));
}

/*
 * Per-node scale lists. L_u holds the distinct values up(pdist(u, i)) for
 * i in 1..k-1 as ascending positions into the filtered scale; H_u maps a
 * filtered-scale position to its slot in L_u. even_hi / even_lo give, per
 * slot, the largest / smallest even level i >= 2 with up(pdist(u, i)) equal
 * to that slot's value, or -1 when only odd levels land there.
 */
struct NodeScale {
    std::vector<std::uint32_t> list;  // positions in the filtered scale
    std::unordered_map<std::uint32_t, std::uint8_t> slot_of;
    std::vector<std::uint8_t> level_slot;  // indexed by level, 0 unused
    std::vector<std::int8_t> even_hi;
    std::vector<std::int8_t> even_lo;

    std::optional<std::uint8_t> find(std::uint32_t scale_pos) const {
        if (auto it = slot_of.find(scale_pos); it != slot_of.end()) {
            return it->second;
        }
        return std::nullopt;
    }

    // Slot position + offset, clamped into the list.
    std::pair<std::size_t, bool> clamp_slot(long long p) const {
        const long long last = static_cast<long long>(list.size()) - 1;
        if (p < 0) {
            return {0, true};
        }
        if (p > last) {
            return {static_cast<std::size_t>(last), true};
        }
        return {static_cast<std::size_t>(p), false};
    }
};

struct EvenRange {
    int hi;
    int lo;

    friend bool operator==(const EvenRange&, const EvenRange&) = default;
};

class NodeScaleTable {
public:
    NodeScaleTable() = default;
    explicit NodeScaleTable(std::vector<NodeScale> scales) : scales_(std::move(scales)) {}

    std::size_t num_nodes() const { return scales_.size(); }
    const NodeScale& operator[](NodeId u) const { return scales_[u]; }

    // L_u[d̃, offset], with the clamp flag.
    OffsetValue offset(const GlobalScale& scale, NodeId u, double dt, int offset) const {
        const auto& ns = scales_[u];
        auto slot = slot_for(scale, u, dt);
        auto [p, clamped] = ns.clamp_slot(static_cast<long long>(slot) + offset);
        return {scale.at(ns.list[p]), clamped};
    }

    std::optional<EvenRange> even_maps(const GlobalScale& scale, NodeId u, double dt) const {
        const auto& ns = scales_[u];
        auto slot = slot_for(scale, u, dt);
        if (ns.even_hi[slot] < 0) {
            return std::nullopt;
        }
        return EvenRange{ns.even_hi[slot], ns.even_lo[slot]};
    }

    std::vector<double> values(const GlobalScale& scale, NodeId u) const {
        std::vector<double> out;
        for (auto p : scales_[u].list) {
            out.push_back(scale.at(p));
        }
        return out;
    }

private:
    std::size_t slot_for(const GlobalScale& scale, NodeId u, double dt) const {
        auto pos = scale.index_of(dt);
        std::optional<std::uint8_t> slot;
        if (pos) {
            slot = scales_[u].find(*pos);
        }
        if (!slot) {
            throw std::out_of_range("node scale: value is not in L_u");
        }
        return *slot;
    }

    std::vector<NodeScale> scales_;
};

inline NodeScaleTable build_node_scales(const PivotTable& pivots, const GlobalScale& scale) {
    const int k = pivots.k();
    std::vector<NodeScale> scales(pivots.num_nodes());
    for (NodeId u = 0; u < pivots.num_nodes(); ++u) {
        auto& ns = scales[u];
        ns.level_slot.assign(static_cast<std::size_t>(k), 0);
        std::vector<std::uint32_t> pos_of_level(static_cast<std::size_t>(k), 0);
        std::vector<bool> defined(static_cast<std::size_t>(k), false);
        for (int i = 1; i < k; ++i) {
            double d = pivots.dist(u, i);
            if (!std::isfinite(d)) {
                continue;
            }
            auto p = scale.up_index(d);
            if (!p) {
                throw std::invalid_argument("node scale: pivot distance missing from D");
            }
            pos_of_level[i] = *p;
            defined[i] = true;
            ns.list.push_back(*p);
        }
        std::sort(ns.list.begin(), ns.list.end());
        ns.list.erase(std::unique(ns.list.begin(), ns.list.end()), ns.list.end());
        ns.even_hi.assign(ns.list.size(), -1);
        ns.even_lo.assign(ns.list.size(), -1);
        for (std::size_t slot = 0; slot < ns.list.size(); ++slot) {
            ns.slot_of.emplace(ns.list[slot], static_cast<std::uint8_t>(slot));
        }
        for (int i = 1; i < k; ++i) {
            if (!defined[i]) {
                continue;
            }
            auto slot = ns.slot_of.at(pos_of_level[i]);
            ns.level_slot[i] = slot;
            if (i % 2 == 0) {
                if (ns.even_lo[slot] < 0) {
                    ns.even_lo[slot] = static_cast<std::int8_t>(i);
                }
                ns.even_hi[slot] = static_cast<std::int8_t>(i);
            }
        }
    }
    return NodeScaleTable(std::move(scales));
}

}  // namespace cqdo

#endif  // CQDO_SCALE_INDEX_HPP
