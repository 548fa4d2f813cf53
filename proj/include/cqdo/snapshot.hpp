#ifndef CQDO_SNAPSHOT_HPP
#define CQDO_SNAPSHOT_HPP

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "cqdo/oracle.hpp"

namespace cqdo {

class SnapshotError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/*
 * Binary oracle snapshot. All integers little-endian with explicit widths,
 * reals as IEEE-754 binary64 bit patterns.
 *
 *   magic "CQDOSNAP", version u8
 *   k u32, n u32, level seed u64
 *   query params: window_floor i32, threshold_divisor f64, loop_b_cap i32, loop_c_cap i32
 *   estimator: kind u8, alpha f64, seed u64, stretch f64,
 *              value count u32, values f64[], table u16[n*n]
 *   levels u8[n]
 *   pivots: per node, per level 0..k-1: id u32, dist f64
 *   bunches: per node: count u32, then (id u32, dist f64) ascending by id
 *   derived: per node, per level: delta f64, max_delta f64, argmax u8; complete u8[n]
 *            x-index flag u8, then per node, per even level: x1 x2 x3 saturated u8
 *            D count u32 + f64[], Dt count u32 + f64[]
 *            per node: L_u count u8, then (position u32, even_hi i8, even_lo i8)[]
 *
 * Loading checks structure and internal consistency, recomputes every derived
 * table from (levels, pivots, bunches, estimator values) and requires an exact
 * match with the stored copy. Agreement with the graph is the audit's job.
 */
inline constexpr std::array<char, 8> kSnapshotMagic{'C', 'Q', 'D', 'O', 'S', 'N', 'A', 'P'};
inline constexpr std::uint8_t kSnapshotVersion = 1;

namespace detail {

class ByteWriter {
public:
    void raw(const void* p, std::size_t len) {
        auto b = static_cast<const unsigned char*>(p);
        bytes_.insert(bytes_.end(), b, b + len);
    }
    template <class T>
    void le(T v) {
        using U = std::make_unsigned_t<T>;
        auto u = static_cast<U>(v);
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            bytes_.push_back(static_cast<unsigned char>(u >> (8 * i)));
        }
    }
    void u8(std::uint8_t v) { le(v); }
    void i8(std::int8_t v) { le(v); }
    void u16(std::uint16_t v) { le(v); }
    void u32(std::uint32_t v) { le(v); }
    void i32(std::int32_t v) { le(v); }
    void u64(std::uint64_t v) { le(v); }
    void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }

    std::string str() const { return {bytes_.begin(), bytes_.end()}; }

private:
    std::vector<unsigned char> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(const std::string& bytes) : bytes_(bytes) {}

    void raw(void* out, std::size_t len) {
        need(len);
        std::memcpy(out, bytes_.data() + pos_, len);
        pos_ += len;
    }
    template <class T>
    T le() {
        using U = std::make_unsigned_t<T>;
        need(sizeof(T));
        U u = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            u |= static_cast<U>(static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i));
        }
        pos_ += sizeof(T);
        return static_cast<T>(u);
    }
    std::uint8_t u8() { return le<std::uint8_t>(); }
    std::int8_t i8() { return le<std::int8_t>(); }
    std::uint16_t u16() { return le<std::uint16_t>(); }
    std::uint32_t u32() { return le<std::uint32_t>(); }
    std::int32_t i32() { return le<std::int32_t>(); }
    std::uint64_t u64() { return le<std::uint64_t>(); }
    double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }

    bool at_end() const { return pos_ == bytes_.size(); }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t len) const {
        if (bytes_.size() - pos_ < len) {
            throw SnapshotError("snapshot: truncated");
        }
    }

    const std::string& bytes_;
    std::size_t pos_ = 0;
};

inline void require(bool ok, const char* what) {
    if (!ok) {
        throw SnapshotError(std::string("snapshot: ") + what);
    }
}

inline void write_derived(ByteWriter& w, const Oracle& o) {
    const auto n = o.num_nodes();
    for (NodeId v = 0; v < n; ++v) {
        for (int j = 0; j < o.k; ++j) {
            w.f64(o.deltas.delta(v, j));
            w.f64(o.deltas.max_delta(v, j));
            w.u8(static_cast<std::uint8_t>(o.deltas.argmax(v, j)));
        }
    }
    for (NodeId v = 0; v < n; ++v) {
        w.u8(o.deltas.complete(v) ? 1 : 0);
    }
    w.u8(o.xindex ? 1 : 0);
    if (o.xindex) {
        for (NodeId v = 0; v < n; ++v) {
            for (int i = 2; i <= o.k - 1; i += 2) {
                const auto& x = o.xindex->at(v, i);
                w.u8(x.x1);
                w.u8(x.x2);
                w.u8(x.x3);
                w.u8(x.x3_saturated ? 1 : 0);
            }
        }
    }
    for (const auto* vals : {&o.scale.values(), &o.scale.filtered()}) {
        w.u32(static_cast<std::uint32_t>(vals->size()));
        for (double d : *vals) {
            w.f64(d);
        }
    }
    for (NodeId v = 0; v < n; ++v) {
        const auto& ns = o.node_scales[v];
        w.u8(static_cast<std::uint8_t>(ns.list.size()));
        for (std::size_t slot = 0; slot < ns.list.size(); ++slot) {
            w.u32(ns.list[slot]);
            w.i8(ns.even_hi[slot]);
            w.i8(ns.even_lo[slot]);
        }
    }
}

}  // namespace detail

inline std::string serialize(const Oracle& o) {
    auto est = std::dynamic_pointer_cast<const TableEstimator>(o.estimator);
    if (!est) {
        throw std::invalid_argument("snapshot: only table-backed estimators can be saved");
    }
    const auto n = o.num_nodes();
    detail::ByteWriter w;
    w.raw(kSnapshotMagic.data(), kSnapshotMagic.size());
    w.u8(kSnapshotVersion);
    w.u32(static_cast<std::uint32_t>(o.k));
    w.u32(static_cast<std::uint32_t>(n));
    w.u64(o.levels.seed);

    w.i32(o.params.window_floor);
    w.f64(o.params.threshold_divisor);
    w.i32(o.params.loop_b_cap);
    w.i32(o.params.loop_c_cap);

    auto cfg = est->config();
    w.u8(static_cast<std::uint8_t>(cfg.kind));
    w.f64(cfg.alpha);
    w.u64(cfg.seed);
    w.f64(est->stretch_bound());
    auto values = est->value_set();
    w.u32(static_cast<std::uint32_t>(values.size()));
    for (double v : values) {
        w.f64(v);
    }
    for (auto idx : est->table()) {
        w.u16(idx);
    }

    for (NodeId v = 0; v < n; ++v) {
        w.u8(o.levels.level[v]);
    }
    for (NodeId v = 0; v < n; ++v) {
        for (int i = 0; i < o.k; ++i) {
            w.u32(o.pivots.pivot(v, i));
            w.f64(o.pivots.dist(v, i));
        }
    }
    for (NodeId v = 0; v < n; ++v) {
        auto bunch = o.bunches.sorted_bunch(v);
        w.u32(static_cast<std::uint32_t>(bunch.size()));
        for (const auto& [u, d] : bunch) {
            w.u32(u);
            w.f64(d);
        }
    }
    detail::write_derived(w, o);
    return w.str();
}

inline Oracle deserialize(const std::string& bytes) {
    using detail::require;
    detail::ByteReader r(bytes);
    std::array<char, 8> magic{};
    r.raw(magic.data(), magic.size());
    require(magic == kSnapshotMagic, "bad magic");
    require(r.u8() == kSnapshotVersion, "unsupported version");

    Oracle o;
    o.k = static_cast<int>(r.u32());
    const std::size_t n = r.u32();
    require(o.k >= 2 && o.k <= kMaxLevels, "k out of range");
    require(n >= 1, "empty graph");
    const auto seed = r.u64();

    o.params.window_floor = r.i32();
    o.params.threshold_divisor = r.f64();
    o.params.loop_b_cap = r.i32();
    o.params.loop_c_cap = r.i32();
    require(o.params.window_floor < 2 && o.params.threshold_divisor > 0 && o.params.loop_b_cap >= 0 &&
                o.params.loop_c_cap >= 0,
            "bad query parameters");

    EstimatorConfig cfg;
    auto kind = r.u8();
    require(kind <= static_cast<std::uint8_t>(EstimatorKind::custom), "bad estimator kind");
    cfg.kind = static_cast<EstimatorKind>(kind);
    cfg.alpha = r.f64();
    cfg.seed = r.u64();
    const double stretch = r.f64();
    require(std::isfinite(stretch) && stretch >= 1.0, "bad estimator stretch");
    std::vector<double> values(r.u32());
    for (auto& v : values) {
        v = r.f64();
        require(std::isfinite(v) && v >= 0.0, "bad estimator value");
    }
    require(r.remaining() / 2 >= n * n, "truncated");
    std::vector<std::uint16_t> table(n * n);
    for (auto& idx : table) {
        idx = r.u16();
    }
    try {
        o.estimator = std::make_shared<TableEstimator>(n, std::move(values), std::move(table), stretch, cfg);
    } catch (const std::invalid_argument& e) {
        throw SnapshotError(std::string("snapshot: ") + e.what());
    }

    std::vector<std::uint8_t> node_levels(n);
    for (auto& l : node_levels) {
        l = r.u8();
        require(l < o.k, "level out of range");
    }
    try {
        o.levels = levels_from_node_levels(o.k, node_levels);
    } catch (const std::invalid_argument& e) {
        throw SnapshotError(std::string("snapshot: ") + e.what());
    }
    o.levels.seed = seed;

    o.pivots = PivotTable(n, o.k);
    for (NodeId v = 0; v < n; ++v) {
        double prev = 0.0;
        for (int i = 0; i < o.k; ++i) {
            NodeId p = r.u32();
            double d = r.f64();
            if (p == kNoNode) {
                require(std::isinf(d), "missing pivot with finite distance");
            } else {
                require(p < n && o.levels.in_level(p, i), "pivot outside its level");
                require(std::isfinite(d), "pivot with infinite distance");
            }
            require(d >= prev && !std::isnan(d), "pivot distances not monotone");
            if (i == 0) {
                require(p == v && d == 0.0, "level-0 pivot must be the node itself");
            }
            prev = d;
            o.pivots.set(v, i, p, d);
        }
    }

    o.bunches = BunchSet(n);
    for (NodeId v = 0; v < n; ++v) {
        const std::uint32_t count = r.u32();
        require(count >= 1 && count <= n, "bad bunch size");
        NodeId prev = 0;
        for (std::uint32_t e = 0; e < count; ++e) {
            NodeId u = r.u32();
            double d = r.f64();
            require(u < n && (e == 0 || u > prev), "bunch ids not ascending");
            require(std::isfinite(d) && d >= 0.0, "bad bunch distance");
            require(d < o.pivots.dist(v, o.levels.level[u] + 1), "bunch member beyond its pivot radius");
            o.bunches.insert(v, u, d);
            prev = u;
        }
        require(o.bunches.distance(v, v) == 0.0, "node missing from its own bunch");
    }

    // Stored derived tables, compared bytewise against a fresh computation.
    const std::size_t derived_begin = bytes.size() - r.remaining();
    build_derived_tables(o);
    detail::ByteWriter fresh;
    detail::write_derived(fresh, o);
    const auto expect = fresh.str();
    require(r.remaining() == expect.size(), "derived tables have the wrong size");
    require(bytes.compare(derived_begin, expect.size(), expect) == 0, "derived tables do not match recomputation");
    return o;
}

inline void save_snapshot(const Oracle& o, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    auto bytes = serialize(o);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("write failed: " + path);
    }
}

inline Oracle load_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

}  // namespace cqdo

#endif  // CQDO_SNAPSHOT_HPP
