#ifndef CQDO_GENERATORS_HPP
#define CQDO_GENERATORS_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cqdo/graph.hpp"

namespace cqdo {

enum class Family { path, grid, gnp, geometric };

// powers: edge i of a path gets weight base^i (the wide-range path family).
enum class WeightScheme { unit, uniform, log_uniform, powers };

struct GeneratorParams {
    Family family = Family::path;
    std::size_t n = 0;  // ignored for grid
    std::size_t rows = 0;
    std::size_t cols = 0;
    double p = 0.0;       // gnp edge probability
    double radius = 0.0;  // geometric connection radius; 0 picks a default
    std::optional<WeightScheme> weights;  // per-family default when unset
    double w_min = 1.0;
    double w_max = 1.0;
    double base = 4.0;
};

inline std::string_view to_string(Family f) {
    switch (f) {
    case Family::path: return "path";
    case Family::grid: return "grid";
    case Family::gnp: return "gnp";
    case Family::geometric: return "geometric";
    }
    return "?";
}

inline std::string_view to_string(WeightScheme w) {
    switch (w) {
    case WeightScheme::unit: return "unit";
    case WeightScheme::uniform: return "uniform";
    case WeightScheme::log_uniform: return "log";
    case WeightScheme::powers: return "powers";
    }
    return "?";
}

inline Family parse_family(std::string_view s) {
    if (s == "path") return Family::path;
    if (s == "grid") return Family::grid;
    if (s == "gnp") return Family::gnp;
    if (s == "geometric") return Family::geometric;
    throw std::invalid_argument("unknown graph family '" + std::string(s) + "'");
}

inline WeightScheme parse_weight_scheme(std::string_view s) {
    if (s == "unit") return WeightScheme::unit;
    if (s == "uniform") return WeightScheme::uniform;
    if (s == "log") return WeightScheme::log_uniform;
    if (s == "powers") return WeightScheme::powers;
    throw std::invalid_argument("unknown weight scheme '" + std::string(s) + "'");
}

inline WeightScheme default_weights(Family f) {
    switch (f) {
    case Family::path: return WeightScheme::unit;
    case Family::geometric: return WeightScheme::log_uniform;
    default: return WeightScheme::uniform;
    }
}

namespace detail {

class WeightSampler {
public:
    WeightSampler(WeightScheme scheme, double w_min, double w_max, double base, std::mt19937_64& rng)
        : scheme_(scheme), w_min_(w_min), w_max_(w_max), base_(base), rng_(rng),
          integral_(std::floor(w_min) == w_min && std::floor(w_max) == w_max) {}

    double next() {
        switch (scheme_) {
        case WeightScheme::unit:
            return 1.0;
        case WeightScheme::uniform:
            if (integral_ && w_max_ < 9.0e15) {
                std::uniform_int_distribution<std::int64_t> pick(static_cast<std::int64_t>(w_min_),
                                                                 static_cast<std::int64_t>(w_max_));
                return static_cast<double>(pick(rng_));
            } else {
                std::uniform_real_distribution<double> pick(w_min_, w_max_);
                return pick(rng_);
            }
        case WeightScheme::log_uniform: {
            std::uniform_real_distribution<double> pick(std::log(w_min_), std::log(w_max_));
            double w = std::exp(pick(rng_));
            if (integral_) {
                w = std::round(w);
            }
            return std::clamp(w, w_min_, w_max_);
        }
        case WeightScheme::powers:
            return std::pow(base_, static_cast<double>(index_++));
        }
        return 1.0;
    }

private:
    WeightScheme scheme_;
    double w_min_;
    double w_max_;
    double base_;
    std::mt19937_64& rng_;
    bool integral_;
    std::size_t index_ = 0;
};

}  // namespace detail

/*
 * Deterministic graph generators. The same (params, seed) always yields the
 * same graph on a given standard library.
 */
inline Graph generate(const GeneratorParams& params, std::uint64_t seed) {
    const auto scheme = params.weights.value_or(default_weights(params.family));
    if (scheme != WeightScheme::unit && scheme != WeightScheme::powers) {
        if (!(params.w_min >= 0.0) || !(params.w_max >= params.w_min) || !std::isfinite(params.w_max)) {
            throw std::invalid_argument("generate: invalid weight range");
        }
        if (scheme == WeightScheme::log_uniform && !(params.w_min > 0.0)) {
            throw std::invalid_argument("generate: log weights need w_min > 0");
        }
    }
    if (scheme == WeightScheme::powers) {
        if (params.family != Family::path) {
            throw std::invalid_argument("generate: power weights are defined for the path family only");
        }
        if (!(params.base >= 1.0)) {
            throw std::invalid_argument("generate: power base must be >= 1");
        }
    }

    std::mt19937_64 rng(seed);
    detail::WeightSampler weight(scheme, params.w_min, params.w_max, params.base, rng);

    switch (params.family) {
    case Family::path: {
        if (params.n == 0) {
            throw std::invalid_argument("generate: path needs n >= 1");
        }
        GraphBuilder b(params.n);
        for (std::size_t i = 0; i + 1 < params.n; ++i) {
            b.add_edge(static_cast<NodeId>(i), static_cast<NodeId>(i + 1), weight.next());
        }
        return b.build();
    }
    case Family::grid: {
        if (params.rows == 0 || params.cols == 0) {
            throw std::invalid_argument("generate: grid needs rows, cols >= 1");
        }
        GraphBuilder b(params.rows * params.cols);
        auto id = [&](std::size_t r, std::size_t c) { return static_cast<NodeId>(r * params.cols + c); };
        for (std::size_t r = 0; r < params.rows; ++r) {
            for (std::size_t c = 0; c < params.cols; ++c) {
                if (c + 1 < params.cols) {
                    b.add_edge(id(r, c), id(r, c + 1), weight.next());
                }
                if (r + 1 < params.rows) {
                    b.add_edge(id(r, c), id(r + 1, c), weight.next());
                }
            }
        }
        return b.build();
    }
    case Family::gnp: {
        if (params.n == 0 || !(params.p > 0.0 && params.p <= 1.0)) {
            throw std::invalid_argument("generate: gnp needs n >= 1 and p in (0, 1]");
        }
        GraphBuilder b(params.n);
        std::bernoulli_distribution coin(params.p);
        for (std::size_t u = 0; u < params.n; ++u) {
            for (std::size_t v = u + 1; v < params.n; ++v) {
                if (coin(rng)) {
                    b.add_edge(static_cast<NodeId>(u), static_cast<NodeId>(v), weight.next());
                }
            }
        }
        return b.build();
    }
    case Family::geometric: {
        if (params.n == 0 || params.radius < 0.0) {
            throw std::invalid_argument("generate: geometric needs n >= 1 and radius >= 0");
        }
        const double n = static_cast<double>(params.n);
        double radius = params.radius;
        if (radius == 0.0) {
            // Comfortably above the connectivity threshold sqrt(ln n / (pi n)).
            radius = std::min(1.5, 1.5 * std::sqrt(std::log(std::max(n, 2.0)) / (3.141592653589793 * n)));
        }
        std::uniform_real_distribution<double> coord(0.0, 1.0);
        std::vector<std::pair<double, double>> pts(params.n);
        for (auto& [x, y] : pts) {
            x = coord(rng);
            y = coord(rng);
        }
        GraphBuilder b(params.n);
        for (std::size_t u = 0; u < params.n; ++u) {
            for (std::size_t v = u + 1; v < params.n; ++v) {
                double dx = pts[u].first - pts[v].first;
                double dy = pts[u].second - pts[v].second;
                if (dx * dx + dy * dy <= radius * radius) {
                    b.add_edge(static_cast<NodeId>(u), static_cast<NodeId>(v), weight.next());
                }
            }
        }
        return b.build();
    }
    }
    throw std::invalid_argument("generate: unknown family");
}

}  // namespace cqdo

#endif  // CQDO_GENERATORS_HPP
