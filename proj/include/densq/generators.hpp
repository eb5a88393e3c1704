#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "densq/error.hpp"
#include "densq/measure.hpp"

namespace densq {

inline constexpr std::size_t kDefaultPointBudget = 4'000'000;

namespace detail {

inline std::size_t checked_power(std::size_t base, std::size_t exp, std::size_t budget) {
    std::size_t out = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (out > budget / base) return budget + 1;
        out *= base;
    }
    return out;
}

inline std::size_t integer_root(std::size_t value, std::size_t dim) {
    auto m = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(value), 1.0 / static_cast<double>(dim))));
    for (std::size_t cand : {m - 1, m, m + 1}) {
        if (cand < 1) continue;
        std::size_t p = 1;
        for (std::size_t i = 0; i < dim; ++i) p *= cand;
        if (p == value) return cand;
    }
    return 0;
}

} // namespace detail

/// Contraction ratio of the self-similar Cantor construction with `branching`
/// pieces of dimension s: branching * ratio^s = 1.
inline double cantor_ratio(std::size_t branching, double s) {
    return std::pow(static_cast<double>(branching), -1.0 / s);
}

/// Generation-`depth` cell centers of the corner Cantor set in [0,1]^dim.
///
/// Each cell of side l is replaced by m^dim sub-cells of side ratio*l
/// (m = branching^(1/dim)), spread from corner to corner of the parent. All
/// atoms carry weight branching^-depth, so the total mass is 1 and every
/// generation-k cell has the same s-density.
inline WeightedPointMeasure build_cantor(std::size_t dim, double s, std::size_t depth, std::size_t branching = 0,
                                         std::size_t budget = kDefaultPointBudget) {
    if (dim == 0) throw DomainError("cantor: dim must be positive");
    if (branching == 0) branching = std::size_t{1} << dim;
    const std::size_t per_axis = detail::integer_root(branching, dim);
    if (per_axis < 2) throw DomainError("cantor: branching must be m^dim with m >= 2");
    if (!(s > 0.0) || !(s < static_cast<double>(dim)))
        throw DomainError("cantor: s must lie in (0, dim), got " + std::to_string(s));
    const double ratio = cantor_ratio(branching, s);
    if (!(ratio < 1.0 / static_cast<double>(per_axis)))
        throw DomainError("cantor: invalid dimension, contraction ratio " + std::to_string(ratio) +
                          " leaves no gap between sub-cells (need ratio < 1/" + std::to_string(per_axis) + ")");
    const std::size_t n = detail::checked_power(branching, depth, budget);
    if (n > budget) throw BudgetExceeded(n, budget);

    std::vector<double> centers(dim, 0.5);
    double side = 1.0;
    for (std::size_t level = 0; level < depth; ++level) {
        const std::size_t cells = centers.size() / dim;
        std::vector<double> next;
        next.reserve(centers.size() * branching);
        const double step = per_axis > 1 ? (1.0 - ratio) / static_cast<double>(per_axis - 1) : 0.0;
        for (std::size_t c = 0; c < cells; ++c) {
            for (std::size_t child = 0; child < branching; ++child) {
                std::size_t code = child;
                for (std::size_t k = 0; k < dim; ++k) {
                    const std::size_t digit = code % per_axis;
                    code /= per_axis;
                    const double offset = side * ((ratio - 1.0) / 2.0 + static_cast<double>(digit) * step);
                    next.push_back(centers[c * dim + k] + offset);
                }
            }
        }
        centers = std::move(next);
        side *= ratio;
    }
    double w = 1.0;
    for (std::size_t level = 0; level < depth; ++level) w /= static_cast<double>(branching);
    std::vector<double> weights(n, w);
    // Atoms stand for cells of side ratio^depth; their resolution is the
    // spacing of sibling centres one generation further down.
    const double resolution = depth == 0 ? 0.0 : std::pow(ratio, static_cast<double>(depth)) * (1.0 - ratio);
    return WeightedPointMeasure(dim, std::move(centers), std::move(weights), resolution);
}

/// Regular lattice of spacing h on the coordinate k-plane through the origin,
/// |x_j| <= half_extent for j < k, each atom weighted h^k. Optional jitter
/// displaces in-plane coordinates uniformly by up to jitter*h/2.
inline WeightedPointMeasure build_flat(std::size_t dim, std::size_t k, double half_extent, double spacing,
                                       double jitter = 0.0, std::uint64_t seed = 0,
                                       std::size_t budget = kDefaultPointBudget) {
    if (k < 1 || k >= dim) throw DomainError("flat: need 1 <= k < dim");
    if (!(half_extent > 0.0) || !(spacing > 0.0)) throw DomainError("flat: half_extent and spacing must be positive");
    if (jitter < 0.0 || jitter >= 1.0) throw DomainError("flat: jitter must lie in [0, 1)");
    const double per_side = half_extent / spacing;
    if (per_side > std::pow(static_cast<double>(budget), 1.0 / static_cast<double>(k)))
        throw BudgetExceeded(static_cast<std::size_t>(std::min(std::pow(2.0 * per_side + 1.0, static_cast<double>(k)), 1e18)),
                             budget);
    const auto n = static_cast<std::int64_t>(std::floor(per_side + 1e-9));
    const auto side = static_cast<std::size_t>(2 * n + 1);
    const std::size_t total = detail::checked_power(side, k, budget);
    if (total > budget) throw BudgetExceeded(total, budget);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    std::vector<double> coords;
    coords.reserve(total * dim);
    std::vector<std::int64_t> idx(k, -n);
    for (std::size_t t = 0; t < total; ++t) {
        for (std::size_t j = 0; j < dim; ++j) {
            double v = 0.0;
            if (j < k) {
                v = static_cast<double>(idx[j]) * spacing;
                if (jitter > 0.0) v += jitter * spacing * unif(rng);
            }
            coords.push_back(v);
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (++idx[j] <= n) break;
            idx[j] = -n;
        }
    }
    const double w = std::pow(spacing, static_cast<double>(k));
    return WeightedPointMeasure(dim, std::move(coords), std::vector<double>(total, w));
}

inline WeightedPointMeasure build_dirac(std::size_t dim, std::span<const double> location = {}, double mass = 1.0) {
    if (dim == 0) throw DomainError("dirac: dim must be positive");
    if (!(mass > 0.0)) throw DomainError("dirac: mass must be positive");
    std::vector<double> c(dim, 0.0);
    if (!location.empty()) {
        if (location.size() != dim) throw DomainError("dirac: location has wrong dimension");
        c.assign(location.begin(), location.end());
    }
    return WeightedPointMeasure(dim, std::move(c), {mass});
}

namespace detail {

// Segment a->b cut into ceil(len/spacing) equal pieces, one atom at the
// middle of each piece carrying piece_length * density.
inline void sample_segment(std::span<const double> a, std::span<const double> b, double spacing, double density,
                           std::vector<double>& coords, std::vector<double>& weights) {
    const std::size_t dim = a.size();
    double len2 = 0.0;
    for (std::size_t k = 0; k < dim; ++k) len2 += (b[k] - a[k]) * (b[k] - a[k]);
    const double len = std::sqrt(len2);
    if (len == 0.0) return;
    const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(len / spacing - 1e-9)));
    const double step = len / static_cast<double>(pieces);
    for (std::size_t p = 0; p < pieces; ++p) {
        const double t = (static_cast<double>(p) + 0.5) / static_cast<double>(pieces);
        for (std::size_t k = 0; k < dim; ++k) coords.push_back(a[k] + t * (b[k] - a[k]));
        weights.push_back(step * density);
    }
}

} // namespace detail

/// Arc-length sampling of a polyline; `densities` (one per segment, default 1)
/// scales the length measure on each segment.
inline WeightedPointMeasure build_polyline(std::size_t dim, std::span<const double> vertices, double spacing,
                                           std::span<const double> densities = {},
                                           std::size_t budget = kDefaultPointBudget) {
    if (dim == 0 || vertices.size() % dim != 0 || vertices.size() < 2 * dim)
        throw DomainError("polyline: need at least two vertices of dimension dim");
    if (!(spacing > 0.0)) throw DomainError("polyline: spacing must be positive");
    const std::size_t segs = vertices.size() / dim - 1;
    if (!densities.empty() && densities.size() != segs) throw DomainError("polyline: one density per segment");
    double arc = 0.0;
    for (std::size_t s = 0; s < segs; ++s)
        arc += std::sqrt(squared_distance(vertices.subspan(s * dim, dim), vertices.subspan((s + 1) * dim, dim)));
    const double estimate = arc / spacing + static_cast<double>(segs);
    if (estimate > static_cast<double>(budget)) throw BudgetExceeded(static_cast<std::size_t>(estimate), budget);
    std::vector<double> coords;
    std::vector<double> weights;
    for (std::size_t s = 0; s < segs; ++s) {
        const double rho = densities.empty() ? 1.0 : densities[s];
        if (!(rho > 0.0)) throw DomainError("polyline: densities must be positive");
        detail::sample_segment(vertices.subspan(s * dim, dim), vertices.subspan((s + 1) * dim, dim), spacing, rho,
                               coords, weights);
    }
    return WeightedPointMeasure(dim, std::move(coords), std::move(weights));
}

enum class CurveWeighting { hausdorff, mu_alpha };

/// Height of the tent of Gamma_alpha at x (0 outside [-1/2, 1/2]).
inline double gamma_profile(double alpha, double x) {
    if (x <= -0.5 || x >= 0.5) return 0.0;
    return x <= 0.0 ? std::tan(alpha) * (x + 0.5) : -std::tan(alpha) * (x - 0.5);
}

/// Samples of the graph Gamma_alpha of the tent function (slopes +-tan(alpha)
/// on [-1/2, 1/2], zero elsewhere) for |x| <= half_extent.
///
/// The flat pieces are sampled outward from the tent corners with exact step
/// `spacing`, so enlarging half_extent only appends atoms far from the tent.
/// The two tent edges use the largest step <= spacing that divides them.
/// `hausdorff` weights by arc length; `mu_alpha` additionally multiplies tent
/// atoms by cos(alpha), which makes the projection to the x-axis uniform.
inline WeightedPointMeasure build_gamma_curve(double alpha, double half_extent, double spacing,
                                              CurveWeighting weighting = CurveWeighting::hausdorff,
                                              std::size_t budget = kDefaultPointBudget) {
    if (!(alpha > 0.0) || !(alpha <= std::numbers::pi / 4.0))
        throw DomainError("gamma_curve: alpha must lie in (0, pi/4]");
    if (!(half_extent >= 1.0)) throw DomainError("gamma_curve: half_extent must be >= 1");
    if (!(spacing > 0.0) || !(spacing <= 1.0 / 16.0)) throw DomainError("gamma_curve: spacing must lie in (0, 1/16]");
    const auto flat = static_cast<std::size_t>(std::llround((half_extent - 0.5) / spacing));
    const double tent_len = 0.5 / std::cos(alpha);
    const auto tent = static_cast<std::size_t>(std::ceil(tent_len / spacing - 1e-9));
    const std::size_t n = 2 * flat + 2 * tent;
    if (n > budget) throw BudgetExceeded(n, budget);

    std::vector<double> coords;
    std::vector<double> weights;
    coords.reserve(2 * n);
    weights.reserve(n);
    for (std::size_t k = flat; k-- > 0;) {
        coords.push_back(-0.5 - (static_cast<double>(k) + 0.5) * spacing);
        coords.push_back(0.0);
        weights.push_back(spacing);
    }
    const double apex = 0.5 * std::tan(alpha);
    const double step = tent_len / static_cast<double>(tent);
    const double tent_weight = weighting == CurveWeighting::mu_alpha ? step * std::cos(alpha) : step;
    for (std::size_t k = 0; k < tent; ++k) {
        const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(tent);
        coords.push_back(-0.5 + 0.5 * t);
        coords.push_back(apex * t);
        weights.push_back(tent_weight);
    }
    for (std::size_t k = 0; k < tent; ++k) {
        const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(tent);
        coords.push_back(0.5 * t);
        coords.push_back(apex * (1.0 - t));
        weights.push_back(tent_weight);
    }
    for (std::size_t k = 0; k < flat; ++k) {
        coords.push_back(0.5 + (static_cast<double>(k) + 0.5) * spacing);
        coords.push_back(0.0);
        weights.push_back(spacing);
    }
    return WeightedPointMeasure(2, std::move(coords), std::move(weights));
}

} // namespace densq
