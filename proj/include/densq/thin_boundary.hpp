#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "densq/error.hpp"
#include "densq/measure.hpp"

namespace densq {

inline std::vector<double> default_lambda_grid() {
    std::vector<double> out;
    for (int j = 0; j <= 10; ++j) out.push_back(std::ldexp(1.0, -j));
    return out;
}

struct ThinBoundary {
    double radius = 0.0;
    /// max over lambda of annulus mass / (t * lambda * mu(B(x, 2r'))); <= 1 means thin.
    double worst_ratio = 0.0;
    std::size_t candidate = 0;
};

/// Mass of {y in B(x, 2r') : dist(y, dB(x, r')) <= lambda r'}.
inline double boundary_layer_mass(const BallIndex& index, std::span<const double> x, double rp, double lambda) {
    const double outer = std::min((1.0 + lambda) * rp, 2.0 * rp);
    const double inner = std::max(0.0, (1.0 - lambda) * rp);
    const double in = inner > 0.0 ? index.mass_in_open_ball(x, inner) : 0.0;
    return std::max(0.0, index.mass_in_ball(x, outer) - in);
}

/// Searches r' in [r, 2r] (64 equispaced candidates, first admissible wins)
/// such that B(x, r') has t-thin boundary at every lambda in the grid.
/// Throws NotFound carrying the least-violating candidate otherwise.
inline ThinBoundary find_thin_boundary_radius(const BallIndex& index, std::span<const double> x, double r,
                                              double t_thin = 0.0, std::span<const double> lambda_grid = {}) {
    if (!(r > 0.0)) throw DomainError("radius must be positive");
    if (t_thin == 0.0) t_thin = 32.0 * static_cast<double>(index.measure().dim());
    if (!(t_thin > 0.0)) throw DomainError("t_thin must be positive");
    std::vector<double> lambdas(lambda_grid.begin(), lambda_grid.end());
    if (lambdas.empty()) lambdas = default_lambda_grid();
    for (double l : lambdas)
        if (!(l > 0.0) || !(l <= 1.0)) throw DomainError("lambda values must lie in (0, 1]");
    if (!(index.mass_in_ball(x, 4.0 * r) > 0.0)) throw DegenerateBall("B(x, 4r) carries no mass");

    constexpr std::size_t kCandidates = 64;
    ThinBoundary best{r, std::numeric_limits<double>::infinity(), 0};
    for (std::size_t k = 0; k < kCandidates; ++k) {
        const double rp = r + r * static_cast<double>(k) / static_cast<double>(kCandidates - 1);
        const double big = index.mass_in_ball(x, 2.0 * rp);
        double worst = 0.0;
        for (double l : lambdas) {
            const double layer = boundary_layer_mass(index, x, rp, l);
            if (layer == 0.0) continue;
            worst = std::max(worst, big > 0.0 ? layer / (t_thin * l * big) : std::numeric_limits<double>::infinity());
        }
        if (worst <= 1.0) return {rp, worst, k};
        if (worst < best.worst_ratio) best = {rp, worst, k};
    }
    throw NotFound("no candidate radius in [r, 2r] has a thin boundary", best.radius, best.worst_ratio);
}

} // namespace densq
