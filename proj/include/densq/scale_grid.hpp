#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <nlohmann/json.hpp>

#include "densq/error.hpp"
#include "densq/measure.hpp"

namespace densq {

/// Log-spaced radii r_j = r_min * q^j, j = 0..J, with r_J <= r_max.
///
/// Integrals against dr/r are discretized cell by cell: the cell
/// [r_j, r_{j+1}] is sampled at its geometric midpoint sqrt(r_j r_{j+1}) and
/// weighted by ln q. Sampling at the midpoint cancels the first-order error of
/// an endpoint rule for the power laws that dominate these integrands.
class ScaleGrid {
public:
    ScaleGrid(double r_min, double r_max, double q) : r_min_(r_min), r_max_(r_max), q_(q) {
        if (!(r_min > 0.0) || !std::isfinite(r_min)) throw ConfigError("grid.r_min", "must be positive and finite");
        if (!(r_max > r_min) || !std::isfinite(r_max)) throw ConfigError("grid.r_max", "must exceed r_min");
        if (!(q > 1.0) || !(q <= 2.0)) throw ConfigError("grid.q", "must lie in (1, 2]");
        const double slack = 1.0 + 1e-12;
        for (std::size_t j = 0;; ++j) {
            const double r = radius_at(j);
            if (r > r_max * slack) break;
            radii_.push_back(r);
        }
        if (radii_.size() < 2)
            throw ConfigError("grid", "needs at least two radii in [r_min, r_max] (increase r_max or decrease q)");
    }

    /// r_min = 4 * resolution (1 for a single atom), r_max = 8 * support radius
    /// (at least 2 * r_min).
    static ScaleGrid default_for(const WeightedPointMeasure& m, double q = 1.1) {
        double lo = m.resolution() > 0.0 ? 4.0 * m.resolution() : 1.0;
        double hi = std::max(8.0 * m.support_radius(), 2.0 * lo);
        return ScaleGrid(lo, hi, q);
    }

    /// Grid from lo to hi whose ratio is the largest value <= q_target that
    /// puts hi exactly on the grid.
    static ScaleGrid spanning(double lo, double hi, double q_target = 1.1) {
        if (!(lo > 0.0) || !(hi > lo)) throw ConfigError("grid", "need 0 < r_min < r_max");
        if (!(q_target > 1.0)) throw ConfigError("grid.q", "must exceed 1");
        const double span = std::log(hi / lo);
        const double cells = std::max(1.0, std::ceil(span / std::log(q_target) - 1e-9));
        return ScaleGrid(lo, hi, std::exp(span / cells));
    }

    double r_min() const noexcept { return r_min_; }
    double r_max() const noexcept { return r_max_; }
    double q() const noexcept { return q_; }
    double log_step() const noexcept { return std::log(q_); }
    const std::vector<double>& radii() const noexcept { return radii_; }
    /// Number of cells J (one fewer than the number of radii).
    std::size_t cells() const noexcept { return radii_.size() - 1; }
    double radius_at(std::size_t j) const { return r_min_ * std::pow(q_, static_cast<double>(j)); }
    double cell_midpoint(std::size_t j) const { return r_min_ * std::pow(q_, static_cast<double>(j) + 0.5); }

    nlohmann::json to_json() const {
        return {{"r_min", r_min_}, {"r_max", r_max_}, {"q", q_}, {"radii", radii_.size()}};
    }

private:
    double r_min_;
    double r_max_;
    double q_;
    std::vector<double> radii_;
};

} // namespace densq
