#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "densq/error.hpp"
#include "densq/measure.hpp"
#include "densq/multiscale.hpp"
#include "densq/parallel.hpp"
#include "densq/scale_grid.hpp"
#include "densq/summation.hpp"

namespace densq {

struct TruncationPair {
    double eps1 = 0.0;
    double eps2 = 0.0;

    TruncationPair() = default;
    TruncationPair(double a, double b) : eps1(a), eps2(b) {
        if (!(a > 0.0) || !(b > a)) throw DomainError("truncation pair needs 0 < eps1 < eps2");
    }
};

/// K^s(v) = v / |v|^(1+s).
inline std::vector<double> riesz_kernel(std::span<const double> v, double s) {
    const double n2 = squared_norm(v);
    if (n2 == 0.0) throw DomainError("Riesz kernel is singular at the origin");
    const double f = std::pow(n2, -0.5 * (1.0 + s));
    std::vector<double> out(v.begin(), v.end());
    for (double& c : out) c *= f;
    return out;
}

namespace detail {
/// |v|^-(1+s) from |v|^2.
inline double riesz_scale(double d2, double s) {
    return s == 1.0 ? 1.0 / d2 : std::pow(d2, -0.5 * (1.0 + s));
}
} // namespace detail

/// sum of w_i K^s(x_i - x) over eps1 < |x_i - x| <= eps2.
inline std::vector<double> truncated_riesz(const BallIndex& index, std::span<const double> x, const TruncationPair& pair,
                                           double s) {
    const std::size_t dim = index.measure().dim();
    const double lo2 = pair.eps1 * pair.eps1;
    std::vector<CompensatedSum> acc(dim);
    const auto& m = index.measure();
    // visit in ascending atom order so the sum does not depend on the tree layout
    for (std::size_t i : index.atoms_in_ball(x, pair.eps2)) {
        const auto y = m.point(i);
        const double d2 = squared_distance(y, x);
        if (d2 <= lo2) continue;
        const double f = m.weight(i) * detail::riesz_scale(d2, s);
        for (std::size_t k = 0; k < dim; ++k) acc[k].add((y[k] - x[k]) * f);
    }
    std::vector<double> out(dim);
    for (std::size_t k = 0; k < dim; ++k) out[k] = acc[k].value();
    return out;
}

/// int |R^s_{eps1,eps2} mu|^2 dmu, optionally restricted to a window of
/// evaluation points.
inline double riesz_energy(const BallIndex& index, const TruncationPair& pair, double s,
                           const std::optional<AnalysisWindow>& window = std::nullopt) {
    const auto& m = index.measure();
    const auto pts = detail::window_points(m, window);
    const std::size_t n_chunks = chunk_count(pts.size());
    std::vector<CompensatedSum> part(n_chunks);
    parallel_for_chunks(n_chunks, [&](std::size_t c) {
        for (std::size_t t = c * kChunkSize; t < std::min(pts.size(), (c + 1) * kChunkSize); ++t) {
            const auto v = truncated_riesz(index, m.point(pts[t]), pair, s);
            part[c].add(m.weight(pts[t]) * squared_norm(v));
        }
    });
    CompensatedSum total;
    for (const auto& p : part) total.merge(p);
    return total.value();
}

struct RieszPairEnergy {
    double eps1 = 0.0;
    double eps2 = 0.0;
    double energy = 0.0;
};

struct RieszEnergyReport {
    double s = 0.0;
    TruncationPair best_pair;
    double energy_at_best = 0.0;
    std::vector<RieszPairEnergy> grid_of_pairs;
    std::vector<double> radii;
    double eps1_floor = 0.0;
    std::size_t points_evaluated = 0;
    std::optional<AnalysisWindow> window;
    nlohmann::json params_echo = nlohmann::json::object();

    nlohmann::json to_json() const {
        nlohmann::json g = nlohmann::json::array();
        for (const auto& e : grid_of_pairs) g.push_back({e.eps1, e.eps2, e.energy});
        nlohmann::json j = {
            {"kind", "riesz"},
            {"s", s},
            {"best", {{"eps1", best_pair.eps1}, {"eps2", best_pair.eps2}, {"energy", energy_at_best}}},
            {"total", energy_at_best},
            {"grid", g},
            {"radii", radii},
            {"eps1_floor", eps1_floor},
            {"points_evaluated", points_evaluated},
            {"sup_is_lower_bound", true},
            {"note", "supremum over the finite pair grid; the supremum over all truncations is at least this value"},
            {"params", params_echo},
        };
        if (window) j["window"] = {{"center", window->center}, {"radius", window->radius}};
        else j["window"] = nullptr;
        return j;
    }
};

struct RieszOptions {
    double kappa = 4.0;
    std::size_t max_radii = 64;
    std::optional<AnalysisWindow> window;
};

/// Radii of the grid usable as truncations: those >= kappa * resolution,
/// evenly thinned to at most max_radii (the largest radius is always kept).
inline std::vector<double> truncation_radii(const WeightedPointMeasure& m, const ScaleGrid& grid,
                                            const RieszOptions& opt) {
    const double floor = opt.kappa * m.resolution();
    std::vector<double> usable;
    for (double r : grid.radii())
        if (r >= floor && r > 0.0) usable.push_back(r);
    if (usable.size() <= opt.max_radii) return usable;
    std::vector<double> out;
    const std::size_t n = usable.size();
    for (std::size_t k = 0; k < opt.max_radii; ++k) {
        const std::size_t idx = (k * (n - 1)) / (opt.max_radii - 1);
        if (out.empty() || usable[idx] != out.back()) out.push_back(usable[idx]);
    }
    return out;
}

/// Largest riesz_energy over all pairs (r_a, r_b), a < b, of truncation radii.
///
/// For one evaluation point the atoms are binned by the smallest radius that
/// contains them; prefix sums of the binned kernel vectors then give the
/// transform for every pair at once.
inline RieszEnergyReport sup_riesz_energy(const BallIndex& index, double s, const ScaleGrid& grid,
                                          const RieszOptions& opt = {}) {
    const auto& m = index.measure();
    detail::check_exponent(m, s);
    if (opt.max_radii < 2) throw ConfigError("max_radii", "must be at least 2");
    RieszEnergyReport rep;
    rep.s = s;
    rep.window = opt.window;
    rep.eps1_floor = opt.kappa * m.resolution();
    rep.radii = truncation_radii(m, grid, opt);
    const std::size_t G = rep.radii.size();
    if (G < 2) throw DomainError("fewer than two truncation radii above the resolved floor");
    std::vector<double> rad2(G);
    for (std::size_t g = 0; g < G; ++g) rad2[g] = rep.radii[g] * rep.radii[g];

    const std::size_t dim = m.dim();
    const auto pts = detail::window_points(m, opt.window);
    rep.points_evaluated = pts.size();
    const std::size_t chunk = 1024;
    const std::size_t n_chunks = chunk_count(pts.size(), chunk);
    const std::size_t n_pairs = G * (G - 1) / 2;
    std::vector<std::vector<CompensatedSum>> part(n_chunks);

    parallel_for_chunks(n_chunks, [&](std::size_t c) {
        auto& acc = part[c];
        acc.assign(n_pairs, CompensatedSum{});
        std::vector<double> bins(G * dim);
        std::vector<double> cum(G * dim);
        std::vector<std::pair<std::size_t, double>> hits;
        for (std::size_t t = c * chunk; t < std::min(pts.size(), (c + 1) * chunk); ++t) {
            const auto x = m.point(pts[t]);
            std::fill(bins.begin(), bins.end(), 0.0);
            hits.clear();
            index.for_each_in_ball(x, rep.radii.back(), [&](std::size_t i, double, double d2) {
                hits.emplace_back(i, d2);
            });
            std::sort(hits.begin(), hits.end());
            for (const auto& [i, d2] : hits) {
                const auto b = static_cast<std::size_t>(std::lower_bound(rad2.begin(), rad2.end(), d2) - rad2.begin());
                if (b == 0) continue; // inside the smallest truncation (includes the atom itself)
                const auto y = m.point(i);
                const double f = m.weight(i) * detail::riesz_scale(d2, s);
                for (std::size_t k = 0; k < dim; ++k) bins[b * dim + k] += (y[k] - x[k]) * f;
            }
            for (std::size_t k = 0; k < dim; ++k) cum[k] = bins[k];
            for (std::size_t g = 1; g < G; ++g)
                for (std::size_t k = 0; k < dim; ++k) cum[g * dim + k] = cum[(g - 1) * dim + k] + bins[g * dim + k];
            const double w = m.weight(pts[t]);
            std::size_t pi = 0;
            for (std::size_t a = 0; a < G; ++a) {
                for (std::size_t b = a + 1; b < G; ++b, ++pi) {
                    double n2 = 0.0;
                    for (std::size_t k = 0; k < dim; ++k) {
                        const double v = cum[b * dim + k] - cum[a * dim + k];
                        n2 += v * v;
                    }
                    acc[pi].add(w * n2);
                }
            }
        }
    });

    std::vector<CompensatedSum> total(n_pairs);
    for (const auto& p : part)
        for (std::size_t k = 0; k < n_pairs; ++k) total[k].merge(p[k]);
    std::size_t pi = 0;
    rep.energy_at_best = -1.0;
    for (std::size_t a = 0; a < G; ++a) {
        for (std::size_t b = a + 1; b < G; ++b, ++pi) {
            const double v = total[pi].value();
            rep.grid_of_pairs.push_back({rep.radii[a], rep.radii[b], v});
            if (v > rep.energy_at_best) {
                rep.energy_at_best = v;
                rep.best_pair = TruncationPair(rep.radii[a], rep.radii[b]);
            }
        }
    }
    return rep;
}

} // namespace densq
