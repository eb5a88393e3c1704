#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "densq/error.hpp"
#include "densq/measure.hpp"
#include "densq/parallel.hpp"
#include "densq/scale_grid.hpp"
#include "densq/summation.hpp"

namespace densq {

enum class EnergyKind { square_function, wolff, riesz, beta };

inline std::string_view to_string(EnergyKind k) {
    switch (k) {
    case EnergyKind::square_function: return "square_function";
    case EnergyKind::wolff: return "wolff";
    case EnergyKind::riesz: return "riesz";
    case EnergyKind::beta: return "beta";
    }
    return "?";
}

/// Restricts the outer integral of an energy to atoms with |x - center| <= radius.
/// Ball masses are still taken against the whole measure.
struct AnalysisWindow {
    std::vector<double> center;
    double radius = 0.0;
};

struct EnergyOptions {
    /// Only scales r >= kappa * resolution are integrated.
    double kappa = 4.0;
    std::optional<AnalysisWindow> window;
    /// Add the closed-form large-r tail beyond the radius that swallows the support.
    bool tail = true;
    bool per_point = false;
};

struct EnergyReport {
    EnergyKind kind = EnergyKind::square_function;
    double s = 0.0;
    double p = 2.0;
    double r_min = 0.0;
    double r_max = 0.0;
    double q = 0.0;
    double total = 0.0;
    double tail = 0.0;
    std::string tail_method = "closed_form";
    /// (cell midpoint radius, contribution) for every grid cell.
    std::vector<std::pair<double, double>> per_scale;
    /// (atom index, contribution) when requested.
    std::vector<std::pair<std::size_t, double>> per_point;
    double resolved_floor = 0.0;
    std::size_t clipped_cells = 0;
    std::size_t points_evaluated = 0;
    /// Points whose support-swallowing radius lies beyond the grid (no tail added).
    std::size_t truncated_points = 0;
    std::optional<AnalysisWindow> window;
    nlohmann::json params_echo = nlohmann::json::object();

    nlohmann::json to_json() const {
        nlohmann::json scales = nlohmann::json::array();
        for (const auto& [r, v] : per_scale) scales.push_back({r, v});
        nlohmann::json j = {
            {"kind", std::string(to_string(kind))},
            {"s", s},
            {"p", std::isfinite(p) ? nlohmann::json(p) : nlohmann::json("inf")},
            {"grid", {{"r_min", r_min}, {"r_max", r_max}, {"q", q}}},
            {"total", total},
            {"tail", tail},
            {"tail_method", tail_method},
            {"per_scale", scales},
            {"clipped_low_r",
             {{"r_below", resolved_floor},
              {"cells", clipped_cells},
              {"note", "scales below kappa * resolution are not integrated: the atomic approximation does not "
                       "resolve them"}}},
            {"points", {{"evaluated", points_evaluated}, {"truncated", truncated_points}}},
            {"params", params_echo},
        };
        if (window) j["window"] = {{"center", window->center}, {"radius", window->radius}};
        else j["window"] = nullptr;
        return j;
    }

    void write_per_point_csv(std::ostream& os) const {
        os << "index,contribution\n";
        os.precision(17);
        for (const auto& [i, v] : per_point) os << i << ',' << v << '\n';
    }
};

namespace detail {

inline void check_exponent(const WeightedPointMeasure& m, double s) {
    if (!(s > 0.0) || !(s < static_cast<double>(m.dim())))
        throw DomainError("s must lie in (0, " + std::to_string(m.dim()) + "), got " + std::to_string(s));
}

inline void check_radius(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("radius must be positive, got " + std::to_string(r));
}

inline double brute_mass(const WeightedPointMeasure& m, std::span<const double> x, double r) {
    if (x.size() != m.dim()) throw DomainError("query point has wrong dimension");
    const double r2 = r * r;
    CompensatedSum acc;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (squared_distance(m.point(i), x) <= r2) acc.add(m.weight(i));
    return acc.value();
}

inline double abs_pow(double v, double p) {
    const double a = std::abs(v);
    if (p == 2.0) return a * a;
    if (p == 1.0) return a;
    return std::pow(a, p);
}

/// Atoms taking part in the outer integral, ascending.
inline std::vector<std::size_t> window_points(const WeightedPointMeasure& m, const std::optional<AnalysisWindow>& w) {
    std::vector<std::size_t> out;
    if (!w) {
        out.resize(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) out[i] = i;
        return out;
    }
    if (w->center.size() != m.dim()) throw ConfigError("window.center", "wrong dimension");
    if (!(w->radius >= 0.0)) throw ConfigError("window.radius", "must be non-negative");
    const double r2 = w->radius * w->radius;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (squared_distance(m.point(i), w->center) <= r2) out.push_back(i);
    return out;
}

inline std::size_t first_resolved_radius(const ScaleGrid& grid, double floor) {
    const auto& r = grid.radii();
    return static_cast<std::size_t>(std::lower_bound(r.begin(), r.end(), floor) - r.begin());
}

/// Shared driver for energies of the form
///   sum_i w_i [ sum_j |f(x_i, m_j)|^p ln q + tail_i ],
/// where f(x, r) = tail_coeff * r^-s as soon as B(x, r) contains the support.
template <class F>
EnergyReport radial_energy(const BallIndex& index, EnergyKind kind, double s, const ScaleGrid& grid, double p,
                           const EnergyOptions& opt, double tail_coeff, F&& f) {
    const auto& m = index.measure();
    check_exponent(m, s);
    if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("p must be a finite real >= 1");
    if (!(opt.kappa >= 0.0)) throw ConfigError("kappa", "must be non-negative");

    EnergyReport rep;
    rep.kind = kind;
    rep.s = s;
    rep.p = p;
    rep.r_min = grid.r_min();
    rep.r_max = grid.r_max();
    rep.q = grid.q();
    rep.window = opt.window;
    rep.resolved_floor = opt.kappa * m.resolution();

    const auto& radii = grid.radii();
    const std::size_t cells = grid.cells();
    const std::size_t j0 = first_resolved_radius(grid, rep.resolved_floor);
    rep.clipped_cells = std::min(j0, cells);
    const double lnq = grid.log_step();
    std::vector<double> mids(cells);
    for (std::size_t j = 0; j < cells; ++j) mids[j] = grid.cell_midpoint(j);

    const auto pts = window_points(m, opt.window);
    rep.points_evaluated = pts.size();

    struct Partial {
        std::vector<CompensatedSum> scale;
        CompensatedSum tail;
        std::size_t truncated = 0;
    };
    const std::size_t n_chunks = chunk_count(pts.size());
    std::vector<Partial> partial(n_chunks);
    std::vector<double> point_value(opt.per_point ? pts.size() : 0);

    parallel_for_chunks(n_chunks, [&](std::size_t c) {
        Partial& part = partial[c];
        part.scale.assign(cells, CompensatedSum{});
        const std::size_t b = c * kChunkSize;
        const std::size_t e = std::min(pts.size(), b + kChunkSize);
        for (std::size_t t = b; t < e; ++t) {
            const std::size_t i = pts[t];
            const auto x = m.point(i);
            const double w = m.weight(i);
            std::size_t j_end = cells;
            double tail_i = 0.0;
            if (opt.tail) {
                const double reach = index.farthest_distance(x);
                const auto it = std::lower_bound(radii.begin() + static_cast<std::ptrdiff_t>(std::min(j0, radii.size())),
                                                 radii.end(), reach);
                if (it == radii.end()) {
                    ++part.truncated;
                } else {
                    j_end = static_cast<std::size_t>(it - radii.begin());
                    const double R = *it;
                    tail_i = abs_pow(tail_coeff, p) / (p * s * std::pow(R, p * s));
                }
            }
            CompensatedSum own;
            for (std::size_t j = j0; j < j_end; ++j) {
                const double v = w * abs_pow(f(x, mids[j]), p) * lnq;
                part.scale[j].add(v);
                own.add(v);
            }
            part.tail.add(w * tail_i);
            own.add(w * tail_i);
            if (opt.per_point) point_value[t] = own.value();
        }
    });

    std::vector<CompensatedSum> scale(cells);
    CompensatedSum tail;
    for (const auto& part : partial) {
        for (std::size_t j = 0; j < cells; ++j) scale[j].merge(part.scale[j]);
        tail.merge(part.tail);
        rep.truncated_points += part.truncated;
    }
    CompensatedSum total;
    rep.per_scale.reserve(cells);
    for (std::size_t j = 0; j < cells; ++j) {
        const double v = scale[j].value();
        rep.per_scale.emplace_back(mids[j], v);
        total.add(v);
    }
    rep.tail = tail.value();
    total.add(rep.tail);
    rep.total = total.value();
    if (opt.per_point) {
        rep.per_point.reserve(pts.size());
        for (std::size_t t = 0; t < pts.size(); ++t) rep.per_point.emplace_back(pts[t], point_value[t]);
    }
    if (!opt.tail) rep.tail_method = "none";
    return rep;
}

} // namespace detail

/// theta^s(B(x, r)) = mu(B(x, r)) / r^s.
inline double density(const BallIndex& index, std::span<const double> x, double r, double s) {
    detail::check_radius(r);
    detail::check_exponent(index.measure(), s);
    return index.mass_in_ball(x, r) / std::pow(r, s);
}

inline double density(const WeightedPointMeasure& m, std::span<const double> x, double r, double s) {
    detail::check_radius(r);
    detail::check_exponent(m, s);
    return detail::brute_mass(m, x, r) / std::pow(r, s);
}

/// Delta^s(x, r) = theta^s(B(x, r)) - theta^s(B(x, 2r)).
inline double delta(const BallIndex& index, std::span<const double> x, double r, double s) {
    return density(index, x, r, s) - density(index, x, 2.0 * r, s);
}

inline double delta(const WeightedPointMeasure& m, std::span<const double> x, double r, double s) {
    return density(m, x, r, s) - density(m, x, 2.0 * r, s);
}

/// int int |Delta^s(x, r)|^p dr/r dmu(x) over the resolved part of the grid,
/// plus the exact tail beyond the radius that swallows the support.
inline EnergyReport square_function_energy(const BallIndex& index, double s, const ScaleGrid& grid, double p = 2.0,
                                           const EnergyOptions& opt = {}) {
    const double two_s = std::pow(2.0, s);
    const double coeff = index.measure().total_mass() * (1.0 - 1.0 / two_s);
    return detail::radial_energy(index, EnergyKind::square_function, s, grid, p, opt, coeff,
                                 [&](std::span<const double> x, double r) {
                                     const double a = index.mass_in_ball(x, r);
                                     const double b = index.mass_in_ball(x, 2.0 * r);
                                     return (a - b / two_s) / std::pow(r, s);
                                 });
}

inline EnergyReport square_function_energy(const WeightedPointMeasure& m, double s, const ScaleGrid& grid,
                                           double p = 2.0, const EnergyOptions& opt = {}) {
    BallIndex index(m, false);
    return square_function_energy(index, s, grid, p, opt);
}

/// int int theta^s(B(x, r))^p dr/r dmu(x), same discretization and tail.
inline EnergyReport wolff_energy(const BallIndex& index, double s, const ScaleGrid& grid, double p = 2.0,
                                 const EnergyOptions& opt = {}) {
    return detail::radial_energy(index, EnergyKind::wolff, s, grid, p, opt, index.measure().total_mass(),
                                 [&](std::span<const double> x, double r) {
                                     return index.mass_in_ball(x, r) / std::pow(r, s);
                                 });
}

inline EnergyReport wolff_energy(const WeightedPointMeasure& m, double s, const ScaleGrid& grid, double p = 2.0,
                                 const EnergyOptions& opt = {}) {
    BallIndex index(m, false);
    return wolff_energy(index, s, grid, p, opt);
}

struct AdRegularity {
    double c_lower = 0.0;
    double c_upper = 0.0;
    std::size_t samples = 0;
    double ratio() const { return c_lower > 0.0 ? c_upper / c_lower : std::numeric_limits<double>::infinity(); }
};

/// Extremes of theta^s(B(x, r)) over atoms x and grid radii r with
/// kappa * resolution <= r <= diam(support) (the upper cut is dropped for a
/// single atom).
inline AdRegularity ad_regularity_diagnostic(const BallIndex& index, double s, const ScaleGrid& grid,
                                             double kappa = 4.0) {
    const auto& m = index.measure();
    detail::check_exponent(m, s);
    const double floor = kappa * m.resolution();
    const double diam = 2.0 * m.support_radius();
    std::vector<double> rs;
    for (double r : grid.radii())
        if (r >= floor && (diam == 0.0 || r <= diam)) rs.push_back(r);
    AdRegularity out;
    if (rs.empty()) return out;
    const std::size_t n_chunks = chunk_count(m.size());
    std::vector<AdRegularity> part(n_chunks);
    parallel_for_chunks(n_chunks, [&](std::size_t c) {
        AdRegularity a{std::numeric_limits<double>::infinity(), 0.0, 0};
        for (std::size_t i = c * kChunkSize; i < std::min(m.size(), (c + 1) * kChunkSize); ++i) {
            for (double r : rs) {
                const double th = index.mass_in_ball(m.point(i), r) / std::pow(r, s);
                a.c_lower = std::min(a.c_lower, th);
                a.c_upper = std::max(a.c_upper, th);
                ++a.samples;
            }
        }
        part[c] = a;
    });
    out.c_lower = std::numeric_limits<double>::infinity();
    for (const auto& a : part) {
        out.c_lower = std::min(out.c_lower, a.c_lower);
        out.c_upper = std::max(out.c_upper, a.c_upper);
        out.samples += a.samples;
    }
    return out;
}

struct LocalRatio {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

/// Local square-function mass around B0 = B(center, r0) against the density
/// of B0: the integral of Delta^2 over r in [delta r0, r0 / delta] and atoms in
/// B(center, r0 / delta), divided by theta^s(B0)^2 mu(B0).
inline LocalRatio local_ratio_prop21(const BallIndex& index, std::span<const double> center, double r0, double s,
                                     double delta_param, double q_target = 1.1, double kappa = 4.0) {
    detail::check_radius(r0);
    if (!(delta_param > 0.0) || !(delta_param < 1.0)) throw DomainError("delta must lie in (0, 1)");
    const double mass0 = index.mass_in_ball(center, r0);
    if (!(mass0 > 0.0)) throw DegenerateBall("reference ball carries no mass");
    const auto grid = ScaleGrid::spanning(delta_param * r0, r0 / delta_param, q_target);
    EnergyOptions opt;
    opt.kappa = kappa;
    opt.tail = false;
    opt.window = AnalysisWindow{std::vector<double>(center.begin(), center.end()), r0 / delta_param};
    const auto rep = square_function_energy(index, s, grid, 2.0, opt);
    const double theta = mass0 / std::pow(r0, s);
    LocalRatio out;
    out.lhs = rep.total;
    out.rhs = theta * theta * mass0;
    out.ratio = out.lhs / out.rhs;
    return out;
}

} // namespace densq
