#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "densq/error.hpp"
#include "densq/geometry.hpp"
#include "densq/measure.hpp"
#include "densq/multiscale.hpp"
#include "densq/parallel.hpp"
#include "densq/scale_grid.hpp"
#include "densq/summation.hpp"

namespace densq {

enum class FitMethod { moment_closed_form, direction_scan, hull_width };

inline std::string_view to_string(FitMethod m) {
    switch (m) {
    case FitMethod::moment_closed_form: return "moment_closed_form";
    case FitMethod::direction_scan: return "direction_scan";
    case FitMethod::hull_width: return "hull_width";
    }
    return "?";
}

/// Line {point + t * direction}. `objective` is the beta value it attains;
/// `upper_bound` marks fits that are not certified minimizers.
struct LineFit {
    std::vector<double> point;
    std::vector<double> direction;
    double objective = 0.0;
    FitMethod method = FitMethod::moment_closed_form;
    bool upper_bound = false;
};

struct BetaValue {
    double value = 0.0;
    LineFit line;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

namespace detail {

struct BallSample {
    std::vector<double> coords;
    std::vector<double> weights;
    std::size_t size() const { return weights.size(); }
    std::span<const double> point(std::size_t i, std::size_t dim) const {
        return std::span<const double>(coords).subspan(i * dim, dim);
    }
};

inline BallSample collect_ball(const BallIndex& index, std::span<const double> x, double r) {
    const auto& m = index.measure();
    BallSample out;
    for (std::size_t i : index.atoms_in_ball(x, r)) {
        const auto p = m.point(i);
        out.coords.insert(out.coords.end(), p.begin(), p.end());
        out.weights.push_back(m.weight(i));
    }
    if (out.weights.empty()) throw DegenerateBall("ball contains no atoms");
    return out;
}

inline void check_beta_radius(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("radius must be positive");
}

/// min over c of sum w |u - c|^p, with the minimizing c.
inline std::pair<double, double> best_offset(std::vector<std::pair<double, double>>& uw, double p) {
    auto cost = [&](double c) {
        CompensatedSum acc;
        for (const auto& [u, w] : uw) acc.add(w * abs_pow(u - c, p));
        return acc.value();
    };
    std::sort(uw.begin(), uw.end());
    if (p == 1.0) {
        double total = 0.0;
        for (const auto& e : uw) total += e.second;
        double run = 0.0;
        for (const auto& [u, w] : uw) {
            run += w;
            if (run >= 0.5 * total) return {cost(u), u};
        }
        return {cost(uw.back().first), uw.back().first};
    }
    double a = uw.front().first;
    double b = uw.back().first;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c1 = b - g * (b - a);
    double c2 = a + g * (b - a);
    double f1 = cost(c1);
    double f2 = cost(c2);
    for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        if (f1 <= f2) {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - g * (b - a);
            f1 = cost(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + g * (b - a);
            f2 = cost(c2);
        }
    }
    const double c = 0.5 * (a + b);
    return {cost(c), c};
}

/// 2-D: min over lines of sum w dist^p, line normal at angle theta.
struct PlanarLpFit {
    const BallSample& sample;
    double p;
    double cx = 0.0;
    double cy = 0.0;

    std::pair<double, double> at(double theta) const {
        const double nx = -std::sin(theta);
        const double ny = std::cos(theta);
        std::vector<std::pair<double, double>> uw(sample.size());
        for (std::size_t i = 0; i < sample.size(); ++i) {
            const double u = (sample.coords[2 * i] - cx) * nx + (sample.coords[2 * i + 1] - cy) * ny;
            uw[i] = {u, sample.weights[i]};
        }
        return best_offset(uw, p);
    }
};

inline Eigen::MatrixXd scatter_matrix(const MomentAccumulator& acc, std::size_t dim) {
    Eigen::MatrixXd S(dim, dim);
    for (std::size_t a = 0; a < dim; ++a)
        for (std::size_t b = 0; b < dim; ++b) S(a, b) = acc.scatter(a, b);
    return S;
}

inline std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts) {
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
    };
    std::vector<Eigen::Vector2d> h(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
        h[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

} // namespace detail

/// beta_2(x, r) = (int_B dist(y, L)^2 / r^3 dmu)^(1/2) minimized over lines L.
/// The minimizer is the principal axis through the weighted centroid and the
/// minimum is the scatter left after removing its largest eigenvalue.
inline BetaValue beta2(const BallIndex& index, std::span<const double> x, double r) {
    detail::check_beta_radius(r);
    const std::size_t dim = index.measure().dim();
    const auto acc = index.moments_in_ball(x, r);
    if (!(acc.mass() > 0.0)) throw DegenerateBall("ball contains no atoms");
    const Eigen::MatrixXd S = detail::scatter_matrix(acc, dim);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
    const auto& ev = eig.eigenvalues();
    const double residual = std::max(0.0, S.trace() - ev(static_cast<Eigen::Index>(dim - 1)));
    BetaValue out;
    out.value = std::sqrt(residual / (r * r * r));
    const auto mean = acc.mean();
    out.line.point.assign(mean.begin(), mean.end());
    out.line.direction.resize(dim);
    const auto v = eig.eigenvectors().col(static_cast<Eigen::Index>(dim - 1));
    for (std::size_t k = 0; k < dim; ++k) out.line.direction[k] = v(static_cast<Eigen::Index>(k));
    out.line.objective = out.value;
    out.line.method = FitMethod::moment_closed_form;
    return out;
}

/// beta_inf(x, r): smallest strip half-width containing the atoms of B(x, r),
/// divided by r. Exact in the plane (hull + rotating calipers); in higher
/// dimension the line is fixed to the principal axis direction (upper bound).
inline BetaValue beta_inf(const BallIndex& index, std::span<const double> x, double r) {
    detail::check_beta_radius(r);
    const std::size_t dim = index.measure().dim();
    const auto sample = detail::collect_ball(index, x, r);
    BetaValue out;
    if (dim != 2) {
        const auto b2 = beta2(index, x, r);
        const auto& u = b2.line.direction;
        std::vector<double> proj(sample.coords.size());
        for (std::size_t i = 0; i < sample.size(); ++i) {
            const auto y = sample.point(i, dim);
            double t = 0.0;
            for (std::size_t k = 0; k < dim; ++k) t += y[k] * u[k];
            for (std::size_t k = 0; k < dim; ++k) proj[i * dim + k] = y[k] - t * u[k];
        }
        const auto ball = minimal_enclosing_ball(proj, dim);
        out.value = ball.radius / r;
        out.line = {ball.center, u, out.value, FitMethod::direction_scan, true};
        return out;
    }
    std::vector<Eigen::Vector2d> pts(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) pts[i] = {sample.coords[2 * i], sample.coords[2 * i + 1]};
    const auto hull = detail::convex_hull(pts);
    if (hull.size() < 3) {
        Eigen::Vector2d dir(1.0, 0.0);
        if (hull.size() == 2 && (hull[1] - hull[0]).norm() > 0.0) dir = (hull[1] - hull[0]).normalized();
        out.value = 0.0;
        out.line = {{hull[0].x(), hull[0].y()}, {dir.x(), dir.y()}, 0.0, FitMethod::hull_width, false};
        return out;
    }
    const std::size_t H = hull.size();
    auto dist = [&](std::size_t e, std::size_t v) {
        const Eigen::Vector2d a = hull[e];
        const Eigen::Vector2d d = hull[(e + 1) % H] - a;
        const Eigen::Vector2d w = hull[v] - a;
        return std::abs(d.x() * w.y() - d.y() * w.x()) / d.norm();
    };
    double best = kInfinity;
    std::size_t best_edge = 0;
    std::size_t far = 1;
    for (std::size_t e = 0; e < H; ++e) {
        if (far == e) far = (e + 1) % H;
        while (dist(e, (far + 1) % H) >= dist(e, far) && (far + 1) % H != e) far = (far + 1) % H;
        const double w = dist(e, far);
        if (w < best) {
            best = w;
            best_edge = e;
        }
    }
    const Eigen::Vector2d a = hull[best_edge];
    const Eigen::Vector2d d = (hull[(best_edge + 1) % H] - a).normalized();
    Eigen::Vector2d n(-d.y(), d.x());
    // orient the normal towards the hull
    double side = 0.0;
    for (const auto& v : hull) side = std::max(side, n.dot(v - a));
    if (side <= 0.0) n = -n;
    const Eigen::Vector2d mid = a + 0.5 * best * n;
    out.value = 0.5 * best / r;
    out.line = {{mid.x(), mid.y()}, {d.x(), d.y()}, out.value, FitMethod::hull_width, false};
    return out;
}

/// beta_p(x, r) = (int_B dist(y, L)^p / r^(p+1) dmu)^(1/p) minimized over
/// lines. p = 2 uses the closed form, p = inf the strip width. Otherwise, in
/// the plane, directions are scanned (plus the principal axis) and refined
/// locally, with the exact optimal offset per direction; in higher dimension
/// the principal axis line is evaluated. Both are flagged as upper bounds.
inline BetaValue beta_p(const BallIndex& index, std::span<const double> x, double r, double p) {
    if (p == 2.0) return beta2(index, x, r);
    if (p == kInfinity) return beta_inf(index, x, r);
    if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("p must be >= 1");
    detail::check_beta_radius(r);
    const std::size_t dim = index.measure().dim();
    const auto sample = detail::collect_ball(index, x, r);
    const auto b2 = beta2(index, x, r);
    BetaValue out;
    const double norm = std::pow(r, p + 1.0);
    if (dim != 2) {
        const auto& u = b2.line.direction;
        const auto& c = b2.line.point;
        CompensatedSum acc;
        for (std::size_t i = 0; i < sample.size(); ++i) {
            const auto y = sample.point(i, dim);
            double t = 0.0;
            for (std::size_t k = 0; k < dim; ++k) t += (y[k] - c[k]) * u[k];
            double d2 = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                const double e = y[k] - c[k] - t * u[k];
                d2 += e * e;
            }
            acc.add(sample.weights[i] * std::pow(std::sqrt(d2), p));
        }
        out.value = std::pow(acc.value() / norm, 1.0 / p);
        out.line = {c, u, out.value, FitMethod::direction_scan, true};
        return out;
    }
    detail::PlanarLpFit fit{sample, p, b2.line.point[0], b2.line.point[1]};
    constexpr std::size_t kDirections = 360;
    double best_theta = std::atan2(b2.line.direction[1], b2.line.direction[0]);
    double best_cost = fit.at(best_theta).first;
    for (std::size_t k = 0; k < kDirections; ++k) {
        const double th = std::numbers::pi * static_cast<double>(k) / static_cast<double>(kDirections);
        const double c = fit.at(th).first;
        if (c < best_cost) {
            best_cost = c;
            best_theta = th;
        }
    }
    double a = best_theta - std::numbers::pi / kDirections;
    double b = best_theta + std::numbers::pi / kDirections;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double t1 = b - g * (b - a);
    double t2 = a + g * (b - a);
    double f1 = fit.at(t1).first;
    double f2 = fit.at(t2).first;
    for (int it = 0; it < 60; ++it) {
        if (f1 <= f2) {
            b = t2;
            t2 = t1;
            f2 = f1;
            t1 = b - g * (b - a);
            f1 = fit.at(t1).first;
        } else {
            a = t1;
            t1 = t2;
            f1 = f2;
            t2 = a + g * (b - a);
            f2 = fit.at(t2).first;
        }
    }
    for (double th : {t1, t2}) {
        const double c = fit.at(th).first;
        if (c < best_cost) {
            best_cost = c;
            best_theta = th;
        }
    }
    const auto [cost, offset] = fit.at(best_theta);
    const double nx = -std::sin(best_theta);
    const double ny = std::cos(best_theta);
    out.value = std::pow(cost / norm, 1.0 / p);
    out.line = {{fit.cx + offset * nx, fit.cy + offset * ny},
                {std::cos(best_theta), std::sin(best_theta)},
                out.value,
                FitMethod::direction_scan,
                true};
    return out;
}

struct BetaEnergyOptions {
    double kappa = 4.0;
    std::optional<AnalysisWindow> window;
    /// Continue the grid past r_max, one octave at a time, until an octave adds
    /// less than `extension_tolerance` of the running total. Ignored with a window.
    bool extend = true;
    double extension_tolerance = 1e-4;
    std::size_t max_extra_octaves = 64;
    bool per_point = false;
};

/// int int beta_p(x, r)^2 dr/r dmu(x) on the resolved part of the grid.
inline EnergyReport beta_energy(const BallIndex& index, const ScaleGrid& grid, double p = 2.0,
                                const BetaEnergyOptions& opt = {}) {
    const auto& m = index.measure();
    if (!(p >= 1.0)) throw DomainError("p must be >= 1");
    EnergyReport rep;
    rep.kind = EnergyKind::beta;
    rep.s = 1.0;
    rep.p = p;
    rep.r_min = grid.r_min();
    rep.r_max = grid.r_max();
    rep.q = grid.q();
    rep.window = opt.window;
    rep.resolved_floor = opt.kappa * m.resolution();
    const std::size_t j0 = detail::first_resolved_radius(grid, rep.resolved_floor);
    const std::size_t cells = grid.cells();
    rep.clipped_cells = std::min(j0, cells);
    const double lnq = grid.log_step();
    const auto pts = detail::window_points(m, opt.window);
    rep.points_evaluated = pts.size();
    std::vector<double> point_value(pts.size(), 0.0);

    // contribution of cells [jb, je) in the (possibly extended) grid
    auto sweep = [&](std::size_t jb, std::size_t je, std::vector<CompensatedSum>& scale) {
        const std::size_t n_chunks = chunk_count(pts.size());
        std::vector<std::vector<CompensatedSum>> part(n_chunks);
        parallel_for_chunks(n_chunks, [&](std::size_t c) {
            part[c].assign(je - jb, CompensatedSum{});
            for (std::size_t t = c * kChunkSize; t < std::min(pts.size(), (c + 1) * kChunkSize); ++t) {
                const auto x = m.point(pts[t]);
                const double w = m.weight(pts[t]);
                CompensatedSum own;
                for (std::size_t j = jb; j < je; ++j) {
                    const double b = beta_p(index, x, grid.cell_midpoint(j), p).value;
                    const double v = w * b * b * lnq;
                    part[c][j - jb].add(v);
                    own.add(v);
                }
                point_value[t] += own.value();
            }
        });
        scale.assign(je - jb, CompensatedSum{});
        for (const auto& pc : part)
            for (std::size_t k = 0; k < je - jb; ++k) scale[k].merge(pc[k]);
    };

    std::vector<CompensatedSum> scale;
    CompensatedSum total;
    if (j0 < cells) sweep(j0, cells, scale);
    for (std::size_t j = 0; j < cells; ++j) {
        const double v = j >= j0 ? scale[j - j0].value() : 0.0;
        rep.per_scale.emplace_back(grid.cell_midpoint(j), v);
        total.add(v);
    }
    CompensatedSum extension;
    if (opt.extend && !opt.window && j0 < cells) {
        const auto per_octave = static_cast<std::size_t>(std::ceil(std::log(2.0) / lnq - 1e-9));
        std::size_t j = cells;
        for (std::size_t oct = 0; oct < opt.max_extra_octaves; ++oct, j += per_octave) {
            std::vector<CompensatedSum> ext;
            sweep(j, j + per_octave, ext);
            CompensatedSum octave;
            for (const auto& e : ext) octave.merge(e);
            const double v = octave.value();
            extension.add(v);
            const double running = total.value() + extension.value();
            if (v <= opt.extension_tolerance * running) break;
        }
        rep.tail_method = "grid_extension";
    } else {
        rep.tail_method = "none";
    }
    rep.tail = extension.value();
    total.add(rep.tail);
    rep.total = total.value();
    if (opt.per_point)
        for (std::size_t t = 0; t < pts.size(); ++t) rep.per_point.emplace_back(pts[t], point_value[t]);
    return rep;
}

} // namespace densq
