#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "densq/error.hpp"
#include "densq/measure.hpp"
#include "densq/summation.hpp"

namespace densq {

/// Radial profile phi on [0, inf) given by value and derivative evaluators.
struct RadialProfile {
    static constexpr double kInf = std::numeric_limits<double>::infinity();

    std::string name;
    std::function<double(double)> value;
    std::function<double(double)> derivative;
    /// phi' vanishes for u > support.
    double support = std::numeric_limits<double>::infinity();
    /// Beyond this point phi' is negligible (equal to support when that is finite).
    double significant_until = std::numeric_limits<double>::infinity();
    /// phi' vanishes on [0, flat_until].
    double flat_until = 0.0;
    bool vanishes_at_infinity = true;

    static RadialProfile gaussian() {
        return {"gaussian", [](double u) { return std::exp(-u * u); },
                [](double u) { return -2.0 * u * std::exp(-u * u); }, kInf, 6.5, 0.0, true};
    }

    /// Smooth, equal to 1 on [0, 1/2] and to 0 on [2, inf); the transition is
    /// built from exp(-1/y), so every derivative exists.
    static RadialProfile smooth_bump() {
        auto psi = [](double y) { return y > 0.0 ? std::exp(-1.0 / y) : 0.0; };
        auto dpsi = [](double y) { return y > 0.0 ? std::exp(-1.0 / y) / (y * y) : 0.0; };
        return {"smooth_bump",
                [=](double u) {
                    if (u <= 0.5) return 1.0;
                    if (u >= 2.0) return 0.0;
                    const double a = psi(2.0 - u);
                    return a / (a + psi(u - 0.5));
                },
                [=](double u) {
                    if (u <= 0.5 || u >= 2.0) return 0.0;
                    const double a = psi(2.0 - u);
                    const double b = psi(u - 0.5);
                    const double da = -dpsi(2.0 - u);
                    const double db = dpsi(u - 0.5);
                    return (da * b - a * db) / ((a + b) * (a + b));
                },
                2.0, 2.0, 0.5, true};
    }

    /// Logistic approximation of the indicator of [0, 1]; larger sharpness
    /// gives a steeper edge at u = 1.
    static RadialProfile sharp_step(double sharpness) {
        if (!(sharpness > 0.0)) throw DomainError("sharpness must be positive");
        const double k = sharpness;
        return {"sharp_step",
                [k](double u) {
                    const double z = k * (u - 1.0);
                    return z > 0.0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
                },
                [k](double u) {
                    const double z = std::abs(k * (u - 1.0));
                    const double e = std::exp(-z);
                    return -k * e / ((1.0 + e) * (1.0 + e));
                },
                kInf, 1.0 + 40.0 / k, 0.0, true};
    }

    static RadialProfile zero() {
        return {"zero", [](double) { return 0.0; }, [](double) { return 0.0; }, 0.0, 0.0, 0.0, true};
    }

    /// Constant profile; does not vanish at infinity, so the convolution
    /// identity does not apply to it.
    static RadialProfile constant(double c) {
        return {"constant", [c](double) { return c; }, [](double) { return 0.0; }, 0.0, 0.0, 0.0, false};
    }
};

/// Largest discrepancy between phi' and a central difference of phi over
/// `samples` points of [0, upto].
inline double profile_derivative_mismatch(const RadialProfile& phi, double upto, std::size_t samples = 1000,
                                          double h = 1e-6) {
    double worst = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        const double u = h + upto * static_cast<double>(k) / static_cast<double>(samples - 1);
        const double fd = (phi.value(u + h) - phi.value(u - h)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - phi.derivative(u)));
    }
    return worst;
}

/// sum_i w_i (t^-s phi(|x_i - x| / t) - (2t)^-s phi(|x_i - x| / (2t))).
inline double smoothed_delta(const WeightedPointMeasure& m, const RadialProfile& phi, std::span<const double> x,
                             double t, double s) {
    if (!(t > 0.0)) throw DomainError("t must be positive");
    if (x.size() != m.dim()) throw DomainError("query point has wrong dimension");
    const double a = std::pow(t, -s);
    const double b = std::pow(2.0 * t, -s);
    CompensatedSum acc;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double d = std::sqrt(squared_distance(m.point(i), x));
        acc.add(m.weight(i) * (a * phi.value(d / t) - b * phi.value(d / (2.0 * t))));
    }
    return acc.value();
}

struct IdentityCheck {
    double smoothed = 0.0;
    double integral = 0.0;
    /// |smoothed - integral| / scale, where scale is the sum of the absolute
    /// values of the two smoothed terms over all atoms (0 when scale is 0).
    double residual = 0.0;
    std::size_t panels = 0;
};

namespace detail {

inline constexpr std::array<double, 10> kGaussNodes = {
    -0.9739065285171717, -0.8650633666889845, -0.6794095682990244, -0.4333953941292472, -0.1488743389816312,
    0.1488743389816312,  0.4333953941292472,  0.6794095682990244,  0.8650633666889845,  0.9739065285171717};
inline constexpr std::array<double, 10> kGaussWeights = {
    0.0666713443086881, 0.1494513491505806, 0.2190863625159820, 0.2692667193099963, 0.2955242247147529,
    0.2955242247147529, 0.2692667193099963, 0.2190863625159820, 0.1494513491505806, 0.0666713443086881};

struct PanelValue {
    double value = 0.0;
    double magnitude = 0.0;
};

// `f` returns {integrand, size of the terms it was formed from}; the second
// bounds the roundoff in the first.
inline PanelValue gauss10(const auto& f, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    CompensatedSum acc;
    CompensatedSum mag;
    for (std::size_t g = 0; g < kGaussNodes.size(); ++g) {
        const auto [v, m] = f(mid + half * kGaussNodes[g]);
        acc.add(kGaussWeights[g] * v);
        mag.add(kGaussWeights[g] * m);
    }
    return {half * acc.value(), half * mag.value()};
}

/// Gauss-Legendre on [a, b], bisected until the halves agree with the whole
/// to 1e-13 of the panel's own magnitude or to `abs_tol`, whichever is
/// looser. The relative test keeps tiny integrands accurate; the absolute
/// one stops the chase into flat ends like exp(-1/y), which never resolve.
inline double adaptive_gauss(const auto& f, double a, double b, const PanelValue& whole, double abs_tol, int depth) {
    const double m = 0.5 * (a + b);
    const PanelValue left = gauss10(f, a, m);
    const PanelValue right = gauss10(f, m, b);
    const double both = left.value + right.value;
    const double err = std::abs(both - whole.value);
    if (depth == 0 || err <= std::max(1e-13 * (left.magnitude + right.magnitude), abs_tol)) return both;
    return adaptive_gauss(f, a, m, left, 0.5 * abs_tol, depth - 1) +
           adaptive_gauss(f, m, b, right, 0.5 * abs_tol, depth - 1);
}

inline double adaptive_gauss(const auto& f, double a, double b, double abs_tol) {
    return adaptive_gauss(f, a, b, gauss10(f, a, b), std::max(abs_tol, 1e-290), 40);
}

} // namespace detail

/// Checks Delta_{mu,phi}(x, R) = -int_0^inf t^s phi'(t) Delta^s(x, tR) dt.
///
/// The right side is integrated numerically: a log-spaced grid of
/// `quad_points` nodes spans the range where phi' is non-negligible, the
/// radii where Delta(x, tR) jumps (t = d_i/R and d_i/(2R)) are inserted as
/// extra breakpoints, and every panel uses adaptive 10-point Gauss-Legendre. Below the
/// first node Delta(x, tR) only sees atoms sitting at x, so that piece is
/// integrated in closed form.
inline IdentityCheck verify_convolution_identity(const WeightedPointMeasure& m, const RadialProfile& phi,
                                                 std::span<const double> x, double R, double s,
                                                 std::size_t quad_points = 512) {
    if (quad_points < 16) throw DomainError("quad_points must be at least 16");
    if (!phi.vanishes_at_infinity) throw DomainError("profile '" + phi.name + "' does not vanish at infinity");
    if (!(R > 0.0)) throw DomainError("R must be positive");
    if (x.size() != m.dim()) throw DomainError("query point has wrong dimension");

    std::vector<std::pair<double, double>> atoms; // (distance, weight), ascending
    atoms.reserve(m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        atoms.emplace_back(std::sqrt(squared_distance(m.point(i), x)), m.weight(i));
    std::sort(atoms.begin(), atoms.end());
    std::vector<double> cum(atoms.size() + 1, 0.0);
    {
        CompensatedSum acc;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            acc.add(atoms[i].second);
            cum[i + 1] = acc.value();
        }
    }
    auto mass = [&](double r) {
        const auto it = std::upper_bound(atoms.begin(), atoms.end(), std::make_pair(r, std::numeric_limits<double>::infinity()));
        return cum[static_cast<std::size_t>(it - atoms.begin())];
    };
    const double two_s = std::pow(2.0, s);

    IdentityCheck out;
    out.smoothed = smoothed_delta(m, phi, x, R, s);
    {
        CompensatedSum scale;
        for (const auto& [d, w] : atoms)
            scale.add(w * (std::abs(phi.value(d / R)) / std::pow(R, s) + std::abs(phi.value(d / (2.0 * R))) / std::pow(2.0 * R, s)));
        const double sc = scale.value();
        if (sc == 0.0 && phi.support <= 0.0) return out;

        double positive_min = std::numeric_limits<double>::infinity();
        for (const auto& [d, w] : atoms)
            if (d > 0.0) positive_min = std::min(positive_min, d / (2.0 * R));
        // Past t = d_max / R both balls hold every atom and Delta(x, tR) is a
        // pure power of t, so the rest of the integral is closed-form.
        const double t_all = atoms.back().first / R;
        const double t_hi = std::isfinite(phi.support) ? phi.support : std::max(phi.significant_until, t_all);
        double t_lo = std::max(phi.flat_until, 1e-6 * t_hi);
        t_lo = std::min(t_lo, 0.5 * positive_min);
        if (phi.flat_until > 0.0 && positive_min >= phi.flat_until) t_lo = phi.flat_until;

        std::vector<double> nodes;
        nodes.reserve(quad_points + 2 * atoms.size());
        const double ratio = std::log(t_hi / t_lo);
        for (std::size_t k = 0; k < quad_points; ++k)
            nodes.push_back(t_lo * std::exp(ratio * static_cast<double>(k) / static_cast<double>(quad_points - 1)));
        for (const auto& [d, w] : atoms) {
            for (double t : {d / R, d / (2.0 * R)})
                if (t > t_lo && t < t_hi) nodes.push_back(t);
        }
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

        CompensatedSum integral;
        if (t_hi >= t_all) integral.add((1.0 - 1.0 / two_s) * cum.back() / std::pow(R, s) * phi.value(t_hi));
        // [0, t_lo]: only atoms at distance 0 are inside B(x, tR) there.
        const double m0 = mass(0.0);
        if (m0 > 0.0)
            integral.add(-(1.0 - 1.0 / two_s) * m0 / std::pow(R, s) * (phi.value(t_lo) - phi.value(0.0)));
        // Between consecutive nodes both ball masses are constant (every
        // breakpoint is a node), so they are read once at the panel midpoint
        // and only t^s phi'(t) (tR)^-s = phi'(t) R^-s is integrated.
        auto f = [&](double t) {
            const double v = phi.derivative(t);
            return detail::PanelValue{v, std::abs(v)};
        };
        const double r_s = std::pow(R, s);
        for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
            const double mid = 0.5 * (nodes[k] + nodes[k + 1]) * R;
            const double coeff = mass(mid) - mass(2.0 * mid) / two_s;
            // Each panel may be off by 1e-14 of the term scale `sc`.
            const double abs_tol = 1e-14 * sc * r_s / std::abs(coeff) / static_cast<double>(nodes.size());
            if (coeff != 0.0) integral.add(-coeff / r_s * detail::adaptive_gauss(f, nodes[k], nodes[k + 1], abs_tol));
        }
        out.panels = nodes.size() - 1;
        out.integral = integral.value();
        out.residual = sc > 0.0 ? std::abs(out.smoothed - out.integral) / sc : std::abs(out.smoothed - out.integral);
    }
    return out;
}

} // namespace densq
