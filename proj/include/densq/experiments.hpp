#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "densq/betas.hpp"
#include "densq/config.hpp"
#include "densq/error.hpp"
#include "densq/generators.hpp"
#include "densq/measure.hpp"
#include "densq/multiscale.hpp"
#include "densq/riesz.hpp"
#include "densq/scale_grid.hpp"
#include "densq/smoothing.hpp"
#include "densq/sweep.hpp"

namespace densq {

/// Progress sink for long experiments; may be empty.
using ProgressLog = std::function<void(const std::string&)>;

namespace detail {

inline void log(const ProgressLog& sink, const std::string& msg) {
    if (sink) sink(msg);
}

inline bool near_integer(double s, double margin) { return std::abs(s - std::round(s)) < margin; }

inline double relative_change(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

/// Largest ratio between consecutive entries; < 1 means strictly decreasing.
inline double max_step_ratio(const std::vector<double>& v) {
    double worst = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) worst = std::max(worst, v[i] / v[i - 1]);
    return worst;
}

inline const double kBelowOne = std::nextafter(1.0, 0.0);
inline constexpr double kUnbounded = std::numeric_limits<double>::max();

} // namespace detail

// ---------------------------------------------------------------------------
// Comparability of the square function and the Wolff energy on Cantor measures

struct Theorem1Config {
    std::vector<double> s_list{0.5, 0.8, 1.2, 1.5};
    std::size_t dim = 2;
    std::size_t depth = 6;
    double q = 1.1;
    double kappa = 4.0;
    double spread_band = 20.0;
    double drift_band = 0.10;
    /// s within this distance of an integer is reported but not asserted.
    double near_integer_margin = 0.05;

    static Theorem1Config from_json(const nlohmann::json& j) {
        using detail::read_field;
        detail::reject_unknown(j, "config",
                               {"s_list", "dim", "depth", "q", "kappa", "spread_band", "drift_band",
                                "near_integer_margin"});
        Theorem1Config c;
        c.s_list = read_field(j, "config", "s_list", c.s_list);
        c.dim = read_field(j, "config", "dim", c.dim);
        c.depth = read_field(j, "config", "depth", c.depth);
        c.q = read_field(j, "config", "q", c.q);
        c.kappa = read_field(j, "config", "kappa", c.kappa);
        c.spread_band = read_field(j, "config", "spread_band", c.spread_band);
        c.drift_band = read_field(j, "config", "drift_band", c.drift_band);
        c.near_integer_margin = read_field(j, "config", "near_integer_margin", c.near_integer_margin);
        return c;
    }

    nlohmann::json to_json() const {
        return {{"s_list", s_list}, {"dim", dim}, {"depth", depth}, {"q", q}, {"kappa", kappa},
                {"spread_band", spread_band}, {"drift_band", drift_band},
                {"near_integer_margin", near_integer_margin}};
    }
};

struct CantorEnergies {
    double sf = 0.0;
    double wolff = 0.0;
};

inline CantorEnergies cantor_energies(std::size_t dim, double s, std::size_t depth, double q, double kappa) {
    const auto m = build_cantor(dim, s, depth);
    const BallIndex index(m, false);
    const auto grid = ScaleGrid::default_for(m, q);
    EnergyOptions opt;
    opt.kappa = kappa;
    return {square_function_energy(index, s, grid, 2.0, opt).total, wolff_energy(index, s, grid, 2.0, opt).total};
}

inline SweepResult run_theorem1(const Theorem1Config& cfg, const ProgressLog& progress = {}) {
    if (cfg.s_list.empty()) throw ConfigError("s_list", "must not be empty");
    for (double s : cfg.s_list) {
        if (s == std::round(s))
            throw ConfigError("s_list", "integer s = " + std::to_string(s) +
                                            " is outside the non-integer hypothesis; use the 'integer' experiment");
        if (!(s > 0.0) || !(s < static_cast<double>(cfg.dim))) throw ConfigError("s_list", "s must lie in (0, dim)");
    }
    SweepResult r;
    r.experiment = "theorem1";
    r.parameter = "s";
    r.parameters = cfg.s_list;
    r.config = cfg.to_json();
    std::vector<double> sf, wolff, ratio, prev_ratio;
    for (double s : cfg.s_list) {
        detail::log(progress, "theorem1: s = " + std::to_string(s));
        const auto e = cantor_energies(cfg.dim, s, cfg.depth, cfg.q, cfg.kappa);
        sf.push_back(e.sf);
        wolff.push_back(e.wolff);
        ratio.push_back(e.sf / e.wolff);
        if (cfg.depth > 0) {
            const auto p = cantor_energies(cfg.dim, s, cfg.depth - 1, cfg.q, cfg.kappa);
            prev_ratio.push_back(p.sf / p.wolff);
        }
    }
    r.add_series("square_function", sf);
    r.add_series("wolff", wolff);
    r.add_series("ratio", ratio);
    if (!prev_ratio.empty()) r.add_series("ratio_previous_depth", prev_ratio);

    double lo = detail::kUnbounded, hi = 0.0;
    for (std::size_t i = 0; i < ratio.size(); ++i) {
        if (detail::near_integer(cfg.s_list[i], cfg.near_integer_margin)) continue;
        lo = std::min(lo, ratio[i]);
        hi = std::max(hi, ratio[i]);
    }
    if (hi > 0.0) r.check("ratio_spread", hi / lo, 1.0, cfg.spread_band, true, "max/min of SF/Wolff across s");
    for (std::size_t i = 0; i < prev_ratio.size(); ++i) {
        const double s = cfg.s_list[i];
        r.check("depth_drift_s=" + std::to_string(s).substr(0, 6), std::abs(ratio[i] - prev_ratio[i]) / ratio[i], 0.0,
                cfg.drift_band, !detail::near_integer(s, cfg.near_integer_margin),
                "relative change of SF/Wolff from depth " + std::to_string(cfg.depth - 1) + " to " +
                    std::to_string(cfg.depth));
    }
    return r;
}

// ---------------------------------------------------------------------------
// Integer dimension: flat measures have vanishing square function

struct IntegerConfig {
    std::size_t k = 1;
    std::size_t dim = 2;
    double half_extent = 1.0;
    /// Lattice points per axis of the flat piece.
    std::vector<std::size_t> resolutions{1000, 2000, 4000, 8000};
    double q = 1.1;
    double ratio_band = 1e-3;
    double wolff_tolerance = 0.05;
    double widen_factor = 4.0;

    static IntegerConfig from_json(const nlohmann::json& j) {
        using detail::read_field;
        detail::reject_unknown(j, "config",
                               {"k", "dim", "half_extent", "resolutions", "q", "ratio_band", "wolff_tolerance",
                                "widen_factor"});
        IntegerConfig c;
        c.k = read_field(j, "config", "k", c.k);
        c.dim = read_field(j, "config", "dim", c.dim);
        c.half_extent = read_field(j, "config", "half_extent", c.half_extent);
        c.resolutions = read_field(j, "config", "resolutions", c.resolutions);
        c.q = read_field(j, "config", "q", c.q);
        c.ratio_band = read_field(j, "config", "ratio_band", c.ratio_band);
        c.wolff_tolerance = read_field(j, "config", "wolff_tolerance", c.wolff_tolerance);
        c.widen_factor = read_field(j, "config", "widen_factor", c.widen_factor);
        return c;
    }

    nlohmann::json to_json() const {
        return {{"k", k}, {"dim", dim}, {"half_extent", half_extent}, {"resolutions", resolutions}, {"q", q},
                {"ratio_band", ratio_band}, {"wolff_tolerance", wolff_tolerance}, {"widen_factor", widen_factor}};
    }
};

/// Volume of the unit ball in R^k.
inline double unit_ball_volume(std::size_t k) {
    const double kd = static_cast<double>(k);
    return std::pow(std::numbers::pi, kd / 2.0) / std::tgamma(kd / 2.0 + 1.0);
}

/// Flat k-planes: atoms within half_extent/2 of the origin are integrated over
/// r in [E/64, E/4] (and the narrower [E/64, E/(4 widen)]), so every ball of
/// radius 2r stays inside the lattice.
inline SweepResult run_integer_degeneracy(const IntegerConfig& cfg, const ProgressLog& progress = {}) {
    if (cfg.k < 1 || cfg.k >= cfg.dim) throw ConfigError("k", "need 1 <= k < dim");
    if (cfg.resolutions.empty()) throw ConfigError("resolutions", "must not be empty");
    if (!(cfg.widen_factor > 1.0)) throw ConfigError("widen_factor", "must exceed 1");
    const double E = cfg.half_extent;
    const double s = static_cast<double>(cfg.k);
    const auto wide = ScaleGrid::spanning(E / 64.0, E / 4.0, cfg.q);
    const auto narrow = ScaleGrid::spanning(E / 64.0, E / (4.0 * cfg.widen_factor), cfg.q);
    EnergyOptions opt;
    opt.tail = false;
    opt.window = AnalysisWindow{std::vector<double>(cfg.dim, 0.0), E / 2.0};

    SweepResult r;
    r.experiment = "integer";
    r.parameter = "spacing";
    r.config = cfg.to_json();
    std::vector<double> sf, wolff, ratio, ratio_narrow, expected;
    const double ck = unit_ball_volume(cfg.k);
    for (std::size_t n : cfg.resolutions) {
        if (n < 8) throw ConfigError("resolutions", "need at least 8 points per axis");
        const double h = 2.0 * E / static_cast<double>(n);
        detail::log(progress, "integer: spacing = " + std::to_string(h));
        const auto m = build_flat(cfg.dim, cfg.k, E, h);
        const BallIndex index(m, false);
        const auto sfw = square_function_energy(index, s, wide, 2.0, opt);
        const auto ww = wolff_energy(index, s, wide, 2.0, opt);
        const auto sfn = square_function_energy(index, s, narrow, 2.0, opt);
        const auto wn = wolff_energy(index, s, narrow, 2.0, opt);
        CompensatedSum window_mass;
        for (std::size_t i : detail::window_points(m, opt.window)) window_mass.add(m.weight(i));
        const double span = std::log(wide.radii().back() / wide.radii().front());
        r.parameters.push_back(h);
        sf.push_back(sfw.total);
        wolff.push_back(ww.total);
        ratio.push_back(sfw.total / ww.total);
        ratio_narrow.push_back(sfn.total / wn.total);
        expected.push_back(ck * ck * window_mass.value() * span);
    }
    r.add_series("square_function", sf, r.parameters.size() >= 4 && *std::min_element(sf.begin(), sf.end()) > 0.0);
    r.add_series("wolff", wolff);
    r.add_series("ratio", ratio);
    r.add_series("ratio_narrow_range", ratio_narrow);
    r.add_series("wolff_expected", expected);
    for (std::size_t i = 0; i < ratio.size(); ++i) {
        const std::string tag = "_n=" + std::to_string(cfg.resolutions[i]);
        r.check("ratio" + tag, ratio[i], 0.0, cfg.ratio_band, true, "SF/Wolff over the wide range");
        r.check("widening_decreases_ratio" + tag, ratio[i] / ratio_narrow[i], 0.0, detail::kBelowOne, true,
                "ratio(wide) / ratio(narrow); below 1 when widening the range lowers SF/Wolff");
        r.check("wolff_vs_log_range" + tag, std::abs(wolff[i] / expected[i] - 1.0), 0.0, cfg.wolff_tolerance, true,
                "|Wolff / (c_k^2 mass ln(range)) - 1|");
    }
    if (sf.size() >= 2)
        r.check("sf_decreases_with_spacing", detail::max_step_ratio(sf), 0.0, detail::kBelowOne, true,
                "largest SF(finer)/SF(coarser)");
    return r;
}

// ---------------------------------------------------------------------------
// The tent curves Gamma_alpha

struct CounterexampleConfig {
    std::vector<double> alphas;
    double half_extent = 3.0;
    double window = 1.0;
    double r_min = 0.25;
    double r_max = 1.0;
    double q = 1.1;
    double sf_spacing = 2.5e-5;
    double riesz_spacing = 2.5e-4;
    double riesz_q = 1.1;
    double riesz_kappa = 4.0;
    double beta_spacing = 2.5e-4;
    double beta_r_min = 0.01;
    double sf_slope_lo = 3.5, sf_slope_hi = 4.5;
    double riesz_slope_lo = 1.7, riesz_slope_hi = 2.3;
    double beta_slope_lo = 1.7, beta_slope_hi = 2.3;
    double gap_lo = 1.5, gap_hi = 2.5;
    double extent_tolerance = 0.05;
    bool include_beta = true;
    bool check_extent = true;

    CounterexampleConfig() {
        for (int k = 0; k <= 5; ++k) alphas.push_back(std::numbers::pi / 4.0 * std::ldexp(1.0, -k));
    }

    static CounterexampleConfig from_json(const nlohmann::json& j) {
        using detail::read_field;
        detail::reject_unknown(
            j, "config",
            {"alphas", "half_extent", "window", "r_min", "r_max", "q", "sf_spacing", "riesz_spacing", "riesz_q",
             "riesz_kappa", "beta_spacing", "beta_r_min", "sf_slope_band", "riesz_slope_band", "beta_slope_band",
             "gap_band", "extent_tolerance", "include_beta", "check_extent"});
        CounterexampleConfig c;
        auto band = [&](const char* key, double& lo, double& hi) {
            const auto v = read_field(j, "config", key, std::vector<double>{lo, hi});
            if (v.size() != 2 || !(v[0] <= v[1])) throw ConfigError(std::string("config.") + key, "expected [lo, hi]");
            lo = v[0];
            hi = v[1];
        };
        c.alphas = read_field(j, "config", "alphas", c.alphas);
        c.half_extent = read_field(j, "config", "half_extent", c.half_extent);
        c.window = read_field(j, "config", "window", c.window);
        c.r_min = read_field(j, "config", "r_min", c.r_min);
        c.r_max = read_field(j, "config", "r_max", c.r_max);
        c.q = read_field(j, "config", "q", c.q);
        c.sf_spacing = read_field(j, "config", "sf_spacing", c.sf_spacing);
        c.riesz_spacing = read_field(j, "config", "riesz_spacing", c.riesz_spacing);
        c.riesz_q = read_field(j, "config", "riesz_q", c.riesz_q);
        c.riesz_kappa = read_field(j, "config", "riesz_kappa", c.riesz_kappa);
        c.beta_spacing = read_field(j, "config", "beta_spacing", c.beta_spacing);
        c.beta_r_min = read_field(j, "config", "beta_r_min", c.beta_r_min);
        band("sf_slope_band", c.sf_slope_lo, c.sf_slope_hi);
        band("riesz_slope_band", c.riesz_slope_lo, c.riesz_slope_hi);
        band("beta_slope_band", c.beta_slope_lo, c.beta_slope_hi);
        band("gap_band", c.gap_lo, c.gap_hi);
        c.extent_tolerance = read_field(j, "config", "extent_tolerance", c.extent_tolerance);
        c.include_beta = read_field(j, "config", "include_beta", c.include_beta);
        c.check_extent = read_field(j, "config", "check_extent", c.check_extent);
        return c;
    }

    nlohmann::json to_json() const {
        return {{"alphas", alphas},
                {"half_extent", half_extent},
                {"window", window},
                {"r_min", r_min},
                {"r_max", r_max},
                {"q", q},
                {"sf_spacing", sf_spacing},
                {"riesz_spacing", riesz_spacing},
                {"riesz_q", riesz_q},
                {"riesz_kappa", riesz_kappa},
                {"beta_spacing", beta_spacing},
                {"beta_r_min", beta_r_min},
                {"sf_slope_band", {sf_slope_lo, sf_slope_hi}},
                {"riesz_slope_band", {riesz_slope_lo, riesz_slope_hi}},
                {"beta_slope_band", {beta_slope_lo, beta_slope_hi}},
                {"gap_band", {gap_lo, gap_hi}},
                {"extent_tolerance", extent_tolerance},
                {"include_beta", include_beta},
                {"check_extent", check_extent}};
    }

    void validate() const {
        if (alphas.size() < 4) throw ConfigError("alphas", "need at least 4 angles for a slope fit");
        for (double a : alphas)
            if (!(a > 0.0) || !(a <= std::numbers::pi / 4.0)) throw ConfigError("alphas", "angles must lie in (0, pi/4]");
        if (!(window > 0.0)) throw ConfigError("window", "must be positive");
        if (!(r_min > 0.0) || !(r_max > r_min)) throw ConfigError("r_max", "need 0 < r_min < r_max");
        // every ball the windowed functionals look at must stay inside the sampled curve
        if (window + 2.0 * r_max > half_extent + 1e-12)
            throw ConfigError("half_extent", "must be at least window + 2 * r_max");
        if (!(beta_r_min > 0.0) || !(beta_r_min < r_max)) throw ConfigError("beta_r_min", "need 0 < beta_r_min < r_max");
    }
};

struct CurveEnergies {
    double sf = 0.0;
    double riesz = 0.0;
    double beta = 0.0;
    double sf_mu_alpha = 0.0;
};

inline CurveEnergies counterexample_energies(const CounterexampleConfig& cfg, double alpha, double half_extent,
                                             bool with_mu_alpha_sf) {
    CurveEnergies e;
    const AnalysisWindow window{{0.0, 0.0}, cfg.window};
    const auto sf_grid = ScaleGrid::spanning(cfg.r_min, cfg.r_max, cfg.q);
    EnergyOptions opt;
    opt.tail = false;
    opt.window = window;
    {
        const auto m = build_gamma_curve(alpha, half_extent, cfg.sf_spacing, CurveWeighting::hausdorff);
        const BallIndex index(m, false);
        e.sf = square_function_energy(index, 1.0, sf_grid, 2.0, opt).total;
    }
    if (with_mu_alpha_sf && cfg.include_beta) {
        const auto m = build_gamma_curve(alpha, half_extent, cfg.sf_spacing, CurveWeighting::mu_alpha);
        const BallIndex index(m, false);
        e.sf_mu_alpha = square_function_energy(index, 1.0, sf_grid, 2.0, opt).total;
    }
    {
        const auto m = build_gamma_curve(alpha, half_extent, cfg.riesz_spacing, CurveWeighting::hausdorff);
        const BallIndex index(m, false);
        RieszOptions ro;
        ro.kappa = cfg.riesz_kappa;
        ro.window = window;
        const auto grid = ScaleGrid::spanning(cfg.riesz_kappa * m.resolution(), cfg.r_max, cfg.riesz_q);
        e.riesz = sup_riesz_energy(index, 1.0, grid, ro).energy_at_best;
    }
    if (cfg.include_beta) {
        const auto m = build_gamma_curve(alpha, half_extent, cfg.beta_spacing, CurveWeighting::mu_alpha);
        const BallIndex index(m, true);
        BetaEnergyOptions bo;
        bo.window = window;
        bo.extend = false;
        e.beta = beta_energy(index, ScaleGrid::spanning(cfg.beta_r_min, cfg.r_max, cfg.q), 2.0, bo).total;
    }
    return e;
}

/// For each alpha: windowed square-function and sup-Riesz energies of the arc
/// length on Gamma_alpha, and the beta_2 and square-function energies of
/// mu_alpha; slopes against sin(alpha); stability when half_extent doubles.
inline SweepResult run_counterexample(const CounterexampleConfig& cfg, const ProgressLog& progress = {}) {
    cfg.validate();
    SweepResult r;
    r.experiment = "counterexample";
    r.parameter = "sin_alpha";
    r.config = cfg.to_json();
    std::vector<CurveEnergies> base, doubled;
    for (double a : cfg.alphas) {
        detail::log(progress, "counterexample: alpha = " + std::to_string(a));
        r.parameters.push_back(std::sin(a));
        base.push_back(counterexample_energies(cfg, a, cfg.half_extent, true));
        if (cfg.check_extent) doubled.push_back(counterexample_energies(cfg, a, 2.0 * cfg.half_extent, false));
    }
    auto column = [](const std::vector<CurveEnergies>& v, double CurveEnergies::*f) {
        std::vector<double> out;
        for (const auto& e : v) out.push_back(e.*f);
        return out;
    };
    const auto sf = column(base, &CurveEnergies::sf);
    const auto riesz = column(base, &CurveEnergies::riesz);
    std::vector<double> sf_over_riesz(sf.size());
    for (std::size_t i = 0; i < sf.size(); ++i) sf_over_riesz[i] = sf[i] / riesz[i];
    const SlopeFit fit_sf = *r.add_series("square_function", sf, true).fit;
    const SlopeFit fit_riesz = *r.add_series("riesz_sup", riesz, true).fit;
    r.add_series("sf_over_riesz", sf_over_riesz, true);
    r.details["alphas"] = cfg.alphas;
    r.check("sf_slope", fit_sf.slope, cfg.sf_slope_lo, cfg.sf_slope_hi, true, "log-log slope of SF energy vs sin(alpha)");
    r.check("riesz_slope", fit_riesz.slope, cfg.riesz_slope_lo, cfg.riesz_slope_hi, true,
            "log-log slope of sup Riesz energy vs sin(alpha)");
    r.check("sf_over_riesz_decreasing", detail::max_step_ratio(sf_over_riesz), 0.0, detail::kBelowOne, true,
            "largest ratio between consecutive SF/Riesz values as alpha decreases");

    if (cfg.include_beta) {
        const auto beta = column(base, &CurveEnergies::beta);
        const auto sf_mu = column(base, &CurveEnergies::sf_mu_alpha);
        std::vector<double> sf_over_beta(sf.size());
        for (std::size_t i = 0; i < sf.size(); ++i) sf_over_beta[i] = sf_mu[i] / beta[i];
        const SlopeFit fit_beta = *r.add_series("beta2_mu_alpha", beta, true).fit;
        const SlopeFit fit_sf_mu = *r.add_series("square_function_mu_alpha", sf_mu, true).fit;
        r.add_series("sf_over_beta_mu_alpha", sf_over_beta, true);
        r.check("beta_slope", fit_beta.slope, cfg.beta_slope_lo, cfg.beta_slope_hi, true,
                "log-log slope of beta_2 energy of mu_alpha vs sin(alpha)");
        r.check("sf_beta_slope_gap", fit_sf_mu.slope - fit_beta.slope, cfg.gap_lo, cfg.gap_hi, true,
                "slope(SF of mu_alpha) - slope(beta_2 energy of mu_alpha)");
        r.check("sf_over_beta_decreasing", detail::max_step_ratio(sf_over_beta), 0.0, detail::kBelowOne, true,
                "largest ratio between consecutive SF/beta values as alpha decreases");
    }
    if (cfg.check_extent) {
        const auto sf2 = column(doubled, &CurveEnergies::sf);
        const auto riesz2 = column(doubled, &CurveEnergies::riesz);
        r.add_series("square_function_doubled_extent", sf2);
        r.add_series("riesz_sup_doubled_extent", riesz2);
        double worst_sf = 0.0, worst_riesz = 0.0, worst_beta = 0.0;
        for (std::size_t i = 0; i < sf.size(); ++i) {
            worst_sf = std::max(worst_sf, detail::relative_change(sf[i], sf2[i]));
            worst_riesz = std::max(worst_riesz, detail::relative_change(riesz[i], riesz2[i]));
        }
        r.check("extent_stability_sf", worst_sf, 0.0, cfg.extent_tolerance, true,
                "largest relative change of SF when half_extent doubles");
        r.check("extent_stability_riesz", worst_riesz, 0.0, cfg.extent_tolerance, true,
                "largest relative change of sup Riesz when half_extent doubles");
        if (cfg.include_beta) {
            const auto beta2 = column(doubled, &CurveEnergies::beta);
            const auto beta = column(base, &CurveEnergies::beta);
            r.add_series("beta2_mu_alpha_doubled_extent", beta2);
            for (std::size_t i = 0; i < beta.size(); ++i)
                worst_beta = std::max(worst_beta, detail::relative_change(beta[i], beta2[i]));
            r.check("extent_stability_beta", worst_beta, 0.0, cfg.extent_tolerance, true,
                    "largest relative change of beta_2 energy when half_extent doubles");
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Small s: sup Riesz, Wolff and square-function energies on a Cantor measure

struct CorollaryConfig {
    double s = 0.5;
    std::size_t dim = 2;
    std::size_t depth = 5;
    double q = 1.1;
    double kappa = 4.0;
    double band_lo = 1.0 / 30.0;
    double band_hi = 30.0;
    double drift_band = 0.15;
    double near_integer_margin = 0.05;
    std::size_t max_radii = 64;

    static CorollaryConfig from_json(const nlohmann::json& j) {
        using detail::read_field;
        detail::reject_unknown(j, "config",
                               {"s", "dim", "depth", "q", "kappa", "band", "drift_band", "near_integer_margin",
                                "max_radii"});
        CorollaryConfig c;
        c.s = read_field(j, "config", "s", c.s);
        c.dim = read_field(j, "config", "dim", c.dim);
        c.depth = read_field(j, "config", "depth", c.depth);
        c.q = read_field(j, "config", "q", c.q);
        c.kappa = read_field(j, "config", "kappa", c.kappa);
        const auto band = read_field(j, "config", "band", std::vector<double>{c.band_lo, c.band_hi});
        if (band.size() != 2 || !(band[0] <= band[1])) throw ConfigError("config.band", "expected [lo, hi]");
        c.band_lo = band[0];
        c.band_hi = band[1];
        c.drift_band = read_field(j, "config", "drift_band", c.drift_band);
        c.near_integer_margin = read_field(j, "config", "near_integer_margin", c.near_integer_margin);
        c.max_radii = read_field(j, "config", "max_radii", c.max_radii);
        return c;
    }

    nlohmann::json to_json() const {
        return {{"s", s}, {"dim", dim}, {"depth", depth}, {"q", q}, {"kappa", kappa}, {"band", {band_lo, band_hi}},
                {"drift_band", drift_band}, {"near_integer_margin", near_integer_margin}, {"max_radii", max_radii}};
    }
};

inline SweepResult run_corollary_small_s(const CorollaryConfig& cfg, const ProgressLog& progress = {}) {
    if (!(cfg.s > 0.0) || !(cfg.s < 1.0)) throw ConfigError("s", "must lie in (0, 1)");
    if (cfg.depth < 1) throw ConfigError("depth", "must be at least 1 (the previous depth is compared)");
    SweepResult r;
    r.experiment = "corollary";
    r.parameter = "depth";
    r.config = cfg.to_json();
    std::vector<double> riesz, wolff, sf;
    for (std::size_t depth : {cfg.depth - 1, cfg.depth}) {
        detail::log(progress, "corollary: depth = " + std::to_string(depth));
        const auto m = build_cantor(cfg.dim, cfg.s, depth);
        const BallIndex index(m, false);
        const auto grid = ScaleGrid::default_for(m, cfg.q);
        EnergyOptions opt;
        opt.kappa = cfg.kappa;
        RieszOptions ro;
        ro.kappa = cfg.kappa;
        ro.max_radii = cfg.max_radii;
        r.parameters.push_back(static_cast<double>(depth));
        riesz.push_back(sup_riesz_energy(index, cfg.s, grid, ro).energy_at_best);
        wolff.push_back(wolff_energy(index, cfg.s, grid, 2.0, opt).total);
        sf.push_back(square_function_energy(index, cfg.s, grid, 2.0, opt).total);
    }
    r.add_series("riesz_sup", riesz);
    r.add_series("wolff", wolff);
    r.add_series("square_function", sf);
    const bool asserted = !detail::near_integer(cfg.s, cfg.near_integer_margin);
    struct Pair {
        const char* name;
        const std::vector<double>& a;
        const std::vector<double>& b;
    };
    for (const Pair& p : {Pair{"riesz_over_wolff", riesz, wolff}, Pair{"riesz_over_sf", riesz, sf},
                          Pair{"wolff_over_sf", wolff, sf}}) {
        const double now = p.a[1] / p.b[1];
        const double before = p.a[0] / p.b[0];
        r.check(p.name, now, cfg.band_lo, cfg.band_hi, asserted, "ratio at the final depth");
        r.check(std::string(p.name) + "_depth_drift", std::abs(now - before) / now, 0.0, cfg.drift_band, asserted,
                "relative change from the previous depth");
    }
    return r;
}

// ---------------------------------------------------------------------------
// Convolution identity for smoothed density differences

struct IdentityConfig {
    std::size_t n_measures = 20;
    std::size_t n_queries = 20;
    std::size_t atoms = 100;
    std::size_t dim = 2;
    std::vector<std::string> profiles{"gaussian", "smooth_bump"};
    std::size_t quad_points = 512;
    double tolerance = 1e-6;
    std::uint64_t seed = 1;

    static IdentityConfig from_json(const nlohmann::json& j) {
        using detail::read_field;
        detail::reject_unknown(j, "config",
                               {"n_measures", "n_queries", "atoms", "dim", "profiles", "quad_points", "tolerance",
                                "seed"});
        IdentityConfig c;
        c.n_measures = read_field(j, "config", "n_measures", c.n_measures);
        c.n_queries = read_field(j, "config", "n_queries", c.n_queries);
        c.atoms = read_field(j, "config", "atoms", c.atoms);
        c.dim = read_field(j, "config", "dim", c.dim);
        c.profiles = read_field(j, "config", "profiles", c.profiles);
        c.quad_points = read_field(j, "config", "quad_points", c.quad_points);
        c.tolerance = read_field(j, "config", "tolerance", c.tolerance);
        c.seed = read_field<std::size_t>(j, "config", "seed", c.seed);
        return c;
    }

    nlohmann::json to_json() const {
        return {{"n_measures", n_measures}, {"n_queries", n_queries}, {"atoms", atoms},     {"dim", dim},
                {"profiles", profiles},     {"quad_points", quad_points}, {"tolerance", tolerance}, {"seed", seed}};
    }
};

inline RadialProfile profile_by_name(const std::string& name) {
    if (name == "gaussian") return RadialProfile::gaussian();
    if (name == "smooth_bump") return RadialProfile::smooth_bump();
    if (name == "sharp_step") return RadialProfile::sharp_step(50.0);
    if (name == "zero") return RadialProfile::zero();
    throw ConfigError("profiles", "unknown profile '" + name + "'");
}

/// Random atomic measures in the unit cube, random centers in [-0.5, 1.5]^d,
/// radii log-uniform in [0.05, 2] and exponents uniform in (0.1, d - 0.1).
inline SweepResult run_identity_suite(const IdentityConfig& cfg, const ProgressLog& progress = {}) {
    if (cfg.n_measures == 0 || cfg.n_queries == 0 || cfg.atoms == 0)
        throw ConfigError("n_measures", "counts must be positive");
    if (cfg.dim == 0) throw ConfigError("dim", "must be positive");
    if (cfg.quad_points < 16) throw ConfigError("quad_points", "must be at least 16");
    std::vector<RadialProfile> profiles;
    for (const auto& n : cfg.profiles) profiles.push_back(profile_by_name(n));
    if (profiles.empty()) throw ConfigError("profiles", "must not be empty");

    SweepResult r;
    r.experiment = "identity";
    r.parameter = "query";
    r.config = cfg.to_json();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<double>> residuals(profiles.size());
    const double d = static_cast<double>(cfg.dim);
    std::size_t q = 0;
    for (std::size_t mi = 0; mi < cfg.n_measures; ++mi) {
        detail::log(progress, "identity: measure " + std::to_string(mi));
        std::vector<double> coords(cfg.atoms * cfg.dim), weights(cfg.atoms);
        for (double& c : coords) c = unit(rng);
        for (double& w : weights) w = 0.1 + 0.9 * unit(rng);
        const WeightedPointMeasure m(cfg.dim, std::move(coords), std::move(weights));
        for (std::size_t qi = 0; qi < cfg.n_queries; ++qi, ++q) {
            std::vector<double> x(cfg.dim);
            for (double& c : x) c = -0.5 + 2.0 * unit(rng);
            const double R = 0.05 * std::pow(40.0, unit(rng));
            const double s = 0.1 + (d - 0.2) * unit(rng);
            r.parameters.push_back(static_cast<double>(q + 1));
            for (std::size_t p = 0; p < profiles.size(); ++p)
                residuals[p].push_back(verify_convolution_identity(m, profiles[p], x, R, s, cfg.quad_points).residual);
        }
    }
    for (std::size_t p = 0; p < profiles.size(); ++p) {
        const double worst = *std::max_element(residuals[p].begin(), residuals[p].end());
        r.add_series("residual_" + cfg.profiles[p], residuals[p]);
        r.check("max_residual_" + cfg.profiles[p], worst, 0.0, cfg.tolerance, true,
                "largest relative residual of the convolution identity");
    }
    return r;
}

} // namespace densq
