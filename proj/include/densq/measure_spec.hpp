#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "densq/config.hpp"
#include "densq/error.hpp"
#include "densq/generators.hpp"
#include "densq/measure.hpp"

namespace densq {

struct CantorParams {
    std::size_t dim = 2;
    double s = 0.5;
    std::size_t depth = 3;
    std::size_t branching = 0; // 0 = 2^dim
};

struct FlatParams {
    std::size_t dim = 2;
    std::size_t k = 1;
    double half_extent = 1.0;
    double spacing = 0.01;
    double jitter = 0.0;
};

struct DiracParams {
    std::size_t dim = 2;
    std::vector<double> location; // empty = origin
    double mass = 1.0;
};

struct PolylineParams {
    std::size_t dim = 2;
    std::vector<std::vector<double>> vertices;
    double spacing = 0.01;
    std::vector<double> densities; // empty = unit density
};

struct GammaCurveParams {
    double alpha = 0.785398163397448;
    double half_extent = 2.0;
    double spacing = 1.0 / 64.0;
};

enum class MeasureKind { cantor, flat, dirac, polyline, gamma_curve, mu_alpha };

inline std::string_view to_string(MeasureKind k) {
    switch (k) {
    case MeasureKind::cantor: return "cantor";
    case MeasureKind::flat: return "flat";
    case MeasureKind::dirac: return "dirac";
    case MeasureKind::polyline: return "polyline";
    case MeasureKind::gamma_curve: return "gamma_curve";
    case MeasureKind::mu_alpha: return "mu_alpha";
    }
    return "?";
}

/// Declarative description of a generated measure. `gamma_curve` and
/// `mu_alpha` share GammaCurveParams and differ only in the tent weighting.
struct MeasureSpec {
    MeasureKind kind = MeasureKind::cantor;
    std::variant<CantorParams, FlatParams, DiracParams, PolylineParams, GammaCurveParams> params;
    std::uint64_t seed = 0;
    std::size_t point_budget = kDefaultPointBudget;
};


inline nlohmann::json to_json(const MeasureSpec& spec) {
    nlohmann::json p = nlohmann::json::object();
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, CantorParams>) {
                p = {{"dim", v.dim}, {"s", v.s}, {"depth", v.depth}, {"branching", v.branching}};
            } else if constexpr (std::is_same_v<T, FlatParams>) {
                p = {{"dim", v.dim}, {"k", v.k}, {"half_extent", v.half_extent}, {"spacing", v.spacing},
                     {"jitter", v.jitter}};
            } else if constexpr (std::is_same_v<T, DiracParams>) {
                p = {{"dim", v.dim}, {"location", v.location}, {"mass", v.mass}};
            } else if constexpr (std::is_same_v<T, PolylineParams>) {
                p = {{"dim", v.dim}, {"vertices", v.vertices}, {"spacing", v.spacing}, {"densities", v.densities}};
            } else {
                p = {{"alpha", v.alpha}, {"half_extent", v.half_extent}, {"spacing", v.spacing}};
            }
        },
        spec.params);
    return {{"kind", std::string(to_string(spec.kind))},
            {"params", p},
            {"seed", spec.seed},
            {"point_budget", spec.point_budget}};
}

/// Parses and validates a MeasureSpec. Unknown keys and ill-typed values
/// raise ConfigError naming the offending field.
inline MeasureSpec measure_spec_from_json(const nlohmann::json& j) {
    using detail::read_field;
    detail::reject_unknown(j, "spec", {"kind", "params", "seed", "point_budget"});
    MeasureSpec spec;
    const auto kind = read_field<std::string>(j, "spec", "kind", "", true);
    const nlohmann::json params = j.contains("params") ? j.at("params") : nlohmann::json::object();
    spec.seed = read_field<std::size_t>(j, "spec", "seed", 0);
    spec.point_budget = read_field<std::size_t>(j, "spec", "point_budget", kDefaultPointBudget);
    if (spec.point_budget == 0) throw ConfigError("spec.point_budget", "must be positive");
    const std::string_view w = "params";
    if (kind == "cantor") {
        detail::reject_unknown(params, w, {"dim", "s", "depth", "branching"});
        CantorParams c;
        c.dim = read_field<std::size_t>(params, w, "dim", c.dim);
        c.s = read_field<double>(params, w, "s", c.s, true);
        c.depth = read_field<std::size_t>(params, w, "depth", c.depth, true);
        c.branching = read_field<std::size_t>(params, w, "branching", c.branching);
        if (c.dim == 0) throw ConfigError("params.dim", "must be positive");
        if (!(c.s > 0.0) || !(c.s < static_cast<double>(c.dim))) throw ConfigError("params.s", "must lie in (0, dim)");
        spec.kind = MeasureKind::cantor;
        spec.params = c;
    } else if (kind == "flat") {
        detail::reject_unknown(params, w, {"dim", "k", "half_extent", "spacing", "jitter"});
        FlatParams f;
        f.dim = read_field<std::size_t>(params, w, "dim", f.dim);
        f.k = read_field<std::size_t>(params, w, "k", f.k);
        f.half_extent = read_field<double>(params, w, "half_extent", f.half_extent, true);
        f.spacing = read_field<double>(params, w, "spacing", f.spacing, true);
        f.jitter = read_field<double>(params, w, "jitter", f.jitter);
        if (f.k < 1 || f.k >= f.dim) throw ConfigError("params.k", "need 1 <= k < dim");
        if (!(f.half_extent > 0.0)) throw ConfigError("params.half_extent", "must be positive");
        if (!(f.spacing > 0.0)) throw ConfigError("params.spacing", "must be positive");
        if (f.jitter < 0.0 || f.jitter >= 1.0) throw ConfigError("params.jitter", "must lie in [0, 1)");
        spec.kind = MeasureKind::flat;
        spec.params = f;
    } else if (kind == "dirac") {
        detail::reject_unknown(params, w, {"dim", "location", "mass"});
        DiracParams d;
        d.dim = read_field<std::size_t>(params, w, "dim", d.dim);
        d.location = read_field<std::vector<double>>(params, w, "location", {});
        d.mass = read_field<double>(params, w, "mass", d.mass);
        if (d.dim == 0) throw ConfigError("params.dim", "must be positive");
        if (!d.location.empty() && d.location.size() != d.dim)
            throw ConfigError("params.location", "must have dim coordinates");
        if (!(d.mass > 0.0)) throw ConfigError("params.mass", "must be positive");
        spec.kind = MeasureKind::dirac;
        spec.params = d;
    } else if (kind == "polyline") {
        detail::reject_unknown(params, w, {"dim", "vertices", "spacing", "densities"});
        PolylineParams pl;
        pl.dim = read_field<std::size_t>(params, w, "dim", pl.dim);
        pl.vertices = read_field<std::vector<std::vector<double>>>(params, w, "vertices", {}, true);
        pl.spacing = read_field<double>(params, w, "spacing", pl.spacing, true);
        pl.densities = read_field<std::vector<double>>(params, w, "densities", {});
        if (pl.vertices.size() < 2) throw ConfigError("params.vertices", "need at least two vertices");
        for (const auto& v : pl.vertices)
            if (v.size() != pl.dim) throw ConfigError("params.vertices", "every vertex needs dim coordinates");
        if (!(pl.spacing > 0.0)) throw ConfigError("params.spacing", "must be positive");
        if (!pl.densities.empty() && pl.densities.size() + 1 != pl.vertices.size())
            throw ConfigError("params.densities", "need one density per segment");
        spec.kind = MeasureKind::polyline;
        spec.params = pl;
    } else if (kind == "gamma_curve" || kind == "mu_alpha") {
        detail::reject_unknown(params, w, {"alpha", "half_extent", "spacing"});
        GammaCurveParams g;
        g.alpha = read_field<double>(params, w, "alpha", g.alpha, true);
        g.half_extent = read_field<double>(params, w, "half_extent", g.half_extent);
        g.spacing = read_field<double>(params, w, "spacing", g.spacing);
        if (!(g.alpha > 0.0) || !(g.alpha <= std::numbers::pi / 4.0))
            throw ConfigError("params.alpha", "must lie in (0, pi/4]");
        if (!(g.half_extent >= 1.0)) throw ConfigError("params.half_extent", "must be >= 1");
        if (!(g.spacing > 0.0) || !(g.spacing <= 1.0 / 16.0))
            throw ConfigError("params.spacing", "must lie in (0, 1/16]");
        spec.kind = kind == "mu_alpha" ? MeasureKind::mu_alpha : MeasureKind::gamma_curve;
        spec.params = g;
    } else {
        throw ConfigError("spec.kind", "unknown measure kind '" + kind + "'");
    }
    return spec;
}

/// Runs the generator described by `spec`.
inline WeightedPointMeasure generate(const MeasureSpec& spec) {
    return std::visit(
        [&](const auto& v) -> WeightedPointMeasure {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, CantorParams>) {
                return build_cantor(v.dim, v.s, v.depth, v.branching, spec.point_budget);
            } else if constexpr (std::is_same_v<T, FlatParams>) {
                return build_flat(v.dim, v.k, v.half_extent, v.spacing, v.jitter, spec.seed, spec.point_budget);
            } else if constexpr (std::is_same_v<T, DiracParams>) {
                return build_dirac(v.dim, v.location, v.mass);
            } else if constexpr (std::is_same_v<T, PolylineParams>) {
                std::vector<double> flat;
                for (const auto& p : v.vertices) flat.insert(flat.end(), p.begin(), p.end());
                return build_polyline(v.dim, flat, v.spacing, v.densities, spec.point_budget);
            } else {
                return build_gamma_curve(v.alpha, v.half_extent, v.spacing,
                                         spec.kind == MeasureKind::mu_alpha ? CurveWeighting::mu_alpha
                                                                            : CurveWeighting::hausdorff,
                                         spec.point_budget);
            }
        },
        spec.params);
}

} // namespace densq
