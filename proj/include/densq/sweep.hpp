#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "densq/error.hpp"
#include "densq/io.hpp"

namespace densq {

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// Root-mean-square residual of the fit in (ln x, ln y).
    double residual = 0.0;
    std::size_t points = 0;
};

/// Least-squares line through (ln x, ln y).
inline SlopeFit fit_loglog_slope(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw DomainError("slope fit needs equally many x and y values");
    if (xs.size() < 4) throw DomainError("slope fit needs at least 4 points");
    const std::size_t n = xs.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw DomainError("slope fit needs positive values");
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(ys[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) throw DomainError("slope fit needs at least two distinct x values");
    SlopeFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = ly[i] - (f.intercept + f.slope * lx[i]);
        ss += e * e;
    }
    f.residual = std::sqrt(ss / static_cast<double>(n));
    f.points = n;
    return f;
}

/// One pass/fail criterion with its band. Checks with asserted == false are
/// reported but do not affect the verdict.
struct Check {
    std::string name;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool passed = false;
    bool asserted = true;
    std::string detail;
};

struct Series {
    std::string name;
    std::vector<double> values;
    std::optional<SlopeFit> fit;
};

struct SweepResult {
    std::string experiment;
    std::string parameter;
    std::vector<double> parameters;
    std::vector<Series> series;
    std::vector<Check> checks;
    nlohmann::json config = nlohmann::json::object();
    nlohmann::json details = nlohmann::json::object();

    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed || !c.asserted; });
    }

    std::vector<std::string> failures() const {
        std::vector<std::string> out;
        for (const auto& c : checks)
            if (c.asserted && !c.passed) out.push_back(c.name);
        return out;
    }

    Check& check(std::string name, double value, double lo, double hi, bool asserted = true, std::string detail = {}) {
        const bool ok = std::isfinite(value) && value >= lo && value <= hi;
        checks.push_back({std::move(name), value, lo, hi, ok, asserted, std::move(detail)});
        return checks.back();
    }

    Series& add_series(std::string name, std::vector<double> values, bool fit = false) {
        Series s{std::move(name), std::move(values), std::nullopt};
        if (fit) s.fit = fit_loglog_slope(parameters, s.values);
        series.push_back(std::move(s));
        return series.back();
    }

    const Series& get(const std::string& name) const {
        for (const auto& s : series)
            if (s.name == name) return s;
        throw DomainError("no series named " + name);
    }

    nlohmann::json to_json() const {
        nlohmann::json ser = nlohmann::json::array();
        for (const auto& s : series) {
            nlohmann::json j = {{"name", s.name}, {"values", s.values}};
            if (s.fit)
                j["fit"] = {{"slope", s.fit->slope},
                            {"intercept", s.fit->intercept},
                            {"residual", s.fit->residual},
                            {"points", s.fit->points}};
            ser.push_back(j);
        }
        nlohmann::json chk = nlohmann::json::array();
        for (const auto& c : checks) {
            nlohmann::json j = {{"name", c.name},     {"value", c.value},       {"band", {c.lo, c.hi}},
                                {"passed", c.passed}, {"asserted", c.asserted}};
            if (!c.detail.empty()) j["detail"] = c.detail;
            chk.push_back(j);
        }
        return {{"experiment", experiment}, {"parameter", parameter}, {"parameters", parameters},
                {"series", ser},            {"checks", chk},         {"passed", passed()},
                {"failures", failures()},   {"config", config},      {"details", details}};
    }

    /// One row per parameter value, one column per series.
    std::string raw_csv() const {
        std::ostringstream os;
        os.precision(17);
        os << parameter;
        for (const auto& s : series) os << ',' << s.name;
        os << '\n';
        for (std::size_t i = 0; i < parameters.size(); ++i) {
            os << parameters[i];
            for (const auto& s : series) {
                os << ',';
                if (i < s.values.size()) os << s.values[i];
            }
            os << '\n';
        }
        return os.str();
    }

    /// Log-log scatter of every series with positive values, with the fitted
    /// line drawn for series that carry a fit.
    std::string plot_svg() const {
        constexpr double W = 640, H = 440, L = 80, R = 180, T = 40, B = 60;
        double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
        for (double x : parameters)
            if (x > 0.0) {
                x0 = std::min(x0, std::log10(x));
                x1 = std::max(x1, std::log10(x));
            }
        for (const auto& s : series)
            for (std::size_t i = 0; i < s.values.size() && i < parameters.size(); ++i)
                if (s.values[i] > 0.0 && parameters[i] > 0.0) {
                    y0 = std::min(y0, std::log10(s.values[i]));
                    y1 = std::max(y1, std::log10(s.values[i]));
                }
        std::ostringstream os;
        os.precision(6);
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
           << W << ' ' << H << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        os << "<text x=\"" << L << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">" << experiment
           << "</text>\n";
        if (x0 > x1 || y0 > y1) {
            os << "<text x=\"" << L << "\" y=\"" << H / 2 << "\" font-family=\"sans-serif\">no positive data</text>\n</svg>\n";
            return os.str();
        }
        if (x1 - x0 < 1e-12) { x0 -= 0.5; x1 += 0.5; }
        if (y1 - y0 < 1e-12) { y0 -= 0.5; y1 += 0.5; }
        auto px = [&](double lx) { return L + (lx - x0) / (x1 - x0) * (W - L - R); };
        auto py = [&](double ly) { return H - B - (ly - y0) / (y1 - y0) * (H - T - B); };
        os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
           << "\" stroke=\"black\"/>\n";
        os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
           << "\" stroke=\"black\"/>\n";
        for (int k = 0; k <= 4; ++k) {
            const double lx = x0 + (x1 - x0) * k / 4.0;
            const double ly = y0 + (y1 - y0) * k / 4.0;
            os << "<text x=\"" << px(lx) << "\" y=\"" << H - B + 18
               << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">1e" << lx << "</text>\n";
            os << "<text x=\"" << L - 6 << "\" y=\"" << py(ly) + 4
               << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">1e" << ly << "</text>\n";
        }
        os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 14
           << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" << parameter
           << " (log scale)</text>\n";
        os << "<text x=\"18\" y=\"" << (T + H - B) / 2 << "\" font-family=\"sans-serif\" font-size=\"13\" "
           << "text-anchor=\"middle\" transform=\"rotate(-90 18 " << (T + H - B) / 2
           << ")\">value (log scale)</text>\n";
        static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2",
                                       "#7f7f7f"};
        std::size_t ci = 0;
        double legend_y = T + 10;
        for (const auto& s : series) {
            const char* c = colors[ci++ % 8];
            bool any = false;
            for (std::size_t i = 0; i < s.values.size() && i < parameters.size(); ++i) {
                if (!(s.values[i] > 0.0) || !(parameters[i] > 0.0)) continue;
                any = true;
                os << "<circle cx=\"" << px(std::log10(parameters[i])) << "\" cy=\"" << py(std::log10(s.values[i]))
                   << "\" r=\"3.5\" fill=\"" << c << "\"/>\n";
            }
            if (!any) continue;
            if (s.fit) {
                auto fy = [&](double lx) { return (s.fit->intercept + s.fit->slope * lx * std::log(10.0)) / std::log(10.0); };
                os << "<line x1=\"" << px(x0) << "\" y1=\"" << py(fy(x0)) << "\" x2=\"" << px(x1) << "\" y2=\""
                   << py(fy(x1)) << "\" stroke=\"" << c << "\" stroke-dasharray=\"5,3\"/>\n";
            }
            os << "<circle cx=\"" << W - R + 16 << "\" cy=\"" << legend_y << "\" r=\"4\" fill=\"" << c << "\"/>\n";
            os << "<text x=\"" << W - R + 26 << "\" y=\"" << legend_y + 4
               << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.name;
            if (s.fit) os << " (slope " << s.fit->slope << ")";
            os << "</text>\n";
            legend_y += 18;
        }
        os << "</svg>\n";
        return os.str();
    }
};

/// Writes result.json, raw.csv and plot.svg into out_dir.
inline void write_sweep_outputs(const SweepResult& r, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_file_atomic(out_dir / "result.json", r.to_json().dump(2) + "\n");
    write_file_atomic(out_dir / "raw.csv", r.raw_csv());
    write_file_atomic(out_dir / "plot.svg", r.plot_svg());
}

} // namespace densq
