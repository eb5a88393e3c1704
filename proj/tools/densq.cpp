#include <densq.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

constexpr int kExitPass = 0;
constexpr int kExitBandFailure = 1;
constexpr int kExitUsage = 2;

json read_json_file(const std::string& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) throw densq::ConfigError(what, "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw densq::ConfigError(what, "'" + path + "' is not valid JSON: " + e.what());
    }
}

struct GenArgs {
    std::string spec_path;
};

int cmd_gen(const GenArgs& a, const std::string& out) {
    if (out.empty()) throw densq::ConfigError("out", "gen needs --out for the measure CSV");
    const densq::MeasureSpec spec = densq::measure_spec_from_json(read_json_file(a.spec_path, "spec"));
    const densq::WeightedPointMeasure m = densq::generate(spec);
    densq::save_measure_csv(out, m);
    std::cout << "N=" << m.size() << "\n"
              << "total_mass=" << m.total_mass() << "\n"
              << "min_spacing=" << m.min_spacing() << "\n"
              << "support_radius=" << m.support_radius() << "\n";
    return kExitPass;
}

// Flags given on the command line; anything unset falls back to the config file, then to defaults.
struct EnergyArgs {
    std::string config_path;
    std::optional<std::string> measure;
    std::optional<std::string> kind;
    std::optional<double> s;
    std::optional<double> p;
    std::optional<double> r_min;
    std::optional<double> r_max;
    std::optional<double> q;
    std::optional<double> kappa;
    std::optional<std::vector<double>> window_center;
    std::optional<double> window_radius;
    std::optional<std::string> per_point;
};

struct EnergyConfig {
    std::string measure;
    std::string kind;
    std::optional<double> s;
    double p = 2.0;
    std::optional<double> r_min;
    std::optional<double> r_max;
    double q = 1.1;
    double kappa = 4.0;
    std::optional<std::vector<double>> window_center;
    std::optional<double> window_radius;
    std::optional<std::string> per_point;

    json to_json() const {
        json j = {{"measure", measure}, {"kind", kind}, {"p", p}, {"q", q}, {"kappa", kappa}};
        if (s) j["s"] = *s;
        if (r_min) j["r_min"] = *r_min;
        if (r_max) j["r_max"] = *r_max;
        if (window_center) j["window_center"] = *window_center;
        if (window_radius) j["window_radius"] = *window_radius;
        if (per_point) j["per_point"] = *per_point;
        return j;
    }
};

template <class T>
void take(std::optional<T>& dst, const json& j, const char* key) {
    if (!j.contains(key)) return;
    try {
        dst = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw densq::ConfigError(key, "has the wrong type");
    }
}

EnergyConfig resolve_energy_config(const EnergyArgs& a) {
    EnergyConfig c;
    std::optional<std::string> measure, kind, per_point;
    std::optional<double> s, p, r_min, r_max, q, kappa, window_radius;
    std::optional<std::vector<double>> window_center;
    if (!a.config_path.empty()) {
        const json j = read_json_file(a.config_path, "config");
        if (!j.is_object()) throw densq::ConfigError("config", "must be a JSON object");
        densq::detail::reject_unknown(j, "config",
                                      {"measure", "kind", "s", "p", "r_min", "r_max", "q", "kappa", "window_center",
                                       "window_radius", "per_point"});
        take(measure, j, "measure");
        take(kind, j, "kind");
        take(s, j, "s");
        take(p, j, "p");
        take(r_min, j, "r_min");
        take(r_max, j, "r_max");
        take(q, j, "q");
        take(kappa, j, "kappa");
        take(window_center, j, "window_center");
        take(window_radius, j, "window_radius");
        take(per_point, j, "per_point");
    }
    auto over = [](auto& dst, const auto& flag) {
        if (flag) dst = flag;
    };
    over(measure, a.measure);
    over(kind, a.kind);
    over(s, a.s);
    over(p, a.p);
    over(r_min, a.r_min);
    over(r_max, a.r_max);
    over(q, a.q);
    over(kappa, a.kappa);
    over(window_center, a.window_center);
    over(window_radius, a.window_radius);
    over(per_point, a.per_point);

    if (!measure) throw densq::ConfigError("measure", "required (flag --measure or config key)");
    if (!kind) throw densq::ConfigError("kind", "required: one of sf, wolff, riesz-sup, beta");
    c.measure = *measure;
    c.kind = *kind;
    if (c.kind != "sf" && c.kind != "wolff" && c.kind != "riesz-sup" && c.kind != "beta")
        throw densq::ConfigError("kind", "must be one of sf, wolff, riesz-sup, beta; got '" + c.kind + "'");
    if (c.kind != "beta" && !s) throw densq::ConfigError("s", "required for kind " + c.kind);
    c.s = s;
    if (p) c.p = *p;
    if (!(c.p >= 1.0)) throw densq::ConfigError("p", "must be >= 1 (use inf for the sup version)");
    c.r_min = r_min;
    c.r_max = r_max;
    if (q) c.q = *q;
    if (kappa) c.kappa = *kappa;
    if (!(c.kappa >= 0.0)) throw densq::ConfigError("kappa", "must be non-negative");
    if (window_center.has_value() != window_radius.has_value())
        throw densq::ConfigError("window_radius", "window_center and window_radius go together");
    c.window_center = window_center;
    c.window_radius = window_radius;
    c.per_point = per_point;
    return c;
}

densq::ScaleGrid grid_for(const EnergyConfig& c, const densq::WeightedPointMeasure& m) {
    const densq::ScaleGrid def = densq::ScaleGrid::default_for(m, c.q);
    return densq::ScaleGrid(c.r_min.value_or(def.r_min()), c.r_max.value_or(def.r_max()), c.q);
}

int cmd_energy(const EnergyArgs& a, const std::string& out) {
    const EnergyConfig c = resolve_energy_config(a);
    const densq::WeightedPointMeasure m = densq::load_measure_csv(c.measure);
    const densq::ScaleGrid grid = grid_for(c, m);

    std::optional<densq::AnalysisWindow> window;
    if (c.window_center) {
        if (c.window_center->size() != m.dim())
            throw densq::ConfigError("window_center", "dimension does not match the measure");
        window = densq::AnalysisWindow{*c.window_center, *c.window_radius};
    }

    json effective = c.to_json();
    effective["grid"] = grid.to_json();
    json report;
    double total = 0.0;
    std::optional<double> tail;
    std::string per_point_csv;

    if (c.kind == "sf" || c.kind == "wolff" || c.kind == "beta") {
        densq::EnergyReport r;
        const bool want_points = c.per_point.has_value();
        if (c.kind == "beta") {
            const densq::BallIndex index(m, true);
            densq::BetaEnergyOptions opt;
            opt.kappa = c.kappa;
            opt.window = window;
            opt.per_point = want_points;
            r = densq::beta_energy(index, grid, c.p, opt);
        } else {
            const densq::BallIndex index(m, false);
            densq::EnergyOptions opt;
            opt.kappa = c.kappa;
            opt.window = window;
            opt.per_point = want_points;
            if (c.kind == "sf") {
                if (std::abs(*c.s - std::round(*c.s)) < 1e-9)
                    std::cerr << "warning: s = " << *c.s
                              << " is an integer; the comparison between the square function and the Wolff "
                                 "energy only holds for non-integer s. Computing anyway.\n";
                r = densq::square_function_energy(index, *c.s, grid, c.p, opt);
            } else {
                r = densq::wolff_energy(index, *c.s, grid, c.p, opt);
            }
        }
        r.params_echo = effective;
        report = r.to_json();
        total = r.total;
        tail = r.tail;
        if (want_points) {
            std::ostringstream os;
            r.write_per_point_csv(os);
            per_point_csv = os.str();
        }
    } else {
        const densq::BallIndex index(m, false);
        densq::RieszOptions opt;
        opt.kappa = c.kappa;
        opt.window = window;
        densq::RieszEnergyReport r = densq::sup_riesz_energy(index, *c.s, grid, opt);
        r.params_echo = effective;
        report = r.to_json();
        total = r.energy_at_best;
    }

    if (!out.empty()) densq::write_file_atomic(out, report.dump(1) + "\n");
    if (!per_point_csv.empty()) densq::write_file_atomic(*c.per_point, per_point_csv);
    std::cout.precision(17);
    std::cout << "total=" << total << "\n";
    if (tail) std::cout << "tail=" << *tail << "\n";
    else std::cout << "tail=none\n";
    return kExitPass;
}

struct ExpArgs {
    std::string name;
    std::string config_path;
};

densq::SweepResult run_experiment(const ExpArgs& a, const densq::ProgressLog& log) {
    json j = json::object();
    if (!a.config_path.empty()) j = read_json_file(a.config_path, "config");
    if (a.name == "theorem1") return densq::run_theorem1(densq::Theorem1Config::from_json(j), log);
    if (a.name == "integer") return densq::run_integer_degeneracy(densq::IntegerConfig::from_json(j), log);
    if (a.name == "counterexample")
        return densq::run_counterexample(densq::CounterexampleConfig::from_json(j), log);
    if (a.name == "corollary") return densq::run_corollary_small_s(densq::CorollaryConfig::from_json(j), log);
    if (a.name == "identity") return densq::run_identity_suite(densq::IdentityConfig::from_json(j), log);
    throw densq::ConfigError("name", "unknown experiment '" + a.name +
                                         "'; choose theorem1, integer, counterexample, corollary or identity");
}

int cmd_exp(const ExpArgs& a, const std::string& out, bool verbose) {
    if (out.empty()) throw densq::ConfigError("out", "exp needs --out for the output directory");
    densq::ProgressLog log;
    if (verbose) log = [](const std::string& msg) { std::cerr << msg << "\n"; };
    const densq::SweepResult r = run_experiment(a, log);
    densq::write_sweep_outputs(r, out);
    std::cout.precision(6);
    for (const auto& c : r.checks) {
        std::cout << (c.passed ? "pass " : (c.asserted ? "FAIL " : "note ")) << c.name << " = " << c.value << " in ["
                  << c.lo << ", " << c.hi << "]\n";
    }
    for (const auto& s : r.series)
        if (s.fit) std::cout << "slope " << s.name << " = " << s.fit->slope << "\n";
    const auto failures = r.failures();
    if (failures.empty()) {
        std::cout << r.experiment << ": all checks passed\n";
        return kExitPass;
    }
    std::cout << r.experiment << ": failed checks:";
    for (const auto& f : failures) std::cout << " " << f;
    std::cout << "\n";
    return kExitBandFailure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiscale density analysis of weighted point measures"};
    app.require_subcommand(1);
    app.fallthrough();

    unsigned threads = 0;
    bool verbose = false;
    std::string out;
    app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency); results do not depend on it");
    app.add_flag("-v,--verbose", verbose, "Progress messages on stderr");
    app.add_option("-o,--out", out, "Output file (gen, energy) or directory (exp)");

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a measure from a JSON spec and write it as CSV");
    gen_cmd->add_option("spec", gen.spec_path, "MeasureSpec JSON file")->required();

    EnergyArgs en;
    auto* en_cmd = app.add_subcommand("energy", "Compute one multiscale energy of a measure CSV");
    en_cmd->add_option("-c,--config", en.config_path, "JSON config; flags override its keys");
    en_cmd->add_option("-m,--measure", en.measure, "Measure CSV (columns x0..x{d-1},w)");
    en_cmd->add_option("-k,--kind", en.kind, "sf | wolff | riesz-sup | beta");
    en_cmd->add_option("-s,--s", en.s, "Dimension exponent s, 0 < s < d");
    en_cmd->add_option("-p,--p", en.p, "Exponent p >= 1 (default 2)");
    en_cmd->add_option("--r-min", en.r_min, "Smallest grid radius (default 4 x resolution)");
    en_cmd->add_option("--r-max", en.r_max, "Largest grid radius (default 8 x support radius)");
    en_cmd->add_option("--q", en.q, "Grid ratio r_{j+1}/r_j (default 1.1)");
    en_cmd->add_option("--kappa", en.kappa, "Resolved-scale floor factor (default 4)");
    en_cmd->add_option("--window-center", en.window_center, "Restrict the outer integral to a ball: center")
        ->expected(1, -1);
    en_cmd->add_option("--window-radius", en.window_radius, "Restrict the outer integral to a ball: radius");
    en_cmd->add_option("--per-point", en.per_point, "Also write per-point contributions to this CSV");

    ExpArgs ex;
    auto* ex_cmd = app.add_subcommand("exp", "Run an experiment suite and write result.json, raw.csv, plot.svg");
    ex_cmd->add_option("name", ex.name, "theorem1 | integer | counterexample | corollary | identity")->required();
    ex_cmd->add_option("-c,--config", ex.config_path, "Experiment config JSON; omitted keys take defaults");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        densq::set_thread_count(threads);
        if (*gen_cmd) return cmd_gen(gen, out);
        if (*en_cmd) return cmd_energy(en, out);
        if (*ex_cmd) return cmd_exp(ex, out, verbose);
    } catch (const densq::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
