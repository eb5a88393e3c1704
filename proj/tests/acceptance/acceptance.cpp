// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
// Optional arguments select criteria by number (e.g. `acceptance 3 8`).

#include "../oracles.hpp"

#include <densq.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace densq;
namespace fs = std::filesystem;

namespace {

// Tolerances and limits, fixed here rather than read from any config.
constexpr double kOracleMassTol = 1e-12;
constexpr double kOracleSeconds = 10.0;
constexpr double kQuadratureTol = 0.05;
constexpr double kTailTol = 0.01;
constexpr double kTheorem1Seconds = 60.0;
constexpr double kCounterexampleSeconds = 300.0;
constexpr double kBetaOracleTol = 1e-6;
constexpr unsigned kAltThreads = 4;

struct Outcome {
    bool pass = true;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string checks_summary(const SweepResult& r, const std::function<bool(const std::string&)>& keep) {
    std::string out;
    for (const auto& c : r.checks) {
        if (!keep(c.name) || !c.asserted) continue;
        if (!out.empty()) out += ", ";
        out += c.name + "=" + fmt(c.value) + (c.passed ? "" : "(out of [" + fmt(c.lo) + "," + fmt(c.hi) + "])");
    }
    return out;
}

bool checks_pass(const SweepResult& r, const std::function<bool(const std::string&)>& keep) {
    for (const auto& c : r.checks)
        if (keep(c.name) && c.asserted && !c.passed) return false;
    return true;
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

// 1. Spatial index against a brute-force scan.
Outcome oracle_exactness() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> c(2000), w(1000);
    for (double& v : c) v = u(rng);
    for (double& v : w) v = 0.05 + u(rng);
    const WeightedPointMeasure m(2, c, w);
    const auto t0 = std::chrono::steady_clock::now();
    const BallIndex index(m);
    std::size_t mismatched_sets = 0;
    double worst = 0.0;
    for (int q = 0; q < 1000; ++q) {
        const std::vector<double> x = {1.4 * u(rng) - 0.2, 1.4 * u(rng) - 0.2};
        const double r = 0.5 * u(rng) * u(rng);
        if (index.atoms_in_ball(x, r) != oracle::atoms_in_ball(m, x, r)) ++mismatched_sets;
        const double exact = oracle::mass_in_ball(m, x, r);
        const double got = index.mass_in_ball(x, r);
        worst = std::max(worst, exact > 0.0 ? std::abs(got - exact) / exact : std::abs(got));
    }
    const double secs = seconds_since(t0);
    return {mismatched_sets == 0 && worst <= kOracleMassTol && secs < kOracleSeconds,
            "set mismatches=" + std::to_string(mismatched_sets) + ", max rel mass diff=" + fmt(worst) +
                ", time=" + fmt(secs) + "s"};
}

// 2. Grid refinement and closed-form tails.
Outcome quadrature() {
    Outcome o;
    for (double s : {0.5, 1.2}) {
        const auto m = build_cantor(2, s, 6);
        const BallIndex index(m, false);
        const auto coarse = ScaleGrid::default_for(m, 1.2);
        const auto fine = ScaleGrid::default_for(m, 1.02);
        const double sf_c = square_function_energy(index, s, coarse).total;
        const double sf_f = square_function_energy(index, s, fine).total;
        const double w_c = wolff_energy(index, s, coarse).total;
        const double w_f = wolff_energy(index, s, fine).total;
        const double dsf = std::abs(sf_c / sf_f - 1.0);
        const double dw = std::abs(w_c / w_f - 1.0);
        o.pass = o.pass && dsf <= kQuadratureTol && dw <= kQuadratureTol;
        o.detail += "s=" + fmt(s) + ": sf q1.2/q1.02 diff=" + fmt(dsf) + ", wolff diff=" + fmt(dw) + "; ";
    }
    // tail: closed form from R against the grid sum over [R, 100R] plus the remainder beyond 100R
    const auto m = build_cantor(2, 0.8, 4);
    const BallIndex index(m, false);
    const double R = 2.0 * m.support_radius() + 1.0;
    EnergyOptions closed;
    closed.kappa = 0.0;
    EnergyOptions bare = closed;
    bare.tail = false;
    const ScaleGrid from_r(R, 2.0 * R, 1.05);
    const ScaleGrid wide(R, 100.0 * R, 1.05);
    const double s = 0.8;
    const double M = m.total_mass();
    const double beyond_w = M * M / (2.0 * s * std::pow(100.0 * R, 2.0 * s));
    const double beyond_sf = std::pow(1.0 - std::pow(2.0, -s), 2) * beyond_w;
    const double t_sf = square_function_energy(index, s, from_r, 2.0, closed).total;
    const double n_sf = square_function_energy(index, s, wide, 2.0, bare).total + M * beyond_sf;
    const double t_w = wolff_energy(index, s, from_r, 2.0, closed).total;
    const double n_w = wolff_energy(index, s, wide, 2.0, bare).total + M * beyond_w;
    const double e_sf = std::abs(n_sf / t_sf - 1.0);
    const double e_w = std::abs(n_w / t_w - 1.0);
    o.pass = o.pass && e_sf <= kTailTol && e_w <= kTailTol;
    o.detail += "tail vs [R,100R] at q=1.05: sf diff=" + fmt(e_sf) + ", wolff diff=" + fmt(e_w);
    return o;
}

SweepResult timed(const std::function<SweepResult()>& f, double& secs) {
    const auto t0 = std::chrono::steady_clock::now();
    SweepResult r = f();
    secs = seconds_since(t0);
    return r;
}

// 9. Thin-boundary radii on a Cantor set and avoidance of a heavy shell.
Outcome thin_boundary() {
    const auto m = build_cantor(2, 1.0, 5);
    const BallIndex index(m);
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::size_t> pick(0, m.size() - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double lo = 4.0 * m.resolution();
    const double hi = 2.0 * m.support_radius();
    std::size_t found = 0;
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const auto x = m.point(pick(rng));
        const double r = lo * std::pow(hi / lo, u(rng));
        try {
            const auto tb = find_thin_boundary_radius(index, x, r);
            ++found;
            worst = std::max(worst, tb.worst_ratio);
        } catch (const NotFound&) {
        }
    }
    std::vector<double> c = {0.0, 0.0};
    std::vector<double> w = {1e-3};
    for (int k = 0; k < 720; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 720.0;
        c.push_back(std::cos(a));
        c.push_back(std::sin(a));
        w.push_back(1.0);
    }
    const WeightedPointMeasure shell(2, c, w);
    const BallIndex sidx(shell);
    const std::vector<double> o = {0.0, 0.0};
    const auto tb = find_thin_boundary_radius(sidx, o, 1.0);
    const bool avoided = std::abs(tb.radius - 1.0) > 1.0 / 1024.0;
    return {found == 100 && avoided,
            "cantor found " + std::to_string(found) + "/100 (worst ratio " + fmt(worst) + "), shell radius chosen " +
                fmt(tb.radius)};
}

// 10. Closed-form beta_2 and hull-width beta_inf against direction scans; Hölder ordering.
Outcome beta_oracles() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst2 = 0.0, worst_inf = 0.0;
    std::size_t holder_fail = 0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 20 + static_cast<std::size_t>(180 * u(rng));
        const double angle = std::numbers::pi * u(rng);
        const double noise = 0.3 * u(rng);
        std::vector<double> c(2 * n), w(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double along = 2.0 * u(rng) - 1.0;
            const double across = noise * (2.0 * u(rng) - 1.0);
            c[2 * i] = along * std::cos(angle) - across * std::sin(angle);
            c[2 * i + 1] = along * std::sin(angle) + across * std::cos(angle);
            w[i] = 0.1 + u(rng);
        }
        const WeightedPointMeasure m(2, c, w);
        const BallIndex index(m);
        const std::vector<double> x = {0.4 * u(rng) - 0.2, 0.4 * u(rng) - 0.2};
        const double r = 0.4 + 0.6 * u(rng);
        if (!(index.mass_in_ball(x, r) > 0.0)) continue;
        const double b2 = beta2(index, x, r).value;
        const double binf = beta_inf(index, x, r).value;
        worst2 = std::max(worst2, std::abs(b2 - oracle::beta2_scan(m, x, r)));
        worst_inf = std::max(worst_inf, std::abs(binf - oracle::beta_inf_scan(m, x, r)));
        if (b2 > std::sqrt(index.mass_in_ball(x, r) / r) * binf * (1.0 + 1e-12)) ++holder_fail;
    }
    return {worst2 <= kBetaOracleTol && worst_inf <= kBetaOracleTol && holder_fail == 0,
            "max |beta2 - scan|=" + fmt(worst2) + ", max |beta_inf - scan|=" + fmt(worst_inf) +
                ", Holder violations=" + std::to_string(holder_fail)};
}

std::string result_bytes(const SweepResult& r) {
    const auto dir = fs::temp_directory_path() / "densq_acceptance_det";
    fs::remove_all(dir);
    write_sweep_outputs(r, dir);
    std::ifstream in(dir / "result.json", std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    fs::remove_all(dir);
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    auto want = [&](int k) { return wanted.empty() || wanted.count(k) > 0; };

    int failures = 0;
    auto report = [&](int k, const char* name, const Outcome& o) {
        std::printf("%s [%2d] %s: %s\n", o.pass ? "PASS" : "FAIL", k, name, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    };

    set_thread_count(1);
    // results of each experiment at one thread, kept for the determinism criterion
    std::vector<std::pair<std::string, std::string>> single_thread;

    if (want(1)) report(1, "oracle exactness", oracle_exactness());
    if (want(2)) report(2, "quadrature refinement and tails", quadrature());

    const Theorem1Config t1;
    if (want(3) || want(11)) {
        double secs = 0.0;
        const auto r = timed([&] { return run_theorem1(t1); }, secs);
        single_thread.emplace_back("theorem1", result_bytes(r));
        if (want(3)) {
            const auto all = [](const std::string&) { return true; };
            report(3, "non-integer comparability on Cantor sets",
                   {r.passed() && secs < kTheorem1Seconds, checks_summary(r, all) + ", time=" + fmt(secs) + "s"});
        }
    }

    const IntegerConfig ic;
    if (want(4) || want(11)) {
        const auto r = run_integer_degeneracy(ic);
        single_thread.emplace_back("integer", result_bytes(r));
        if (want(4)) {
            const auto first = [](const std::string& n) {
                return n == "ratio_n=1000" || starts_with(n, "widening") || starts_with(n, "wolff_vs");
            };
            report(4, "integer-dimension degeneracy", {r.passed(), checks_summary(r, first)});
        }
    }

    const CounterexampleConfig cc;
    if (want(5) || want(6) || want(11)) {
        double secs = 0.0;
        const auto r = timed([&] { return run_counterexample(cc); }, secs);
        single_thread.emplace_back("counterexample", result_bytes(r));
        const auto riesz_part = [](const std::string& n) {
            return n == "sf_slope" || n == "riesz_slope" || n == "sf_over_riesz_decreasing" ||
                   starts_with(n, "extent_stability");
        };
        const auto beta_part = [](const std::string& n) {
            return n == "beta_slope" || n == "sf_beta_slope_gap" || n == "sf_over_beta_decreasing";
        };
        if (want(5))
            report(5, "tent curves: square function against Riesz",
                   {checks_pass(r, riesz_part) && secs < kCounterexampleSeconds,
                    checks_summary(r, riesz_part) + ", time=" + fmt(secs) + "s"});
        if (want(6))
            report(6, "tent curves: square function against beta_2", {checks_pass(r, beta_part), checks_summary(r, beta_part)});
    }

    const CorollaryConfig co;
    if (want(7) || want(11)) {
        const auto r = run_corollary_small_s(co);
        single_thread.emplace_back("corollary", result_bytes(r));
        if (want(7))
            report(7, "small-s Riesz, Wolff and square function comparability",
                   {r.passed(), checks_summary(r, [](const std::string&) { return true; })});
    }

    const IdentityConfig id;
    if (want(8) || want(11)) {
        const auto r = run_identity_suite(id);
        single_thread.emplace_back("identity", result_bytes(r));
        if (want(8))
            report(8, "smoothed density identity", {r.passed(), checks_summary(r, [](const std::string&) { return true; })});
    }

    if (want(9)) report(9, "thin-boundary radii", thin_boundary());
    if (want(10)) report(10, "beta oracles and Holder ordering", beta_oracles());

    if (want(11)) {
        set_thread_count(kAltThreads);
        Outcome o;
        for (const auto& [name, bytes] : single_thread) {
            SweepResult again;
            if (name == "theorem1") again = run_theorem1(t1);
            else if (name == "integer") again = run_integer_degeneracy(ic);
            else if (name == "counterexample") again = run_counterexample(cc);
            else if (name == "corollary") again = run_corollary_small_s(co);
            else again = run_identity_suite(id);
            const bool same = result_bytes(again) == bytes;
            o.pass = o.pass && same;
            o.detail += name + (same ? " identical" : " DIFFERS") + "; ";
        }
        o.detail += "threads 1 vs " + std::to_string(kAltThreads);
        set_thread_count(1);
        report(11, "determinism across thread counts", o);
    }

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
