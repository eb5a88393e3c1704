#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

using namespace densq;

namespace {

WeightedPointMeasure random_measure(std::size_t n, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> c(n * dim), w(n);
    for (double& v : c) v = u(rng);
    for (double& v : w) v = 0.1 + u(rng);
    return WeightedPointMeasure(dim, c, w);
}

} // namespace

TEST(Measure, RejectsBadInput) {
    EXPECT_THROW(WeightedPointMeasure(2, std::vector<double>{}, std::vector<double>{}), DomainError);
    EXPECT_THROW(WeightedPointMeasure(2, std::vector<double>{0.0, 0.0}, std::vector<double>{-1.0}), DomainError);
    EXPECT_THROW(WeightedPointMeasure(2, std::vector<double>{0.0, NAN}, std::vector<double>{1.0}), DomainError);
    EXPECT_THROW(WeightedPointMeasure(2, std::vector<double>{0.0}, std::vector<double>{1.0}), DomainError);
}

TEST(Measure, MergesCoincidentAtoms) {
    const WeightedPointMeasure m(2, std::vector<double>{1.0, 2.0, 0.0, 0.0, 1.0, 2.0},
                                 std::vector<double>{0.5, 1.0, 0.25});
    EXPECT_EQ(m.size(), 2u);
    EXPECT_DOUBLE_EQ(m.total_mass(), 1.75);
    EXPECT_NEAR(m.min_spacing(), std::sqrt(5.0), 1e-15);
}

TEST(Measure, SummaryStatistics) {
    const WeightedPointMeasure m(2, std::vector<double>{0.0, 0.0, 3.0, 0.0, 0.0, 4.0}, std::vector<double>{1, 1, 1});
    EXPECT_DOUBLE_EQ(m.total_mass(), 3.0);
    EXPECT_NEAR(m.min_spacing(), 3.0, 1e-15);
    EXPECT_NEAR(m.support_radius(), 2.5, 1e-12);
    EXPECT_DOUBLE_EQ(m.resolution(), m.min_spacing());
}

TEST(BallIndex, MatchesBruteForce) {
    const auto m = random_measure(500, 2, 7);
    const BallIndex index(m);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.2, 1.2);
    for (int q = 0; q < 200; ++q) {
        const std::vector<double> x = {u(rng), u(rng)};
        const double r = 0.5 * std::abs(u(rng));
        EXPECT_EQ(index.atoms_in_ball(x, r), oracle::atoms_in_ball(m, x, r));
        const double exact = oracle::mass_in_ball(m, x, r);
        EXPECT_NEAR(index.mass_in_ball(x, r), exact, 1e-12 * std::max(1.0, exact));
    }
}

TEST(BallIndex, ClosedBallIncludesBoundary) {
    const WeightedPointMeasure m(1, std::vector<double>{0.0, 1.0, 2.0}, std::vector<double>{1, 1, 1});
    const BallIndex index(m);
    const std::vector<double> x = {0.0};
    EXPECT_DOUBLE_EQ(index.mass_in_ball(x, 1.0), 2.0);
    EXPECT_DOUBLE_EQ(index.mass_in_open_ball(x, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(index.mass_in_ball(x, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(index.farthest_distance(x), 2.0);
    EXPECT_THROW(index.mass_in_ball(x, -1.0), DomainError);
    EXPECT_THROW(index.mass_in_ball(std::vector<double>{0.0, 0.0}, 1.0), DomainError);
}

TEST(BallIndex, ThreeDimensions) {
    const auto m = random_measure(300, 3, 11);
    const BallIndex index(m);
    const std::vector<double> x = {0.5, 0.5, 0.5};
    for (double r : {0.05, 0.2, 0.4, 1.0}) EXPECT_NEAR(index.mass_in_ball(x, r), oracle::mass_in_ball(m, x, r), 1e-12);
}

TEST(Generators, CantorCountsAndMass) {
    const auto m = build_cantor(2, 0.5, 3);
    EXPECT_EQ(m.size(), 64u);
    EXPECT_NEAR(m.total_mass(), 1.0, 1e-14);
    const double lambda = cantor_ratio(4, 0.5);
    EXPECT_NEAR(lambda, 1.0 / 16.0, 1e-15);
    // consecutive corners of the deepest level sit lambda^(depth-1) (1 - lambda) apart
    EXPECT_NEAR(m.min_spacing(), std::pow(lambda, 2) * (1.0 - lambda), 1e-12);
    EXPECT_NEAR(m.resolution(), std::pow(lambda, 3) * (1.0 - lambda), 1e-15);
    EXPECT_THROW(build_cantor(2, 2.5, 3), DomainError);
}

TEST(Generators, CantorBudget) {
    EXPECT_THROW(build_cantor(2, 1.5, 12, 0, 1000), BudgetExceeded);
}

TEST(Generators, FlatLattice) {
    const auto m = build_flat(2, 1, 1.0, 0.01);
    EXPECT_EQ(m.size(), 201u);
    EXPECT_NEAR(m.total_mass(), 2.01, 1e-12);
    EXPECT_NEAR(m.min_spacing(), 0.01, 1e-12);
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_EQ(m.point(i)[1], 0.0);
}

TEST(Generators, Dirac) {
    const std::vector<double> loc = {1.0, -2.0};
    const auto m = build_dirac(2, loc, 3.0);
    EXPECT_EQ(m.size(), 1u);
    EXPECT_DOUBLE_EQ(m.total_mass(), 3.0);
    EXPECT_DOUBLE_EQ(m.min_spacing(), 0.0);
}

TEST(Generators, GammaCurveArcLength) {
    const double alpha = std::numbers::pi / 8.0;
    const double L = 4.0;
    const auto h = build_gamma_curve(alpha, L, 1e-3);
    // two flats of total length 2L - 1 plus two tent edges of length 1 / (2 cos alpha)
    const double arc = 2.0 * L - 1.0 + 1.0 / std::cos(alpha);
    EXPECT_NEAR(h.total_mass(), arc, 1e-9);
    EXPECT_NEAR(static_cast<double>(h.size()), arc / 1e-3, 5.0);
    const auto mu = build_gamma_curve(alpha, L, 1e-3, CurveWeighting::mu_alpha);
    EXPECT_NEAR(mu.total_mass(), 2.0 * L, 1e-9);
    for (std::size_t i = 0; i < h.size(); ++i) EXPECT_NEAR(h.point(i)[1], gamma_profile(alpha, h.point(i)[0]), 1e-12);
}

TEST(MeasureSpec, RoundTripAndGenerate) {
    const auto j = nlohmann::json::parse(R"({"kind":"cantor","params":{"dim":2,"s":0.5,"depth":3}})");
    const MeasureSpec spec = measure_spec_from_json(j);
    EXPECT_EQ(spec.kind, MeasureKind::cantor);
    const MeasureSpec again = measure_spec_from_json(to_json(spec));
    EXPECT_EQ(to_json(again), to_json(spec));
    EXPECT_EQ(generate(spec).size(), 64u);
}

TEST(MeasureSpec, RejectsUnknownAndInvalidFields) {
    auto field_of = [](const char* text) {
        try {
            measure_spec_from_json(nlohmann::json::parse(text));
        } catch (const ConfigError& e) {
            return e.field();
        }
        return std::string("<none>");
    };
    EXPECT_NE(field_of(R"({"kind":"cantor","params":{"dim":2,"s":0.5,"depth":3},"colour":1})"), "<none>");
    EXPECT_EQ(field_of(R"({"kind":"cantor","params":{"dim":2,"s":2.5,"depth":3}})"), "params.s");
    EXPECT_EQ(field_of(R"({"kind":"flat","params":{"dim":2,"k":2,"half_extent":1,"spacing":0.1}})"), "params.k");
    EXPECT_NE(field_of(R"({"kind":"torus"})"), "<none>");
    EXPECT_NE(field_of(R"({"params":{}})"), "<none>");
}

TEST(MeasureCsv, RoundTripIsExact) {
    const auto m = random_measure(50, 3, 5);
    std::stringstream ss;
    write_measure_csv(ss, m);
    const auto back = read_measure_csv(ss);
    ASSERT_EQ(back.size(), m.size());
    ASSERT_EQ(back.dim(), 3u);
    for (std::size_t i = 0; i < m.size(); ++i) {
        EXPECT_EQ(back.weight(i), m.weight(i));
        for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(back.point(i)[k], m.point(i)[k]);
    }
}

TEST(MeasureCsv, ErrorsNameTheLine) {
    std::stringstream bad("x0,x1,w\n0,0,1\n0,oops,1\n");
    try {
        read_measure_csv(bad, "in.csv");
        FAIL() << "expected an error";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("in.csv:3"), std::string::npos) << e.what();
    }
    std::stringstream header("a,b\n1,2\n");
    EXPECT_THROW(read_measure_csv(header), DomainError);
    EXPECT_THROW(load_measure_csv("/nonexistent/m.csv"), DomainError);
}

TEST(MeasureCsv, AtomicSave) {
    const auto dir = std::filesystem::temp_directory_path() / "densq_io_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "m.csv";
    save_measure_csv(path, build_cantor(2, 0.5, 2));
    EXPECT_EQ(load_measure_csv(path).size(), 16u);
    for (const auto& e : std::filesystem::directory_iterator(dir))
        EXPECT_EQ(e.path().extension(), ".csv") << "leftover temporary " << e.path();
    std::filesystem::remove_all(dir);
}
