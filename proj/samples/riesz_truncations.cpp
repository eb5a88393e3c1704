// Doubly truncated Riesz transforms of a small Cantor measure and the
// largest truncated energy over the grid of truncation pairs.
#include <densq.hpp>

#include <cstdio>

int main() {
    const double s = 0.5;
    const densq::WeightedPointMeasure m = densq::build_cantor(2, s, 4);
    const densq::BallIndex index(m, false);
    const densq::ScaleGrid grid = densq::ScaleGrid::default_for(m);
    const densq::RieszEnergyReport r = densq::sup_riesz_energy(index, s, grid);
    std::printf("atoms=%zu pairs=%zu best=[%.4g, %.4g] energy=%.6g\n", m.size(), r.grid_of_pairs.size(),
                r.best_pair.eps1, r.best_pair.eps2, r.energy_at_best);
    const auto v = densq::truncated_riesz(index, m.point(0), r.best_pair, s);
    std::printf("at the first atom: (%.6g, %.6g)\n", v[0], v[1]);
}
