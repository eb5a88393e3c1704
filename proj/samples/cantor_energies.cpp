// Square-function and Wolff energies of planar Cantor measures across a few
// dimensions; their ratio stays bounded away from 0 and infinity.
#include <densq.hpp>

#include <cstdio>

int main() {
    for (double s : {0.5, 0.8, 1.2, 1.5}) {
        const densq::WeightedPointMeasure m = densq::build_cantor(2, s, 5);
        const densq::BallIndex index(m, false);
        const densq::ScaleGrid grid = densq::ScaleGrid::default_for(m);
        const densq::EnergyReport sf = densq::square_function_energy(index, s, grid);
        const densq::EnergyReport wolff = densq::wolff_energy(index, s, grid);
        std::printf("s=%.2f atoms=%zu sf=%.6g wolff=%.6g ratio=%.4f\n", s, m.size(), sf.total, wolff.total,
                    sf.total / wolff.total);
    }
}
