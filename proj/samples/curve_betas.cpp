// Jones beta numbers along a bent polyline: zero on the straight parts,
// positive on balls that see the corner.
#include <densq.hpp>

#include <cstdio>
#include <vector>

int main() {
    const std::vector<double> corner = {-1.0, 0.0, 0.0, 0.0, 1.0, 0.5};
    const densq::WeightedPointMeasure m = densq::build_polyline(2, corner, 1e-3);
    const densq::BallIndex index(m);
    for (double x : {-0.6, -0.2, 0.0}) {
        const std::vector<double> c = {x, 0.0};
        const double r = 0.3;
        const densq::BetaValue b2 = densq::beta2(index, c, r);
        const densq::BetaValue binf = densq::beta_inf(index, c, r);
        std::printf("center x=%+.1f r=%.1f beta2=%.3e beta_inf=%.3e\n", x, r, b2.value, binf.value);
    }
}
