#pragma once

#include <cmath>
#include <span>

namespace densq {

/// Neumaier's variant of Kahan summation. Order-dependent but deterministic:
/// callers fix the order to get bit-reproducible reductions.
class CompensatedSum {
public:
    CompensatedSum() = default;
    explicit CompensatedSum(double init) : sum_(init) {}

    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }

    CompensatedSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }

    /// Merge another partial; sum and compensation are folded separately.
    void merge(const CompensatedSum& other) noexcept {
        add(other.sum_);
        comp_ += other.comp_;
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept {
    CompensatedSum acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

} // namespace densq
