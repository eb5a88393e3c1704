#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <list>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace densq {

/// Squared Euclidean distance, coordinates summed in index order. Every
/// membership test in the library goes through this function so that the
/// spatial index and brute-force scans agree bit for bit.
inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double t = a[k] - b[k];
        acc += t * t;
    }
    return acc;
}

inline double squared_norm(std::span<const double> v) noexcept {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return acc;
}

/// Enclosing ball: `radius` is the exact maximum distance from `center` to the
/// points it was built from.
struct EnclosingBall {
    std::vector<double> center;
    double radius = 0.0;
};

namespace detail {

class MoveToFrontMiniball {
public:
    MoveToFrontMiniball(std::span<const double> coords, std::size_t dim) : coords_(coords), dim_(dim) {}

    EnclosingBall solve(const std::vector<std::size_t>& order) {
        std::list<std::size_t> pts(order.begin(), order.end());
        std::vector<std::size_t> support;
        center_.assign(dim_, 0.0);
        radius2_ = -1.0;
        mtf(pts, pts.end(), support);
        EnclosingBall out;
        out.center = center_;
        double r2 = 0.0;
        for (std::size_t i : order) r2 = std::max(r2, squared_distance(point(i), center_));
        out.radius = std::sqrt(r2);
        return out;
    }

private:
    std::span<const double> point(std::size_t i) const { return coords_.subspan(i * dim_, dim_); }

    void ball_from_support(const std::vector<std::size_t>& support) {
        if (support.empty()) {
            radius2_ = -1.0;
            return;
        }
        auto p0 = point(support[0]);
        if (support.size() == 1) {
            center_.assign(p0.begin(), p0.end());
            radius2_ = 0.0;
            return;
        }
        const std::size_t k = support.size() - 1;
        Eigen::MatrixXd v(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(k));
        for (std::size_t j = 0; j < k; ++j) {
            auto pj = point(support[j + 1]);
            for (std::size_t c = 0; c < dim_; ++c)
                v(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) = pj[c] - p0[c];
        }
        Eigen::MatrixXd gram = 2.0 * v.transpose() * v;
        Eigen::VectorXd rhs = v.colwise().squaredNorm().transpose();
        Eigen::VectorXd lambda = gram.colPivHouseholderQr().solve(rhs);
        Eigen::VectorXd offset = v * lambda;
        for (std::size_t c = 0; c < dim_; ++c) center_[c] = p0[c] + offset(static_cast<Eigen::Index>(c));
        radius2_ = offset.squaredNorm();
    }

    bool outside(std::size_t i) const {
        if (radius2_ < 0.0) return true;
        const double d2 = squared_distance(point(i), center_);
        return d2 > radius2_ * (1.0 + 1e-12) + 1e-300;
    }

    void mtf(std::list<std::size_t>& pts, std::list<std::size_t>::iterator end, std::vector<std::size_t>& support) {
        ball_from_support(support);
        if (support.size() == dim_ + 1) return;
        for (auto it = pts.begin(); it != end;) {
            auto next = std::next(it);
            if (outside(*it)) {
                support.push_back(*it);
                mtf(pts, it, support);
                support.pop_back();
                pts.splice(pts.begin(), pts, it);
            }
            it = next;
        }
    }

    std::span<const double> coords_;
    std::size_t dim_;
    std::vector<double> center_;
    double radius2_ = -1.0;
};

} // namespace detail

/// Smallest enclosing ball (Welzl's move-to-front scheme). The visiting order
/// is shuffled with a fixed seed so the result is deterministic.
inline EnclosingBall minimal_enclosing_ball(std::span<const double> coords, std::size_t dim) {
    const std::size_t n = dim == 0 ? 0 : coords.size() / dim;
    EnclosingBall ball;
    ball.center.assign(dim, 0.0);
    if (n == 0) return ball;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(0x5eedULL);
    for (std::size_t i = n; i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(order[i - 1], order[pick(rng)]);
    }
    return detail::MoveToFrontMiniball(coords, dim).solve(order);
}

/// Weighted mean and scatter matrix sum_k w_k (y_k - mean)(y_k - mean)^T,
/// updated with West's weighted recurrence and merged with Chan's formula.
class MomentAccumulator {
public:
    explicit MomentAccumulator(std::size_t dim = 0)
        : dim_(dim), mean_(dim, 0.0), scatter_(dim * dim, 0.0), delta_(dim, 0.0) {}

    void add(std::span<const double> y, double w) {
        const double new_mass = mass_ + w;
        for (std::size_t i = 0; i < dim_; ++i) delta_[i] = y[i] - mean_[i];
        const double g = w * mass_ / new_mass;
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = 0; j < dim_; ++j) scatter_[i * dim_ + j] += g * delta_[i] * delta_[j];
        const double f = w / new_mass;
        for (std::size_t i = 0; i < dim_; ++i) mean_[i] += f * delta_[i];
        mass_ = new_mass;
    }

    /// Fold in a group given by its mass, mean and scatter matrix (row-major).
    void merge(double mass, std::span<const double> mean, std::span<const double> scatter) {
        if (mass <= 0.0) return;
        if (mass_ <= 0.0) {
            mass_ = mass;
            std::copy(mean.begin(), mean.end(), mean_.begin());
            std::copy(scatter.begin(), scatter.end(), scatter_.begin());
            return;
        }
        const double m = mass_ + mass;
        for (std::size_t i = 0; i < dim_; ++i) delta_[i] = mean[i] - mean_[i];
        const double g = mass_ * mass / m;
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = 0; j < dim_; ++j)
                scatter_[i * dim_ + j] += scatter[i * dim_ + j] + g * delta_[i] * delta_[j];
        const double f = mass / m;
        for (std::size_t i = 0; i < dim_; ++i) mean_[i] += f * delta_[i];
        mass_ = m;
    }

    void merge(const MomentAccumulator& o) { merge(o.mass_, o.mean_, o.scatter_); }

    std::size_t dim() const noexcept { return dim_; }
    double mass() const noexcept { return mass_; }
    const std::vector<double>& mean() const noexcept { return mean_; }
    const std::vector<double>& scatter() const noexcept { return scatter_; }
    double scatter(std::size_t i, std::size_t j) const { return scatter_[i * dim_ + j]; }

private:
    std::size_t dim_;
    double mass_ = 0.0;
    std::vector<double> mean_;
    std::vector<double> scatter_;
    std::vector<double> delta_;
};

} // namespace densq
