#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "densq/error.hpp"
#include "densq/geometry.hpp"
#include "densq/kdtree.hpp"
#include "densq/summation.hpp"

namespace densq {

/// Finite atomic measure sum_i w_i delta_{x_i} in R^d.
///
/// Construction validates the input, merges atoms with identical coordinates
/// (weights added, first occurrence keeps its position in the ordering) and
/// caches the total mass, the minimal enclosing ball of the support and the
/// smallest distance between distinct atoms. Instances are immutable.
///
/// `resolution()` is the smallest length the atoms are meant to represent;
/// it sets the floor of integrated scales. It defaults to min_spacing() and
/// generators with a natural cell size pass their own.
class WeightedPointMeasure {
public:
    WeightedPointMeasure(std::size_t dim, std::vector<double> coords, std::vector<double> weights,
                         double resolution = -1.0)
        : dim_(dim) {
        if (dim == 0) throw DomainError("measure dimension must be positive");
        if (weights.empty()) throw DomainError("measure needs at least one atom");
        if (coords.size() != weights.size() * dim)
            throw DomainError("coordinate count " + std::to_string(coords.size()) + " does not match " +
                              std::to_string(weights.size()) + " atoms of dimension " + std::to_string(dim));
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
                throw DomainError("atom " + std::to_string(i) + " has non-positive or non-finite weight");
        }
        for (double c : coords)
            if (!std::isfinite(c)) throw DomainError("non-finite coordinate");
        merge_duplicates(coords, weights);
        finalize();
        resolution_ = resolution >= 0.0 ? resolution : min_spacing_;
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return weights_.size(); }

    std::span<const double> point(std::size_t i) const {
        return std::span<const double>(coords_).subspan(i * dim_, dim_);
    }
    double weight(std::size_t i) const { return weights_[i]; }
    std::span<const double> coords() const noexcept { return coords_; }
    std::span<const double> weights() const noexcept { return weights_; }

    double total_mass() const noexcept { return total_mass_; }
    /// Radius of the smallest ball containing every atom.
    double support_radius() const noexcept { return support_.radius; }
    std::span<const double> support_center() const noexcept { return support_.center; }
    /// Smallest distance between two distinct atoms; 0 for a single atom.
    double min_spacing() const noexcept { return min_spacing_; }
    double resolution() const noexcept { return resolution_; }

    /// Atom-wise union; coincident atoms are merged.
    static WeightedPointMeasure merge(const WeightedPointMeasure& a, const WeightedPointMeasure& b) {
        if (a.dim() != b.dim()) throw DomainError("cannot merge measures of different dimension");
        std::vector<double> c(a.coords_.begin(), a.coords_.end());
        c.insert(c.end(), b.coords_.begin(), b.coords_.end());
        std::vector<double> w(a.weights_.begin(), a.weights_.end());
        w.insert(w.end(), b.weights_.begin(), b.weights_.end());
        WeightedPointMeasure out(a.dim(), std::move(c), std::move(w));
        for (double r : {a.resolution_, b.resolution_})
            if (r > 0.0 && (out.resolution_ == 0.0 || r < out.resolution_)) out.resolution_ = r;
        return out;
    }

    /// Image under x -> factor * x + shift (weights unchanged).
    WeightedPointMeasure affine_image(double factor, std::span<const double> shift = {}) const {
        std::vector<double> c(coords_.size());
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t k = 0; k < dim_; ++k)
                c[i * dim_ + k] = factor * coords_[i * dim_ + k] + (shift.empty() ? 0.0 : shift[k]);
        return WeightedPointMeasure(dim_, std::move(c), weights_, std::abs(factor) * resolution_);
    }

private:
    void merge_duplicates(std::vector<double>& coords, std::vector<double>& weights) {
        const std::size_t n = weights.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        auto less = [&](std::size_t a, std::size_t b) {
            for (std::size_t k = 0; k < dim_; ++k) {
                const double x = coords[a * dim_ + k];
                const double y = coords[b * dim_ + k];
                if (x != y) return x < y;
            }
            return a < b;
        };
        std::sort(order.begin(), order.end(), less);
        auto same = [&](std::size_t a, std::size_t b) {
            for (std::size_t k = 0; k < dim_; ++k)
                if (coords[a * dim_ + k] != coords[b * dim_ + k]) return false;
            return true;
        };
        // representative = first occurrence in input order (smallest index of its run)
        std::vector<std::size_t> rep(n);
        bool any = false;
        for (std::size_t t = 0; t < n;) {
            std::size_t u = t + 1;
            while (u < n && same(order[t], order[u])) ++u;
            for (std::size_t v = t; v < u; ++v) rep[order[v]] = order[t];
            any = any || (u - t > 1);
            t = u;
        }
        if (!any) {
            coords_ = std::move(coords);
            weights_ = std::move(weights);
            return;
        }
        std::vector<CompensatedSum> acc(n);
        for (std::size_t i = 0; i < n; ++i) acc[rep[i]].add(weights[i]);
        for (std::size_t i = 0; i < n; ++i) {
            if (rep[i] != i) continue;
            coords_.insert(coords_.end(), coords.begin() + static_cast<std::ptrdiff_t>(i * dim_),
                           coords.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim_));
            weights_.push_back(acc[i].value());
        }
    }

    void finalize() {
        total_mass_ = compensated_sum(weights_);
        support_ = minimal_enclosing_ball(coords_, dim_);
        if (size() < 2) {
            min_spacing_ = 0.0;
            return;
        }
        BoxTree tree(coords_, weights_, dim_, false);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < size(); ++i) best = std::min(best, tree.nearest_other_squared_distance(i, point(i)));
        min_spacing_ = std::sqrt(best);
    }

    std::size_t dim_;
    std::vector<double> coords_;
    std::vector<double> weights_;
    double total_mass_ = 0.0;
    EnclosingBall support_;
    double min_spacing_ = 0.0;
    double resolution_ = 0.0;
};

/// Exact ball-mass oracle over a measure. Queries are pure and thread-safe.
class BallIndex {
public:
    explicit BallIndex(const WeightedPointMeasure& measure, bool with_moments = true)
        : measure_(&measure), tree_(measure.coords(), measure.weights(), measure.dim(), with_moments) {}

    const WeightedPointMeasure& measure() const noexcept { return *measure_; }

    /// mu(B(center, r)) for the closed ball |y - center| <= r.
    double mass_in_ball(std::span<const double> center, double r) const {
        check(center, r);
        return tree_.mass_closed(center, r);
    }

    /// Mass of the open ball |y - center| < r.
    double mass_in_open_ball(std::span<const double> center, double r) const {
        check(center, r);
        return tree_.mass_open(center, r);
    }

    /// Indices (into the measure) of atoms in the closed ball, ascending.
    std::vector<std::size_t> atoms_in_ball(std::span<const double> center, double r) const {
        check(center, r);
        std::vector<std::size_t> out;
        tree_.for_each_in_ball(center, r, [&](std::size_t i, double, double) { out.push_back(i); });
        std::sort(out.begin(), out.end());
        return out;
    }

    template <class F>
    void for_each_in_ball(std::span<const double> center, double r, F&& f) const {
        check(center, r);
        tree_.for_each_in_ball(center, r, std::forward<F>(f));
    }

    MomentAccumulator moments_in_ball(std::span<const double> center, double r) const {
        check(center, r);
        return tree_.moments_closed(center, r);
    }

    /// Distance from center to the farthest atom.
    double farthest_distance(std::span<const double> center) const {
        return std::sqrt(tree_.farthest_squared_distance(center));
    }

private:
    void check(std::span<const double> center, double r) const {
        if (center.size() != measure_->dim())
            throw DomainError("query center has dimension " + std::to_string(center.size()) + ", measure has " +
                              std::to_string(measure_->dim()));
        if (!(r >= 0.0)) throw DomainError("ball radius must be non-negative");
    }

    const WeightedPointMeasure* measure_;
    BoxTree tree_;
};

/// mu(B(center, r)) for the closed ball.
inline double mass_in_ball(const BallIndex& index, std::span<const double> center, double r) {
    return index.mass_in_ball(center, r);
}

} // namespace densq
