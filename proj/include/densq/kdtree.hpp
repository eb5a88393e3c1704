#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "densq/geometry.hpp"

namespace densq {

/// Bounding-box tree over weighted points with per-node mass (and optionally
/// first/second moment) aggregates. Ball queries add whole nodes whose box
/// lies inside the ball and skip nodes whose box misses it; only boundary
/// leaves test atoms individually. Both box tests are monotone in the same
/// floating-point expression used for atoms (squared_distance), so the
/// selected atom set is exactly the brute-force one.
class BoxTree {
public:
    BoxTree() = default;

    BoxTree(std::span<const double> coords, std::span<const double> weights, std::size_t dim,
            bool with_moments = true, std::size_t leaf_size = 8)
        : dim_(dim), leaf_size_(std::max<std::size_t>(1, leaf_size)), with_moments_(with_moments) {
        const std::size_t n = weights.size();
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        nodes_.reserve(2 * (n / leaf_size_ + 1));
        if (n > 0) build(coords, perm, 0, n);
        pts_.resize(n * dim_);
        w_.resize(n);
        orig_.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t i = perm[k];
            std::copy_n(coords.begin() + static_cast<std::ptrdiff_t>(i * dim_), dim_,
                        pts_.begin() + static_cast<std::ptrdiff_t>(k * dim_));
            w_[k] = weights[i];
            orig_[k] = static_cast<std::uint32_t>(i);
        }
        mass_.assign(nodes_.size(), 0.0);
        if (with_moments_) {
            mean_.assign(nodes_.size() * dim_, 0.0);
            scatter_.assign(nodes_.size() * dim_ * dim_, 0.0);
        }
        if (!nodes_.empty()) aggregate(0);
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return w_.size(); }
    bool has_moments() const noexcept { return with_moments_; }

    /// Sum of weights with |y - center| <= r.
    double mass_closed(std::span<const double> center, double r) const { return mass_query<true>(center, r * r); }

    /// Sum of weights with |y - center| < r.
    double mass_open(std::span<const double> center, double r) const { return mass_query<false>(center, r * r); }

    /// Calls f(original_index, weight, squared_distance) for every atom in the closed ball.
    template <class F>
    void for_each_in_ball(std::span<const double> center, double r, F&& f) const {
        if (nodes_.empty()) return;
        const double r2 = r * r;
        std::array<std::uint32_t, 160> stack;
        std::size_t top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const std::uint32_t id = stack[--top];
            const Node& nd = nodes_[id];
            if (gap2(id, center) > r2) continue;
            if (nd.left < 0) {
                for (std::uint32_t k = nd.begin; k < nd.end; ++k) {
                    const double d2 = squared_distance(point(k), center);
                    if (d2 <= r2) f(static_cast<std::size_t>(orig_[k]), w_[k], d2);
                }
                continue;
            }
            stack[top++] = static_cast<std::uint32_t>(nd.right);
            stack[top++] = static_cast<std::uint32_t>(nd.left);
        }
    }

    /// Mass, weighted mean and scatter matrix of the atoms in the closed ball.
    MomentAccumulator moments_closed(std::span<const double> center, double r) const {
        MomentAccumulator acc(dim_);
        if (nodes_.empty()) return acc;
        const double r2 = r * r;
        std::array<std::uint32_t, 160> stack;
        std::size_t top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const std::uint32_t id = stack[--top];
            const Node& nd = nodes_[id];
            if (gap2(id, center) > r2) continue;
            if (with_moments_ && corner2(id, center) <= r2) {
                acc.merge(mass_[id], std::span<const double>(mean_).subspan(id * dim_, dim_),
                          std::span<const double>(scatter_).subspan(id * dim_ * dim_, dim_ * dim_));
                continue;
            }
            if (nd.left < 0) {
                for (std::uint32_t k = nd.begin; k < nd.end; ++k)
                    if (squared_distance(point(k), center) <= r2) acc.add(point(k), w_[k]);
                continue;
            }
            stack[top++] = static_cast<std::uint32_t>(nd.right);
            stack[top++] = static_cast<std::uint32_t>(nd.left);
        }
        return acc;
    }

    /// Largest squared distance from center to any atom.
    double farthest_squared_distance(std::span<const double> center) const {
        double best = 0.0;
        if (nodes_.empty()) return best;
        search_far(0, center, best);
        return best;
    }

    /// Smallest squared distance from atom `orig_index` to any other atom
    /// (infinity when the tree holds a single atom).
    double nearest_other_squared_distance(std::size_t orig_index, std::span<const double> at) const {
        double best = std::numeric_limits<double>::infinity();
        if (nodes_.empty()) return best;
        search_near(0, at, static_cast<std::uint32_t>(orig_index), best);
        return best;
    }

private:
    struct Node {
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
        std::int32_t left = -1;
        std::int32_t right = -1;
    };

    std::span<const double> point(std::size_t k) const { return std::span<const double>(pts_).subspan(k * dim_, dim_); }
    const double* lo(std::size_t id) const { return &box_[id * 2 * dim_]; }
    const double* hi(std::size_t id) const { return &box_[id * 2 * dim_ + dim_]; }

    // squared distance from center to the box (0 inside)
    double gap2(std::size_t id, std::span<const double> c) const {
        const double* l = lo(id);
        const double* h = hi(id);
        double acc = 0.0;
        for (std::size_t k = 0; k < dim_; ++k) {
            double t = 0.0;
            if (c[k] < l[k])
                t = l[k] - c[k];
            else if (c[k] > h[k])
                t = c[k] - h[k];
            acc += t * t;
        }
        return acc;
    }

    // squared distance from center to the farthest box corner
    double corner2(std::size_t id, std::span<const double> c) const {
        const double* l = lo(id);
        const double* h = hi(id);
        double acc = 0.0;
        for (std::size_t k = 0; k < dim_; ++k) {
            const double t = std::max(std::abs(l[k] - c[k]), std::abs(h[k] - c[k]));
            acc += t * t;
        }
        return acc;
    }

    template <bool Closed>
    double mass_query(std::span<const double> center, double r2) const {
        if (nodes_.empty()) return 0.0;
        double total = 0.0;
        std::array<std::uint32_t, 160> stack;
        std::size_t top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const std::uint32_t id = stack[--top];
            const Node& nd = nodes_[id];
            const double g = gap2(id, center);
            if (Closed ? g > r2 : g >= r2) continue;
            const double c = corner2(id, center);
            if (Closed ? c <= r2 : c < r2) {
                total += mass_[id];
                continue;
            }
            if (nd.left < 0) {
                for (std::uint32_t k = nd.begin; k < nd.end; ++k) {
                    const double d2 = squared_distance(point(k), center);
                    if (Closed ? d2 <= r2 : d2 < r2) total += w_[k];
                }
                continue;
            }
            stack[top++] = static_cast<std::uint32_t>(nd.right);
            stack[top++] = static_cast<std::uint32_t>(nd.left);
        }
        return total;
    }

    std::int32_t build(std::span<const double> coords, std::vector<std::size_t>& perm, std::size_t b, std::size_t e) {
        const auto id = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back(Node{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(e), -1, -1});
        box_.resize(box_.size() + 2 * dim_);
        double* l = &box_[static_cast<std::size_t>(id) * 2 * dim_];
        double* h = l + dim_;
        for (std::size_t k = 0; k < dim_; ++k) {
            l[k] = std::numeric_limits<double>::infinity();
            h[k] = -std::numeric_limits<double>::infinity();
        }
        for (std::size_t t = b; t < e; ++t)
            for (std::size_t k = 0; k < dim_; ++k) {
                const double v = coords[perm[t] * dim_ + k];
                l[k] = std::min(l[k], v);
                h[k] = std::max(h[k], v);
            }
        if (e - b <= leaf_size_) return id;
        std::size_t axis = 0;
        double widest = -1.0;
        for (std::size_t k = 0; k < dim_; ++k)
            if (h[k] - l[k] > widest) {
                widest = h[k] - l[k];
                axis = k;
            }
        if (widest <= 0.0) return id;
        const std::size_t mid = b + (e - b) / 2;
        std::nth_element(perm.begin() + static_cast<std::ptrdiff_t>(b), perm.begin() + static_cast<std::ptrdiff_t>(mid),
                         perm.begin() + static_cast<std::ptrdiff_t>(e), [&](std::size_t x, std::size_t y) {
                             const double cx = coords[x * dim_ + axis];
                             const double cy = coords[y * dim_ + axis];
                             return cx < cy || (cx == cy && x < y);
                         });
        const std::int32_t left = build(coords, perm, b, mid);
        const std::int32_t right = build(coords, perm, mid, e);
        nodes_[static_cast<std::size_t>(id)].left = left;
        nodes_[static_cast<std::size_t>(id)].right = right;
        return id;
    }

    void aggregate(std::size_t id) {
        const Node nd = nodes_[id];
        if (nd.left < 0) {
            double m = 0.0;
            MomentAccumulator acc(with_moments_ ? dim_ : 0);
            for (std::uint32_t k = nd.begin; k < nd.end; ++k) {
                m += w_[k];
                if (with_moments_) acc.add(point(k), w_[k]);
            }
            mass_[id] = m;
            if (with_moments_) store_moments(id, acc);
            return;
        }
        const auto l = static_cast<std::size_t>(nd.left);
        const auto r = static_cast<std::size_t>(nd.right);
        aggregate(l);
        aggregate(r);
        mass_[id] = mass_[l] + mass_[r];
        if (with_moments_) {
            MomentAccumulator acc(dim_);
            for (std::size_t c : {l, r})
                acc.merge(mass_[c], std::span<const double>(mean_).subspan(c * dim_, dim_),
                          std::span<const double>(scatter_).subspan(c * dim_ * dim_, dim_ * dim_));
            store_moments(id, acc);
        }
    }

    void store_moments(std::size_t id, const MomentAccumulator& acc) {
        std::copy(acc.mean().begin(), acc.mean().end(), mean_.begin() + static_cast<std::ptrdiff_t>(id * dim_));
        std::copy(acc.scatter().begin(), acc.scatter().end(),
                  scatter_.begin() + static_cast<std::ptrdiff_t>(id * dim_ * dim_));
    }

    void search_far(std::size_t id, std::span<const double> c, double& best) const {
        if (corner2(id, c) <= best) return;
        const Node& nd = nodes_[id];
        if (nd.left < 0) {
            for (std::uint32_t k = nd.begin; k < nd.end; ++k) best = std::max(best, squared_distance(point(k), c));
            return;
        }
        const auto l = static_cast<std::size_t>(nd.left);
        const auto r = static_cast<std::size_t>(nd.right);
        if (corner2(l, c) >= corner2(r, c)) {
            search_far(l, c, best);
            search_far(r, c, best);
        } else {
            search_far(r, c, best);
            search_far(l, c, best);
        }
    }

    void search_near(std::size_t id, std::span<const double> c, std::uint32_t self, double& best) const {
        if (gap2(id, c) >= best) return;
        const Node& nd = nodes_[id];
        if (nd.left < 0) {
            for (std::uint32_t k = nd.begin; k < nd.end; ++k)
                if (orig_[k] != self) best = std::min(best, squared_distance(point(k), c));
            return;
        }
        const auto l = static_cast<std::size_t>(nd.left);
        const auto r = static_cast<std::size_t>(nd.right);
        if (gap2(l, c) <= gap2(r, c)) {
            search_near(l, c, self, best);
            search_near(r, c, self, best);
        } else {
            search_near(r, c, self, best);
            search_near(l, c, self, best);
        }
    }

    std::size_t dim_ = 0;
    std::size_t leaf_size_ = 8;
    bool with_moments_ = true;
    std::vector<Node> nodes_;
    std::vector<double> box_;
    std::vector<double> mass_;
    std::vector<double> mean_;
    std::vector<double> scatter_;
    std::vector<double> pts_;
    std::vector<double> w_;
    std::vector<std::uint32_t> orig_;
};

} // namespace densq
