#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "rhjb/vec.hpp"

namespace rhjb {

namespace detail {

// Minimum-norm point of the convex hull of a simplex (up to kMaxDim + 1
// vertices): enumerate the faces, solve the normal equations on each affine
// hull, keep candidates with nonnegative barycentric coordinates.
inline double simplex_min_norm(std::vector<Vec>& simplex, Vec& closest) {
    const int m = static_cast<int>(simplex.size());
    double best = std::numeric_limits<double>::infinity();
    Vec best_point;
    std::vector<Vec> best_face;

    for (int mask = 1; mask < (1 << m); ++mask) {
        std::vector<const Vec*> face;
        for (int i = 0; i < m; ++i)
            if (mask & (1 << i)) face.push_back(&simplex[static_cast<std::size_t>(i)]);
        const int k = static_cast<int>(face.size()) - 1;

        // minimize |v0 + sum_j lambda_j (v_j - v0)|^2
        std::array<std::array<double, kMaxDim + 2>, kMaxDim + 1> a{};
        const Vec& v0 = *face[0];
        for (int r = 0; r < k; ++r) {
            const Vec dr = *face[static_cast<std::size_t>(r + 1)] - v0;
            for (int c = 0; c < k; ++c) {
                const Vec dc = *face[static_cast<std::size_t>(c + 1)] - v0;
                a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = dot(dr, dc);
            }
            a[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] = -dot(dr, v0);
        }
        bool singular = false;
        for (int col = 0; col < k && !singular; ++col) {
            int piv = col;
            for (int r = col + 1; r < k; ++r)
                if (std::abs(a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)]) >
                    std::abs(a[static_cast<std::size_t>(piv)][static_cast<std::size_t>(col)]))
                    piv = r;
            if (std::abs(a[static_cast<std::size_t>(piv)][static_cast<std::size_t>(col)]) < 1e-14) {
                singular = true;
                break;
            }
            std::swap(a[static_cast<std::size_t>(piv)], a[static_cast<std::size_t>(col)]);
            for (int r = col + 1; r < k; ++r) {
                const double f = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] /
                                 a[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
                for (int c = col; c <= k; ++c)
                    a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] -=
                        f * a[static_cast<std::size_t>(col)][static_cast<std::size_t>(c)];
            }
        }
        if (singular) continue;
        std::array<double, kMaxDim + 1> lambda{};
        for (int r = k - 1; r >= 0; --r) {
            double s = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)];
            for (int c = r + 1; c < k; ++c)
                s -= a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] *
                     lambda[static_cast<std::size_t>(c)];
            lambda[static_cast<std::size_t>(r)] =
                s / a[static_cast<std::size_t>(r)][static_cast<std::size_t>(r)];
        }
        double lambda0 = 1.0;
        bool feasible = true;
        for (int j = 0; j < k; ++j) {
            if (lambda[static_cast<std::size_t>(j)] < -1e-12) feasible = false;
            lambda0 -= lambda[static_cast<std::size_t>(j)];
        }
        if (lambda0 < -1e-12) feasible = false;
        if (!feasible) continue;

        Vec point = v0;
        for (int j = 0; j < k; ++j)
            point += lambda[static_cast<std::size_t>(j)] *
                     (*face[static_cast<std::size_t>(j + 1)] - v0);
        const double d = norm(point);
        if (d < best) {
            best = d;
            best_point = point;
            best_face.clear();
            for (const Vec* f : face) best_face.push_back(*f);
        }
    }
    closest = best_point;
    simplex = best_face;  // keep only the supporting face
    return best;
}

}  // namespace detail

// Euclidean distance from `query` to the convex hull of a finite point set,
// by support-function descent with an exact simplex subproblem. Exact for
// polytopes up to the termination tolerance.
inline double hull_distance(const std::vector<Vec>& points, const Vec& query) {
    if (points.empty()) return std::numeric_limits<double>::infinity();

    std::vector<Vec> shifted;
    shifted.reserve(points.size());
    for (const Vec& p : points) shifted.push_back(p - query);

    auto support = [&](const Vec& dir) {
        int best = 0;
        double bv = dot(shifted[0], dir);
        for (int i = 1; i < static_cast<int>(shifted.size()); ++i) {
            const double v = dot(shifted[static_cast<std::size_t>(i)], dir);
            if (v < bv) {
                bv = v;
                best = i;
            }
        }
        return shifted[static_cast<std::size_t>(best)];
    };

    std::vector<Vec> simplex = {shifted[0]};
    Vec v = shifted[0];
    double dist = norm(v);
    for (int iter = 0; iter < 200; ++iter) {
        if (dist < 1e-15) return 0.0;
        const Vec w = support(v);
        const double improvement = dot(v, v) - dot(v, w);
        if (improvement <= 1e-14 * std::max(1.0, dot(v, v))) break;
        bool duplicate = false;
        for (const Vec& sv : simplex)
            if (norm(sv - w) < 1e-15) duplicate = true;
        if (duplicate) break;
        simplex.push_back(w);
        dist = detail::simplex_min_norm(simplex, v);
    }
    return dist;
}

}  // namespace rhjb
