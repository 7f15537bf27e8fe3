#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>

namespace rhjb {

// Fixed-capacity vector for points, velocities and control values.
// Desk-scale problems live in dimension <= kMaxDim; staying on the stack
// keeps the solver hot loops allocation-free.
inline constexpr int kMaxDim = 4;

struct Vec {
    std::array<double, kMaxDim> v{};
    int n = 0;

    Vec() = default;
    explicit Vec(int dim) : n(dim) { assert(dim >= 0 && dim <= kMaxDim); }
    Vec(std::initializer_list<double> xs) {
        assert(static_cast<int>(xs.size()) <= kMaxDim);
        n = static_cast<int>(xs.size());
        int i = 0;
        for (double x : xs) v[static_cast<std::size_t>(i++)] = x;
    }

    int size() const { return n; }
    double& operator[](int i) {
        assert(i >= 0 && i < n);
        return v[static_cast<std::size_t>(i)];
    }
    double operator[](int i) const {
        assert(i >= 0 && i < n);
        return v[static_cast<std::size_t>(i)];
    }
    double back() const { return (*this)[n - 1]; }
    double& back() { return (*this)[n - 1]; }

    Vec& operator+=(const Vec& o) {
        assert(n == o.n);
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] += o[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        assert(n == o.n);
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] -= o[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] *= s;
        return *this;
    }

    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(double s, Vec a) { return a *= s; }
    friend Vec operator*(Vec a, double s) { return a *= s; }

    friend bool operator==(const Vec& a, const Vec& b) {
        if (a.n != b.n) return false;
        for (int i = 0; i < a.n; ++i)
            if (a[i] != b[i]) return false;
        return true;
    }
};

inline double dot(const Vec& a, const Vec& b) {
    assert(a.n == b.n);
    double s = 0.0;
    for (int i = 0; i < a.n; ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec zeros(int dim) { return Vec(dim); }

inline Vec unit(int dim, int axis) {
    Vec e(dim);
    e[axis] = 1.0;
    return e;
}

inline bool is_finite(const Vec& a) {
    for (int i = 0; i < a.n; ++i)
        if (!std::isfinite(a[i])) return false;
    return true;
}

// Row-major matrix with the same small fixed capacity, used by the affine
// coefficient families (rows = output dim, cols = input dim).
struct Mat {
    std::array<Vec, kMaxDim> rows{};
    int nrows = 0;

    Mat() = default;
    Mat(int r, int c) : nrows(r) {
        assert(r >= 0 && r <= kMaxDim);
        for (int i = 0; i < r; ++i) rows[static_cast<std::size_t>(i)] = Vec(c);
    }

    Vec& row(int i) {
        assert(i >= 0 && i < nrows);
        return rows[static_cast<std::size_t>(i)];
    }
    const Vec& row(int i) const {
        assert(i >= 0 && i < nrows);
        return rows[static_cast<std::size_t>(i)];
    }
    double& operator()(int i, int j) { return row(i)[j]; }
    double operator()(int i, int j) const { return row(i)[j]; }

    Vec apply(const Vec& x) const {
        Vec y(nrows);
        for (int i = 0; i < nrows; ++i) y[i] = dot(row(i), x);
        return y;
    }

    // max row sum norm; a Lipschitz constant for x -> Mx in the 2-norm up
    // to the usual sqrt factors, adequate for declared-bound defaults
    double max_abs() const {
        double m = 0.0;
        for (int i = 0; i < nrows; ++i)
            for (int j = 0; j < row(i).n; ++j) m = std::max(m, std::abs(row(i)[j]));
        return m;
    }

    double frobenius() const {
        double s = 0.0;
        for (int i = 0; i < nrows; ++i) s += dot(row(i), row(i));
        return std::sqrt(s);
    }
};

inline std::string to_string(const Vec& a) {
    std::string s = "(";
    for (int i = 0; i < a.n; ++i) {
        if (i) s += ", ";
        s += std::to_string(a[i]);
    }
    return s + ")";
}

}  // namespace rhjb
