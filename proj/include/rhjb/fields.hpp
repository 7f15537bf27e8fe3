#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rhjb/vec.hpp"

namespace rhjb {

// Builtin coefficient families. Dynamics and costs are closed-form parametric
// maps selected by configuration; no expression interpreter.

enum class FieldFamily { Constant, Affine, Tabulated, ClampedAbs };

// One-dimensional uniform table with linear interpolation, clamped outside.
struct Table1D {
    double lo = 0.0, hi = 1.0;
    std::vector<double> values;  // size >= 2

    double eval(double x) const {
        const int n = static_cast<int>(values.size());
        if (n == 1) return values[0];
        const double dx = (hi - lo) / (n - 1);
        double s = (x - lo) / dx;
        s = std::clamp(s, 0.0, static_cast<double>(n - 1));
        int j = std::min(static_cast<int>(s), n - 2);
        const double w = s - j;
        return (1.0 - w) * values[static_cast<std::size_t>(j)] +
               w * values[static_cast<std::size_t>(j + 1)];
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }

    double max_slope() const {
        const int n = static_cast<int>(values.size());
        if (n < 2) return 0.0;
        const double dx = (hi - lo) / (n - 1);
        double m = 0.0;
        for (int j = 0; j + 1 < n; ++j)
            m = std::max(m, std::abs(values[static_cast<std::size_t>(j + 1)] -
                                     values[static_cast<std::size_t>(j)]) / dx);
        return m;
    }
};

// Scalar map (x, t, control) -> value.
//   constant:    c0
//   affine:      c0 + cx.x + ct*t + ca.alpha
//   tabulated:   table(x[axis]), ignores t and alpha
//   clamped-abs: min(scale*|x| or scale*|x[axis]|, cap)
struct ScalarField {
    FieldFamily family = FieldFamily::Constant;
    double c0 = 0.0;
    Vec cx;        // affine
    double ct = 0.0;
    Vec ca;        // affine
    Table1D table;     // tabulated
    int axis = -1;     // tabulated / clamped-abs; -1 means radial |x|
    double scale = 1.0, cap = 0.0;  // clamped-abs
    double offset = 0.0;            // additive shift, any family

    double eval(const Vec& x, double t, const Vec& alpha) const {
        switch (family) {
            case FieldFamily::Constant:
                return c0 + offset;
            case FieldFamily::Affine:
                return c0 + offset + dot(cx, x) + ct * t + dot(ca, alpha);
            case FieldFamily::Tabulated:
                return offset + table.eval(axis < 0 ? norm(x) : x[axis]);
            case FieldFamily::ClampedAbs: {
                const double r = axis < 0 ? norm(x) : std::abs(x[axis]);
                return offset + std::min(scale * r, cap);
            }
        }
        return 0.0;
    }

    bool time_dependent() const { return family == FieldFamily::Affine && ct != 0.0; }

    // Lipschitz constant in (x, t) over a box of half-width `radius`,
    // derived from the family parameters (exact for these families).
    double lipschitz_xt() const {
        switch (family) {
            case FieldFamily::Constant: return 0.0;
            case FieldFamily::Affine: return norm(cx) + std::abs(ct);
            case FieldFamily::Tabulated: return table.max_slope();
            case FieldFamily::ClampedAbs: return scale;
        }
        return 0.0;
    }
};

// Vector map (x, t, control) -> velocity; one ScalarField per component.
struct VectorField {
    std::vector<ScalarField> components;

    int out_dim() const { return static_cast<int>(components.size()); }

    Vec eval(const Vec& x, double t, const Vec& alpha) const {
        Vec y(out_dim());
        for (int i = 0; i < y.n; ++i)
            y[i] = components[static_cast<std::size_t>(i)].eval(x, t, alpha);
        return y;
    }

    bool time_dependent() const {
        for (const auto& c : components)
            if (c.time_dependent()) return true;
        return false;
    }

    double lipschitz_xt() const {
        double s = 0.0;
        for (const auto& c : components) {
            const double li = c.lipschitz_xt();
            s += li * li;
        }
        return std::sqrt(s);
    }
};

inline ScalarField constant_scalar(double c) {
    ScalarField f;
    f.family = FieldFamily::Constant;
    f.c0 = c;
    return f;
}

inline ScalarField affine_scalar(double c0, Vec cx, double ct, Vec ca) {
    ScalarField f;
    f.family = FieldFamily::Affine;
    f.c0 = c0;
    f.cx = std::move(cx);
    f.ct = ct;
    f.ca = std::move(ca);
    return f;
}

inline ScalarField clamped_abs_scalar(double scale, double cap, int axis) {
    ScalarField f;
    f.family = FieldFamily::ClampedAbs;
    f.scale = scale;
    f.cap = cap;
    f.axis = axis;
    return f;
}

// base + eps * bump, staying within the closed family set. Constant bumps
// compose with everything; affine bumps with constant or affine bases.
inline ScalarField scaled_sum(const ScalarField& base, const ScalarField& bump,
                              double eps) {
    ScalarField out = base;
    if (bump.family == FieldFamily::Constant) {
        out.offset += eps * (bump.c0 + bump.offset);
        return out;
    }
    if (bump.family == FieldFamily::Affine &&
        (base.family == FieldFamily::Affine || base.family == FieldFamily::Constant)) {
        if (base.family == FieldFamily::Constant) {
            out = affine_scalar(base.c0 + base.offset, eps * bump.cx, eps * bump.ct,
                                eps * bump.ca);
            out.offset = eps * (bump.c0 + bump.offset);
            return out;
        }
        if (out.cx.n == 0) out.cx = zeros(bump.cx.n);
        if (out.ca.n == 0) out.ca = zeros(bump.ca.n);
        if (bump.cx.n) out.cx += eps * bump.cx;
        if (bump.ca.n) out.ca += eps * bump.ca;
        out.ct += eps * bump.ct;
        out.offset += eps * (bump.c0 + bump.offset);
        return out;
    }
    throw std::invalid_argument(
        "scaled_sum: perturbation family does not compose with the base family");
}

}  // namespace rhjb
