#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rhjb/geometry.hpp"
#include "rhjb/problem.hpp"
#include "rhjb/vec.hpp"

namespace rhjb {

// Uniform space-time grid. One node layer must sit exactly on the interface
// {x_N = 0}; the normal-axis coordinate of that layer is snapped to 0 so node
// classification is exact. The time step obeys dt <= dx_min / M_b, keeping
// every foot point within one cell of its node.
struct GridSpec {
    Vec lo, hi;
    std::array<int, kMaxDim> nodes{};  // per axis
    int dim = 0;
    double dt = 0.0;
    int steps = 0;
    int interface_layer = -1;  // node index along the normal axis

    static GridSpec make(const Vec& lo, const Vec& hi, const std::array<int, kMaxDim>& nodes,
                         double horizon, double max_speed, double cfl = 0.5) {
        if (!(cfl > 0.0 && cfl <= 1.0))
            throw std::invalid_argument("grid: cfl must be in (0, 1] so feet stay within one cell");
        GridSpec g;
        g.lo = lo;
        g.hi = hi;
        g.nodes = nodes;
        g.dim = lo.n;
        for (int ax = 0; ax < g.dim; ++ax) {
            if (nodes[static_cast<std::size_t>(ax)] < 2)
                throw std::invalid_argument("grid: need at least 2 nodes per axis");
            if (!(hi[ax] > lo[ax])) throw std::invalid_argument("grid: empty box");
        }
        const int ax = g.dim - 1;
        const double dxn = g.spacing(ax);
        const double k = -lo[ax] / dxn;
        const double kr = std::round(k);
        if (std::abs(k - kr) > 1e-9 * (g.nodes[static_cast<std::size_t>(ax)] - 1) ||
            kr < 0 || kr > g.nodes[static_cast<std::size_t>(ax)] - 1)
            throw std::invalid_argument("grid: no node layer on the interface x_N = 0");
        g.interface_layer = static_cast<int>(kr);

        const double dt_max = g.min_spacing() * cfl / max_speed;
        g.steps = static_cast<int>(std::ceil(horizon / dt_max - 1e-12));
        g.dt = horizon / g.steps;
        return g;
    }

    // Convenience: same resolution dx on every axis of the problem box.
    static GridSpec make_uniform(const ProblemSpec& spec, double dx, double cfl = 0.5) {
        std::array<int, kMaxDim> nodes{};
        for (int ax = 0; ax < spec.dimension; ++ax) {
            const double len = spec.box_hi[ax] - spec.box_lo[ax];
            const double k = len / dx;
            if (std::abs(k - std::round(k)) > 1e-9)
                throw std::invalid_argument("grid: box length is not a multiple of dx");
            nodes[static_cast<std::size_t>(ax)] = static_cast<int>(std::round(k)) + 1;
        }
        return make(spec.box_lo, spec.box_hi, nodes, spec.horizon,
                    spec.max_speed_bound(), cfl);
    }

    double spacing(int axis) const {
        return (hi[axis] - lo[axis]) / (nodes[static_cast<std::size_t>(axis)] - 1);
    }
    double min_spacing() const {
        double m = spacing(0);
        for (int ax = 1; ax < dim; ++ax) m = std::min(m, spacing(ax));
        return m;
    }

    double coordinate(int axis, int i) const {
        if (axis == dim - 1 && i == interface_layer) return 0.0;
        return lo[axis] + i * spacing(axis);
    }

    std::int64_t node_count() const {
        std::int64_t c = 1;
        for (int ax = 0; ax < dim; ++ax) c *= nodes[static_cast<std::size_t>(ax)];
        return c;
    }

    // Row-major flattening, last axis fastest.
    std::int64_t flatten(const std::array<int, kMaxDim>& idx) const {
        std::int64_t f = 0;
        for (int ax = 0; ax < dim; ++ax)
            f = f * nodes[static_cast<std::size_t>(ax)] + idx[static_cast<std::size_t>(ax)];
        return f;
    }

    std::array<int, kMaxDim> unflatten(std::int64_t f) const {
        std::array<int, kMaxDim> idx{};
        for (int ax = dim - 1; ax >= 0; --ax) {
            idx[static_cast<std::size_t>(ax)] =
                static_cast<int>(f % nodes[static_cast<std::size_t>(ax)]);
            f /= nodes[static_cast<std::size_t>(ax)];
        }
        return idx;
    }

    Vec point(std::int64_t f) const {
        const auto idx = unflatten(f);
        Vec x(dim);
        for (int ax = 0; ax < dim; ++ax) x[ax] = coordinate(ax, idx[static_cast<std::size_t>(ax)]);
        return x;
    }

    bool on_interface_layer(std::int64_t f) const {
        return unflatten(f)[static_cast<std::size_t>(dim - 1)] == interface_layer;
    }

    double time_of(int layer) const { return horizon_fraction(layer) * (dt * steps); }
    double horizon_fraction(int layer) const {
        return static_cast<double>(layer) / steps;
    }
};

enum class Variant { Uminus, Uplus, SingleDomain };

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::Uminus: return "u-minus";
        case Variant::Uplus: return "u-plus";
        case Variant::SingleDomain: return "single-domain";
    }
    return "?";
}

// Value function samples on the space-time grid; layer k holds the value
// with remaining horizon k * dt, so layer 0 is the terminal cost.
struct ValueField {
    Variant variant = Variant::Uminus;
    GridSpec grid;
    std::vector<std::vector<double>> layers;  // [steps + 1][node_count]

    const std::vector<double>& layer(int k) const {
        return layers[static_cast<std::size_t>(k)];
    }
    double at(int k, std::int64_t node) const {
        return layers[static_cast<std::size_t>(k)][static_cast<std::size_t>(node)];
    }
};

// Multilinear interpolation of one layer, clamped to the box. Weights within
// 1e-9 of a node collapse onto it, so node queries reproduce nodal values
// exactly (in particular on the interface layer).
inline double interpolate(const GridSpec& g, const std::vector<double>& layer,
                          const Vec& x) {
    std::array<int, kMaxDim> base{};
    std::array<double, kMaxDim> w{};
    for (int ax = 0; ax < g.dim; ++ax) {
        const int n = g.nodes[static_cast<std::size_t>(ax)];
        double s = (x[ax] - g.lo[ax]) / g.spacing(ax);
        s = std::clamp(s, 0.0, static_cast<double>(n - 1));
        const int j = std::min(static_cast<int>(s), n - 2);
        double wj = s - j;
        if (wj < 1e-9) wj = 0.0;
        else if (wj > 1.0 - 1e-9) wj = 1.0;
        base[static_cast<std::size_t>(ax)] = j;
        w[static_cast<std::size_t>(ax)] = wj;
    }

    double value = 0.0;
    const int corners = 1 << g.dim;
    for (int c = 0; c < corners; ++c) {
        double weight = 1.0;
        std::array<int, kMaxDim> idx = base;
        for (int ax = 0; ax < g.dim; ++ax) {
            const bool high = (c >> ax) & 1;
            const double wa = w[static_cast<std::size_t>(ax)];
            weight *= high ? wa : (1.0 - wa);
            if (high) idx[static_cast<std::size_t>(ax)] += 1;
        }
        if (weight == 0.0) continue;
        value += weight * layer[static_cast<std::size_t>(g.flatten(idx))];
    }
    return value;
}

inline double interpolate(const ValueField& f, int time_index, const Vec& x) {
    return interpolate(f.grid, f.layer(time_index), x);
}

}  // namespace rhjb
