#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rhjb/fields.hpp"
#include "rhjb/geometry.hpp"
#include "rhjb/vec.hpp"

namespace rhjb {

// Finite sample of a compact control set. All suprema over the control set
// become maxima over this list; order is part of the contract (ties in every
// optimization break toward the first-listed control).
struct ControlSample {
    std::vector<Vec> values;

    int size() const { return static_cast<int>(values.size()); }
    const Vec& operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
    int control_dim() const { return values.empty() ? 0 : values.front().n; }
};

inline ControlSample uniform_controls(int count, double lo, double hi) {
    if (count < 1) throw std::invalid_argument("uniform_controls: count must be >= 1");
    ControlSample s;
    s.values.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const double w = count == 1 ? 0.5 : static_cast<double>(k) / (count - 1);
        s.values.push_back(Vec{lo + w * (hi - lo)});
    }
    return s;
}

// Cartesian product of per-axis 1-D samples, for vector-valued controls.
inline ControlSample product_controls(const std::vector<ControlSample>& axes) {
    ControlSample out;
    std::vector<int> idx(axes.size(), 0);
    const int dim = static_cast<int>(axes.size());
    while (true) {
        Vec v(dim);
        for (int d = 0; d < dim; ++d) v[d] = axes[static_cast<std::size_t>(d)][idx[static_cast<std::size_t>(d)]][0];
        out.values.push_back(v);
        int d = dim - 1;
        while (d >= 0) {
            if (++idx[static_cast<std::size_t>(d)] < axes[static_cast<std::size_t>(d)].size()) break;
            idx[static_cast<std::size_t>(d)] = 0;
            --d;
        }
        if (d < 0) break;
    }
    return out;
}

// Declared bounds for one side's data; the audits check the actual maps
// against these by sampling.
struct SideBounds {
    double speed_bound = 0.0;       // |b| <= speed_bound
    double speed_lipschitz = 0.0;   // Lipschitz constant of b in (x, t)
    double cost_bound = 0.0;        // |l| <= cost_bound
    double cost_lipschitz = 0.0;    // Lipschitz constant of l in (x, t)
};

struct SideData {
    VectorField dynamics;
    ScalarField cost;
    SideBounds bounds;
};

// Full two-domain problem description.
struct ProblemSpec {
    int dimension = 1;
    SideData side1;
    SideData side2;
    ScalarField terminal_cost;
    double horizon = 1.0;
    double delta = 0.0;  // normal controllability radius
    ControlSample controls1;
    ControlSample controls2;
    int mu_grid = 5;     // mu samples for doubly tangent control pairs
    Vec box_lo, box_hi;  // sampling box for audits and default grids

    double tangency_tolerance() const { return 1e-10 * max_speed_bound(); }
    double max_speed_bound() const {
        return std::max(side1.bounds.speed_bound, side2.bounds.speed_bound);
    }
    double max_cost_bound() const {
        return std::max(side1.bounds.cost_bound, side2.bounds.cost_bound);
    }
    double max_speed_lipschitz() const {
        return std::max(side1.bounds.speed_lipschitz, side2.bounds.speed_lipschitz);
    }
    double max_cost_lipschitz() const {
        return std::max(side1.bounds.cost_lipschitz, side2.bounds.cost_lipschitz);
    }

    const SideData& side(int i) const { return i == 1 ? side1 : side2; }
    const ControlSample& controls(int i) const { return i == 1 ? controls1 : controls2; }

    Vec side_velocity(int i, const Vec& x, double t, const Vec& alpha) const {
        return side(i).dynamics.eval(x, t, alpha);
    }
    double side_cost(int i, const Vec& x, double t, const Vec& alpha) const {
        return side(i).cost.eval(x, t, alpha);
    }
    double terminal(const Vec& x) const { return terminal_cost.eval(x, 0.0, Vec{}); }

    // Outward normal projection of the side dynamics, beta_i = b_i . n_i.
    double beta(int i, const Vec& x, double t, const Vec& alpha) const {
        const double bn = side_velocity(i, x, t, alpha).back();
        return i == 1 ? -bn : bn;
    }

    bool time_dependent() const {
        return side1.dynamics.time_dependent() || side2.dynamics.time_dependent() ||
               side1.cost.time_dependent() || side2.cost.time_dependent();
    }

    double terminal_lipschitz() const { return terminal_cost.lipschitz_xt(); }

    void validate() const {
        if (dimension < 1 || dimension > kMaxDim)
            throw std::invalid_argument("problem: dimension out of range");
        if (delta <= 0.0) throw std::invalid_argument("problem: delta must be positive");
        if (horizon <= 0.0) throw std::invalid_argument("problem: horizon must be positive");
        if (mu_grid < 1) throw std::invalid_argument("problem: mu grid must be >= 1");
        if (controls1.size() < 1 || controls2.size() < 1)
            throw std::invalid_argument("problem: control samples must be nonempty");
        if (box_lo.n != dimension || box_hi.n != dimension)
            throw std::invalid_argument("problem: sampling box dimension mismatch");
    }
};

// --- Shipped demo problems -------------------------------------------------

// 1-D two-zone problem with opposed cost gradients: moving away from the
// interface is free on each side, crossing toward it costs up to 2. The
// minimal value function uses the zero-cost singular mixture at the
// interface; the maximal one has to pay rate 1 there.
inline ProblemSpec make_gap_problem(int controls_per_side = 21) {
    ProblemSpec p;
    p.dimension = 1;
    p.horizon = 1.0;
    p.delta = 1.0;
    p.mu_grid = 5;
    p.controls1 = uniform_controls(controls_per_side, -1.0, 1.0);
    p.controls2 = uniform_controls(controls_per_side, -1.0, 1.0);

    ScalarField b;  // b_i(x,t,a) = a
    b = affine_scalar(0.0, zeros(1), 0.0, Vec{1.0});
    p.side1.dynamics.components = {b};
    p.side2.dynamics.components = {b};
    p.side1.cost = affine_scalar(1.0, zeros(1), 0.0, Vec{-1.0});  // 1 - a
    p.side2.cost = affine_scalar(1.0, zeros(1), 0.0, Vec{1.0});   // 1 + a
    p.side1.bounds = {1.0, 0.0, 2.0, 0.0};
    p.side2.bounds = {1.0, 0.0, 2.0, 0.0};
    p.terminal_cost = clamped_abs_scalar(2.0, 2.0, -1);  // min(2|x|, 2)
    p.box_lo = Vec{-2.0};
    p.box_hi = Vec{2.0};
    return p;
}

// 1-D eikonal problem with continuous coefficients; its value function has
// the closed Hopf-Lax form t + min_{|y-x|<=t} g(y).
inline ProblemSpec make_eikonal_problem(int controls_per_side = 21) {
    ProblemSpec p;
    p.dimension = 1;
    p.horizon = 1.0;
    p.delta = 1.0;
    p.mu_grid = 5;
    p.controls1 = uniform_controls(controls_per_side, -1.0, 1.0);
    p.controls2 = uniform_controls(controls_per_side, -1.0, 1.0);

    ScalarField b = affine_scalar(0.0, zeros(1), 0.0, Vec{1.0});
    p.side1.dynamics.components = {b};
    p.side2.dynamics.components = {b};
    p.side1.cost = constant_scalar(1.0);
    p.side2.cost = constant_scalar(1.0);
    p.side1.bounds = {1.0, 0.0, 1.0, 0.0};
    p.side2.bounds = {1.0, 0.0, 1.0, 0.0};
    p.terminal_cost = clamped_abs_scalar(1.0, 1.0, -1);  // min(|x|, 1)
    p.box_lo = Vec{-2.0};
    p.box_hi = Vec{2.0};
    return p;
}

// 2-D variant of the gap problem with a tangential coordinate x1 and normal
// coordinate x2. The normal speed depends on x1, so interface control sets
// vary along the interface; costs keep the gap structure in the control's
// normal component.
inline ProblemSpec make_gap2d_problem(int tangential_controls = 3,
                                      int normal_controls = 5) {
    ProblemSpec p;
    p.dimension = 2;
    p.horizon = 1.0;
    p.delta = 0.7;
    p.mu_grid = 5;
    ControlSample tang = uniform_controls(tangential_controls, -1.0, 1.0);
    ControlSample norm = uniform_controls(normal_controls, -1.0, 1.0);
    p.controls1 = product_controls({tang, norm});
    p.controls2 = p.controls1;

    // b_i(x,t,a) = (a_t, a_n + 0.15 x1); on the box |0.15 x1| <= 0.3, so the
    // attainable normal speeds always cover [-0.7, 0.7].
    ScalarField bt = affine_scalar(0.0, zeros(2), 0.0, Vec{1.0, 0.0});
    ScalarField bn = affine_scalar(0.0, Vec{0.15, 0.0}, 0.0, Vec{0.0, 1.0});
    p.side1.dynamics.components = {bt, bn};
    p.side2.dynamics.components = {bt, bn};
    // l1 = 1 - a_n + 0.05 x1, l2 = 1 + a_n - 0.05 x1
    p.side1.cost = affine_scalar(1.0, Vec{0.05, 0.0}, 0.0, Vec{0.0, -1.0});
    p.side2.cost = affine_scalar(1.0, Vec{-0.05, 0.0}, 0.0, Vec{0.0, 1.0});
    const double mb = std::sqrt(1.0 + 1.3 * 1.3);
    p.side1.bounds = {mb, 0.15, 2.1, 0.05};
    p.side2.bounds = {mb, 0.15, 2.1, 0.05};
    p.terminal_cost = clamped_abs_scalar(2.0, 2.0, 1);  // min(2|x2|, 2)
    p.box_lo = Vec{-2.0, -2.0};
    p.box_hi = Vec{2.0, 2.0};
    return p;
}

}  // namespace rhjb
