#pragma once

#include <stdexcept>
#include <thread>
#include <vector>

#include "rhjb/grid.hpp"
#include "rhjb/hamiltonians.hpp"
#include "rhjb/problem.hpp"

namespace rhjb {

struct SolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StepDiagnostics {
    double min_value = 0.0;
    double max_value = 0.0;
};

struct SolveResult {
    ValueField field;
    std::vector<StepDiagnostics> per_step;
};

namespace detail {

struct Candidate {
    Vec velocity;
    double cost_rate;
};

// Candidate one-step strategies at a node. Interior nodes try every control
// of their own side. Interface nodes try three classes: controls of side 1
// that do not push into Omega1, controls of side 2 symmetrically, and the
// tangent mixtures (all of them for the minimal value function, only the
// regular ones for the maximal one).
inline void node_candidates(const ProblemSpec& spec, Variant variant, const Vec& x,
                            double t, std::vector<Candidate>& out) {
    out.clear();
    const RegionLabel region =
        variant == Variant::SingleDomain ? RegionLabel::Omega1 : classify(x, 0.0);

    if (region != RegionLabel::Interface) {
        const int side = region == RegionLabel::Omega1 ? 1 : 2;
        for (const Vec& a : spec.controls(side).values)
            out.push_back({spec.side_velocity(side, x, t, a),
                           spec.side_cost(side, x, t, a)});
        return;
    }

    const double tol = spec.tangency_tolerance();
    for (const Vec& a : spec.controls1.values) {
        if (spec.beta(1, x, t, a) <= tol)
            out.push_back({spec.side_velocity(1, x, t, a), spec.side_cost(1, x, t, a)});
    }
    for (const Vec& a : spec.controls2.values) {
        if (spec.beta(2, x, t, a) <= tol)
            out.push_back({spec.side_velocity(2, x, t, a), spec.side_cost(2, x, t, a)});
    }
    const InterfaceControlSet set = interface_controls(spec, x, t);
    const bool regular_only = variant == Variant::Uplus;
    for (int k = 0; k < set.size(); ++k) {
        if (regular_only && !set.regular[static_cast<std::size_t>(k)]) continue;
        out.push_back({set.dynamics[static_cast<std::size_t>(k)].velocity,
                       set.dynamics[static_cast<std::size_t>(k)].cost_rate});
    }
    if (out.empty())
        throw SolveError("interface node has no admissible one-step strategy at " +
                         to_string(x) + "; normal controllability is violated");
}

}  // namespace detail

// One time step of the discrete dynamic programming principle. Reusable with
// an arbitrary previous layer, which is what the monotonicity tests exercise.
class SlStepper {
  public:
    SlStepper(const ProblemSpec& spec, const GridSpec& grid, Variant variant)
        : spec_(spec), grid_(grid), variant_(variant),
          time_invariant_(!spec.time_dependent()) {
        if (time_invariant_) {
            cache_.resize(static_cast<std::size_t>(grid.node_count()));
            for (std::int64_t f = 0; f < grid.node_count(); ++f)
                detail::node_candidates(spec_, variant_, grid_.point(f), 0.0,
                                        cache_[static_cast<std::size_t>(f)]);
        }
    }

    // u_next(x) = min over candidates of [dt * l + interp(u_prev, x + dt * b)],
    // coefficients evaluated at the post-step remaining horizon t_next.
    double update_node(const std::vector<double>& prev, std::int64_t node,
                       double t_next) const {
        const Vec x = grid_.point(node);
        const double dt = grid_.dt;
        double best = std::numeric_limits<double>::infinity();
        auto consider = [&](const detail::Candidate& c) {
            const Vec foot = x + dt * c.velocity;
            const double v = dt * c.cost_rate + interpolate(grid_, prev, foot);
            if (v < best) best = v;
        };
        if (time_invariant_) {
            for (const auto& c : cache_[static_cast<std::size_t>(node)]) consider(c);
        } else {
            std::vector<detail::Candidate> cands;
            detail::node_candidates(spec_, variant_, x, t_next, cands);
            for (const auto& c : cands) consider(c);
        }
        return best;
    }

    std::vector<double> step(const std::vector<double>& prev, double t_next,
                             int threads = 1) const {
        const std::int64_t n = grid_.node_count();
        std::vector<double> next(static_cast<std::size_t>(n));
        auto work = [&](std::int64_t a, std::int64_t b) {
            for (std::int64_t f = a; f < b; ++f)
                next[static_cast<std::size_t>(f)] = update_node(prev, f, t_next);
        };
        if (threads <= 1) {
            work(0, n);
        } else {
            std::vector<std::thread> pool;
            const std::int64_t chunk = (n + threads - 1) / threads;
            for (int t = 0; t < threads; ++t) {
                const std::int64_t a = t * chunk;
                const std::int64_t b = std::min(n, a + chunk);
                if (a >= b) break;
                pool.emplace_back(work, a, b);
            }
            for (auto& th : pool) th.join();
        }
        return next;
    }

    const GridSpec& grid() const { return grid_; }

  private:
    const ProblemSpec& spec_;
    GridSpec grid_;
    Variant variant_;
    bool time_invariant_;
    std::vector<std::vector<detail::Candidate>> cache_;
};

// Marches the terminal cost through all time layers.
inline SolveResult solve(const ProblemSpec& spec, const GridSpec& grid, Variant variant,
                         int threads = 1) {
    SolveResult result;
    result.field.variant = variant;
    result.field.grid = grid;
    result.field.layers.resize(static_cast<std::size_t>(grid.steps) + 1);

    std::vector<double>& g0 = result.field.layers[0];
    g0.resize(static_cast<std::size_t>(grid.node_count()));
    for (std::int64_t f = 0; f < grid.node_count(); ++f)
        g0[static_cast<std::size_t>(f)] = spec.terminal(grid.point(f));

    const SlStepper stepper(spec, grid, variant);
    result.per_step.reserve(static_cast<std::size_t>(grid.steps));
    for (int k = 1; k <= grid.steps; ++k) {
        const double t_next = grid.dt * k;
        result.field.layers[static_cast<std::size_t>(k)] =
            stepper.step(result.field.layers[static_cast<std::size_t>(k - 1)], t_next,
                         threads);
        StepDiagnostics d;
        const auto& layer = result.field.layers[static_cast<std::size_t>(k)];
        d.min_value = *std::min_element(layer.begin(), layer.end());
        d.max_value = *std::max_element(layer.begin(), layer.end());
        result.per_step.push_back(d);
    }
    return result;
}

// Value at an off-grid space-time query, multilinear in space on the nearest
// time layer (time must align with a layer).
inline double field_value(const ValueField& f, const Vec& x, double t) {
    const double k = t / f.grid.dt;
    const int layer = static_cast<int>(std::round(k));
    if (std::abs(k - layer) > 1e-6 || layer < 0 || layer > f.grid.steps)
        throw std::invalid_argument("field_value: time does not align with a layer");
    return interpolate(f, layer, x);
}

}  // namespace rhjb
