#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rhjb/hull.hpp"
#include "rhjb/rng.hpp"
#include "rhjb/sl_solver.hpp"
#include "rhjb/trajectory.hpp"

namespace rhjb {

// --- Finite-difference residuals of the interface problem --------------------

struct ResidualReport {
    long interior_checked = 0;
    long interior_skipped = 0;  // non-smooth nodes, excluded by design
    double worst_interior = 0.0;
    long interface_checked = 0;
    double worst_supersolution = 0.0;  // violation of u_t + max(H1,H2) >= 0
    double worst_subsolution = 0.0;    // violation of u_t + min(H1,H2) <= 0
    double worst_tangential = 0.0;     // violation of u_t + H_T(variant) <= 0
    double worst_tangential_unrestricted = 0.0;  // u_t + H_T for the maximal field
};

// Checks the equation residual at smoothness-classified nodes and the three
// interface inequalities (Ishii pair plus the tangential subsolution
// condition; the unrestricted tangential Hamiltonian is also evaluated for
// the maximal field as a diagnostic, where it is expected to be violated).
inline ResidualReport residual_check(const ProblemSpec& spec, const ValueField& field,
                                     double frame_width = -1.0, int time_stride = 1) {
    const GridSpec& g = field.grid;
    if (frame_width < 0.0) frame_width = spec.max_speed_bound() * spec.horizon;
    ResidualReport rep;
    const bool regular_only = field.variant == Variant::Uplus;

    for (int n = time_stride; n + time_stride <= g.steps; n += time_stride) {
        const double t = g.dt * n;
        const auto& um = field.layer(n - 1);
        const auto& u0 = field.layer(n);
        const auto& up = field.layer(n + 1);
        for (std::int64_t f = 0; f < g.node_count(); ++f) {
            const auto idx = g.unflatten(f);
            bool inside = true;
            for (int ax = 0; ax < g.dim && inside; ++ax) {
                const int i = idx[static_cast<std::size_t>(ax)];
                if (i == 0 || i == g.nodes[static_cast<std::size_t>(ax)] - 1) inside = false;
                const double c = g.coordinate(ax, i);
                if (c < g.lo[ax] + frame_width - 1e-12 || c > g.hi[ax] - frame_width + 1e-12)
                    inside = false;
            }
            if (!inside) continue;
            const Vec x = g.point(f);

            const double ut =
                (up[static_cast<std::size_t>(f)] - um[static_cast<std::size_t>(f)]) /
                (2.0 * g.dt);
            const double u_here = u0[static_cast<std::size_t>(f)];

            // one-sided and centered differences per axis
            Vec grad(g.dim), dplus(g.dim), dminus(g.dim);
            bool smooth =
                std::abs((up[static_cast<std::size_t>(f)] - u_here) / g.dt -
                         (u_here - um[static_cast<std::size_t>(f)]) / g.dt) <=
                10.0 * g.dt * std::max(1.0, std::abs(ut));
            for (int ax = 0; ax < g.dim; ++ax) {
                auto shifted = idx;
                shifted[static_cast<std::size_t>(ax)] += 1;
                const double u_hi = u0[static_cast<std::size_t>(g.flatten(shifted))];
                shifted[static_cast<std::size_t>(ax)] -= 2;
                const double u_lo = u0[static_cast<std::size_t>(g.flatten(shifted))];
                const double dx = g.spacing(ax);
                dplus[ax] = (u_hi - u_here) / dx;
                dminus[ax] = (u_here - u_lo) / dx;
                grad[ax] = (u_hi - u_lo) / (2.0 * dx);
                const double lip = std::max({1.0, std::abs(dplus[ax]), std::abs(dminus[ax])});
                if (std::abs(dplus[ax] - dminus[ax]) > 10.0 * dx * lip) smooth = false;
            }

            const bool on_interface =
                field.variant != Variant::SingleDomain && g.on_interface_layer(f);
            if (!on_interface) {
                if (!smooth) {
                    ++rep.interior_skipped;
                    continue;
                }
                const int side = field.variant == Variant::SingleDomain
                                     ? 1
                                     : (signed_distance(x) > 0.0 ? 1 : 2);
                const double r = ut + hamiltonian_side(spec, side, x, t, grad);
                rep.worst_interior = std::max(rep.worst_interior, std::abs(r));
                ++rep.interior_checked;
            } else {
                ++rep.interface_checked;
                Vec grad1 = grad, grad2 = grad;
                grad1.back() = dplus.back();   // derivative seen from Omega1
                grad2.back() = dminus.back();  // derivative seen from Omega2
                const double h1 = hamiltonian_side(spec, 1, x, t, grad1);
                const double h2 = hamiltonian_side(spec, 2, x, t, grad2);
                rep.worst_supersolution =
                    std::max(rep.worst_supersolution, -(ut + std::max(h1, h2)));
                rep.worst_subsolution =
                    std::max(rep.worst_subsolution, ut + std::min(h1, h2));

                const InterfaceControlSet set = interface_controls(spec, x, t);
                const double ht = hamiltonian_tangential(set, grad, regular_only);
                rep.worst_tangential = std::max(rep.worst_tangential, ut + ht);
                if (regular_only) {
                    const double ht_full = hamiltonian_tangential(set, grad, false);
                    rep.worst_tangential_unrestricted =
                        std::max(rep.worst_tangential_unrestricted, ut + ht_full);
                }
            }
        }
    }
    return rep;
}

// --- Strict subsolution ---------------------------------------------------------

struct StrictSubsolutionReport {
    double worst = -std::numeric_limits<double>::infinity();
    long violations = 0;  // samples with value > -1
    double k_used = 0.0;
    Vec witness;
};

// psi(x,t) = -K t - (1 + |x|^2)^(1/2) with K = M_b + M_l + 1 satisfies
// psi_t + max(H_1, H_2, tangential H) <= -1 everywhere; the gradient of psi
// has norm < 1, so the estimate is exact for the discrete maxima.
inline StrictSubsolutionReport strict_subsolution_check(const ProblemSpec& spec,
                                                        int samples, Rng& rng,
                                                        double k_override = 0.0) {
    StrictSubsolutionReport rep;
    const double K = k_override > 0.0
                         ? k_override
                         : spec.max_speed_bound() + spec.max_cost_bound() + 1.0;
    rep.k_used = K;
    for (int k = 0; k < samples; ++k) {
        Vec x = rng.point(spec.box_lo, spec.box_hi);
        if (k % 3 == 0) x.back() = 0.0;  // exercise interface points too
        const double t = rng.uniform(0.0, spec.horizon);
        Vec dpsi = x;
        dpsi *= -1.0 / std::sqrt(1.0 + dot(x, x));
        double val = -K + std::max(hamiltonian_side(spec, 1, x, t, dpsi),
                                   hamiltonian_side(spec, 2, x, t, dpsi));
        if (x.back() == 0.0) {
            const double ht = hamiltonian_tangential(spec, x, t, dpsi, false);
            val = std::max(val, -K + ht);
        }
        if (val > rep.worst) {
            rep.worst = val;
            rep.witness = x;
        }
        if (val > -1.0) ++rep.violations;
    }
    return rep;
}

// --- Ordering of the two value functions ----------------------------------------

struct ComparisonReport {
    double max_violation = 0.0;  // max (U- minus U+), all nodes and layers
    double max_gap = 0.0;        // max (U+ minus U-) inside the frame
    double gap_at_origin = 0.0;  // final layer, node nearest the origin
    bool pass = true;
};

inline ComparisonReport comparison_sweep(const ProblemSpec& spec, const ValueField& um,
                                         const ValueField& up, double tol_cmp = 1e-8,
                                         double frame_width = -1.0) {
    const GridSpec& g = um.grid;
    if (frame_width < 0.0) frame_width = spec.max_speed_bound() * spec.horizon;
    ComparisonReport rep;
    for (int n = 0; n <= g.steps; ++n) {
        const auto& a = um.layer(n);
        const auto& b = up.layer(n);
        for (std::int64_t f = 0; f < g.node_count(); ++f) {
            const double diff = a[static_cast<std::size_t>(f)] - b[static_cast<std::size_t>(f)];
            rep.max_violation = std::max(rep.max_violation, diff);
            const Vec x = g.point(f);
            bool inside = true;
            for (int ax = 0; ax < g.dim; ++ax)
                if (x[ax] < g.lo[ax] + frame_width - 1e-12 ||
                    x[ax] > g.hi[ax] - frame_width + 1e-12)
                    inside = false;
            if (inside) rep.max_gap = std::max(rep.max_gap, -diff);
        }
    }
    Vec origin = zeros(g.dim);
    rep.gap_at_origin = interpolate(up, g.steps, origin) - interpolate(um, g.steps, origin);
    rep.pass = rep.max_violation <= tol_cmp;
    return rep;
}

// --- Stability under coefficient perturbation ------------------------------------

struct Perturbation {
    VectorField db1, db2;  // empty means zero
    ScalarField dl1 = constant_scalar(0.0);
    ScalarField dl2 = constant_scalar(0.0);
    ScalarField dg = constant_scalar(0.0);
    double speed_bound = 0.0;     // sup |db|
    double cost_bound = 0.0;      // sup |dl|
    double terminal_bound = 0.0;  // sup |dg|
    double declared_slope = 0.0;  // 0: derive from the problem constants
};

inline ProblemSpec perturbed_spec(const ProblemSpec& base, const Perturbation& pert,
                                  double eps) {
    ProblemSpec p = base;
    auto apply_vec = [&](VectorField& b, const VectorField& db) {
        if (db.components.empty()) return;
        for (int i = 0; i < b.out_dim(); ++i)
            b.components[static_cast<std::size_t>(i)] =
                scaled_sum(b.components[static_cast<std::size_t>(i)],
                           db.components[static_cast<std::size_t>(i)], eps);
    };
    apply_vec(p.side1.dynamics, pert.db1);
    apply_vec(p.side2.dynamics, pert.db2);
    p.side1.cost = scaled_sum(p.side1.cost, pert.dl1, eps);
    p.side2.cost = scaled_sum(p.side2.cost, pert.dl2, eps);
    p.terminal_cost = scaled_sum(p.terminal_cost, pert.dg, eps);
    for (SideData* s : {&p.side1, &p.side2}) {
        s->bounds.speed_bound += eps * pert.speed_bound;
        s->bounds.cost_bound += eps * pert.cost_bound;
        s->bounds.speed_lipschitz +=
            eps * std::max(pert.db1.lipschitz_xt(), pert.db2.lipschitz_xt());
        s->bounds.cost_lipschitz +=
            eps * std::max(pert.dl1.lipschitz_xt(), pert.dl2.lipschitz_xt());
    }
    return p;
}

// Gronwall-type slope of the value function in the perturbation size, from
// the declared constants only.
inline double stability_slope(const ProblemSpec& spec, const Perturbation& pert) {
    if (pert.declared_slope > 0.0) return pert.declared_slope;
    const double T = spec.horizon;
    const double lb = spec.max_speed_lipschitz();
    const double ll = spec.max_cost_lipschitz();
    const double lg = spec.terminal_lipschitz();
    const double growth = std::exp(lb * T);
    const double slope = T * pert.cost_bound + pert.terminal_bound +
                         pert.speed_bound * growth * (ll * T * T / 2.0 + lg * T);
    return 2.0 * slope;  // safety factor over the first-order estimate
}

struct StabilityRow {
    double eps = 0.0;
    double gap = 0.0;  // sup over the frame interior, all layers, |U_eps - U_0|
};

struct StabilityReport {
    std::vector<StabilityRow> rows;
    double slope = 0.0;
    bool monotone_within_factor3 = true;
    bool last_below_slope = true;
    bool pass = true;
};

inline StabilityReport stability_sweep(const ProblemSpec& spec, const Perturbation& pert,
                                       const std::vector<double>& epsilons,
                                       const GridSpec& grid, Variant variant,
                                       int threads = 1) {
    StabilityReport rep;
    rep.slope = stability_slope(spec, pert);
    const ValueField base = solve(spec, grid, variant, threads).field;
    const double frame = spec.max_speed_bound() * spec.horizon;

    for (double eps : epsilons) {
        const ProblemSpec p = perturbed_spec(spec, pert, eps);
        const ValueField f = solve(p, grid, variant, threads).field;
        double gap = 0.0;
        for (int n = 0; n <= grid.steps; ++n) {
            for (std::int64_t k = 0; k < grid.node_count(); ++k) {
                const Vec x = grid.point(k);
                bool inside = true;
                for (int ax = 0; ax < grid.dim; ++ax)
                    if (x[ax] < grid.lo[ax] + frame - 1e-12 ||
                        x[ax] > grid.hi[ax] - frame + 1e-12)
                        inside = false;
                if (!inside) continue;
                gap = std::max(gap, std::abs(f.at(n, k) - base.at(n, k)));
            }
        }
        rep.rows.push_back({eps, gap});
    }
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (rep.rows[i].gap > 3.0 * rep.rows[i - 1].gap + 1e-12)
            rep.monotone_within_factor3 = false;
    if (!rep.rows.empty())
        rep.last_below_slope = rep.rows.back().gap <= rep.slope * rep.rows.back().eps;
    rep.pass = rep.monotone_within_factor3 && rep.last_below_slope;
    return rep;
}

// --- Closure of regular interface dynamics ----------------------------------------

// Distance of a realized (tangential velocity, cost rate) pair to the convex
// hull of the discrete regular interface dynamics at (z, s), in the joint
// (b, l) space. The normal components vanish on both sides of the distance.
inline double regular_hull_distance(const ProblemSpec& spec, const Vec& z, double s,
                                    const Vec& velocity, double cost_rate) {
    const InterfaceControlSet set = interface_controls(spec, z, s);
    std::vector<Vec> pts;
    for (int k = 0; k < set.size(); ++k) {
        if (!set.regular[static_cast<std::size_t>(k)]) continue;
        const BoundaryDynamics& d = set.dynamics[static_cast<std::size_t>(k)];
        Vec p(spec.dimension);  // N-1 tangential components + cost rate
        for (int i = 0; i + 1 < spec.dimension; ++i) p[i] = d.velocity[i];
        p[spec.dimension - 1] = d.cost_rate;
        pts.push_back(p);
    }
    Vec q(spec.dimension);
    for (int i = 0; i + 1 < spec.dimension; ++i) q[i] = velocity[i];
    q[spec.dimension - 1] = cost_rate;
    return hull_distance(pts, q);
}

struct RegularLimitRow {
    double eps = 0.0;
    double max_hull_gap = 0.0;
};

struct RegularLimitReport {
    std::vector<RegularLimitRow> rows;
    double bound_coefficient = 0.0;  // the C in gap <= C (h + eps)
    double step = 0.0;
    bool within_bound = true;
    bool decreasing = true;
    bool pass = true;
};

// Integrates the exact-mixture sliding flow of each perturbed problem with a
// fixed regular control pair and measures how far the realized interface
// dynamics stray from the unperturbed discrete regular set.
inline RegularLimitReport regular_limit_check(const ProblemSpec& spec,
                                              const Perturbation& pert,
                                              const std::vector<double>& epsilons,
                                              const Vec& z0, double t, const Vec& alpha1,
                                              const Vec& alpha2, double h) {
    RegularLimitReport rep;
    rep.step = h;
    const double mb = spec.max_speed_bound();
    const double ml = spec.max_cost_bound();
    const double lb = spec.max_speed_lipschitz();
    const double ll = spec.max_cost_lipschitz();
    rep.bound_coefficient = (1.0 + 4.0 * (mb + ml) / spec.delta) *
                            (pert.speed_bound + pert.cost_bound + mb * (lb + ll));

    for (double eps : epsilons) {
        const ProblemSpec p = perturbed_spec(spec, pert, eps);
        const SlideResult slide = slide_mu_sharp(p, z0, t, alpha1, alpha2, h);
        if (slide.aborted) {
            rep.pass = false;
            rep.rows.push_back({eps, std::numeric_limits<double>::infinity()});
            continue;
        }
        double worst = 0.0;
        const Trajectory& tr = slide.trajectory;
        for (std::size_t k = 0; k + 1 < tr.times.size(); ++k) {
            const Vec& x = tr.states[k];
            const double sigma = t - tr.times[k];
            const double b1 = p.beta(1, x, sigma, alpha1);
            const double b2 = p.beta(2, x, sigma, alpha2);
            const double denom = b1 + b2;
            if (denom == 0.0) continue;
            const ControlTriple a{alpha1, alpha2, std::clamp(b2 / denom, 0.0, 1.0)};
            const BoundaryDynamics d = boundary_dynamics(p, x, sigma, a);
            worst = std::max(worst,
                             regular_hull_distance(spec, x, sigma, d.velocity, d.cost_rate));
        }
        rep.rows.push_back({eps, worst});
        if (worst > rep.bound_coefficient * (h + eps)) rep.within_bound = false;
    }
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (rep.rows[i].max_hull_gap > rep.rows[i - 1].max_hull_gap + 1e-9)
            rep.decreasing = false;
    rep.pass = rep.pass && rep.within_bound && rep.decreasing;
    return rep;
}

// --- Oscillatory counterexample ---------------------------------------------------

struct CounterexampleRow {
    double eps = 0.0;
    double trace = 0.0;          // value of sin(x_N / eps) on the interface
    double upper_limit = 0.0;    // sup over a shrinking neighborhood
};

// The sequence u_eps(x) = sin(x_N / eps) has trace 0 on the interface but
// upper half-relaxed limit 1 there: subsolution properties seen only on the
// interface do not survive limits without normal controllability.
inline std::vector<CounterexampleRow> counterexample_demo(const std::vector<double>& epsilons) {
    std::vector<CounterexampleRow> rows;
    for (double eps : epsilons) {
        CounterexampleRow r;
        r.eps = eps;
        r.trace = std::sin(0.0 / eps);
        const double radius = std::min(0.5, 10.0 * eps);
        double sup = -1.0;
        for (int k = 0; k <= 10000; ++k) {
            const double xn = -radius + 2.0 * radius * k / 10000.0;
            sup = std::max(sup, std::sin(xn / eps));
        }
        r.upper_limit = sup;
        rows.push_back(r);
    }
    return rows;
}

}  // namespace rhjb
