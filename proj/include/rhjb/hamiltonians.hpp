#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "rhjb/problem.hpp"
#include "rhjb/rng.hpp"

namespace rhjb {

inline constexpr double kMinusInfinity = -std::numeric_limits<double>::infinity();

// --- Side Hamiltonians -------------------------------------------------------

struct SideHamiltonian {
    double value = kMinusInfinity;
    int argmax = -1;
};

// H_i(x,t,p) = max over the side's control list of (-b_i . p - l_i).
inline SideHamiltonian hamiltonian_side_arg(const ProblemSpec& spec, int side,
                                            const Vec& x, double t, const Vec& p) {
    SideHamiltonian h;
    const ControlSample& ctrls = spec.controls(side);
    for (int k = 0; k < ctrls.size(); ++k) {
        const double v = -dot(spec.side_velocity(side, x, t, ctrls[k]), p) -
                         spec.side_cost(side, x, t, ctrls[k]);
        if (v > h.value) {
            h.value = v;
            h.argmax = k;
        }
    }
    return h;
}

inline double hamiltonian_side(const ProblemSpec& spec, int side, const Vec& x,
                               double t, const Vec& p) {
    return hamiltonian_side_arg(spec, side, x, t, p).value;
}

enum class IshiiMode { Min, Max };

inline double ishii_envelope(const ProblemSpec& spec, const Vec& x, double t,
                             const Vec& p, IshiiMode mode) {
    const double h1 = hamiltonian_side(spec, 1, x, t, p);
    const double h2 = hamiltonian_side(spec, 2, x, t, p);
    return mode == IshiiMode::Min ? std::min(h1, h2) : std::max(h1, h2);
}

// --- Interface controls ------------------------------------------------------

// Mixture control (alpha1, alpha2, mu) on the interface.
struct ControlTriple {
    Vec alpha1;
    Vec alpha2;
    double mu = 0.5;
};

struct BoundaryDynamics {
    Vec velocity;
    double cost_rate = 0.0;
};

// Mixture velocity and cost rate on the interface.
inline BoundaryDynamics boundary_dynamics(const ProblemSpec& spec, const Vec& z,
                                          double s, const ControlTriple& a) {
    BoundaryDynamics out;
    out.velocity = a.mu * spec.side_velocity(1, z, s, a.alpha1) +
                   (1.0 - a.mu) * spec.side_velocity(2, z, s, a.alpha2);
    out.cost_rate = a.mu * spec.side_cost(1, z, s, a.alpha1) +
                    (1.0 - a.mu) * spec.side_cost(2, z, s, a.alpha2);
    return out;
}

struct TangencyMu {
    enum class Kind { None, Single, AllAdmissible } kind = Kind::None;
    double mu = 0.0;
};

// The unique mixture weight making the interface dynamic tangent:
// mu = beta2 / (beta1 + beta2) with beta_i the outward normal speeds.
// When both speeds vanish every mu is tangent; when the quotient leaves
// [0, 1] no tangent mixture exists (the pair crosses).
inline TangencyMu tangency_mu(double beta1, double beta2, double tol = 0.0) {
    TangencyMu r;
    if (std::abs(beta1) <= tol && std::abs(beta2) <= tol) {
        r.kind = TangencyMu::Kind::AllAdmissible;
        return r;
    }
    const double denom = beta1 + beta2;
    if (denom != 0.0) {
        const double mu = beta2 / denom;
        if (mu >= 0.0 && mu <= 1.0) {
            r.kind = TangencyMu::Kind::Single;
            r.mu = mu;
        }
    }
    return r;
}

struct InterfaceControlSet {
    std::vector<ControlTriple> triples;
    std::vector<BoundaryDynamics> dynamics;  // cached (b_H, l_H), normal zeroed
    std::vector<bool> regular;
    double tangency_tolerance = 0.0;

    int size() const { return static_cast<int>(triples.size()); }
    bool empty() const { return triples.empty(); }
    int regular_count() const {
        int c = 0;
        for (bool r : regular) c += r ? 1 : 0;
        return c;
    }
};

// Enumerates all tangent mixtures of the discrete control pairs at an
// interface point. For each pair the tangent mu is computed exactly; only
// doubly tangent pairs fall back to the mu grid. Regular triples are those
// whose side dynamics do not point into their own regions.
inline InterfaceControlSet interface_controls(const ProblemSpec& spec, const Vec& z,
                                              double s) {
    InterfaceControlSet set;
    const double tol = spec.tangency_tolerance();
    set.tangency_tolerance = tol;

    auto push = [&](const Vec& a1, const Vec& a2, double mu, double b1, double b2) {
        ControlTriple a{a1, a2, mu};
        BoundaryDynamics d = boundary_dynamics(spec, z, s, a);
        d.velocity.back() = 0.0;  // tangent by construction; drop the dust
        set.triples.push_back(a);
        set.dynamics.push_back(d);
        set.regular.push_back(b1 >= -tol && b2 >= -tol);
    };

    for (const Vec& a1 : spec.controls1.values) {
        const double b1 = spec.beta(1, z, s, a1);
        for (const Vec& a2 : spec.controls2.values) {
            const double b2 = spec.beta(2, z, s, a2);
            const TangencyMu tm = tangency_mu(b1, b2, tol);
            switch (tm.kind) {
                case TangencyMu::Kind::Single:
                    push(a1, a2, tm.mu, b1, b2);
                    break;
                case TangencyMu::Kind::AllAdmissible: {
                    const int m = spec.mu_grid;
                    for (int k = 0; k < m; ++k) {
                        const double mu = m == 1 ? 0.5 : static_cast<double>(k) / (m - 1);
                        push(a1, a2, mu, b1, b2);
                    }
                    break;
                }
                case TangencyMu::Kind::None:
                    break;
            }
        }
    }
    return set;
}

// Tangential Hamiltonian: sup over the tangent mixtures (all of them, or
// only the regular ones) of -<b_H, p> - l_H. The normal component of b_H is
// zero, so only the tangential part of p enters. Empty set gives the
// sup-over-empty-set value -infinity.
inline double hamiltonian_tangential(const InterfaceControlSet& set, const Vec& p_tan,
                                     bool regular_only) {
    double h = kMinusInfinity;
    for (int k = 0; k < set.size(); ++k) {
        if (regular_only && !set.regular[static_cast<std::size_t>(k)]) continue;
        const BoundaryDynamics& d = set.dynamics[static_cast<std::size_t>(k)];
        double bp = 0.0;
        for (int i = 0; i + 1 < d.velocity.n; ++i) bp += d.velocity[i] * p_tan[i];
        h = std::max(h, -bp - d.cost_rate);
    }
    return h;
}

inline double hamiltonian_tangential(const ProblemSpec& spec, const Vec& z, double s,
                                     const Vec& p_tan, bool regular_only) {
    return hamiltonian_tangential(interface_controls(spec, z, s), p_tan, regular_only);
}

// --- Quantitative bounds -----------------------------------------------------

struct HamiltonianBoundsReport {
    bool pass = true;
    double coercivity_margin = std::numeric_limits<double>::infinity();
    double lipschitz_margin = std::numeric_limits<double>::infinity();
    double c_m = 0.0;       // max(M_b, M_l)
    double c_bar = 0.0;     // L_b + M_b * L_n (flat interface: L_n = 0)
    double lip_m = 0.0;     // L_b + 2 M_b c_bar / delta
    double modulus_coef = 0.0;  // L_b + 2 M_l c_bar / delta
    Vec witness_x;
    double witness_t = 0.0;
};

inline double coercivity_cm(const ProblemSpec& spec) {
    return std::max(spec.max_speed_bound(), spec.max_cost_bound());
}

// Normal controllability makes both side Hamiltonians coercive in the normal
// gradient component: H_i(x,t,p) >= delta |p_N| - C_M (1 + |p'|).
inline HamiltonianBoundsReport check_coercivity(const ProblemSpec& spec, int samples,
                                                Rng& rng, double gradient_radius = 10.0) {
    HamiltonianBoundsReport report;
    report.c_m = coercivity_cm(spec);
    for (int k = 0; k < samples; ++k) {
        const Vec x = rng.point(spec.box_lo, spec.box_hi);
        const double t = rng.uniform(0.0, spec.horizon);
        const Vec p = rng.ball(spec.dimension, gradient_radius);
        double p_tan = 0.0;
        for (int i = 0; i + 1 < p.n; ++i) p_tan += p[i] * p[i];
        p_tan = std::sqrt(p_tan);
        const double floor_value =
            spec.delta * std::abs(p.back()) - report.c_m * (1.0 + p_tan);
        for (int side = 1; side <= 2; ++side) {
            const double slack = hamiltonian_side(spec, side, x, t, p) - floor_value;
            if (slack < report.coercivity_margin) {
                report.coercivity_margin = slack;
                report.witness_x = x;
                report.witness_t = t;
            }
        }
    }
    const double guard = 1e-12 * (1.0 + gradient_radius) * std::max(1.0, report.c_m);
    report.pass = report.coercivity_margin >= -guard;
    return report;
}

// --- Control matching across interface points --------------------------------

struct MatchCertificate {
    ControlTriple matched;
    double velocity_distance = 0.0;   // |b_H(z,t,a) - b_H(z',t',a')|
    double cost_distance = 0.0;
    double analytic_bound_b = 0.0;    // Lipschitz bound from the declared constants
    double analytic_bound_l = 0.0;
    double projection_slack_b = 0.0;  // distance from the analytic blend to the
    double projection_slack_l = 0.0;  // nearest discrete tangent triple
    bool ok = true;
    std::string message;
};

namespace detail {

// Searches the product control set for a triple whose normal interface speed
// b_H . n1 = mu beta1 - (1 - mu) beta2 attains the given target. Mixing makes
// every speed in the attainable interval reachable exactly, so under normal
// controllability targets in [-delta, delta] always resolve.
inline std::optional<ControlTriple> controllability_triple(const ProblemSpec& spec,
                                                           const Vec& z, double s,
                                                           double target_normal,
                                                           double tol) {
    std::optional<ControlTriple> best;
    double best_err = tol;
    for (const Vec& a1 : spec.controls1.values) {
        const double b1 = spec.beta(1, z, s, a1);
        for (const Vec& a2 : spec.controls2.values) {
            const double b2 = spec.beta(2, z, s, a2);
            const double denom = b1 + b2;
            double mu;
            if (std::abs(denom) < 1e-14) {
                mu = std::abs(b1 - target_normal) <= std::abs(-b2 - target_normal) ? 1.0 : 0.0;
            } else {
                mu = std::clamp((target_normal + b2) / denom, 0.0, 1.0);
            }
            const double err = std::abs(mu * b1 - (1.0 - mu) * b2 - target_normal);
            if (err < best_err) {
                best_err = err;
                best = ControlTriple{a1, a2, mu};
                if (best_err == 0.0) return best;
            }
        }
    }
    return best;
}

}  // namespace detail

// Given a tangent triple at (z, t), produces a tangent triple at (z', t')
// whose interface dynamics and cost are close, together with a certificate:
// the realized distances, the Lipschitz bound implied by the declared
// constants, and the slack from projecting the analytic blend onto the
// discrete tangent set.
inline MatchCertificate match_control(const ProblemSpec& spec, const Vec& z, double t,
                                      const ControlTriple& a, const Vec& zp,
                                      double tp) {
    MatchCertificate cert;
    const double tol = spec.tangency_tolerance();
    const double delta = spec.delta;
    const double mb = spec.max_speed_bound();
    const double ml = spec.max_cost_bound();
    const double lb = spec.max_speed_lipschitz();
    const double ll = spec.max_cost_lipschitz();
    const double c_bar = lb;  // flat interface: normal field is constant
    const double dist = norm(zp - z) + std::abs(tp - t);
    cert.analytic_bound_b = (lb + 2.0 * mb * c_bar / delta) * dist;
    cert.analytic_bound_l = 2.0 * ml * c_bar / delta * dist + ll * dist;

    const BoundaryDynamics here = boundary_dynamics(spec, z, t, a);
    BoundaryDynamics there = boundary_dynamics(spec, zp, tp, a);
    const double beta_there = -there.velocity.back();  // b_H . n1 at (z', t')

    Vec blend_b;
    double blend_l;
    if (std::abs(beta_there) <= tol) {
        blend_b = there.velocity;
        blend_l = there.cost_rate;
    } else {
        const double target = beta_there > 0.0 ? -delta : delta;
        auto ctrl = detail::controllability_triple(spec, zp, tp, target,
                                                   1e-9 * std::max(1.0, mb));
        if (!ctrl) {
            cert.ok = false;
            cert.message = "no control attains the normal speed required by the blend";
            return cert;
        }
        const BoundaryDynamics corr = boundary_dynamics(spec, zp, tp, *ctrl);
        const double mu_bar = delta / (std::abs(beta_there) + delta);
        blend_b = mu_bar * there.velocity + (1.0 - mu_bar) * corr.velocity;
        blend_l = mu_bar * there.cost_rate + (1.0 - mu_bar) * corr.cost_rate;
    }
    blend_b.back() = 0.0;  // tangent by construction of mu_bar

    const InterfaceControlSet set = interface_controls(spec, zp, tp);
    if (set.empty()) {
        cert.ok = false;
        cert.message = "empty tangent control set at the target point";
        return cert;
    }
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < set.size(); ++k) {
        const BoundaryDynamics& d = set.dynamics[static_cast<std::size_t>(k)];
        const Vec db = d.velocity - blend_b;
        const double dl = d.cost_rate - blend_l;
        const double dd = std::sqrt(dot(db, db) + dl * dl);
        if (dd < best_d) {
            best_d = dd;
            best = k;
        }
    }
    cert.matched = set.triples[static_cast<std::size_t>(best)];
    const BoundaryDynamics& chosen = set.dynamics[static_cast<std::size_t>(best)];
    cert.projection_slack_b = norm(chosen.velocity - blend_b);
    cert.projection_slack_l = std::abs(chosen.cost_rate - blend_l);

    Vec here_tan = here.velocity;
    here_tan.back() = 0.0;
    cert.velocity_distance = norm(chosen.velocity - here_tan);
    cert.cost_distance = std::abs(chosen.cost_rate - here.cost_rate);
    return cert;
}

inline Vec interface_sample_point(const ProblemSpec& spec, Rng& rng) {
    Vec z = rng.point(spec.box_lo, spec.box_hi);
    z.back() = 0.0;
    return z;
}

// Lipschitz property of the tangential Hamiltonian across interface queries.
// The analytic part of the bound comes from the declared constants with the
// flat-interface normal field; the discrete part is the measured projection
// slack of the matching construction, weighted by the gradient it multiplies.
inline HamiltonianBoundsReport check_ht_lipschitz(const ProblemSpec& spec,
                                                  int sample_pairs, Rng& rng,
                                                  double gradient_radius = 5.0) {
    HamiltonianBoundsReport report;
    const double mb = spec.max_speed_bound();
    const double lb = spec.max_speed_lipschitz();
    const double ml = spec.max_cost_bound();
    const double ll = spec.max_cost_lipschitz();
    report.c_m = coercivity_cm(spec);
    report.c_bar = lb;
    report.lip_m = lb + 2.0 * mb * report.c_bar / spec.delta;
    report.modulus_coef = lb + 2.0 * ml * report.c_bar / spec.delta;

    const int tan_dim = spec.dimension - 1;
    for (int k = 0; k < sample_pairs; ++k) {
        const Vec z = interface_sample_point(spec, rng);
        const Vec zp = interface_sample_point(spec, rng);
        const double t = rng.uniform(0.0, spec.horizon);
        const double tp = rng.uniform(0.0, spec.horizon);
        Vec p(spec.dimension), q(spec.dimension);
        for (int i = 0; i < tan_dim; ++i) {
            p[i] = rng.uniform(-gradient_radius, gradient_radius);
            q[i] = rng.uniform(-gradient_radius, gradient_radius);
        }

        const InterfaceControlSet set_a = interface_controls(spec, z, t);
        const InterfaceControlSet set_b = interface_controls(spec, zp, tp);
        if (set_a.empty() || set_b.empty()) continue;
        const double ha = hamiltonian_tangential(set_a, p, false);
        const double hb = hamiltonian_tangential(set_b, q, false);

        const double dist = norm(zp - z) + std::abs(tp - t);
        const double pn = norm(p), qn = norm(q);
        const double analytic = report.lip_m * dist * (pn + qn) +
                                mb * norm(p - q) +
                                report.modulus_coef * dist + ll * dist;

        // one-sided slacks from matching each argmax across the pair
        double slack = 0.0;
        auto one_side = [&](const InterfaceControlSet& from, const Vec& zf, double tf,
                            const Vec& zt, double tt, const Vec& grad_to,
                            double h_from, const Vec& grad_from) {
            int arg = 0;
            double best = kMinusInfinity;
            for (int i = 0; i < from.size(); ++i) {
                const BoundaryDynamics& d = from.dynamics[static_cast<std::size_t>(i)];
                double bp = 0.0;
                for (int j = 0; j + 1 < d.velocity.n; ++j) bp += d.velocity[j] * grad_from[j];
                const double v = -bp - d.cost_rate;
                if (v > best) {
                    best = v;
                    arg = i;
                }
            }
            (void)h_from;
            const MatchCertificate c =
                match_control(spec, zf, tf, from.triples[static_cast<std::size_t>(arg)], zt, tt);
            if (!c.ok) return;
            slack = std::max(slack, c.projection_slack_b * norm(grad_to) + c.projection_slack_l);
        };
        one_side(set_a, z, t, zp, tp, q, ha, p);
        one_side(set_b, zp, tp, z, t, p, hb, q);

        const double margin = analytic + slack - std::abs(ha - hb);
        if (margin < report.lipschitz_margin) {
            report.lipschitz_margin = margin;
            report.witness_x = z;
            report.witness_t = t;
        }
    }
    const double guard = 1e-12 * (1.0 + gradient_radius) * std::max(1.0, mb + ml);
    report.pass = report.lipschitz_margin >= -guard;
    return report;
}

}  // namespace rhjb
