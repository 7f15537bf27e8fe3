#pragma once

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "rhjb/problem.hpp"
#include "rhjb/rng.hpp"

namespace rhjb {

// Sampled audits of the standing hypotheses: bounds and Lipschitz constants
// of the data, normal controllability at the interface, and the convexity
// defect of the discrete (b, l) sets. An audit can certify a violation (with
// a witness) but can only ever sample-check the hypotheses themselves.

struct AuditWitness {
    Vec x;
    double t = 0.0;
    int side = 0;
    std::string what;
};

struct BoundsAudit {
    bool pass = true;
    double max_speed[2] = {0.0, 0.0};
    double max_cost[2] = {0.0, 0.0};
    double speed_quotient[2] = {0.0, 0.0};
    double cost_quotient[2] = {0.0, 0.0};
    double max_terminal = 0.0;       // sup |g| over the samples
    double terminal_small_jump = 0.0;  // |g(x) - g(y)| at distance ~1e-6 diam
    int duplicate_controls[2] = {0, 0};  // flagged, not failed
    std::vector<AuditWitness> witnesses;
};

struct ControllabilityAudit {
    bool pass = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    std::vector<AuditWitness> witnesses;
};

struct ConvexityAudit {
    double max_gap[2] = {0.0, 0.0};
    double tolerance = 0.0;
    bool within_tolerance = true;
};

inline BoundsAudit audit_bounds(const ProblemSpec& spec, int samples, Rng& rng) {
    if (samples < 1) throw std::invalid_argument("audit_bounds: samples must be >= 1");
    BoundsAudit report;
    const double tiny = 1e-12;
    for (int side = 1; side <= 2; ++side) {
        const ControlSample& ctrls = spec.controls(side);
        for (int i = 0; i < ctrls.size(); ++i)
            for (int j = i + 1; j < ctrls.size(); ++j)
                if (ctrls[i] == ctrls[j]) ++report.duplicate_controls[side - 1];
    }
    for (int side = 1; side <= 2; ++side) {
        const SideBounds& declared = spec.side(side).bounds;
        double& max_b = report.max_speed[side - 1];
        double& max_l = report.max_cost[side - 1];
        double& qb = report.speed_quotient[side - 1];
        double& ql = report.cost_quotient[side - 1];
        for (int k = 0; k < samples; ++k) {
            const Vec x = rng.point(spec.box_lo, spec.box_hi);
            const Vec y = rng.point(spec.box_lo, spec.box_hi);
            const double s = rng.uniform(0.0, spec.horizon);
            const double s2 = rng.uniform(0.0, spec.horizon);
            const Vec& a = spec.controls(side)[rng.index(spec.controls(side).size())];

            const Vec bx = spec.side_velocity(side, x, s, a);
            const double lx = spec.side_cost(side, x, s, a);
            max_b = std::max(max_b, norm(bx));
            max_l = std::max(max_l, std::abs(lx));
            if (norm(bx) > declared.speed_bound + tiny) {
                report.pass = false;
                report.witnesses.push_back({x, s, side, "speed bound exceeded"});
            }
            if (std::abs(lx) > declared.cost_bound + tiny) {
                report.pass = false;
                report.witnesses.push_back({x, s, side, "cost bound exceeded"});
            }

            const double dist = norm(y - x) + std::abs(s2 - s);
            if (dist > 1e-9) {
                const Vec by = spec.side_velocity(side, y, s2, a);
                const double ly = spec.side_cost(side, y, s2, a);
                const double q1 = norm(by - bx) / dist;
                const double q2 = std::abs(ly - lx) / dist;
                qb = std::max(qb, q1);
                ql = std::max(ql, q2);
                if (q1 > declared.speed_lipschitz + tiny) {
                    report.pass = false;
                    report.witnesses.push_back({x, s, side, "speed Lipschitz quotient exceeded"});
                }
                if (q2 > declared.cost_lipschitz + tiny) {
                    report.pass = false;
                    report.witnesses.push_back({x, s, side, "cost Lipschitz quotient exceeded"});
                }
            }
        }
    }

    // terminal cost: boundedness is certified per sample, continuity is
    // reported as the jump over vanishing offsets
    const double diam = norm(spec.box_hi - spec.box_lo);
    for (int k = 0; k < samples; ++k) {
        const Vec x = rng.point(spec.box_lo, spec.box_hi);
        const double gx = spec.terminal(x);
        if (!std::isfinite(gx)) {
            report.pass = false;
            report.witnesses.push_back({x, 0.0, 0, "terminal cost not finite"});
            continue;
        }
        report.max_terminal = std::max(report.max_terminal, std::abs(gx));
        Vec y = x + rng.ball(spec.dimension, 1e-6 * diam);
        report.terminal_small_jump =
            std::max(report.terminal_small_jump, std::abs(spec.terminal(y) - gx));
    }
    return report;
}

inline Vec interface_sample(const ProblemSpec& spec, Rng& rng) {
    Vec z = rng.point(spec.box_lo, spec.box_hi);
    z.back() = 0.0;
    return z;
}

// Checks that the interval hull of each side's normal speeds at sampled
// interface points covers [-delta, delta].
inline ControllabilityAudit audit_normal_controllability(const ProblemSpec& spec,
                                                         int interface_samples,
                                                         Rng& rng) {
    if (interface_samples < 1)
        throw std::invalid_argument("audit_normal_controllability: samples must be >= 1");
    if (spec.delta <= 0.0)
        throw std::invalid_argument("audit_normal_controllability: delta must be positive");
    ControllabilityAudit report;
    for (int k = 0; k < interface_samples; ++k) {
        const Vec z = interface_sample(spec, rng);
        const double s = rng.uniform(0.0, spec.horizon);
        for (int side = 1; side <= 2; ++side) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (const Vec& a : spec.controls(side).values) {
                const double bn = spec.beta(side, z, s, a);
                lo = std::min(lo, bn);
                hi = std::max(hi, bn);
            }
            const double margin = std::min(-spec.delta - lo, hi - spec.delta);
            report.worst_margin = std::min(report.worst_margin, margin);
            if (margin < 0.0) {
                report.pass = false;
                report.witnesses.push_back({z, s, side, "normal speed hull misses [-delta, delta]"});
            }
        }
    }
    return report;
}

// Measures the distance of midpoint combinations of (b, l) pairs to the
// discrete (b, l) set. Finite samples cannot be convex; this reports the
// discretization gap instead of enforcing the hypothesis.
inline ConvexityAudit audit_convexity(const ProblemSpec& spec, int samples, Rng& rng,
                                      double tolerance) {
    ConvexityAudit report;
    report.tolerance = tolerance;
    const double lambdas[3] = {0.25, 0.5, 0.75};
    for (int side = 1; side <= 2; ++side) {
        const ControlSample& ctrls = spec.controls(side);
        double& worst = report.max_gap[side - 1];
        for (int k = 0; k < samples; ++k) {
            const Vec z = rng.point(spec.box_lo, spec.box_hi);
            const double s = rng.uniform(0.0, spec.horizon);
            const int i = rng.index(ctrls.size());
            const int j = rng.index(ctrls.size());
            const Vec bi = spec.side_velocity(side, z, s, ctrls[i]);
            const Vec bj = spec.side_velocity(side, z, s, ctrls[j]);
            const double li = spec.side_cost(side, z, s, ctrls[i]);
            const double lj = spec.side_cost(side, z, s, ctrls[j]);
            for (double lam : lambdas) {
                const Vec bt = lam * bi + (1.0 - lam) * bj;
                const double lt = lam * li + (1.0 - lam) * lj;
                double best = std::numeric_limits<double>::infinity();
                for (const Vec& a : ctrls.values) {
                    const Vec b = spec.side_velocity(side, z, s, a);
                    const double l = spec.side_cost(side, z, s, a);
                    const Vec db = b - bt;
                    const double dl = l - lt;
                    best = std::min(best, std::sqrt(dot(db, db) + dl * dl));
                }
                worst = std::max(worst, best);
            }
        }
    }
    report.within_tolerance =
        std::max(report.max_gap[0], report.max_gap[1]) <= tolerance;
    return report;
}

}  // namespace rhjb
