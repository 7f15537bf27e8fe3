#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rhjb/geometry.hpp"
#include "rhjb/hamiltonians.hpp"
#include "rhjb/problem.hpp"

namespace rhjb {

// Piecewise-constant control schedule on [0, tau]. In Omega_i the component
// alpha_i of the active triple drives the state; on the interface the full
// triple does.
struct ControlSchedule {
    std::vector<double> breakpoints;          // increasing, breakpoints[0] == 0
    std::vector<ControlTriple> per_interval;  // size == breakpoints.size() - 1

    double span() const { return breakpoints.empty() ? 0.0 : breakpoints.back(); }

    static ControlSchedule uniform(double tau, const std::vector<ControlTriple>& triples) {
        ControlSchedule s;
        const int k = static_cast<int>(triples.size());
        s.per_interval = triples;
        s.breakpoints.resize(static_cast<std::size_t>(k) + 1);
        for (int i = 0; i <= k; ++i)
            s.breakpoints[static_cast<std::size_t>(i)] = tau * i / k;
        return s;
    }

    static ControlSchedule constant(double tau, const ControlTriple& a) {
        return uniform(tau, {a});
    }
};

enum class EpisodeClass { Side1, Side2, InterfaceRegular, InterfaceSingular, Crossing };

inline const char* episode_name(EpisodeClass c) {
    switch (c) {
        case EpisodeClass::Side1: return "side1";
        case EpisodeClass::Side2: return "side2";
        case EpisodeClass::InterfaceRegular: return "interface-regular";
        case EpisodeClass::InterfaceSingular: return "interface-singular";
        case EpisodeClass::Crossing: return "crossing";
    }
    return "?";
}

struct Episode {
    double begin = 0.0, end = 0.0;
    EpisodeClass cls = EpisodeClass::Side1;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<RegionLabel> regions;
    std::vector<EpisodeClass> step_class;  // class of the step ending at times[k]
    std::vector<double> running_cost;
    std::vector<Episode> episodes;
    std::vector<std::string> warnings;

    const Vec& end_state() const { return states.back(); }
    double end_cost() const { return running_cost.back(); }

    bool has_class(EpisodeClass c) const {
        for (const Episode& e : episodes)
            if (e.cls == c) return true;
        return false;
    }
};

namespace detail {

inline void record(Trajectory& tr, double s, const Vec& x, double cost,
                   EpisodeClass cls) {
    tr.times.push_back(s);
    tr.states.push_back(x);
    tr.regions.push_back(classify(x, 0.0));
    tr.running_cost.push_back(cost);
    tr.step_class.push_back(cls);
}

inline void build_episodes(Trajectory& tr) {
    tr.episodes.clear();
    for (std::size_t k = 1; k < tr.times.size(); ++k) {
        const EpisodeClass c = tr.step_class[k];
        if (!tr.episodes.empty() && tr.episodes.back().cls == c &&
            tr.episodes.back().end == tr.times[k - 1]) {
            tr.episodes.back().end = tr.times[k];
        } else {
            tr.episodes.push_back({tr.times[k - 1], tr.times[k], c});
        }
    }
}

// Shared stepping core: explicit Euler with event handling. Steps that cross
// the interface are split at the linear root of x_N, tangential interface
// steps pin x_N back to exactly zero, and non-tangent triples on the
// interface depart into the side their mixture points to. Coefficients are
// evaluated at remaining horizon t - s. The recorder sees every accepted step
// (time, state, accumulated cost, step class); near_miss_mu flags triples
// that barely fail the tangency tolerance.
template <typename Recorder>
inline void integrate_core(const ProblemSpec& spec, const Vec& x0, double t,
                           const ControlSchedule& schedule, double h, Recorder&& rec,
                           bool* near_miss_mu = nullptr) {
    if (schedule.per_interval.empty())
        throw std::invalid_argument("integrate: empty schedule");
    if (schedule.breakpoints.front() != 0.0)
        throw std::invalid_argument("integrate: schedule must start at 0");
    if (schedule.span() > t + 1e-12)
        throw std::invalid_argument("integrate: schedule exceeds the horizon");
    if (h <= 0.0) throw std::invalid_argument("integrate: step must be positive");

    const double tau = schedule.span();
    const double tol = spec.tangency_tolerance();
    const double near_miss = 1e-6 * std::max(1.0, spec.max_speed_bound());

    Vec x = x0;
    if (std::abs(x.back()) <= tol) x.back() = 0.0;
    double s = 0.0, cost = 0.0;
    int interval = 0;

    const long max_steps = static_cast<long>(tau / h * 4.0) + 1024;
    long guard = 0;
    for (; s < tau - 1e-15 && guard < max_steps; ++guard) {
        while (interval + 1 < static_cast<int>(schedule.breakpoints.size()) - 1 &&
               s >= schedule.breakpoints[static_cast<std::size_t>(interval + 1)] - 1e-15)
            ++interval;
        const double interval_end = schedule.breakpoints[static_cast<std::size_t>(interval + 1)];
        double hk = std::min(h, std::min(interval_end, tau) - s);
        const ControlTriple& a = schedule.per_interval[static_cast<std::size_t>(interval)];
        const double sigma = t - s;

        double rate = 0.0;
        EpisodeClass cls = EpisodeClass::Side1;
        const double xn0 = x.back();
        if (xn0 != 0.0) {
            const int side = xn0 > 0.0 ? 1 : 2;
            const Vec& alpha = side == 1 ? a.alpha1 : a.alpha2;
            const Vec v = spec.side_velocity(side, x, sigma, alpha);
            rate = spec.side_cost(side, x, sigma, alpha);
            cls = side == 1 ? EpisodeClass::Side1 : EpisodeClass::Side2;

            const double yn = xn0 + hk * v.back();
            if ((xn0 > 0.0 && yn < 0.0) || (xn0 < 0.0 && yn > 0.0)) {
                // split the step at the interface crossing
                hk *= xn0 / (xn0 - yn);
                x += hk * v;
                x.back() = 0.0;
            } else {
                x += hk * v;
            }
        } else {
            BoundaryDynamics d = boundary_dynamics(spec, x, sigma, a);
            const double bh_n1 = -d.velocity.back();
            rate = d.cost_rate;
            if (std::abs(bh_n1) <= tol) {
                const double b1 = spec.beta(1, x, sigma, a.alpha1);
                const double b2 = spec.beta(2, x, sigma, a.alpha2);
                cls = (b1 >= -tol && b2 >= -tol) ? EpisodeClass::InterfaceRegular
                                                 : EpisodeClass::InterfaceSingular;
                d.velocity.back() = 0.0;
                x += hk * d.velocity;
                x.back() = 0.0;  // pin
            } else {
                if (std::abs(bh_n1) <= near_miss && near_miss_mu) *near_miss_mu = true;
                cls = EpisodeClass::Crossing;
                x += hk * d.velocity;
            }
        }
        s += hk;
        cost += hk * rate;
        rec(s, x, cost, cls);
    }
    if (s < tau - 1e-12)
        throw std::runtime_error("integrate: step guard exhausted before the horizon");
}

}  // namespace detail

// Full trajectory with per-step states, region flags, episode classification
// and accumulated cost. The schedule may span less than the horizon (dynamic
// programming windows).
inline Trajectory integrate(const ProblemSpec& spec, const Vec& x0, double t,
                            const ControlSchedule& schedule, double h) {
    Trajectory tr;
    Vec start = x0;
    if (std::abs(start.back()) <= spec.tangency_tolerance()) start.back() = 0.0;
    detail::record(tr, 0.0, start, 0.0, EpisodeClass::Side1);
    bool near_miss = false;
    detail::integrate_core(
        spec, x0, t, schedule, h,
        [&](double s, const Vec& x, double cost, EpisodeClass cls) {
            detail::record(tr, s, x, cost, cls);
        },
        &near_miss);
    if (near_miss)
        tr.warnings.push_back(
            "interface triple nearly tangent but not within tolerance; "
            "mu inconsistent with requested sliding");
    detail::build_episodes(tr);
    return tr;
}

// Lean end-of-path summary for mass enumeration.
struct PathSummary {
    Vec end_state;
    double running_cost = 0.0;
    bool singular = false;
};

inline PathSummary integrate_summary(const ProblemSpec& spec, const Vec& x0, double t,
                                     const ControlSchedule& schedule, double h) {
    PathSummary out;
    out.end_state = x0;
    detail::integrate_core(spec, x0, t, schedule, h,
                           [&](double, const Vec& x, double cost, EpisodeClass cls) {
                               out.end_state = x;
                               out.running_cost = cost;
                               if (cls == EpisodeClass::InterfaceSingular) out.singular = true;
                           });
    return out;
}

// Total cost of a complete trajectory: running cost plus terminal cost.
inline double cost(const ProblemSpec& spec, const Trajectory& tr) {
    return tr.end_cost() + spec.terminal(tr.end_state());
}

// --- Sliding with the exact mixture weight -----------------------------------

struct SlideResult {
    Trajectory trajectory;
    bool aborted = false;
    std::string abort_reason;
    double max_normal_excursion = 0.0;   // max |x_N| before per-step projection
    double max_tangency_residual = 0.0;  // |b_H . n1| at step starts
};

// Integrates the interface flow with the mixture weight recomputed at every
// macro step: mu = beta2 / (beta1 + beta2), the unique weight cancelling the
// normal component at the step start. The weight is frozen within a step
// (controls are piecewise constant), the state advances by two Euler
// substeps, and x_N is projected back to zero at step ends.
inline SlideResult slide_mu_sharp(const ProblemSpec& spec, const Vec& z0, double t,
                                  const Vec& alpha1, const Vec& alpha2, double h) {
    SlideResult out;
    Vec x = z0;
    x.back() = 0.0;
    double s = 0.0, cost_acc = 0.0;
    detail::record(out.trajectory, 0.0, x, 0.0, EpisodeClass::InterfaceRegular);

    const double mb = std::max(1.0, spec.max_speed_bound());
    while (s < t - 1e-15) {
        const double hk = std::min(h, t - s);
        const double sigma = t - s;
        const double b1 = spec.beta(1, x, sigma, alpha1);
        const double b2 = spec.beta(2, x, sigma, alpha2);
        const double denom = b1 + b2;
        if (std::abs(denom) < 1e-8 * mb) {
            out.aborted = true;
            out.abort_reason = "normal speeds cancel; no unique tangent mixture";
            break;
        }
        const double mu = b2 / denom;
        if (mu < -1e-12 || mu > 1.0 + 1e-12) {
            out.aborted = true;
            out.abort_reason = "tangent mixture weight left [0, 1]";
            break;
        }
        const ControlTriple a{alpha1, alpha2, std::clamp(mu, 0.0, 1.0)};
        {
            const BoundaryDynamics d0 = boundary_dynamics(spec, x, sigma, a);
            out.max_tangency_residual =
                std::max(out.max_tangency_residual, std::abs(d0.velocity.back()));
        }
        const EpisodeClass cls = (b1 >= 0.0 && b2 >= 0.0)
                                     ? EpisodeClass::InterfaceRegular
                                     : EpisodeClass::InterfaceSingular;
        for (int sub = 0; sub < 2; ++sub) {
            const double hs = hk / 2.0;
            const BoundaryDynamics d = boundary_dynamics(spec, x, t - (s + sub * hs), a);
            cost_acc += hs * d.cost_rate;
            x += hs * d.velocity;
            out.max_normal_excursion =
                std::max(out.max_normal_excursion, std::abs(x.back()));
        }
        x.back() = 0.0;  // project back onto the interface
        s += hk;
        detail::record(out.trajectory, s, x, cost_acc, cls);
    }
    detail::build_episodes(out.trajectory);
    return out;
}

// --- Brute-force value oracle --------------------------------------------------

enum class OracleMode { All, RegularOnly };

struct OracleResult {
    double best_cost = std::numeric_limits<double>::infinity();
    ControlSchedule best_schedule;
    long schedule_count = 0;
    OracleMode mode = OracleMode::All;
    bool found = false;
};

struct OraclePair {
    OracleResult all;
    OracleResult regular;
};

// Candidate triples for schedule enumeration: the two side samples are
// subsampled to an odd count (keeping endpoints, and the exact midpoint for
// odd-sized uniform lists); each pair contributes its exact tangent mixture,
// a mu grid {0, 1/2, 1} when doubly tangent, and the mu = 1/2 mixture when no
// tangent weight exists (the entering direction does not depend on mu).
inline std::vector<ControlTriple> oracle_triples(const ProblemSpec& spec, int branching) {
    Vec z = zeros(spec.dimension);  // reference interface point
    const double s_ref = spec.horizon;
    const double tol = spec.tangency_tolerance();

    auto subsample = [](const ControlSample& full, int k) {
        ControlSample out;
        const int n = full.size();
        k = std::min(k, n);
        if (k <= 1) {
            out.values.push_back(full[(n - 1) / 2]);
            return out;
        }
        for (int j = 0; j < k; ++j) {
            const int idx = static_cast<int>(
                std::lround(static_cast<double>(j) * (n - 1) / (k - 1)));
            out.values.push_back(full[idx]);
        }
        return out;
    };

    auto build = [&](int k) {
        std::vector<ControlTriple> triples;
        const ControlSample c1 = subsample(spec.controls1, k);
        const ControlSample c2 = subsample(spec.controls2, k);
        for (const Vec& a1 : c1.values) {
            const double b1 = spec.beta(1, z, s_ref, a1);
            for (const Vec& a2 : c2.values) {
                const double b2 = spec.beta(2, z, s_ref, a2);
                const TangencyMu tm = tangency_mu(b1, b2, tol);
                switch (tm.kind) {
                    case TangencyMu::Kind::Single:
                        triples.push_back({a1, a2, tm.mu});
                        break;
                    case TangencyMu::Kind::AllAdmissible:
                        triples.push_back({a1, a2, 0.0});
                        triples.push_back({a1, a2, 0.5});
                        triples.push_back({a1, a2, 1.0});
                        break;
                    case TangencyMu::Kind::None:
                        triples.push_back({a1, a2, 0.5});
                        break;
                }
            }
        }
        return triples;
    };

    const int full = std::max(spec.controls1.size(), spec.controls2.size());
    int k = full | 1;
    std::vector<ControlTriple> triples = build(k);
    while (static_cast<int>(triples.size()) > branching && k > 1) {
        k -= 2;
        triples = build(k);
    }
    if (static_cast<int>(triples.size()) > branching)
        throw std::invalid_argument("oracle: branching too small for any triple set");
    return triples;
}

struct OracleOptions {
    long budget = 1'000'000;
    double step = 0.0;  // 0: tau / (intervals * 32)
};

// Enumerates every piecewise-constant schedule over the candidate triples and
// integrates each one. Both value modes come from the same enumeration; the
// regular mode discards schedules with a singular interface episode after the
// fact, so the two infima are comparable schedule-by-schedule.
inline OraclePair brute_force_both(const ProblemSpec& spec, const Vec& x0, double t,
                                   int branching, int intervals,
                                   const OracleOptions& opt = {}) {
    if (intervals < 1) throw std::invalid_argument("oracle: intervals must be >= 1");
    const std::vector<ControlTriple> triples = oracle_triples(spec, branching);
    const long m = static_cast<long>(triples.size());
    double needed_d = 1.0;
    for (int i = 0; i < intervals; ++i) needed_d *= static_cast<double>(m);
    if (needed_d > static_cast<double>(opt.budget))
        throw std::invalid_argument(
            "oracle: enumeration needs a budget of " + std::to_string(needed_d) +
            " schedules, have " + std::to_string(opt.budget));
    const long total = static_cast<long>(needed_d);
    const double h = opt.step > 0.0 ? opt.step : t / (intervals * 32.0);

    OraclePair out;
    out.all.mode = OracleMode::All;
    out.regular.mode = OracleMode::RegularOnly;
    out.all.schedule_count = out.regular.schedule_count = total;

    ControlSchedule schedule = ControlSchedule::uniform(
        t, std::vector<ControlTriple>(static_cast<std::size_t>(intervals), triples[0]));
    long best_all_code = -1, best_reg_code = -1;
    for (long code = 0; code < total; ++code) {
        long c = code;
        for (int i = intervals - 1; i >= 0; --i) {
            schedule.per_interval[static_cast<std::size_t>(i)] =
                triples[static_cast<std::size_t>(c % m)];
            c /= m;
        }
        const PathSummary sum = integrate_summary(spec, x0, t, schedule, h);
        const double j = sum.running_cost + spec.terminal(sum.end_state);
        if (j < out.all.best_cost) {
            out.all.best_cost = j;
            out.all.found = true;
            best_all_code = code;
        }
        if (!sum.singular && j < out.regular.best_cost) {
            out.regular.best_cost = j;
            out.regular.found = true;
            best_reg_code = code;
        }
    }
    auto decode = [&](long code) {
        std::vector<ControlTriple> current(static_cast<std::size_t>(intervals));
        for (int i = intervals - 1; i >= 0; --i) {
            current[static_cast<std::size_t>(i)] = triples[static_cast<std::size_t>(code % m)];
            code /= m;
        }
        return ControlSchedule::uniform(t, current);
    };
    if (out.all.found) out.all.best_schedule = decode(best_all_code);
    if (out.regular.found) out.regular.best_schedule = decode(best_reg_code);
    return out;
}

inline OracleResult brute_force_value(const ProblemSpec& spec, const Vec& x0, double t,
                                      OracleMode mode, int branching, int intervals,
                                      const OracleOptions& opt = {}) {
    OraclePair pair = brute_force_both(spec, x0, t, branching, intervals, opt);
    return mode == OracleMode::All ? pair.all : pair.regular;
}

}  // namespace rhjb
