#pragma once

#include <cmath>
#include <stdexcept>

#include "rhjb/sl_solver.hpp"
#include "rhjb/trajectory.hpp"

namespace rhjb {

// One-step dynamic programming defect of a solved field: the gap between the
// stored value at (x0, t) and the best enumerated [cost over [0, tau] plus
// value at the reached state with horizon t - tau]. Both t and t - tau must
// align with time layers.
inline double dpp_residual(const ProblemSpec& spec, const ValueField& field,
                           const Vec& x0, double t, double tau, OracleMode mode,
                           int branching = 30, int intervals = 2,
                           const OracleOptions& opt = {}) {
    if (!(tau > 0.0 && tau < t))
        throw std::invalid_argument("dpp_residual: need 0 < tau < t");
    const double k_to = (t - tau) / field.grid.dt;
    const int layer_to = static_cast<int>(std::round(k_to));
    if (std::abs(k_to - layer_to) > 1e-6)
        throw std::invalid_argument("dpp_residual: t - tau does not align with a layer");

    const double here = field_value(field, x0, t);

    const std::vector<ControlTriple> triples = oracle_triples(spec, branching);
    const long m = static_cast<long>(triples.size());
    double needed = 1.0;
    for (int i = 0; i < intervals; ++i) needed *= static_cast<double>(m);
    if (needed > static_cast<double>(opt.budget))
        throw std::invalid_argument("dpp_residual: enumeration exceeds the budget");
    const long total = static_cast<long>(needed);
    const double h = opt.step > 0.0 ? opt.step : tau / (intervals * 32.0);

    double best = std::numeric_limits<double>::infinity();
    ControlSchedule window = ControlSchedule::uniform(
        tau, std::vector<ControlTriple>(static_cast<std::size_t>(intervals), triples[0]));
    for (long code = 0; code < total; ++code) {
        long c = code;
        for (int i = intervals - 1; i >= 0; --i) {
            window.per_interval[static_cast<std::size_t>(i)] =
                triples[static_cast<std::size_t>(c % m)];
            c /= m;
        }
        const PathSummary sum = integrate_summary(spec, x0, t, window, h);
        if (mode == OracleMode::RegularOnly && sum.singular) continue;
        const double v = sum.running_cost + interpolate(field, layer_to, sum.end_state);
        best = std::min(best, v);
    }
    return std::abs(here - best);
}

}  // namespace rhjb
