#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rhjb/audits.hpp"
#include "rhjb/config.hpp"
#include "rhjb/dpp.hpp"
#include "rhjb/sl_solver.hpp"
#include "rhjb/trajectory.hpp"
#include "rhjb/verification.hpp"

namespace rhjb {

using Json = nlohmann::ordered_json;

// Exit codes of the command runner.
inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;

struct RunConfig {
    Config config;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    int threads = 1;
    std::string command;  // empty: take [run] command
};

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    out << text;
}

inline void write_json(const std::string& path, const Json& j) {
    write_text(path, j.dump(2) + "\n");
}

inline std::string field_csv(const ValueField& f) {
    const GridSpec& g = f.grid;
    std::string out;
    for (int ax = 1; ax <= g.dim; ++ax) out += "x" + std::to_string(ax) + ",";
    out += "t,value\n";
    for (int n = 0; n <= g.steps; ++n) {
        const double t = g.dt * n;
        for (std::int64_t k = 0; k < g.node_count(); ++k) {
            const Vec x = g.point(k);
            for (int ax = 0; ax < g.dim; ++ax) out += fmt(x[ax]) + ",";
            out += fmt(t) + "," + fmt(f.at(n, k)) + "\n";
        }
    }
    return out;
}

inline std::string trajectory_csv(const Trajectory& tr, int dim) {
    std::string out = "time";
    for (int ax = 1; ax <= dim; ++ax) out += ",x" + std::to_string(ax);
    out += ",region,class,running_cost\n";
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        out += fmt(tr.times[k]);
        for (int ax = 0; ax < dim; ++ax) out += "," + fmt(tr.states[k][ax]);
        out += std::string(",") + region_name(tr.regions[k]) + "," +
               (k == 0 ? "start" : episode_name(tr.step_class[k])) + "," +
               fmt(tr.running_cost[k]) + "\n";
    }
    return out;
}

inline Json vec_json(const Vec& v) {
    Json a = Json::array();
    for (int i = 0; i < v.n; ++i) a.push_back(v[i]);
    return a;
}

inline Json grid_json(const GridSpec& g) {
    Json j;
    j["dimension"] = g.dim;
    j["lo"] = vec_json(g.lo);
    j["hi"] = vec_json(g.hi);
    Json nodes = Json::array();
    for (int ax = 0; ax < g.dim; ++ax) nodes.push_back(g.nodes[static_cast<std::size_t>(ax)]);
    j["nodes"] = nodes;
    j["dt"] = g.dt;
    j["steps"] = g.steps;
    j["interface_layer"] = g.interface_layer;
    return j;
}

inline Json audit_json(const BoundsAudit& b, const ControllabilityAudit& n,
                       const ConvexityAudit& cvx) {
    Json j;
    j["bounds"] = {{"pass", b.pass},
                   {"max_speed", {b.max_speed[0], b.max_speed[1]}},
                   {"max_cost", {b.max_cost[0], b.max_cost[1]}},
                   {"speed_lipschitz_quotient", {b.speed_quotient[0], b.speed_quotient[1]}},
                   {"cost_lipschitz_quotient", {b.cost_quotient[0], b.cost_quotient[1]}},
                   {"max_terminal", b.max_terminal},
                   {"terminal_small_jump", b.terminal_small_jump},
                   {"witness_count", b.witnesses.size()}};
    if (!b.witnesses.empty()) {
        j["bounds"]["first_witness"] = {{"x", vec_json(b.witnesses[0].x)},
                                        {"t", b.witnesses[0].t},
                                        {"side", b.witnesses[0].side},
                                        {"what", b.witnesses[0].what}};
    }
    j["normal_controllability"] = {{"pass", n.pass}, {"worst_margin", n.worst_margin}};
    if (!n.witnesses.empty()) {
        j["normal_controllability"]["first_witness"] = {{"x", vec_json(n.witnesses[0].x)},
                                                        {"t", n.witnesses[0].t},
                                                        {"side", n.witnesses[0].side}};
    }
    j["convexity"] = {{"max_gap", {cvx.max_gap[0], cvx.max_gap[1]}},
                      {"tolerance", cvx.tolerance},
                      {"within_tolerance", cvx.within_tolerance}};
    return j;
}

inline Vec point_arg(const Config& c, const std::string& section, const std::string& key,
                     int dim) {
    const Vec v = vec_from(c.get_doubles(section, key), c.where(section, key));
    if (v.n != dim)
        throw ConfigError(c.where(section, key) + ": expected " + std::to_string(dim) +
                          " coordinates");
    return v;
}

inline OracleMode mode_arg(const Config& c, const std::string& section) {
    const std::string m = c.get_or(section, "mode", "all");
    if (m == "all") return OracleMode::All;
    if (m == "regular") return OracleMode::RegularOnly;
    throw ConfigError(c.where(section, "mode") + ": expected 'all' or 'regular'");
}

inline Perturbation load_perturbation(const Config& c, const ProblemSpec& spec) {
    Perturbation pert;
    const std::string sec = "stability";
    double max_db = 0.0, max_dl = 0.0;
    if (c.has(sec, "db1")) {
        const Vec d = point_arg(c, sec, "db1", spec.dimension);
        for (int i = 0; i < d.n; ++i) pert.db1.components.push_back(constant_scalar(d[i]));
        max_db = std::max(max_db, norm(d));
    }
    if (c.has(sec, "db2")) {
        const Vec d = point_arg(c, sec, "db2", spec.dimension);
        for (int i = 0; i < d.n; ++i) pert.db2.components.push_back(constant_scalar(d[i]));
        max_db = std::max(max_db, norm(d));
    }
    if (c.has(sec, "dl1")) {
        pert.dl1 = constant_scalar(c.get_double(sec, "dl1"));
        max_dl = std::max(max_dl, std::abs(pert.dl1.c0));
    }
    if (c.has(sec, "dl2")) {
        pert.dl2 = constant_scalar(c.get_double(sec, "dl2"));
        max_dl = std::max(max_dl, std::abs(pert.dl2.c0));
    }
    if (c.has(sec, "dg")) {
        pert.dg = constant_scalar(c.get_double(sec, "dg"));
        pert.terminal_bound = std::abs(pert.dg.c0);
    }
    pert.speed_bound = max_db;
    pert.cost_bound = max_dl;
    pert.declared_slope = c.get_double_or(sec, "declared-slope", 0.0);
    return pert;
}

}  // namespace detail

// Executes one command against one configuration document, writing the
// artifacts into out_dir. Returns a process exit status.
inline int run(const RunConfig& rc) {
    namespace fs = std::filesystem;
    const Config& c = rc.config;
    fs::create_directories(rc.out_dir);
    const auto out_path = [&](const std::string& name) {
        return (fs::path(rc.out_dir) / name).string();
    };

    const std::string command = !rc.command.empty() ? rc.command : c.get("run", "command");
    const std::uint64_t seed =
        rc.seed != 0 ? rc.seed : static_cast<std::uint64_t>(c.get_int_or("run", "seed", 1));
    const int threads =
        rc.threads > 1 ? rc.threads : static_cast<int>(c.get_int_or("run", "threads", 1));

    const ProblemSpec spec = load_problem(c);
    const auto t0 = std::chrono::steady_clock::now();
    const auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    auto solve_variant = [&](Variant v) {
        const GridSpec grid = load_grid(c, spec);
        return solve(spec, grid, v, threads);
    };

    if (command == "audit") {
        Rng rng(seed);
        const int samples = static_cast<int>(c.get_int_or("run", "samples", 2000));
        const BoundsAudit b = audit_bounds(spec, samples, rng);
        const ControllabilityAudit n = audit_normal_controllability(spec, samples, rng);
        const ConvexityAudit cvx =
            audit_convexity(spec, samples, rng, c.get_double_or("run", "convexity-tolerance", 0.1));
        Json j = detail::audit_json(b, n, cvx);
        j["pass"] = b.pass && n.pass;
        detail::write_json(out_path("audit.json"), j);
        std::cerr << "audit finished in " << elapsed() << "s\n";
        return (b.pass && n.pass) ? kExitPass : kExitCheckFailed;
    }

    if (command == "solve-minus" || command == "solve-plus") {
        const Variant v = command == "solve-minus" ? Variant::Uminus : Variant::Uplus;
        const SolveResult r = solve_variant(v);
        const std::string stem = v == Variant::Uminus ? "u_minus" : "u_plus";
        detail::write_text(out_path(stem + ".csv"), detail::field_csv(r.field));
        Json meta;
        meta["variant"] = variant_name(v);
        meta["grid"] = detail::grid_json(r.field.grid);
        Json steps = Json::array();
        for (const StepDiagnostics& d : r.per_step)
            steps.push_back({{"min", d.min_value}, {"max", d.max_value}});
        meta["per_step_range"] = steps;
        detail::write_json(out_path(stem + "_meta.json"), meta);
        std::cerr << command << " finished in " << elapsed() << "s\n";
        return kExitPass;
    }

    if (command == "trajectory") {
        const Vec x0 = detail::point_arg(c, "trajectory", "x0", spec.dimension);
        const double t = c.get_double("trajectory", "t");
        const double h = c.get_double_or("trajectory", "step", t / 1000.0);
        Trajectory tr;
        if (c.get_or("trajectory", "slide", "false") == "true") {
            const Vec a1 = detail::vec_from(c.get_doubles("trajectory", "alpha1"),
                                            c.where("trajectory", "alpha1"));
            const Vec a2 = detail::vec_from(c.get_doubles("trajectory", "alpha2"),
                                            c.where("trajectory", "alpha2"));
            const SlideResult s = slide_mu_sharp(spec, x0, t, a1, a2, h);
            if (s.aborted) {
                std::cerr << "slide aborted: " << s.abort_reason << "\n";
                return kExitCheckFailed;
            }
            tr = s.trajectory;
        } else {
            std::vector<ControlTriple> triples;
            for (int k = 1;; ++k) {
                const std::string key = "triple" + std::to_string(k);
                if (!c.has("trajectory", key)) break;
                const std::vector<std::string> words = c.get_words("trajectory", key);
                // grammar: a1 components, '/', a2 components, '/', mu
                std::vector<std::vector<double>> parts(1);
                for (const std::string& w : words) {
                    if (w == "/") {
                        parts.emplace_back();
                    } else {
                        parts.back().push_back(std::stod(w));
                    }
                }
                if (parts.size() != 3 || parts[2].size() != 1)
                    throw ConfigError(c.where("trajectory", key) +
                                      ": expected 'A1.. / A2.. / MU'");
                triples.push_back({detail::vec_from(parts[0], key),
                                   detail::vec_from(parts[1], key), parts[2][0]});
            }
            if (triples.empty())
                throw ConfigError("[trajectory]: needs triple1 = A1.. / A2.. / MU");
            tr = integrate(spec, x0, t, ControlSchedule::uniform(t, triples), h);
        }
        detail::write_text(out_path("trajectory.csv"),
                           detail::trajectory_csv(tr, spec.dimension));
        Json j;
        j["total_cost"] = cost(spec, tr);
        j["end_state"] = detail::vec_json(tr.end_state());
        Json eps = Json::array();
        for (const Episode& e : tr.episodes)
            eps.push_back({{"begin", e.begin}, {"end", e.end}, {"class", episode_name(e.cls)}});
        j["episodes"] = eps;
        j["warnings"] = tr.warnings;
        detail::write_json(out_path("trajectory.json"), j);
        std::cerr << "trajectory finished in " << elapsed() << "s\n";
        return kExitPass;
    }

    if (command == "oracle") {
        const Vec x0 = detail::point_arg(c, "oracle", "x0", spec.dimension);
        const double t = c.get_double("oracle", "t");
        OracleOptions opt;
        opt.budget = c.get_int_or("oracle", "budget", 1'000'000);
        opt.step = c.get_double_or("oracle", "step", 0.0);
        const OraclePair pair = brute_force_both(
            spec, x0, t, static_cast<int>(c.get_int_or("oracle", "branching", 30)),
            static_cast<int>(c.get_int_or("oracle", "intervals", 4)), opt);
        Json j;
        for (const OracleResult* r : {&pair.all, &pair.regular}) {
            Json jr;
            jr["best_cost"] = r->best_cost;
            jr["schedule_count"] = r->schedule_count;
            jr["found"] = r->found;
            Json sched = Json::array();
            for (std::size_t i = 0; i < r->best_schedule.per_interval.size(); ++i) {
                const ControlTriple& a = r->best_schedule.per_interval[i];
                sched.push_back({{"alpha1", detail::vec_json(a.alpha1)},
                                 {"alpha2", detail::vec_json(a.alpha2)},
                                 {"mu", a.mu}});
            }
            jr["best_schedule"] = sched;
            j[r->mode == OracleMode::All ? "all" : "regular"] = jr;
        }
        detail::write_json(out_path("oracle.json"), j);
        std::cerr << "oracle finished in " << elapsed() << "s\n";
        return kExitPass;
    }

    if (command == "dpp") {
        const Vec x0 = detail::point_arg(c, "dpp", "x0", spec.dimension);
        const double t = c.get_double("dpp", "t");
        const double tau = c.get_double("dpp", "tau");
        const GridSpec grid = load_grid(c, spec);
        Json j;
        for (Variant v : {Variant::Uminus, Variant::Uplus}) {
            const SolveResult r = solve(spec, grid, v, threads);
            const OracleMode mode =
                v == Variant::Uminus ? OracleMode::All : OracleMode::RegularOnly;
            const double res = dpp_residual(
                spec, r.field, x0, t, tau, mode,
                static_cast<int>(c.get_int_or("dpp", "branching", 30)),
                static_cast<int>(c.get_int_or("dpp", "intervals", 2)));
            j[variant_name(v)] = res;
        }
        detail::write_json(out_path("dpp.json"), j);
        std::cerr << "dpp finished in " << elapsed() << "s\n";
        return kExitPass;
    }

    if (command == "verify") {
        Rng rng(seed);
        const int samples = static_cast<int>(c.get_int_or("run", "samples", 2000));
        const BoundsAudit b = audit_bounds(spec, samples, rng);
        const ControllabilityAudit n = audit_normal_controllability(spec, samples, rng);
        const ConvexityAudit cvx = audit_convexity(
            spec, samples, rng, c.get_double_or("run", "convexity-tolerance", 0.1));
        const GridSpec grid = load_grid(c, spec);
        const SolveResult um = solve(spec, grid, Variant::Uminus, threads);
        const SolveResult up = solve(spec, grid, Variant::Uplus, threads);
        const ComparisonReport cmp = comparison_sweep(spec, um.field, up.field);
        const int stride = std::max(1, grid.steps / 16);
        const ResidualReport rm = residual_check(spec, um.field, -1.0, stride);
        const ResidualReport rp = residual_check(spec, up.field, -1.0, stride);
        const HamiltonianBoundsReport coer = check_coercivity(spec, samples, rng);
        const HamiltonianBoundsReport ht = check_ht_lipschitz(spec, samples, rng);
        const StrictSubsolutionReport strict = strict_subsolution_check(spec, samples, rng);

        Json j;
        j["audit"] = detail::audit_json(b, n, cvx);
        j["comparison"] = {{"pass", cmp.pass},
                           {"max_violation", cmp.max_violation},
                           {"max_gap_interior", cmp.max_gap},
                           {"gap_at_origin", cmp.gap_at_origin}};
        auto res_json = [](const ResidualReport& r) {
            return Json{{"interior_checked", r.interior_checked},
                        {"interior_skipped", r.interior_skipped},
                        {"worst_interior", r.worst_interior},
                        {"interface_checked", r.interface_checked},
                        {"worst_supersolution_violation", r.worst_supersolution},
                        {"worst_subsolution_violation", r.worst_subsolution},
                        {"worst_tangential_violation", r.worst_tangential},
                        {"worst_tangential_unrestricted", r.worst_tangential_unrestricted}};
        };
        j["residuals_minus"] = res_json(rm);
        j["residuals_plus"] = res_json(rp);
        j["coercivity"] = {{"pass", coer.pass}, {"margin", coer.coercivity_margin},
                           {"c_m", coer.c_m}};
        j["tangential_lipschitz"] = {{"pass", ht.pass},
                                     {"margin", ht.lipschitz_margin},
                                     {"lipschitz_constant", ht.lip_m},
                                     {"modulus_coefficient", ht.modulus_coef}};
        j["strict_subsolution"] = {{"worst", strict.worst},
                                   {"violations", strict.violations},
                                   {"k", strict.k_used}};
        Json osc = Json::array();
        for (const CounterexampleRow& r : counterexample_demo({0.1, 0.01})) {
            osc.push_back({{"eps", r.eps},
                           {"interface_trace", r.trace},
                           {"upper_half_relaxed_limit", r.upper_limit}});
        }
        j["oscillatory_counterexample"] = osc;
        const bool pass = b.pass && n.pass && cmp.pass && coer.pass && ht.pass &&
                          strict.violations == 0;
        j["pass"] = pass;
        detail::write_json(out_path("verify.json"), j);
        std::cerr << "verify finished in " << elapsed() << "s\n";
        return pass ? kExitPass : kExitCheckFailed;
    }

    if (command == "stability") {
        const Perturbation pert = detail::load_perturbation(c, spec);
        const std::vector<double> epsilons = c.get_doubles("stability", "epsilons");
        const GridSpec grid = load_grid(c, spec);
        const Variant v =
            c.get_or("stability", "variant", "minus") == "plus" ? Variant::Uplus
                                                                : Variant::Uminus;
        const StabilityReport rep = stability_sweep(spec, pert, epsilons, grid, v, threads);
        std::string csv = "eps,gap\n";
        Json rows = Json::array();
        for (const StabilityRow& r : rep.rows) {
            csv += detail::fmt(r.eps) + "," + detail::fmt(r.gap) + "\n";
            rows.push_back({{"eps", r.eps}, {"gap", r.gap}});
        }
        detail::write_text(out_path("stability.csv"), csv);
        Json j;
        j["rows"] = rows;
        j["slope"] = rep.slope;
        j["monotone_within_factor3"] = rep.monotone_within_factor3;
        j["last_below_slope"] = rep.last_below_slope;
        j["pass"] = rep.pass;
        detail::write_json(out_path("stability.json"), j);
        std::cerr << "stability finished in " << elapsed() << "s\n";
        return rep.pass ? kExitPass : kExitCheckFailed;
    }

    if (command == "convergence") {
        const std::vector<double> dxs = c.get_doubles("convergence", "dx");
        const Variant v = c.get_or("convergence", "variant", "minus") == "plus"
                              ? Variant::Uplus
                              : Variant::Uminus;
        const double rate_cost = c.get_double_or("convergence", "cost-rate", 1.0);
        const double frame = spec.max_speed_bound() * spec.horizon;

        // reference: Hopf-Lax value for ball dynamics and constant cost rate
        auto reference = [&](const Vec& x, double t) {
            const double r = spec.max_speed_bound() * t;
            Vec y = x;  // nearest point of the ball toward the terminal minimum
            const double nx = norm(x);
            if (nx <= r) {
                y = zeros(x.n);
            } else {
                y = (1.0 - r / nx) * x;
            }
            return rate_cost * t + spec.terminal(y);
        };

        std::vector<double> errors;
        std::string csv = "dx,dt,error,order\n";
        Json rows = Json::array();
        for (std::size_t i = 0; i < dxs.size(); ++i) {
            const GridSpec grid = GridSpec::make_uniform(spec, dxs[i]);
            const SolveResult r = solve(spec, grid, v, threads);
            double err = 0.0;
            for (std::int64_t k = 0; k < grid.node_count(); ++k) {
                const Vec x = grid.point(k);
                bool inside = true;
                for (int ax = 0; ax < grid.dim; ++ax)
                    if (x[ax] < grid.lo[ax] + frame - 1e-12 ||
                        x[ax] > grid.hi[ax] - frame + 1e-12)
                        inside = false;
                if (!inside) continue;
                err = std::max(err, std::abs(r.field.at(grid.steps, k) -
                                             reference(x, spec.horizon)));
            }
            errors.push_back(err);
            const double order =
                i == 0 ? 0.0 : std::log2(errors[i - 1] / err) / std::log2(dxs[i - 1] / dxs[i]);
            csv += detail::fmt(dxs[i]) + "," + detail::fmt(grid.dt) + "," + detail::fmt(err) +
                   "," + detail::fmt(order) + "\n";
            rows.push_back({{"dx", dxs[i]}, {"dt", grid.dt}, {"error", err}, {"order", order}});
        }
        detail::write_text(out_path("convergence.csv"), csv);
        Json j;
        j["rows"] = rows;
        bool pass = true;
        if (c.has("convergence", "min-order")) {
            const double mo = c.get_double("convergence", "min-order");
            for (std::size_t i = 1; i < errors.size(); ++i)
                if (std::log2(errors[i - 1] / errors[i]) /
                        std::log2(dxs[i - 1] / dxs[i]) < mo)
                    pass = false;
        }
        j["pass"] = pass;
        detail::write_json(out_path("convergence.json"), j);
        std::cerr << "convergence finished in " << elapsed() << "s\n";
        return pass ? kExitPass : kExitCheckFailed;
    }

    throw ConfigError("unknown command '" + command +
                      "' (expected audit, solve-minus, solve-plus, trajectory, oracle, "
                      "dpp, verify, stability or convergence)");
}

}  // namespace rhjb
