#include <catch2/catch_amalgamated.hpp>

#include "rhjb/hull.hpp"
#include "rhjb/verification.hpp"

using namespace rhjb;

TEST_CASE("hull distance") {
    SECTION("point inside a segment") {
        CHECK(hull_distance({Vec{0.0, 0.0}, Vec{2.0, 0.0}}, Vec{1.0, 0.0}) ==
              Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("point off a segment") {
        CHECK(hull_distance({Vec{0.0, 0.0}, Vec{2.0, 0.0}}, Vec{1.0, 3.0}) ==
              Catch::Approx(3.0).margin(1e-12));
    }
    SECTION("point outside a triangle corner") {
        CHECK(hull_distance({Vec{1.0, 0.0}, Vec{2.0, 0.0}, Vec{1.0, 1.0}}, Vec{0.0, 0.0}) ==
              Catch::Approx(1.0).margin(1e-12));
    }
    SECTION("interior point of a 3-D simplex") {
        CHECK(hull_distance({Vec{0., 0., 0.}, Vec{1., 0., 0.}, Vec{0., 1., 0.},
                             Vec{0., 0., 1.}},
                            Vec{0.2, 0.2, 0.2}) == Catch::Approx(0.0).margin(1e-12));
    }

    SECTION("random convex combinations have distance zero") {
        Rng rng(83);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<Vec> pts;
            const int m = 3 + rng.index(6);
            for (int i = 0; i < m; ++i) pts.push_back(rng.ball(3, 2.0));
            Vec q = zeros(3);
            double wsum = 0.0;
            std::vector<double> w(static_cast<std::size_t>(m));
            for (int i = 0; i < m; ++i) {
                w[static_cast<std::size_t>(i)] = rng.uniform(0.0, 1.0);
                wsum += w[static_cast<std::size_t>(i)];
            }
            for (int i = 0; i < m; ++i)
                q += (w[static_cast<std::size_t>(i)] / wsum) * pts[static_cast<std::size_t>(i)];
            CHECK(hull_distance(pts, q) <= 1e-9);
        }
    }

    SECTION("exterior queries in 2-D match the pairwise-segment distance") {
        // the nearest hull point lies on the boundary, which is covered by
        // the segments between point pairs; no segment is closer than the hull
        Rng rng(89);
        auto segment_distance = [](const Vec& a, const Vec& b, const Vec& q) {
            const Vec d = b - a;
            const double dd = dot(d, d);
            const double s = dd == 0.0 ? 0.0 : std::clamp(dot(q - a, d) / dd, 0.0, 1.0);
            return norm(q - (a + s * d));
        };
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<Vec> pts;
            const int m = 3 + rng.index(6);
            for (int i = 0; i < m; ++i) pts.push_back(rng.ball(2, 1.0));
            Vec q = rng.ball(2, 1.0);
            q[0] += 3.0;  // keep the query outside the hull
            double exact = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    exact = std::min(exact, segment_distance(pts[static_cast<std::size_t>(i)],
                                                             pts[static_cast<std::size_t>(j)], q));
            CHECK(hull_distance(pts, q) == Catch::Approx(exact).margin(1e-9));
        }
    }
}

TEST_CASE("residual check") {
    SECTION("constant field with zero cost has zero residuals") {
        ProblemSpec p = make_gap_problem(5);
        p.side1.cost = constant_scalar(0.0);
        p.side2.cost = constant_scalar(0.0);
        p.terminal_cost = constant_scalar(1.5);
        const GridSpec g = GridSpec::make_uniform(p, 0.1);
        const SolveResult r = solve(p, g, Variant::Uminus);
        const ResidualReport rep = residual_check(p, r.field, 0.2);
        CHECK(rep.worst_interior <= 1e-12);
        CHECK(rep.worst_supersolution <= 1e-12);
        CHECK(rep.worst_subsolution <= 1e-12);
        CHECK(rep.worst_tangential <= 1e-12);
    }

    SECTION("eikonal residual shrinks under refinement at smooth nodes") {
        ProblemSpec p = make_eikonal_problem(21);
        double prev = 1e9;
        for (double dx : {0.04, 0.02, 0.01}) {
            const GridSpec g = GridSpec::make_uniform(p, dx);
            const SolveResult r = solve(p, g, Variant::Uminus);
            const ResidualReport rep = residual_check(p, r.field, -1.0, 4);
            CHECK(rep.interior_checked > 0);
            CHECK(rep.worst_interior < prev + 1e-12);
            prev = rep.worst_interior;
        }
        CHECK(prev <= 0.05);
    }

    SECTION("gap problem: the tangential inequality separates the variants") {
        ProblemSpec p = make_gap_problem(21);
        const GridSpec g = GridSpec::make_uniform(p, 0.02);
        const SolveResult um = solve(p, g, Variant::Uminus);
        const SolveResult up = solve(p, g, Variant::Uplus);
        const ResidualReport rm = residual_check(p, um.field, -1.0, 4);
        const ResidualReport rp = residual_check(p, up.field, -1.0, 4);
        // the minimal field satisfies the full tangential inequality
        CHECK(rm.worst_tangential <= 0.05);
        // the maximal one satisfies only the regular-restricted inequality
        CHECK(rp.worst_tangential <= 0.05);
        // and violates the unrestricted one by about the cost gap (1)
        CHECK(rp.worst_tangential_unrestricted >= 0.5);
    }
}

TEST_CASE("strict subsolution estimate") {
    Rng rng(71);
    SECTION("holds with the canonical constant on every shipped example") {
        for (const ProblemSpec& p :
             {make_gap_problem(11), make_eikonal_problem(11), make_gap2d_problem()}) {
            const StrictSubsolutionReport rep = strict_subsolution_check(p, 1000, rng);
            CHECK(rep.violations == 0);
            CHECK(rep.worst <= -1.0 + 1e-10);
        }
    }
    SECTION("negative control: a free-running reward breaks the lowered constant") {
        ProblemSpec p = make_gap_problem(11);
        p.side1.cost = constant_scalar(-1.0);
        p.side2.cost = constant_scalar(-1.0);
        p.side1.bounds.cost_bound = 1.0;
        p.side2.bounds.cost_bound = 1.0;
        const double k_full = p.max_speed_bound() + p.max_cost_bound() + 1.0;
        const StrictSubsolutionReport ok = strict_subsolution_check(p, 1000, rng, k_full);
        CHECK(ok.violations == 0);
        const StrictSubsolutionReport bad =
            strict_subsolution_check(p, 1000, rng, k_full - 2.0);
        CHECK(bad.violations > 0);
    }
}

TEST_CASE("comparison sweep") {
    SECTION("continuous coefficients: the two variants coincide") {
        ProblemSpec p = make_eikonal_problem(11);
        const GridSpec g = GridSpec::make_uniform(p, 0.05);
        const ValueField um = solve(p, g, Variant::Uminus).field;
        const ValueField up = solve(p, g, Variant::Uplus).field;
        const ComparisonReport rep = comparison_sweep(p, um, up);
        CHECK(rep.pass);
        CHECK(rep.max_gap <= 2e-8);
    }

    SECTION("gap problem: ordered with a gap of about 1 at the origin") {
        ProblemSpec p = make_gap_problem(21);
        const GridSpec g = GridSpec::make_uniform(p, 0.02);
        const ValueField um = solve(p, g, Variant::Uminus).field;
        const ValueField up = solve(p, g, Variant::Uplus).field;
        const ComparisonReport rep = comparison_sweep(p, um, up);
        CHECK(rep.pass);
        CHECK(rep.gap_at_origin >= 0.8);
        CHECK(rep.gap_at_origin <= 1.2);
        // both variants start from the same terminal data
        CHECK(um.at(0, 0) == up.at(0, 0));
    }
}

TEST_CASE("stability sweep") {
    SECTION("unperturbed family: all gaps vanish") {
        ProblemSpec p = make_gap_problem(9);
        const GridSpec g = GridSpec::make_uniform(p, 0.1);
        Perturbation none;
        const StabilityReport rep =
            stability_sweep(p, none, {0.1, 0.05}, g, Variant::Uminus);
        for (const StabilityRow& r : rep.rows) CHECK(r.gap == 0.0);
    }

    SECTION("additive cost: the gap is exactly eps * horizon") {
        ProblemSpec p = make_gap_problem(9);
        const GridSpec g = GridSpec::make_uniform(p, 0.05);
        Perturbation pert;
        pert.dl1 = constant_scalar(1.0);
        pert.dl2 = constant_scalar(1.0);
        pert.cost_bound = 1.0;
        const StabilityReport rep =
            stability_sweep(p, pert, {0.1, 0.05}, g, Variant::Uminus);
        REQUIRE(rep.rows.size() == 2);
        CHECK(rep.rows[0].gap == Catch::Approx(0.1 * p.horizon).margin(1e-6));
        CHECK(rep.rows[1].gap == Catch::Approx(0.05 * p.horizon).margin(1e-6));
        CHECK(rep.pass);
    }

    SECTION("tangential drift on the 2-D problem: decreasing gaps below the slope") {
        ProblemSpec p = make_gap2d_problem();
        const GridSpec g = GridSpec::make_uniform(p, 0.2);
        Perturbation pert;
        pert.db1.components = {constant_scalar(0.3), constant_scalar(0.0)};
        pert.speed_bound = 0.3;
        const StabilityReport rep =
            stability_sweep(p, pert, {0.1, 0.05, 0.025}, g, Variant::Uminus);
        CHECK(rep.monotone_within_factor3);
        CHECK(rep.last_below_slope);
        REQUIRE(rep.rows.size() == 3);
        CHECK(rep.rows[2].gap <= rep.rows[0].gap);
    }
}

TEST_CASE("regular dynamics hull") {
    SECTION("singular mixture of the gap problem sits far from the regular set") {
        ProblemSpec p = make_gap_problem(21);
        // realized dynamics of the singular stay: velocity 0, cost rate 0;
        // regular tangent mixtures all cost at least 1
        const double d = regular_hull_distance(p, zeros(1), 1.0, zeros(1), 0.0);
        CHECK(d >= 0.5);
        CHECK(d == Catch::Approx(1.0).margin(1e-9));
    }

    SECTION("a regular mixture has distance zero") {
        ProblemSpec p = make_gap_problem(21);
        const InterfaceControlSet set = interface_controls(p, zeros(1), 1.0);
        for (int k = 0; k < set.size(); ++k) {
            if (!set.regular[static_cast<std::size_t>(k)]) continue;
            const BoundaryDynamics& d = set.dynamics[static_cast<std::size_t>(k)];
            CHECK(regular_hull_distance(p, zeros(1), 1.0, d.velocity, d.cost_rate) <=
                  1e-10);
            break;
        }
    }

    SECTION("perturbed sliding approaches the unperturbed regular set") {
        ProblemSpec p = make_gap2d_problem();
        Perturbation pert;
        pert.db1.components = {constant_scalar(0.3), constant_scalar(0.0)};
        pert.dl1 = constant_scalar(0.2);
        pert.speed_bound = 0.3;
        pert.cost_bound = 0.2;
        const RegularLimitReport rep =
            regular_limit_check(p, pert, {0.1, 0.05, 0.025}, Vec{-1.0, 0.0}, 1.0,
                                Vec{1.0, -0.5}, Vec{1.0, 0.5}, 1e-3);
        CHECK(rep.within_bound);
        CHECK(rep.decreasing);
        REQUIRE(rep.rows.size() == 3);
        CHECK(rep.rows[0].max_hull_gap > rep.rows[2].max_hull_gap);
        CHECK(rep.rows[2].max_hull_gap <= rep.bound_coefficient * (1e-3 + 0.025));
    }
}

TEST_CASE("oscillatory counterexample table") {
    const auto rows = counterexample_demo({0.1, 0.01});
    REQUIRE(rows.size() == 2);
    for (const CounterexampleRow& r : rows) {
        CHECK(r.trace == 0.0);
        CHECK(r.upper_limit >= 1.0 - 1e-6);
    }
}
