#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "rhjb/hamiltonians.hpp"

using namespace rhjb;

namespace {

ControlSample explicit_controls(std::initializer_list<double> vals) {
    ControlSample s;
    for (double v : vals) s.values.push_back(Vec{v});
    return s;
}

// gap problem with the three-point control set used for hand enumeration
ProblemSpec small_gap() {
    ProblemSpec p = make_gap_problem(3);  // controls {-1, 0, 1}
    return p;
}

}  // namespace

TEST_CASE("side Hamiltonian maximizes -b.p - l over the control list") {
    SECTION("single constant control in 2-D") {
        ProblemSpec p = make_gap2d_problem();
        p.controls1 = ControlSample{{Vec{0.0, 0.0}}};
        p.side1.dynamics.components = {constant_scalar(1.0), constant_scalar(0.0)};
        p.side1.cost = constant_scalar(0.0);
        const double h = hamiltonian_side(p, 1, Vec{0.0, 1.0}, 0.0, Vec{2.0, 5.0});
        CHECK(h == -2.0);
    }

    SECTION("eikonal: H(p) = |p| for controls {-1, 0, 1} and zero cost") {
        ProblemSpec p = small_gap();
        p.side1.cost = constant_scalar(0.0);
        CHECK(hamiltonian_side(p, 1, Vec{0.5}, 0.0, Vec{3.0}) == 3.0);
        CHECK(hamiltonian_side(p, 1, Vec{0.5}, 0.0, Vec{-3.0}) == 3.0);
    }

    SECTION("cost 1 - a at p = 0: best control is a = 1") {
        ProblemSpec p = small_gap();
        const SideHamiltonian h = hamiltonian_side_arg(p, 1, Vec{0.5}, 0.0, Vec{0.0});
        CHECK(h.value == 0.0);
        CHECK(p.controls1[h.argmax][0] == 1.0);
    }

    SECTION("matches an independent enumeration on random queries") {
        ProblemSpec p = make_gap2d_problem();
        Rng rng(31);
        for (int k = 0; k < 200; ++k) {
            const Vec x = rng.point(p.box_lo, p.box_hi);
            const double t = rng.uniform(0.0, 1.0);
            const Vec q = rng.ball(2, 4.0);
            double expect = -1e300;
            for (const Vec& a : p.controls1.values)
                expect = std::max(expect,
                                  -dot(p.side_velocity(1, x, t, a), q) - p.side_cost(1, x, t, a));
            CHECK(hamiltonian_side(p, 1, x, t, q) == expect);
        }
    }
}

TEST_CASE("boundary dynamics mixes the two sides") {
    ProblemSpec p = small_gap();
    const Vec z = zeros(1);

    CHECK(boundary_dynamics(p, z, 0.5, {Vec{1.0}, Vec{-1.0}, 1.0}).velocity[0] == 1.0);
    CHECK(boundary_dynamics(p, z, 0.5, {Vec{1.0}, Vec{-1.0}, 0.0}).velocity[0] == -1.0);

    const BoundaryDynamics mid = boundary_dynamics(p, z, 0.5, {Vec{1.0}, Vec{-1.0}, 0.5});
    CHECK(mid.velocity[0] == 0.0);
    CHECK(mid.cost_rate == 0.0);  // (1 - 1)/2 + (1 - 1)/2

    // 1-D with b1 = +1, b2 = -1, l1 = 0, l2 = 2 at mu = 1/2 gives (0, 1)
    ProblemSpec q = small_gap();
    q.side1.cost = constant_scalar(0.0);
    q.side2.cost = constant_scalar(2.0);
    const BoundaryDynamics m2 = boundary_dynamics(q, z, 0.0, {Vec{1.0}, Vec{-1.0}, 0.5});
    CHECK(m2.velocity[0] == 0.0);
    CHECK(m2.cost_rate == 1.0);
}

TEST_CASE("tangency weight") {
    SECTION("symmetric and singular pairs give 1/2") {
        const TangencyMu a = tangency_mu(1.0, 1.0);
        REQUIRE(a.kind == TangencyMu::Kind::Single);
        CHECK(a.mu == 0.5);
        const TangencyMu b = tangency_mu(-1.0, -1.0);
        REQUIRE(b.kind == TangencyMu::Kind::Single);
        CHECK(b.mu == 0.5);
    }
    SECTION("crossing pair admits no tangent mixture") {
        CHECK(tangency_mu(1.0, -1.0).kind == TangencyMu::Kind::None);
        CHECK(tangency_mu(2.0, -1.0).kind == TangencyMu::Kind::None);
    }
    SECTION("doubly tangent pair admits every mu") {
        CHECK(tangency_mu(0.0, 0.0, 1e-12).kind == TangencyMu::Kind::AllAdmissible);
    }
    SECTION("recombined mixture is tangent (round trip)") {
        Rng rng(5);
        ProblemSpec p = make_gap2d_problem();
        const Vec z = zeros(2);
        for (int k = 0; k < 500; ++k) {
            const Vec a1 = p.controls1[rng.index(p.controls1.size())];
            const Vec a2 = p.controls2[rng.index(p.controls2.size())];
            const double s = rng.uniform(0.0, 1.0);
            const TangencyMu tm =
                tangency_mu(p.beta(1, z, s, a1), p.beta(2, z, s, a2), p.tangency_tolerance());
            if (tm.kind != TangencyMu::Kind::Single) continue;
            const BoundaryDynamics d = boundary_dynamics(p, z, s, {a1, a2, tm.mu});
            CHECK(std::abs(d.velocity.back()) <= p.tangency_tolerance());
        }
    }
}

TEST_CASE("interface control set of the small gap problem") {
    ProblemSpec p = small_gap();
    const InterfaceControlSet set = interface_controls(p, zeros(1), 1.0);

    // pairs with alpha1 = -alpha2 != 0 are tangent with mu = 1/2; (0,0) is
    // doubly tangent and contributes the mu grid; same-sign pairs cross.
    auto find = [&](double a1, double a2) {
        std::vector<int> hits;
        for (int k = 0; k < set.size(); ++k)
            if (set.triples[static_cast<std::size_t>(k)].alpha1[0] == a1 &&
                set.triples[static_cast<std::size_t>(k)].alpha2[0] == a2)
                hits.push_back(k);
        return hits;
    };

    SECTION("(-1, +1): regular tangent mixture at 1/2") {
        const auto hits = find(-1.0, 1.0);
        REQUIRE(hits.size() == 1);
        CHECK(set.triples[static_cast<std::size_t>(hits[0])].mu == 0.5);
        CHECK(set.regular[static_cast<std::size_t>(hits[0])]);
    }
    SECTION("(+1, -1): singular tangent mixture at 1/2") {
        const auto hits = find(1.0, -1.0);
        REQUIRE(hits.size() == 1);
        CHECK(set.triples[static_cast<std::size_t>(hits[0])].mu == 0.5);
        CHECK_FALSE(set.regular[static_cast<std::size_t>(hits[0])]);
    }
    SECTION("(0, 0): mu grid, all regular") {
        const auto hits = find(0.0, 0.0);
        CHECK(static_cast<int>(hits.size()) == p.mu_grid);
        for (int k : hits) CHECK(set.regular[static_cast<std::size_t>(k)]);
    }

    SECTION("the mu grid exposes the cheaper side of a doubly tangent pair") {
        // both rest controls are tangent; their costs differ, so the best
        // mixture takes mu = 0 and the tangential sup sees -0.4
        ProblemSpec q = small_gap();
        q.side1.cost = affine_scalar(2.0, zeros(1), 0.0, Vec{-1.0});   // 2 - a
        q.side2.cost = affine_scalar(0.4, zeros(1), 0.0, Vec{1.0});    // 0.4 + a
        q.side1.bounds.cost_bound = 3.0;
        q.side2.bounds.cost_bound = 1.4;
        const InterfaceControlSet rest = interface_controls(q, zeros(1), 0.5);
        double best_rest = kMinusInfinity;
        for (int k = 0; k < rest.size(); ++k) {
            const ControlTriple& a = rest.triples[static_cast<std::size_t>(k)];
            if (a.alpha1[0] == 0.0 && a.alpha2[0] == 0.0)
                best_rest = std::max(best_rest,
                                     -rest.dynamics[static_cast<std::size_t>(k)].cost_rate);
        }
        CHECK(best_rest == Catch::Approx(-0.4).margin(1e-14));
    }
    SECTION("same-sign pairs contribute nothing") {
        CHECK(find(1.0, 1.0).empty());
        CHECK(find(-1.0, -1.0).empty());
    }
}

TEST_CASE("tangential Hamiltonians of the gap problem") {
    // independent enumeration over the 9 control pairs of {-1,0,1}^2:
    // tangent pairs are (a, -a); l_H = mu(1-a1) + (1-mu)(1+a2).
    // Over all mixtures the singular pair (1,-1,1/2) reaches l_H = 0, so
    // H_T = sup(-l_H) = 0; regular mixtures have l_H >= 1, so H_T^reg = -1.
    ProblemSpec p = small_gap();
    const Vec z = zeros(1);
    const Vec p_tan = zeros(1);  // no tangential directions in 1-D

    CHECK(hamiltonian_tangential(p, z, 1.0, p_tan, false) == 0.0);
    CHECK(hamiltonian_tangential(p, z, 1.0, p_tan, true) == -1.0);

    SECTION("restricted sup never exceeds the full sup") {
        ProblemSpec q = make_gap2d_problem();
        Rng rng(23);
        for (int k = 0; k < 300; ++k) {
            Vec zq = rng.point(q.box_lo, q.box_hi);
            zq.back() = 0.0;
            const double t = rng.uniform(0.0, 1.0);
            Vec g = rng.ball(2, 4.0);
            const InterfaceControlSet set = interface_controls(q, zq, t);
            CHECK(hamiltonian_tangential(set, g, true) <=
                  hamiltonian_tangential(set, g, false) + 1e-15);
        }
    }

    SECTION("empty tangent set gives the -infinity sentinel") {
        ProblemSpec q = small_gap();
        // both sides drive downward: beta1 = +1, beta2 = -1, a crossing pair
        q.controls1 = explicit_controls({-1.0});
        q.controls2 = explicit_controls({-1.0});
        const InterfaceControlSet set = interface_controls(q, z, 0.5);
        CHECK(set.empty());
        CHECK(hamiltonian_tangential(set, p_tan, false) == kMinusInfinity);
    }

    SECTION("tangential value with aligned sides reduces to -b.p - l") {
        ProblemSpec q = make_gap2d_problem();
        q.side1.dynamics.components = {constant_scalar(1.0), constant_scalar(0.0)};
        q.side2.dynamics.components = {constant_scalar(1.0), constant_scalar(0.0)};
        q.side1.cost = constant_scalar(0.0);
        q.side2.cost = constant_scalar(0.0);
        const Vec z2 = zeros(2);
        CHECK(hamiltonian_tangential(q, z2, 0.5, Vec{3.0, 0.0}, false) == -3.0);
        CHECK(hamiltonian_tangential(q, z2, 0.5, Vec{3.0, 0.0}, true) == -3.0);
    }
}

TEST_CASE("tangential Hamiltonian is invariant under control relabeling") {
    ProblemSpec p = make_gap2d_problem();
    ProblemSpec q = p;
    std::reverse(q.controls1.values.begin(), q.controls1.values.end());
    std::reverse(q.controls2.values.begin(), q.controls2.values.end());
    Rng rng(41);
    for (int k = 0; k < 100; ++k) {
        Vec z = rng.point(p.box_lo, p.box_hi);
        z.back() = 0.0;
        const double t = rng.uniform(0.0, 1.0);
        const Vec g = rng.ball(2, 3.0);
        CHECK(hamiltonian_tangential(p, z, t, g, false) ==
              Catch::Approx(hamiltonian_tangential(q, z, t, g, false)).margin(1e-14));
        CHECK(hamiltonian_tangential(p, z, t, g, true) ==
              Catch::Approx(hamiltonian_tangential(q, z, t, g, true)).margin(1e-14));
    }
}

TEST_CASE("Ishii envelopes") {
    ProblemSpec p = small_gap();
    // at p = 0: H1 = max(-(1 - a)) = 0 and H2 = max(-(1 + a)) = 0
    CHECK(ishii_envelope(p, zeros(1), 0.5, Vec{0.0}, IshiiMode::Min) == 0.0);
    CHECK(ishii_envelope(p, zeros(1), 0.5, Vec{0.0}, IshiiMode::Max) == 0.0);

    // identical sides make the envelopes collapse
    ProblemSpec q = make_eikonal_problem(5);
    Rng rng(3);
    for (int k = 0; k < 100; ++k) {
        const Vec x = rng.point(q.box_lo, q.box_hi);
        const Vec g = rng.ball(1, 4.0);
        CHECK(ishii_envelope(q, x, 0.1, g, IshiiMode::Min) ==
              ishii_envelope(q, x, 0.1, g, IshiiMode::Max));
    }
}

TEST_CASE("side Hamiltonian is midpoint convex in the gradient") {
    ProblemSpec p = make_gap2d_problem();
    Rng rng(29);
    for (int k = 0; k < 1000; ++k) {
        const Vec x = rng.point(p.box_lo, p.box_hi);
        const Vec q1 = rng.ball(2, 5.0);
        const Vec q2 = rng.ball(2, 5.0);
        const Vec mid = 0.5 * (q1 + q2);
        const double lhs = hamiltonian_side(p, 1, x, 0.3, mid);
        const double rhs = 0.5 * hamiltonian_side(p, 1, x, 0.3, q1) +
                           0.5 * hamiltonian_side(p, 1, x, 0.3, q2);
        CHECK(lhs <= rhs + 1e-12);
    }
}

TEST_CASE("coercivity bound holds exactly for the discrete maxima") {
    Rng rng(53);
    SECTION("single-axis controls at speed +-delta, zero cost") {
        ProblemSpec p = small_gap();
        p.side1.cost = constant_scalar(0.0);
        p.side2.cost = constant_scalar(0.0);
        p.side1.bounds.cost_bound = 0.0;
        p.side2.bounds.cost_bound = 0.0;
        auto rep = check_coercivity(p, 2000, rng);
        CHECK(rep.pass);
        // H(p) = |p| >= |p| - C_M with C_M = max(M_b, M_l) = 1: slack 1 at p=0
        CHECK(rep.coercivity_margin >= 0.0);
    }
    SECTION("gap and 2-D variants") {
        for (const ProblemSpec& p :
             {make_gap_problem(11), make_eikonal_problem(11), make_gap2d_problem()}) {
            auto rep = check_coercivity(p, 3000, rng);
            CHECK(rep.pass);
        }
    }
}

TEST_CASE("control matching across interface points") {
    SECTION("identical points return the control unchanged") {
        ProblemSpec p = small_gap();
        const InterfaceControlSet set = interface_controls(p, zeros(1), 0.5);
        REQUIRE_FALSE(set.empty());
        const ControlTriple a = set.triples[0];
        const MatchCertificate cert = match_control(p, zeros(1), 0.5, a, zeros(1), 0.5);
        REQUIRE(cert.ok);
        CHECK(cert.velocity_distance <= 1e-12);
        CHECK(cert.cost_distance <= 1e-12);
    }

    SECTION("time-shifted query on time-independent data is exact") {
        ProblemSpec p = small_gap();
        const InterfaceControlSet set = interface_controls(p, zeros(1), 0.5);
        const ControlTriple a = set.triples[0];
        const MatchCertificate cert = match_control(p, zeros(1), 0.5, a, zeros(1), 0.9);
        REQUIRE(cert.ok);
        CHECK(cert.velocity_distance <= 1e-12);
    }

    SECTION("fails when no control attains the required normal speed") {
        ProblemSpec p = make_gap2d_problem(1, 1);  // single zero control per side
        p.side1.dynamics.components[1] = affine_scalar(0.0, Vec{0.15, 0.0}, 0.0, zeros(2));
        p.side2.dynamics.components[1] = p.side1.dynamics.components[1];
        // at x1 = 1 the only normal speed is 0.15; no mixture reaches -delta
        const ControlTriple a{p.controls1[0], p.controls2[0], 0.5};
        const MatchCertificate cert =
            match_control(p, Vec{0.0, 0.0}, 0.5, a, Vec{1.0, 0.0}, 0.5);
        CHECK_FALSE(cert.ok);
        CHECK_FALSE(cert.message.empty());
    }

    SECTION("x-dependent normal dynamics: certificate within the analytic bound plus slack") {
        ProblemSpec p = make_gap2d_problem(3, 21);
        const Vec z{0.0, 0.0};
        const Vec zp{0.01, 0.0};
        const InterfaceControlSet set = interface_controls(p, z, 0.5);
        REQUIRE_FALSE(set.empty());
        int checked = 0;
        for (int k = 0; k < set.size(); k += 7) {
            const MatchCertificate cert =
                match_control(p, z, 0.5, set.triples[static_cast<std::size_t>(k)], zp, 0.5);
            REQUIRE(cert.ok);
            CHECK(cert.velocity_distance <=
                  cert.analytic_bound_b + cert.projection_slack_b + 1e-12);
            CHECK(cert.cost_distance <=
                  cert.analytic_bound_l + cert.projection_slack_l + 1e-12);
            ++checked;
        }
        CHECK(checked > 5);
    }
}

TEST_CASE("tangential Hamiltonian Lipschitz check") {
    Rng rng(61);
    SECTION("time-independent 1-D data: exact equality, margin nonnegative") {
        ProblemSpec p = make_gap_problem(11);
        auto rep = check_ht_lipschitz(p, 500, rng);
        CHECK(rep.pass);
    }
    SECTION("x-dependent 2-D data") {
        ProblemSpec p = make_gap2d_problem();
        auto rep = check_ht_lipschitz(p, 500, rng);
        CHECK(rep.pass);
        CHECK(rep.lip_m == Catch::Approx(0.15 + 2.0 * p.max_speed_bound() * 0.15 / 0.7));
    }
}
