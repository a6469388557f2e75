#include <catch2/catch_amalgamated.hpp>

#include "refflow/flow.hpp"

using namespace refflow;

namespace {
const Coordinates kUnitX({0, 1, 0, 0}, "cartesian");
}

TEST_CASE("constant field integrates exactly") {
    const GeneratingField f = field_constant({0.5, 1, -2, 3});
    const Coordinates p({1, 2, 3, 4}, "cartesian");
    const FlowSolution sol = integrate_flow(f, p, 2.0);
    CHECK(max_abs(sol.endpoint() - Vec4{2, 4, -1, 10}) < 1e-12);
    CHECK(max_abs(sol.x.front() - p.x) == 0.0);  // reference condition exact
}

TEST_CASE("rotation field quarter turn") {
    const FlowSolution sol = integrate_flow(field_rotation(), kUnitX, M_PI / 2.0);
    CHECK(max_abs(sol.endpoint() - Vec4{0, 0, 1, 0}) < 1e-8);
}

TEST_CASE("flow group property at the endpoint level") {
    for (const GeneratingField& f : {field_rotation(), field_shear(), field_polar_radial()}) {
        const Coordinates p({0, 1.1, 0.4, 0}, "cartesian");
        const double l1 = 0.3, l2 = 0.45;
        const Vec4 q = integrate_flow(f, p, l1).endpoint();
        const Vec4 two_leg = integrate_flow(f, Coordinates(q, "cartesian"), l2).endpoint();
        const Vec4 direct = integrate_flow(f, p, l1 + l2).endpoint();
        CHECK(max_abs(two_leg - direct) < 1e-8);
    }
}

TEST_CASE("negative spans integrate backward") {
    const FlowSolution fwd = integrate_flow(field_rotation(), kUnitX, 0.8);
    const FlowSolution back =
        integrate_flow(field_rotation(), Coordinates(fwd.endpoint(), "cartesian"), -0.8);
    CHECK(max_abs(back.endpoint() - kUnitX.x) < 1e-10);
}

TEST_CASE("fixed-step solver converges at fourth order") {
    auto endpoint_err = [](double step) {
        IntegratorConfig cfg;
        cfg.step_size = step;
        const FlowSolution sol = integrate_flow(field_rotation(), kUnitX, M_PI / 2.0, cfg);
        return max_abs(sol.endpoint() - Vec4{0, 0, 1, 0});
    };
    const double ratio = endpoint_err(0.02) / endpoint_err(0.01);
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
}

TEST_CASE("adaptive solver hits its tolerance") {
    IntegratorConfig cfg;
    cfg.method = IntegratorMethod::RK45;
    cfg.rel_tol = 1e-11;
    cfg.abs_tol = 1e-13;
    const FlowSolution sol = integrate_flow(field_rotation(), kUnitX, 2.0, cfg);
    CHECK(max_abs(sol.endpoint() - Vec4{0, std::cos(2.0), std::sin(2.0), 0}) < 1e-9);
}

TEST_CASE("dense output") {
    const FlowSolution sol = integrate_flow(field_rotation(), kUnitX, 1.0);
    SECTION("interpolant reproduces stored nodes exactly") {
        for (size_t i = 0; i < sol.sigma.size(); i += 97)
            CHECK(max_abs(sol.position(sol.sigma[i]) - sol.x[i]) == 0.0);
    }
    SECTION("mid-interval positions track the closed form") {
        for (double s : {0.1234, 0.5001, 0.98765})
            CHECK(max_abs(sol.position(s) - Vec4{0, std::cos(s), std::sin(s), 0}) < 1e-10);
    }
    SECTION("tangents track the field") {
        for (double s : {0.25, 0.75})
            CHECK(max_abs(sol.tangent(s) - Vec4{0, -std::sin(s), std::cos(s), 0}) < 1e-7);
    }
}

TEST_CASE("blow-up and step-budget failures are reported") {
    SECTION("finite-time escape") {
        // B^1 = (x^1)^2 from x = 1 diverges at the parameter value 1.
        try {
            integrate_flow(field_quadratic(), kUnitX, 2.0);
            FAIL("expected BlowUp");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::BlowUp);
        }
    }
    SECTION("max_steps is enforced") {
        IntegratorConfig cfg;
        cfg.step_size = 1e-4;
        cfg.max_steps = 10;
        try {
            integrate_flow(field_rotation(), kUnitX, 1.0, cfg);
            FAIL("expected MaxStepsExceeded");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::MaxStepsExceeded);
        }
    }
}

TEST_CASE("arc-length representation") {
    const MetricSpec euc = metric_euclidean();
    SECTION("unit-magnitude field: same curve, parameter map is the identity") {
        const GeneratingField f = field_polar_radial();
        const Coordinates p({0, 0.6, 0.8, 0}, "cartesian");
        const FlowSolution psi = reparametrize_arclength(f, euc, p, 1.0);
        const FlowSolution phi = integrate_flow(f, p, 1.0);
        CHECK(max_abs(psi.endpoint() - phi.endpoint()) < 1e-10);
        CHECK(psi.lambda_of_s.back() == Catch::Approx(1.0).margin(1e-12));
    }
    SECTION("doubled field: half the parameter per unit length") {
        const GeneratingField f = field_constant({0, 0, 2, 0});
        const Coordinates p({0, 1, 1, 1}, "cartesian");
        const FlowSolution psi = reparametrize_arclength(f, euc, p, 1.0);
        CHECK(max_abs(psi.endpoint() - Vec4{0, 1, 2, 1}) < 1e-12);
        CHECK(psi.lambda_of_s.back() == Catch::Approx(0.5).margin(1e-12));
    }
    SECTION("tripled rotation: quarter arc matches the unscaled circle") {
        GeneratingField f3;
        f3.eval = [](const Vec4& x) { return Vec4{0, -3 * x[2], 3 * x[1], 0}; };
        const FlowSolution psi = reparametrize_arclength(f3, euc, kUnitX, M_PI / 2.0);
        CHECK(max_abs(psi.endpoint() - Vec4{0, 0, 1, 0}) < 1e-8);
        CHECK(psi.lambda_of_s.back() == Catch::Approx(M_PI / 6.0).margin(1e-10));
    }
    SECTION("unit tangent in the metric at all nodes") {
        const FlowSolution psi =
            reparametrize_arclength(field_scaled_rotation(), euc, kUnitX, 0.8);
        for (size_t i = 0; i < psi.dx.size(); i += 53) {
            const Vec4& v = psi.dx[i];
            const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
            CHECK(n == Catch::Approx(1.0).margin(1e-6));
        }
    }
    SECTION("vanishing field is rejected") {
        try {
            reparametrize_arclength(field_rotation(), euc, Coordinates({0, 0, 0, 0}, "cartesian"),
                                    1.0);
            FAIL("expected VanishingField");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::VanishingField);
        }
    }
}

TEST_CASE("tangent relation between the two representations") {
    const MetricSpec euc = metric_euclidean();
    SECTION("scaled rotation field") {
        const FlowSolution phi = integrate_flow(field_scaled_rotation(), kUnitX, 0.4);
        const FlowSolution psi = reparametrize_arclength(field_scaled_rotation(), euc, kUnitX, 0.8);
        CHECK(check_tangent_relation(phi, psi, euc) < 1e-6);
    }
    SECTION("constant unit field matches to machine precision") {
        const GeneratingField f = field_constant({0, 1, 0, 0});
        const Coordinates p({0, 0, 0, 0}, "cartesian");
        const FlowSolution phi = integrate_flow(f, p, 1.0);
        const FlowSolution psi = reparametrize_arclength(f, euc, p, 1.0);
        CHECK(check_tangent_relation(phi, psi, euc) < 1e-14);
    }
    SECTION("mismatched reference points are rejected") {
        const FlowSolution phi = integrate_flow(field_rotation(), kUnitX, 0.5);
        const FlowSolution psi = reparametrize_arclength(
            field_rotation(), euc, Coordinates({0, 0, 1, 0}, "cartesian"), 0.5);
        try {
            check_tangent_relation(phi, psi, euc);
            FAIL("expected DomainError");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::DomainError);
        }
    }
}

TEST_CASE("integrator configuration is validated") {
    IntegratorConfig cfg;
    cfg.method = IntegratorMethod::RK45;
    cfg.rel_tol = 0.5;  // outside (0, 1e-2)
    try {
        integrate_flow(field_rotation(), kUnitX, 1.0, cfg);
        FAIL("expected ValidationError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ValidationError);
    }
}
