#include <catch2/catch_amalgamated.hpp>

#include "refflow/charts.hpp"

using namespace refflow;

TEST_CASE("constant metric has vanishing connection coefficients") {
    const MetricSpec mink = metric_minkowski();
    const Ten3 gamma = christoffel_from_metric(mink, Coordinates({0.3, -1.2, 4.0, 0.7}, "minkowski"));
    REQUIRE(max_abs(gamma) == 0.0);
}

TEST_CASE("polar-block connection at r = 2") {
    const Ten3 gamma = christoffel_from_metric(metric_polar(), Coordinates({0, 2.0, 0.7, 0}, "polar"));
    CHECK(gamma(1, 2, 2) == Catch::Approx(-2.0).margin(1e-12));   // r index vs theta,theta
    CHECK(gamma(2, 1, 2) == Catch::Approx(0.5).margin(1e-12));    // theta index vs r,theta
    CHECK(gamma(2, 2, 1) == Catch::Approx(0.5).margin(1e-12));
    // everything else vanishes
    Ten3 rest = gamma;
    rest(1, 2, 2) = rest(2, 1, 2) = rest(2, 2, 1) = 0.0;
    CHECK(max_abs(rest) < 1e-12);
}

TEST_CASE("polar-block connection via finite-difference metric derivatives") {
    MetricSpec m = metric_polar();
    m.dg = nullptr;  // force the central-difference path
    const Ten3 gamma = christoffel_from_metric(m, Coordinates({0, 2.0, 0.7, 0}, "polar"));
    CHECK(gamma(1, 2, 2) == Catch::Approx(-2.0).margin(1e-7));
    CHECK(gamma(2, 1, 2) == Catch::Approx(0.5).margin(1e-7));
}

TEST_CASE("spherical-block connection at theta = pi/4") {
    const Ten3 gamma = christoffel_from_metric(
        metric_spherical(), Coordinates({0, 1.5, M_PI / 4.0, 0.3}, "spherical"));
    CHECK(gamma(2, 3, 3) == Catch::Approx(-0.5).margin(1e-9));  // -sin(t)cos(t) at pi/4
}

TEST_CASE("degenerate metric is rejected") {
    MetricSpec m;
    m.g = [](const Coordinates&) {
        Mat4 g = Mat4::identity();
        g(2, 2) = 0.0;
        return g;
    };
    try {
        christoffel_from_metric(m, Coordinates({0, 1, 0, 0}, "cartesian"));
        FAIL("expected SingularMetric");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SingularMetric);
    }
}

TEST_CASE("levi-civita connection is torsion-free for curved builtins") {
    for (const MetricSpec& m : {metric_polar(), metric_spherical()}) {
        MetricSpec fd = m;
        fd.dg = nullptr;
        const ConnectionCoeffs conn = ConnectionCoeffs::levi_civita(fd);
        const Coordinates x({0.2, 1.7, 0.9, -0.4}, m.name);
        CHECK(max_abs(conn.torsion(x)) < 1e-12);
    }
}

TEST_CASE("levi-civita connection is metric compatible") {
    const MetricSpec m = metric_spherical();
    const ConnectionCoeffs conn = ConnectionCoeffs::levi_civita(m);
    const Coordinates x({0.1, 1.3, 0.8, 0.5}, "spherical");
    const Ten3 gamma = conn.gamma(x);
    const Mat4 g = m.g(x);

    // grad_s g_{mn} = d_s g_{mn} - G^r_{sm} g_{rn} - G^r_{sn} g_{mr} must vanish.
    for (int s = 0; s < 4; ++s) {
        const double h = 1e-5 * std::max(1.0, std::fabs(x.x[static_cast<size_t>(s)]));
        Coordinates xp = x, xm = x;
        xp.x[static_cast<size_t>(s)] += h;
        xm.x[static_cast<size_t>(s)] -= h;
        const Mat4 dg = (1.0 / (2.0 * h)) * (m.g(xp) - m.g(xm));
        for (int mu = 0; mu < 4; ++mu)
            for (int nu = 0; nu < 4; ++nu) {
                double v = dg(mu, nu);
                for (int r = 0; r < 4; ++r)
                    v -= gamma(r, s, mu) * g(r, nu) + gamma(r, s, nu) * g(mu, r);
                CHECK(std::fabs(v) < 1e-8);
            }
    }
}

TEST_CASE("point transforms") {
    SECTION("identity") {
        const ChartTransform t = transform_identity();
        const Coordinates x({0.4, 1.0, -2.0, 3.0}, "cartesian");
        CHECK(max_abs(transform_point(t, x).x - x.x) == 0.0);
    }
    SECTION("cartesian to polar of (1,1)") {
        const ChartTransform t = transform_cartesian_to_polar();
        const Coordinates out = transform_point(t, Coordinates({0, 1.0, 1.0, 0}, "cartesian"));
        CHECK(out.x[1] == Catch::Approx(std::sqrt(2.0)).epsilon(1e-14));
        CHECK(out.x[2] == Catch::Approx(M_PI / 4.0).epsilon(1e-14));
        CHECK(out.chart == "polar");
    }
    SECTION("rotation by pi/2") {
        const ChartTransform t = transform_rotation_xy(M_PI / 2.0);
        const Coordinates out = transform_point(t, Coordinates({0, 1.0, 0.0, 0}, "cartesian"));
        CHECK(out.x[1] == Catch::Approx(0.0).margin(1e-15));
        CHECK(out.x[2] == Catch::Approx(1.0).epsilon(1e-15));
    }
    SECTION("outside the overlap domain") {
        const ChartTransform t = transform_cartesian_to_polar();
        try {
            transform_point(t, Coordinates({0, -1.0, 0.0, 0}, "cartesian"));  // branch cut
            FAIL("expected OutsideOverlap");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::OutsideOverlap);
        }
    }
}

TEST_CASE("mixed-tensor transforms") {
    Mat4 F;
    F(0, 0) = 1;
    F(1, 1) = 2;
    F(2, 2) = 1;
    F(3, 3) = 1;
    F(1, 2) = 0.5;

    SECTION("identity transform leaves F unchanged") {
        const Mat4 out = transform_mixed(transform_identity(), F, Coordinates({0, 1, 1, 0}, "cartesian"));
        CHECK(max_abs(out - F) == 0.0);
    }
    SECTION("identity tensor is invariant under any transform") {
        const ChartTransform t = transform_cartesian_to_polar();
        const Mat4 out = transform_mixed(t, Mat4::identity(), Coordinates({0, 0.8, 0.3, 0}, "cartesian"));
        CHECK(max_abs(out - Mat4::identity()) < 1e-12);
    }
    SECTION("axis scaling conjugates by hand-computed matrices") {
        const ChartTransform t = transform_axis_scale(1, 2.0);
        Mat4 L = Mat4::identity();
        L(1, 1) = 2.0;
        Mat4 Linv = Mat4::identity();
        Linv(1, 1) = 0.5;
        const Mat4 expected = L * F * Linv;
        const Mat4 out = transform_mixed(t, F, Coordinates({0, 3, 1, 0}, "cartesian"));
        CHECK(max_abs(out - expected) < 1e-15);
    }
    SECTION("forward then inverse transform is the identity map on tensors") {
        const ChartTransform fwd = transform_cartesian_to_polar();
        const ChartTransform bwd = transform_polar_to_cartesian();
        const Coordinates x({0, 0.9, 0.7, 0.2}, "cartesian");
        const Coordinates x_polar = transform_point(fwd, x);
        const Mat4 once = transform_mixed(fwd, F, x);
        const Mat4 back = transform_mixed(bwd, once, x_polar);
        CHECK(max_abs(back - F) < 1e-10);
    }
}

TEST_CASE("jacobian pairs multiply to the identity on the overlap") {
    for (const ChartTransform& t :
         {transform_cartesian_to_polar(), transform_polar_to_cartesian(),
          transform_rotation_xy(0.7), transform_axis_scale(2, 3.0)}) {
        const Vec4 x{0.1, 1.1, 0.6, -0.2};
        if (!t.in_overlap(x)) continue;
        CHECK(max_abs(t.jacobian(x) * t.inverse_jacobian(x) - Mat4::identity()) < 1e-12);
    }
}

TEST_CASE("non-finite coordinates are rejected") {
    try {
        Coordinates({0.0, std::nan(""), 0.0, 0.0}, "cartesian");
        FAIL("expected NonFiniteInput");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NonFiniteInput);
    }
}
