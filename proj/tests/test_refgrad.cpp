#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "refflow/refgrad.hpp"

using namespace refflow;

namespace {

const ConnectionCoeffs kZero = ConnectionCoeffs::zero();
const Coordinates kUnitX({0, 1, 0, 0}, "cartesian");

Mat4 rotation_generator() {
    Mat4 A;
    A(1, 2) = -1;
    A(2, 1) = 1;
    return A;
}

}  // namespace

TEST_CASE("zero span gives the identity for all three methods") {
    const GeneratingField f = field_rotation();
    CHECK(max_abs(refgrad_variational(f, kZero, kUnitX, 0.0).F - Mat4::identity()) == 0.0);
    CHECK(max_abs(refgrad_finite_difference(f, kUnitX, 0.0, 1e-4).F - Mat4::identity()) == 0.0);
    const FlowSolution sol = integrate_flow(f, kUnitX, 0.0);
    CHECK(max_abs(refgrad_series(f, kZero, sol, {}).F - Mat4::identity()) == 0.0);
}

TEST_CASE("constant field leaves the gradient at the identity") {
    const GeneratingField f = field_constant({0, 1, -2, 0.5});
    const RefGradient g = refgrad_variational(f, kZero, kUnitX, 0.8);
    CHECK(max_abs(g.F - Mat4::identity()) < 1e-14);
    const RefGradient fd = refgrad_finite_difference(f, kUnitX, 0.8, 1e-4);
    CHECK(max_abs(fd.F - Mat4::identity()) < 1e-10);
}

TEST_CASE("linear field gradient is the matrix exponential") {
    const Mat4 A = rotation_generator();
    const GeneratingField f = field_linear(A);
    const Mat4 expected = oracle::expm(A);

    SECTION("variational") {
        const RefGradient g = refgrad_variational(f, kZero, kUnitX, 1.0);
        CHECK(max_abs(g.F - expected) < 1e-8);
    }
    SECTION("finite differences at h = 1e-4") {
        const RefGradient g = refgrad_finite_difference(f, kUnitX, 1.0, 1e-4);
        CHECK(max_abs(g.F - expected) < 1e-7);
    }
    SECTION("series at order 12") {
        const FlowSolution sol = integrate_flow(f, kUnitX, 1.0);
        const RefGradient g = refgrad_series(f, kZero, sol, {});
        CHECK(max_abs(g.F - expected) < 1e-8);
    }
}

TEST_CASE("order-zero series is the first corrected term") {
    // With a constant kernel G the order-0 sum is exactly I + lambda G.
    const GeneratingField f = field_rotation();
    const double lambda = 0.7;
    const FlowSolution sol = integrate_flow(f, kUnitX, lambda);
    SeriesTruncation trunc;
    trunc.order = 0;
    const RefGradient g = refgrad_series(f, kZero, sol, trunc);
    const Mat4 expected = Mat4::identity() + lambda * rotation_generator();
    CHECK(max_abs(g.F - expected) < 1e-10);
}

TEST_CASE("commuting kernels reduce the series to exponential partial sums") {
    Mat4 A;
    A(1, 1) = 0.4;
    A(1, 2) = 0.3;
    A(2, 1) = -0.3;
    A(2, 2) = 0.4;
    const GeneratingField f = field_linear(A);
    const double lambda = 1.0;
    const FlowSolution sol = integrate_flow(f, kUnitX, lambda);

    for (int N : {1, 3, 6}) {
        SeriesTruncation trunc;
        trunc.order = N;
        const RefGradient g = refgrad_series(f, kZero, sol, trunc);
        Mat4 partial = Mat4::identity();
        Mat4 term = Mat4::identity();
        for (int n = 1; n <= N + 1; ++n) {
            term = (lambda / n) * (term * A);
            partial = partial + term;
        }
        CHECK(max_abs(g.F - partial) < 1e-9);
    }
}

TEST_CASE("series matches the variational solution on the rotation field") {
    const GeneratingField f = field_rotation();
    const FlowSolution sol = integrate_flow(f, kUnitX, 1.0);
    const RefGradient ref = refgrad_variational(f, kZero, kUnitX, 1.0);
    SeriesTruncation trunc;
    trunc.order = 12;
    const RefGradient g = refgrad_series(f, kZero, sol, trunc);
    REQUIRE(g.error_bound);
    CHECK(max_abs(g.F - ref.F) < std::max(1e-7, *g.error_bound));
}

TEST_CASE("series tail bound is honored with the exact kernel bound") {
    // Rotation field: the kernel is a fixed rotation generator with unit
    // operator norm, and the gradient stays orthogonal, so M = m = 1.
    const GeneratingField f = field_rotation();
    const FlowSolution sol = integrate_flow(f, kUnitX, 1.0);
    const Mat4 ref = refgrad_variational(f, kZero, kUnitX, 1.0).F;

    double previous_bound = 1e300;
    for (int N : {0, 2, 4, 8}) {
        SeriesTruncation trunc;
        trunc.order = N;
        trunc.M = 1.0;
        trunc.m = 1.0;
        const RefGradient g = refgrad_series(f, kZero, sol, trunc);
        REQUIRE(g.error_bound);
        CHECK(max_abs(g.F - ref) <= *g.error_bound);
        CHECK(*g.error_bound < previous_bound);
        previous_bound = *g.error_bound;
    }
}

TEST_CASE("series error decreases monotonically in the truncation order") {
    const GeneratingField f = field_rotation();
    const FlowSolution sol = integrate_flow(f, kUnitX, 1.0);
    const Mat4 ref = refgrad_variational(f, kZero, kUnitX, 1.0).F;
    std::vector<double> errs;
    for (int N = 0; N <= 12; N += 2) {
        SeriesTruncation trunc;
        trunc.order = N;
        errs.push_back(max_abs(refgrad_series(f, kZero, sol, trunc).F - ref));
    }
    for (size_t i = 0; i + 1 < errs.size(); ++i)
        CHECK((errs[i + 1] < errs[i] || errs[i + 1] < 1e-12));
}

TEST_CASE("finite differences converge at second order on the shear field") {
    const GeneratingField f = field_shear();
    const Coordinates p({0, 0.2, 0.5, 0}, "cartesian");
    const Mat4 ref = refgrad_variational(f, kZero, p, 1.0).F;
    const double e1 = max_abs(refgrad_finite_difference(f, p, 1.0, 0.02).F - ref);
    const double e2 = max_abs(refgrad_finite_difference(f, p, 1.0, 0.01).F - ref);
    const double ratio = e1 / e2;
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("one-sided differences are first order") {
    const GeneratingField f = field_shear();
    const Coordinates p({0, 0.2, 0.5, 0}, "cartesian");
    const Mat4 ref = refgrad_variational(f, kZero, p, 1.0).F;
    const double central = max_abs(refgrad_finite_difference(f, p, 1.0, 1e-3).F - ref);
    const double one_sided = max_abs(refgrad_finite_difference(f, p, 1.0, 1e-3, {}, true).F - ref);
    CHECK(one_sided > 10.0 * central);
}

TEST_CASE("shift application") {
    SECTION("identity maps the unit shift to itself") {
        RefGradient g;
        const ShiftVector h({0, 3, 4, 0});
        CHECK(max_abs(apply_to_shift(g, h) - Vec4{0, 0.6, 0.8, 0}) < 1e-15);
    }
    SECTION("diagonal stretch") {
        RefGradient g;
        g.F(1, 1) = 2.0;
        const ShiftVector e1({0, 1, 0, 0});
        CHECK(max_abs(apply_to_shift(g, e1) - Vec4{0, 2, 0, 0}) == 0.0);
    }
    SECTION("quarter-turn rotation of a shift") {
        const GeneratingField f = field_linear(rotation_generator());
        const RefGradient g = refgrad_variational(f, kZero, kUnitX, M_PI / 2.0);
        const ShiftVector e1({0, 1, 0, 0});
        CHECK(max_abs(apply_to_shift(g, e1) - Vec4{0, 0, 1, 0}) < 1e-8);
    }
}

TEST_CASE("failure modes") {
    SECTION("step below the floor") {
        try {
            refgrad_finite_difference(field_rotation(), kUnitX, 1.0, 1e-13);
            FAIL("expected StepTooSmall");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::StepTooSmall);
        }
    }
    SECTION("collapsing gradient is flagged as singular") {
        const GeneratingField f = field_linear(-31.0 * Mat4::identity());
        try {
            refgrad_variational(f, kZero, kUnitX, 1.0);
            FAIL("expected SingularGradient");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::SingularGradient);
        }
    }
    SECTION("series requires coverage of the span") {
        const GeneratingField f = field_rotation();
        FlowSolution sol = integrate_flow(f, kUnitX, 0.5);
        sol.lambda = 1.0;  // claim a longer span than was integrated
        try {
            refgrad_series(f, kZero, sol, {});
            FAIL("expected InsufficientCoverage");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::InsufficientCoverage);
        }
    }
}

TEST_CASE("negative spans invert the gradient") {
    const GeneratingField f = field_rotation();
    const RefGradient fwd = refgrad_variational(f, kZero, kUnitX, 0.6);
    const Coordinates q(integrate_flow(f, kUnitX, 0.6).endpoint(), "cartesian");
    const RefGradient back = refgrad_variational(f, kZero, q, -0.6);
    CHECK(max_abs(back.F * fwd.F - Mat4::identity()) < 1e-9);
}
