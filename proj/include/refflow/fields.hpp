#pragma once

// Generating vector fields: evaluation, covariant gradients, magnitudes,
// unit fields, and the built-in field library.

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "refflow/charts.hpp"
#include "refflow/error.hpp"
#include "refflow/linalg.hpp"

namespace refflow {

/// Vector field B^m(x) on a named chart. `partials`, when set, returns the
/// matrix P with P(m, n) = d B^m / d x^n.
struct GeneratingField {
    std::string chart = "cartesian";
    std::function<Vec4(const Vec4&)> eval;
    std::function<Mat4(const Vec4&)> partials;  // optional
    std::function<bool(const Vec4&)> in_domain = [](const Vec4&) { return true; };
    std::string name = "custom";

    Vec4 operator()(const Vec4& x) const { return eval(x); }
};

struct ShiftVector {
    Vec4 h{};

    ShiftVector() = default;
    explicit ShiftVector(Vec4 components) : h(components) {
        if (!all_finite(h)) raise(ErrorKind::NonFiniteInput, "shift components must be finite");
        if (magnitude() <= 0.0) raise(ErrorKind::DomainError, "shift vector must be nonzero");
    }

    double magnitude() const {
        return std::sqrt(h[0] * h[0] + h[1] * h[1] + h[2] * h[2] + h[3] * h[3]);
    }
    Vec4 unit() const { return (1.0 / magnitude()) * h; }
};

namespace detail {

inline double field_fd_step(double coord) { return 1e-6 * std::max(1.0, std::fabs(coord)); }

}  // namespace detail

/// d B^m / d x^n, analytic when the field carries partials, else central
/// differences with a coordinate-scaled step.
inline Mat4 field_partials(const GeneratingField& field, const Vec4& x) {
    if (field.partials) return field.partials(x);
    Mat4 p;
    for (int n = 0; n < 4; ++n) {
        const double h = detail::field_fd_step(x[static_cast<size_t>(n)]);
        Vec4 xp = x, xm = x;
        xp[static_cast<size_t>(n)] += h;
        xm[static_cast<size_t>(n)] -= h;
        const Vec4 d = (1.0 / (2.0 * h)) * (field.eval(xp) - field.eval(xm));
        for (int m = 0; m < 4; ++m) p(m, n) = d[static_cast<size_t>(m)];
    }
    return p;
}

/// J^m_n = d_n B^m + G^m_{nr} B^r.
inline Mat4 covariant_gradient(const GeneratingField& field, const ConnectionCoeffs& conn,
                               const Coordinates& x) {
    if (!all_finite(x.x)) raise(ErrorKind::NonFiniteInput, "non-finite coordinates");
    if (!field.in_domain(x.x)) raise(ErrorKind::DomainError, "point outside the field's domain");
    const Vec4 B = field.eval(x.x);
    if (!all_finite(B)) raise(ErrorKind::NonFiniteInput, "field evaluated to non-finite values");
    Mat4 J = field_partials(field, x.x);
    const Ten3 gamma = conn.gamma(x);
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) {
            double corr = 0.0;
            for (int r = 0; r < 4; ++r) corr += gamma(m, n, r) * B[static_cast<size_t>(r)];
            J(m, n) += corr;
        }
    return J;
}

inline double squared_magnitude(const GeneratingField& field, const MetricSpec& metric,
                                const Coordinates& x) {
    const Vec4 B = field.eval(x.x);
    const Mat4 g = metric.g(x);
    double s = 0.0;
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) s += g(m, n) * B[static_cast<size_t>(m)] * B[static_cast<size_t>(n)];
    return s;
}

inline double magnitude(const GeneratingField& field, const MetricSpec& metric,
                        const Coordinates& x) {
    const double b2 = squared_magnitude(field, metric, x);
    if (b2 <= 0.0)
        raise(ErrorKind::NullOrTimelikeField, "field has non-positive squared magnitude");
    return std::sqrt(b2);
}

/// b = B / |B|; analytic partials propagate through the quotient rule
/// d_n b^m = (d_n B^m)/|B| - B^m d_n|B| / |B|^2 with
/// d_n |B| = (d_n g_{ab} B^a B^b + 2 g_{ab} (d_n B^a) B^b) / (2|B|).
inline GeneratingField unit_field(const GeneratingField& field, const MetricSpec& metric) {
    GeneratingField u;
    u.chart = field.chart;
    u.in_domain = field.in_domain;
    u.name = "unit(" + field.name + ")";
    const std::string chart = field.chart;
    u.eval = [field, metric, chart](const Vec4& x) {
        const Coordinates c(x, chart);
        const double norm = magnitude(field, metric, c);
        if (norm < 1e-10) raise(ErrorKind::VanishingField, "field magnitude below 1e-10");
        return (1.0 / norm) * field.eval(x);
    };
    if (field.partials) {
        u.partials = [field, metric, chart](const Vec4& x) {
            const Coordinates c(x, chart);
            const Vec4 B = field.eval(x);
            const Mat4 dB = field.partials(x);
            const Mat4 g = metric.g(c);
            const std::array<Mat4, 4> dg = detail::metric_partials(metric, c);
            const double norm = magnitude(field, metric, c);
            if (norm < 1e-10) raise(ErrorKind::VanishingField, "field magnitude below 1e-10");
            Mat4 out;
            for (int n = 0; n < 4; ++n) {
                double dB2 = 0.0;
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b)
                        dB2 += dg[static_cast<size_t>(n)](a, b) * B[static_cast<size_t>(a)] *
                                   B[static_cast<size_t>(b)] +
                               2.0 * g(a, b) * dB(a, n) * B[static_cast<size_t>(b)];
                const double dnorm = dB2 / (2.0 * norm);
                for (int m = 0; m < 4; ++m)
                    out(m, n) = dB(m, n) / norm - B[static_cast<size_t>(m)] * dnorm / (norm * norm);
            }
            return out;
        };
    }
    return u;
}

// ---- built-in fields (flat Cartesian chart unless stated otherwise) ----

inline GeneratingField field_constant(const Vec4& c, std::string chart = "cartesian") {
    GeneratingField f;
    f.chart = std::move(chart);
    f.eval = [c](const Vec4&) { return c; };
    f.partials = [](const Vec4&) { return Mat4::zero(); };
    f.name = "constant";
    return f;
}

inline GeneratingField field_linear(const Mat4& A, std::string chart = "cartesian") {
    GeneratingField f;
    f.chart = std::move(chart);
    f.eval = [A](const Vec4& x) { return A * x; };
    f.partials = [A](const Vec4&) { return A; };
    f.name = "linear";
    return f;
}

/// Planar rotation B = (0, -y, x, 0).
inline GeneratingField field_rotation() {
    GeneratingField f;
    f.eval = [](const Vec4& x) { return Vec4{0.0, -x[2], x[1], 0.0}; };
    f.partials = [](const Vec4&) {
        Mat4 m;
        m(1, 2) = -1.0;
        m(2, 1) = 1.0;
        return m;
    };
    f.name = "rotation";
    return f;
}

/// Planar shear with a nonlinear profile: B = (0, k*y + q*y^3, 0, 0). The
/// cubic term gives the finite-difference gradient a genuine O(h^2) error.
inline GeneratingField field_shear(double k = 1.0, double q = 0.3) {
    GeneratingField f;
    f.eval = [k, q](const Vec4& x) {
        return Vec4{0.0, k * x[2] + q * x[2] * x[2] * x[2], 0.0, 0.0};
    };
    f.partials = [k, q](const Vec4& x) {
        Mat4 m;
        m(1, 2) = k + 3.0 * q * x[2] * x[2];
        return m;
    };
    f.name = "shear";
    return f;
}

/// Unit radially-outward planar field in Cartesian components:
/// B = (0, x/rho, y/rho, 0), rho = hypot(x, y). Undefined on the axis.
inline GeneratingField field_polar_radial() {
    GeneratingField f;
    f.eval = [](const Vec4& x) {
        const double rho = std::hypot(x[1], x[2]);
        return Vec4{0.0, x[1] / rho, x[2] / rho, 0.0};
    };
    f.partials = [](const Vec4& x) {
        const double rho = std::hypot(x[1], x[2]);
        const double r3 = rho * rho * rho;
        Mat4 m;
        m(1, 1) = x[2] * x[2] / r3;
        m(1, 2) = -x[1] * x[2] / r3;
        m(2, 1) = -x[1] * x[2] / r3;
        m(2, 2) = x[1] * x[1] / r3;
        return m;
    };
    f.in_domain = [](const Vec4& x) { return std::hypot(x[1], x[2]) > 1e-8; };
    f.name = "polar-radial";
    return f;
}

/// Azimuthal field with radius-dependent magnitude f(rho) = 1 + rho^2:
/// B = f(rho) * (-y, x)/rho on the plane (unit azimuthal direction).
inline GeneratingField field_scaled_rotation() {
    GeneratingField f;
    f.eval = [](const Vec4& x) {
        const double rho = std::hypot(x[1], x[2]);
        const double s = (1.0 + rho * rho) / rho;
        return Vec4{0.0, -x[2] * s, x[1] * s, 0.0};
    };
    f.in_domain = [](const Vec4& x) { return std::hypot(x[1], x[2]) > 1e-8; };
    f.name = "scaled-rotation";
    return f;
}

/// Constant-direction field with radius-dependent magnitude:
/// B = (0, 0, 0, 1 + rho^2), rho over the (x, y) plane.
inline GeneratingField field_scaled_axial() {
    GeneratingField f;
    f.eval = [](const Vec4& x) {
        const double r2 = x[1] * x[1] + x[2] * x[2];
        return Vec4{0.0, 0.0, 0.0, 1.0 + r2};
    };
    f.partials = [](const Vec4& x) {
        Mat4 m;
        m(3, 1) = 2.0 * x[1];
        m(3, 2) = 2.0 * x[2];
        return m;
    };
    f.name = "scaled-axial";
    return f;
}

/// One-component quadratic field B^1 = (x^1)^2.
inline GeneratingField field_quadratic() {
    GeneratingField f;
    f.eval = [](const Vec4& x) { return Vec4{0.0, x[1] * x[1], 0.0, 0.0}; };
    f.partials = [](const Vec4& x) {
        Mat4 m;
        m(1, 1) = 2.0 * x[1];
        return m;
    };
    f.name = "quadratic";
    return f;
}

/// Constant-3-velocity four-velocity on the Minkowski chart: gamma*(c, v).
inline GeneratingField builtin_four_velocity(const std::array<double, 3>& v, double c = 1.0) {
    const double v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    if (v2 >= c * c) raise(ErrorKind::SuperluminalVelocity, "|v| must be below c");
    const double gamma = 1.0 / std::sqrt(1.0 - v2 / (c * c));
    GeneratingField f;
    f.chart = "minkowski";
    const Vec4 u{gamma * c, gamma * v[0], gamma * v[1], gamma * v[2]};
    f.eval = [u](const Vec4&) { return u; };
    f.partials = [](const Vec4&) { return Mat4::zero(); };
    f.name = "four-velocity";
    return f;
}

/// Four-magnetic field on the Minkowski chart for a constant 3-velocity:
/// components gamma * (Bv.v/c, Bv - (v x Ev)/c^2). Ev and Bv are 3-vector
/// fields over the spatial chart components.
inline GeneratingField builtin_four_magnetic(
    std::function<std::array<double, 3>(const Vec4&)> E_vec,
    std::function<std::array<double, 3>(const Vec4&)> B_vec, const std::array<double, 3>& v,
    double c = 1.0) {
    const double v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    if (v2 >= c * c) raise(ErrorKind::SuperluminalVelocity, "|v| must be below c");
    const double gamma = 1.0 / std::sqrt(1.0 - v2 / (c * c));
    GeneratingField f;
    f.chart = "minkowski";
    f.eval = [E_vec, B_vec, v, c, gamma](const Vec4& x) {
        const std::array<double, 3> E = E_vec(x);
        const std::array<double, 3> B = B_vec(x);
        const std::array<double, 3> vxE{v[1] * E[2] - v[2] * E[1], v[2] * E[0] - v[0] * E[2],
                                        v[0] * E[1] - v[1] * E[0]};
        const double bdotv = B[0] * v[0] + B[1] * v[1] + B[2] * v[2];
        const double c2 = c * c;
        return Vec4{gamma * bdotv / c, gamma * (B[0] - vxE[0] / c2), gamma * (B[1] - vxE[1] / c2),
                    gamma * (B[2] - vxE[2] / c2)};
    };
    f.name = "four-magnetic";
    return f;
}

/// Four-magnetic field with uniform E and B 3-vectors.
inline GeneratingField builtin_four_magnetic(const std::array<double, 3>& E,
                                             const std::array<double, 3>& B,
                                             const std::array<double, 3>& v, double c = 1.0) {
    GeneratingField f = builtin_four_magnetic([E](const Vec4&) { return E; },
                                              [B](const Vec4&) { return B; }, v, c);
    f.partials = [](const Vec4&) { return Mat4::zero(); };
    return f;
}

}  // namespace refflow
