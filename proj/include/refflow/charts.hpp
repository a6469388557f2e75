#pragma once

// Coordinate charts: points, metrics, connection coefficients, and
// chart-to-chart transforms of points and mixed tensors.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "refflow/error.hpp"
#include "refflow/linalg.hpp"

namespace refflow {

struct Coordinates {
    Vec4 x{};
    std::string chart = "cartesian";

    Coordinates() = default;
    Coordinates(Vec4 components, std::string chart_id) : x(components), chart(std::move(chart_id)) {
        if (!all_finite(x)) raise(ErrorKind::NonFiniteInput, "coordinate components must be finite");
    }
};

/// Position-dependent metric g_{mn}(x). The optional analytic derivative
/// returns dg[s] = d g_{mn} / d x^s.
struct MetricSpec {
    std::function<Mat4(const Coordinates&)> g;
    std::function<std::array<Mat4, 4>(const Coordinates&)> dg;  // optional
    std::string signature = "riemannian";
    std::string name = "custom";
};

namespace detail {

inline void require_finite(const Coordinates& x) {
    if (!all_finite(x.x)) raise(ErrorKind::NonFiniteInput, "non-finite coordinates");
}

inline double metric_fd_step(double coord) { return 1e-5 * std::max(1.0, std::fabs(coord)); }

inline std::array<Mat4, 4> metric_partials(const MetricSpec& metric, const Coordinates& x) {
    if (metric.dg) return metric.dg(x);
    std::array<Mat4, 4> out;
    for (int s = 0; s < 4; ++s) {
        const double h = metric_fd_step(x.x[static_cast<size_t>(s)]);
        Coordinates xp = x, xm = x;
        xp.x[static_cast<size_t>(s)] += h;
        xm.x[static_cast<size_t>(s)] -= h;
        out[static_cast<size_t>(s)] = (1.0 / (2.0 * h)) * (metric.g(xp) - metric.g(xm));
    }
    return out;
}

}  // namespace detail

/// Levi-Civita coefficients from a metric:
/// G^r_{mn} = (1/2) g^{rs} (d_n g_{sm} + d_m g_{sn} - d_s g_{mn}).
inline Ten3 christoffel_from_metric(const MetricSpec& metric, const Coordinates& x) {
    detail::require_finite(x);
    const Mat4 g = metric.g(x);
    if (!all_finite(g)) raise(ErrorKind::NonFiniteInput, "metric evaluated to non-finite values");
    if (std::fabs(det(g)) <= 1e-12)
        raise(ErrorKind::SingularMetric, "metric determinant at or below 1e-12");
    const Mat4 ginv = inverse(g);
    const std::array<Mat4, 4> dg = detail::metric_partials(metric, x);

    Ten3 gamma;
    for (int r = 0; r < 4; ++r)
        for (int m = 0; m < 4; ++m)
            for (int n = m; n < 4; ++n) {
                double sum = 0.0;
                for (int s = 0; s < 4; ++s)
                    sum += ginv(r, s) * (dg[static_cast<size_t>(n)](s, m) +
                                         dg[static_cast<size_t>(m)](s, n) -
                                         dg[static_cast<size_t>(s)](m, n));
                gamma(r, m, n) = 0.5 * sum;
                gamma(r, n, m) = gamma(r, m, n);
            }
    return gamma;
}

/// Connection coefficients G^r_{mn}(x); not necessarily symmetric.
struct ConnectionCoeffs {
    std::function<Ten3(const Coordinates&)> gamma;
    std::string name = "custom";

    static ConnectionCoeffs zero() {
        ConnectionCoeffs c;
        c.gamma = [](const Coordinates&) { return Ten3{}; };
        c.name = "zero";
        return c;
    }

    static ConnectionCoeffs levi_civita(MetricSpec metric) {
        ConnectionCoeffs c;
        c.gamma = [metric](const Coordinates& x) { return christoffel_from_metric(metric, x); };
        c.name = "levi-civita(" + metric.name + ")";
        return c;
    }

    Ten3 torsion(const Coordinates& x) const {
        const Ten3 g = gamma(x);
        Ten3 t;
        for (int m = 0; m < 4; ++m)
            for (int r = 0; r < 4; ++r)
                for (int a = 0; a < 4; ++a) t(m, r, a) = g(m, r, a) - g(m, a, r);
        return t;
    }
};

/// Smooth map between two overlapping charts. `jacobian` is L^m_a = dx_I^m / dx_J^a
/// evaluated at the source-chart point; `inverse_jacobian` its matrix inverse.
struct ChartTransform {
    std::string source_chart;
    std::string target_chart;
    std::function<Vec4(const Vec4&)> forward;
    std::function<Mat4(const Vec4&)> jacobian;
    std::function<Mat4(const Vec4&)> inverse_jacobian;
    std::function<bool(const Vec4&)> in_overlap = [](const Vec4&) { return true; };
};

inline Coordinates transform_point(const ChartTransform& t, const Coordinates& x_J) {
    detail::require_finite(x_J);
    if (x_J.chart != t.source_chart)
        raise(ErrorKind::DomainError,
              "point in chart '" + x_J.chart + "', transform expects '" + t.source_chart + "'");
    if (!t.in_overlap(x_J.x))
        raise(ErrorKind::OutsideOverlap, "point outside the transform's overlap domain");
    return Coordinates(t.forward(x_J.x), t.target_chart);
}

/// Pushes a mixed tensor through a chart transform: contravariant index by the
/// Jacobian, covariant index by the inverse Jacobian, both evaluated at x_J.
inline Mat4 transform_mixed(const ChartTransform& t, const Mat4& F, const Coordinates& x_J) {
    detail::require_finite(x_J);
    if (!t.in_overlap(x_J.x))
        raise(ErrorKind::OutsideOverlap, "point outside the transform's overlap domain");
    const Mat4 L = t.jacobian(x_J.x);
    const Mat4 Lbar = t.inverse_jacobian(x_J.x);
    return L * F * Lbar;
}

// ---- built-in metrics ----

inline MetricSpec metric_euclidean() {
    MetricSpec m;
    m.g = [](const Coordinates&) { return Mat4::identity(); };
    m.dg = [](const Coordinates&) { return std::array<Mat4, 4>{}; };
    m.signature = "riemannian";
    m.name = "euclidean";
    return m;
}

inline MetricSpec metric_minkowski() {
    MetricSpec m;
    m.g = [](const Coordinates&) {
        Mat4 g = Mat4::identity();
        g(0, 0) = -1.0;
        return g;
    };
    m.dg = [](const Coordinates&) { return std::array<Mat4, 4>{}; };
    m.signature = "lorentzian(-+++)";
    m.name = "minkowski";
    return m;
}

/// Chart (t, r, theta, z): g = diag(1, 1, r^2, 1).
inline MetricSpec metric_polar() {
    MetricSpec m;
    m.g = [](const Coordinates& x) {
        Mat4 g = Mat4::identity();
        g(2, 2) = x.x[1] * x.x[1];
        return g;
    };
    m.dg = [](const Coordinates& x) {
        std::array<Mat4, 4> d{};
        d[1](2, 2) = 2.0 * x.x[1];
        return d;
    };
    m.signature = "riemannian";
    m.name = "polar";
    return m;
}

/// Chart (t, r, theta, phi): g = diag(1, 1, r^2, r^2 sin^2(theta)).
inline MetricSpec metric_spherical() {
    MetricSpec m;
    m.g = [](const Coordinates& x) {
        const double r = x.x[1], th = x.x[2];
        Mat4 g = Mat4::identity();
        g(2, 2) = r * r;
        g(3, 3) = r * r * std::sin(th) * std::sin(th);
        return g;
    };
    m.signature = "riemannian";
    m.name = "spherical";
    return m;
}

// ---- built-in transforms ----

inline ChartTransform transform_identity(const std::string& chart = "cartesian") {
    ChartTransform t;
    t.source_chart = chart;
    t.target_chart = chart;
    t.forward = [](const Vec4& x) { return x; };
    t.jacobian = [](const Vec4&) { return Mat4::identity(); };
    t.inverse_jacobian = [](const Vec4&) { return Mat4::identity(); };
    return t;
}

/// Rigid rotation of the (x^1, x^2) plane by a fixed angle.
inline ChartTransform transform_rotation_xy(double angle, std::string source = "cartesian",
                                            std::string target = "cartesian-rotated") {
    const double c = std::cos(angle), s = std::sin(angle);
    ChartTransform t;
    t.source_chart = std::move(source);
    t.target_chart = std::move(target);
    t.forward = [c, s](const Vec4& x) {
        return Vec4{x[0], c * x[1] - s * x[2], s * x[1] + c * x[2], x[3]};
    };
    t.jacobian = [c, s](const Vec4&) {
        Mat4 m = Mat4::identity();
        m(1, 1) = c;
        m(1, 2) = -s;
        m(2, 1) = s;
        m(2, 2) = c;
        return m;
    };
    t.inverse_jacobian = [c, s](const Vec4&) {
        Mat4 m = Mat4::identity();
        m(1, 1) = c;
        m(1, 2) = s;
        m(2, 1) = -s;
        m(2, 2) = c;
        return m;
    };
    return t;
}

/// Polar (t, r, theta, z) -> Cartesian (t, x, y, z). The overlap domain keeps
/// r strictly positive and theta away from the +/- pi branch cut.
inline ChartTransform transform_polar_to_cartesian(double r_min = 1e-6,
                                                   double theta_margin = 1e-6) {
    ChartTransform t;
    t.source_chart = "polar";
    t.target_chart = "cartesian";
    t.forward = [](const Vec4& x) {
        const double r = x[1], th = x[2];
        return Vec4{x[0], r * std::cos(th), r * std::sin(th), x[3]};
    };
    t.jacobian = [](const Vec4& x) {
        const double r = x[1], th = x[2];
        Mat4 m = Mat4::identity();
        m(1, 1) = std::cos(th);
        m(1, 2) = -r * std::sin(th);
        m(2, 1) = std::sin(th);
        m(2, 2) = r * std::cos(th);
        return m;
    };
    t.inverse_jacobian = [](const Vec4& x) {
        const double r = x[1], th = x[2];
        Mat4 m = Mat4::identity();
        m(1, 1) = std::cos(th);
        m(1, 2) = std::sin(th);
        m(2, 1) = -std::sin(th) / r;
        m(2, 2) = std::cos(th) / r;
        return m;
    };
    t.in_overlap = [r_min, theta_margin](const Vec4& x) {
        return x[1] > r_min && std::fabs(x[2]) < M_PI - theta_margin;
    };
    return t;
}

/// Cartesian (t, x, y, z) -> polar (t, r, theta, z); inverse of the above.
inline ChartTransform transform_cartesian_to_polar(double r_min = 1e-6,
                                                   double theta_margin = 1e-6) {
    ChartTransform t;
    t.source_chart = "cartesian";
    t.target_chart = "polar";
    t.forward = [](const Vec4& x) {
        return Vec4{x[0], std::hypot(x[1], x[2]), std::atan2(x[2], x[1]), x[3]};
    };
    t.jacobian = [](const Vec4& x) {
        const double r2 = x[1] * x[1] + x[2] * x[2];
        const double r = std::sqrt(r2);
        Mat4 m = Mat4::identity();
        m(1, 1) = x[1] / r;
        m(1, 2) = x[2] / r;
        m(2, 1) = -x[2] / r2;
        m(2, 2) = x[1] / r2;
        return m;
    };
    t.inverse_jacobian = [](const Vec4& x) {
        const double r = std::hypot(x[1], x[2]);
        const double th = std::atan2(x[2], x[1]);
        Mat4 m = Mat4::identity();
        m(1, 1) = std::cos(th);
        m(1, 2) = -r * std::sin(th);
        m(2, 1) = std::sin(th);
        m(2, 2) = r * std::cos(th);
        return m;
    };
    t.in_overlap = [r_min, theta_margin](const Vec4& x) {
        const double r = std::hypot(x[1], x[2]);
        const double th = std::atan2(x[2], x[1]);
        return r > r_min && std::fabs(th) < M_PI - theta_margin;
    };
    return t;
}

/// Axis scaling x'^k = factor * x^k on a single axis.
inline ChartTransform transform_axis_scale(int axis, double factor,
                                           std::string source = "cartesian",
                                           std::string target = "cartesian-scaled") {
    ChartTransform t;
    t.source_chart = std::move(source);
    t.target_chart = std::move(target);
    t.forward = [axis, factor](const Vec4& x) {
        Vec4 y = x;
        y[static_cast<size_t>(axis)] *= factor;
        return y;
    };
    t.jacobian = [axis, factor](const Vec4&) {
        Mat4 m = Mat4::identity();
        m(axis, axis) = factor;
        return m;
    };
    t.inverse_jacobian = [axis, factor](const Vec4&) {
        Mat4 m = Mat4::identity();
        m(axis, axis) = 1.0 / factor;
        return m;
    };
    return t;
}

}  // namespace refflow
