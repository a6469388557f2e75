#pragma once

// Numerical checks of the structural laws satisfied by the referential
// gradient: chart covariance, the group property in the flow parameter,
// the equivalence of the two field-line representations, the Eulerian
// field equations, nested-commutator exponential combination, and the
// first-order covariant Taylor remainder.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "refflow/charts.hpp"
#include "refflow/error.hpp"
#include "refflow/fields.hpp"
#include "refflow/flow.hpp"
#include "refflow/linalg.hpp"
#include "refflow/refgrad.hpp"

namespace refflow {

struct ResidualReport {
    std::string law;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::map<std::string, double> diagnostics;

    static ResidualReport make(std::string law, double residual, double tolerance) {
        ResidualReport r;
        r.law = std::move(law);
        r.residual = residual;
        r.tolerance = tolerance;
        r.pass = residual <= tolerance;
        return r;
    }
};

struct GridSpec {
    std::array<double, 4> lo{};
    std::array<double, 4> hi{};
    std::array<int, 4> count{1, 1, 1, 1};

    void validate() const {
        for (int a = 0; a < 4; ++a) {
            const auto ai = static_cast<size_t>(a);
            if (count[ai] < 1) raise(ErrorKind::ValidationError, "grid counts must be >= 1");
            if (count[ai] > 1 && !(hi[ai] > lo[ai]))
                raise(ErrorKind::ValidationError, "grid range must be increasing on sampled axes");
            if (!std::isfinite(lo[ai]) || !std::isfinite(hi[ai]))
                raise(ErrorKind::NonFiniteInput, "grid bounds must be finite");
        }
    }

    double spacing(int axis) const {
        const auto ai = static_cast<size_t>(axis);
        return count[ai] > 1 ? (hi[ai] - lo[ai]) / (count[ai] - 1) : 0.0;
    }
};

/// Chart covariance of the gradient: F in the target chart must equal the
/// tensor-transformed F of the source chart, F_I = L F_J Lbar, with both
/// sides computed variationally in their own charts. The whole source-chart
/// orbit must stay inside the transform's overlap domain.
inline ResidualReport check_covariance(const GeneratingField& field_I,
                                       const ConnectionCoeffs& conn_I,
                                       const GeneratingField& field_J,
                                       const ConnectionCoeffs& conn_J, const ChartTransform& t,
                                       const Coordinates& p_J, double lambda,
                                       const IntegratorConfig& cfg = {}, double tolerance = 1e-5) {
    if (p_J.chart != t.source_chart)
        raise(ErrorKind::DomainError, "reference point must live in the transform's source chart");

    const FlowSolution orbit_J = integrate_flow(field_J, p_J, lambda, cfg);

    for (const Vec4& xj : orbit_J.x)
        if (!t.in_overlap(xj))
            raise(ErrorKind::OutsideOverlap, "orbit left the chart overlap domain");

    // Both fields must represent the same abstract field: the pushforward of
    // B_J through the transform must reproduce B_I along the orbit.
    double push_err = 0.0;
    for (size_t i = 0; i < orbit_J.x.size(); i += std::max<size_t>(1, orbit_J.x.size() / 16)) {
        const Vec4& xj = orbit_J.x[i];
        const Vec4 xi = t.forward(xj);
        const Vec4 pushed = t.jacobian(xj) * field_J.eval(xj);
        push_err = std::max(push_err, max_abs(pushed - field_I.eval(xi)));
    }
    if (push_err > 1e-6)
        raise(ErrorKind::DomainError, "fields are not chart representations of the same field");

    const RefGradient F_J = refgrad_variational(field_J, conn_J, p_J, lambda, cfg);
    const Coordinates p_I = transform_point(t, p_J);
    const RefGradient F_I = refgrad_variational(field_I, conn_I, p_I, lambda, cfg);
    const Mat4 transformed = transform_mixed(t, F_J.F, p_J);

    ResidualReport r = ResidualReport::make("lemma1", max_abs(F_I.F - transformed), tolerance);
    r.diagnostics["pushforward_mismatch"] = push_err;
    return r;
}

/// Group property in the flow parameter: F(l1 + l2, p) = F(l2, q) F(l1, p)
/// with q the orbit point at l1.
inline ResidualReport check_group_property(const GeneratingField& field,
                                           const ConnectionCoeffs& conn, const Coordinates& p,
                                           double lambda1, double lambda2,
                                           const IntegratorConfig& cfg = {},
                                           double tolerance = 1e-7) {
    const RefGradient total = refgrad_variational(field, conn, p, lambda1 + lambda2, cfg);
    const RefGradient first = refgrad_variational(field, conn, p, lambda1, cfg);
    const Coordinates q(integrate_flow(field, p, lambda1, cfg).endpoint(), p.chart);
    const RefGradient second = refgrad_variational(field, conn, q, lambda2, cfg);
    ResidualReport r =
        ResidualReport::make("lemma2", max_abs(total.F - second.F * first.F), tolerance);
    r.diagnostics["lambda1"] = lambda1;
    r.diagnostics["lambda2"] = lambda2;
    return r;
}

namespace detail {

/// d_n (B^2) as a covector: d_n g_{ab} B^a B^b + 2 g_{ab} (d_n B^a) B^b.
inline Vec4 squared_magnitude_gradient(const GeneratingField& field, const MetricSpec& metric,
                                       const Coordinates& x) {
    const Vec4 B = field.eval(x.x);
    const Mat4 dB = field_partials(field, x.x);
    const Mat4 g = metric.g(x);
    const std::array<Mat4, 4> dg = metric_partials(metric, x);
    Vec4 out{};
    for (int n = 0; n < 4; ++n) {
        double s = 0.0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                s += dg[static_cast<size_t>(n)](a, b) * B[static_cast<size_t>(a)] *
                         B[static_cast<size_t>(b)] +
                     2.0 * g(a, b) * dB(a, n) * B[static_cast<size_t>(b)];
        out[static_cast<size_t>(n)] = s;
    }
    return out;
}

/// Rank-one stretch kernel v^m d_n(B^2) / (2 B^2) for a given vector channel v.
inline Mat4 stretch_kernel(const GeneratingField& field, const MetricSpec& metric,
                           const Coordinates& x, const Vec4& v) {
    const double b2 = squared_magnitude(field, metric, x);  // raises on B^2 <= 0
    const Vec4 dB2 = squared_magnitude_gradient(field, metric, x);
    Mat4 out;
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n)
            out(m, n) = v[static_cast<size_t>(m)] * dB2[static_cast<size_t>(n)] / (2.0 * b2);
    return out;
}

}  // namespace detail

/// Representation relation between the flow-parameter gradient F[B] and the
/// arc-length gradient F[b]:
///   F[B] is also the ordered exponential of the kernel grad(b) + b dB2/(2B^2)
///   integrated in arc length, and F[b] the ordered exponential of
///   grad(B) - B dB2/(2B^2) integrated in the flow parameter.
/// residual_1 and residual_2 are the two cross-representation mismatches;
/// commutator norms of the kernel parts are reported, and when both vanish
/// the factored (commuting) products are checked as well.
inline ResidualReport check_representation_relation(const GeneratingField& field,
                                                    const MetricSpec& metric,
                                                    const ConnectionCoeffs& conn,
                                                    const Coordinates& p, double lambda,
                                                    double s_total, const IntegratorConfig& cfg = {},
                                                    double tolerance = 1e-5) {
    const GeneratingField b = unit_field(field, metric);
    const std::string chart = p.chart;

    auto grad_B = [&](const Coordinates& x) { return covariant_gradient(field, conn, x); };
    auto grad_b = [&](const Coordinates& x) { return covariant_gradient(b, conn, x); };
    auto stretch_b = [&](const Coordinates& x) {
        return detail::stretch_kernel(field, metric, x, b.eval(x.x));
    };
    auto stretch_B = [&](const Coordinates& x) {
        return detail::stretch_kernel(field, metric, x, field.eval(x.x));
    };

    // Arc length of the lambda-parametrized orbit: l = integral of |B| over [0, lambda].
    const FlowSolution phi = integrate_flow(field, p, lambda, cfg);
    const size_t nseg = 400;
    double l = 0.0;
    {
        const double h = lambda / static_cast<double>(nseg);
        std::vector<double> f(nseg + 1);
        for (size_t k = 0; k <= nseg; ++k) {
            const Vec4 pos = phi.position(static_cast<double>(k) * h);
            f[k] = magnitude(field, metric, Coordinates(pos, chart));
        }
        for (size_t k = 0; k + 2 <= nseg; k += 2) l += h / 3.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
    }

    // F[B] two ways.
    const RefGradient F_B = refgrad_variational(field, conn, p, lambda, cfg);
    auto kernel_rep_B = [&](const Coordinates& x) { return grad_b(x) + stretch_b(x); };
    const RefGradient F_B_alt = propagate_kernel(b, kernel_rep_B, p, l, cfg, "representation");
    const double residual_1 = max_abs(F_B.F - F_B_alt.F);

    // F[b] two ways; the alternative runs in the flow parameter up to
    // lambda(s_total) recovered from the arc-length integration.
    const FlowSolution psi = reparametrize_arclength(field, metric, p, s_total, cfg);
    const double lambda_of_s = psi.lambda_of_s.back();
    const RefGradient F_b = propagate_kernel(b, grad_b, p, s_total, cfg, "variational");
    auto kernel_rep_b = [&](const Coordinates& x) { return grad_B(x) - stretch_B(x); };
    const RefGradient F_b_alt =
        propagate_kernel(field, kernel_rep_b, p, lambda_of_s, cfg, "representation");
    const double residual_2 = max_abs(F_b.F - F_b_alt.F);

    // Commutator diagnostics sampled along both orbits.
    double comm_b = 0.0, comm_B = 0.0;
    for (int k = 0; k <= 16; ++k) {
        const Coordinates xs(psi.position(s_total * k / 16.0), chart);
        comm_b = std::max(comm_b, max_abs(commutator(grad_b(xs), stretch_b(xs))));
        const Coordinates xl(phi.position(lambda * k / 16.0), chart);
        comm_B = std::max(comm_B, max_abs(commutator(grad_B(xl), stretch_B(xl))));
    }

    ResidualReport r = ResidualReport::make("lemma3", std::max(residual_1, residual_2), tolerance);
    r.diagnostics["residual_1"] = residual_1;
    r.diagnostics["residual_2"] = residual_2;
    r.diagnostics["commutator_unit_rep"] = comm_b;
    r.diagnostics["commutator_flow_rep"] = comm_B;
    r.diagnostics["arc_length"] = l;
    r.diagnostics["lambda_of_s"] = lambda_of_s;

    // With commuting kernel parts the ordered exponential factors into the
    // two single-kernel propagators, in either order.
    if (comm_b <= 1e-10 && comm_B <= 1e-10) {
        const RefGradient P1 = propagate_kernel(b, grad_b, p, l, cfg, "factor");
        const RefGradient P2 = propagate_kernel(b, stretch_b, p, l, cfg, "factor");
        const double fact = std::max(max_abs(F_B_alt.F - P1.F * P2.F),
                                     max_abs(F_B_alt.F - P2.F * P1.F));
        r.diagnostics["factored_residual"] = fact;
        if (fact > tolerance) {
            r.pass = false;
            r.residual = std::max(r.residual, fact);
        }
    }
    return r;
}

namespace detail {

/// Backward-crossing parameter: the t with x^axis(phi(-t, y)) = c0, found by
/// Newton iteration seeded at t0.
inline double transversal_crossing(const GeneratingField& field, const Vec4& y, int axis,
                                   double c0, double t0, const IntegratorConfig& cfg,
                                   const std::string& chart) {
    double t = t0;
    for (int it = 0; it < 50; ++it) {
        const FlowSolution sol = integrate_flow(field, Coordinates(y, chart), -t, cfg);
        const Vec4 z = sol.endpoint();
        const double g = z[static_cast<size_t>(axis)] - c0;
        const double dB = field.eval(z)[static_cast<size_t>(axis)];
        if (std::fabs(dB) < 1e-12)
            raise(ErrorKind::VanishingField, "transversal axis component vanished during crossing solve");
        if (std::fabs(g) < 1e-12) return t;
        t += g / dB;
    }
    raise(ErrorKind::MaxStepsExceeded, "crossing solve did not converge");
}

}  // namespace detail

/// Eulerian field equation residual. The gradient as a field over points,
/// H(y), is built by propagating the identity from a coordinate transversal:
/// each grid node is flowed backward to the hyperplane {x^a0 = c0} crossed by
/// the backward orbit of the grid centre, and H(y) is the variational
/// gradient from the crossing point. The residual is
///   R^m_n = B^a d_a H^m_n - H^a_n d_a B^m
/// by grid central differences; torsion-free connections drive it to zero at
/// second order in the spacing, torsionful connections are compared against
/// the torsion source T^m_{ar} H^a_n B^r.
inline ResidualReport eulerian_residual(const GeneratingField& field, const ConnectionCoeffs& conn,
                                        const GridSpec& grid, double lambda,
                                        const IntegratorConfig& cfg = {}, double tolerance = 1e-4,
                                        const std::string& chart = "cartesian") {
    grid.validate();

    // Grid centre and transversal selection.
    Vec4 centre;
    for (int a = 0; a < 4; ++a) {
        const auto ai = static_cast<size_t>(a);
        centre[ai] = grid.count[ai] > 1 ? 0.5 * (grid.lo[ai] + grid.hi[ai]) : grid.lo[ai];
    }
    const Vec4 Bc = field.eval(centre);
    int a0 = 0;
    for (int a = 1; a < 4; ++a)
        if (std::fabs(Bc[static_cast<size_t>(a)]) > std::fabs(Bc[static_cast<size_t>(a0)])) a0 = a;
    if (std::fabs(Bc[static_cast<size_t>(a0)]) < 1e-10)
        raise(ErrorKind::VanishingField, "field vanishes at the grid centre");
    const double c0 =
        integrate_flow(field, Coordinates(centre, chart), -lambda, cfg).endpoint()[static_cast<size_t>(a0)];

    const std::array<int, 4>& n = grid.count;
    auto node = [&](int i0, int i1, int i2, int i3) {
        Vec4 y;
        const std::array<int, 4> idx{i0, i1, i2, i3};
        for (int a = 0; a < 4; ++a) {
            const auto ai = static_cast<size_t>(a);
            y[ai] = grid.lo[ai] + grid.spacing(a) * idx[ai];
        }
        return y;
    };

    // H at every grid node.
    const size_t total = static_cast<size_t>(n[0]) * static_cast<size_t>(n[1]) *
                         static_cast<size_t>(n[2]) * static_cast<size_t>(n[3]);
    std::vector<Mat4> H(total);
    auto flat = [&](int i0, int i1, int i2, int i3) {
        return static_cast<size_t>(((i0 * n[1] + i1) * n[2] + i2) * n[3] + i3);
    };
    for (int i0 = 0; i0 < n[0]; ++i0)
        for (int i1 = 0; i1 < n[1]; ++i1)
            for (int i2 = 0; i2 < n[2]; ++i2)
                for (int i3 = 0; i3 < n[3]; ++i3) {
                    const Vec4 y = node(i0, i1, i2, i3);
                    const double tstar =
                        detail::transversal_crossing(field, y, a0, c0, lambda, cfg, chart);
                    const Vec4 z =
                        integrate_flow(field, Coordinates(y, chart), -tstar, cfg).endpoint();
                    H[flat(i0, i1, i2, i3)] =
                        refgrad_variational(field, conn, Coordinates(z, chart), tstar, cfg).F;
                }

    // Central differences at interior nodes; axes with a single plane carry
    // no derivative (their field components must not feed the advective term).
    double worst = 0.0;
    int interior_nodes = 0;
    for (int i0 = 0; i0 < n[0]; ++i0)
        for (int i1 = 0; i1 < n[1]; ++i1)
            for (int i2 = 0; i2 < n[2]; ++i2)
                for (int i3 = 0; i3 < n[3]; ++i3) {
                    const std::array<int, 4> idx{i0, i1, i2, i3};
                    bool interior = true;
                    for (int a = 0; a < 4; ++a) {
                        const auto ai = static_cast<size_t>(a);
                        if (n[ai] > 1 && (idx[ai] == 0 || idx[ai] == n[ai] - 1)) interior = false;
                    }
                    if (!interior) continue;
                    ++interior_nodes;

                    const Vec4 y = node(i0, i1, i2, i3);
                    const Vec4 B = field.eval(y);
                    const Mat4 dB = field_partials(field, y);
                    const Mat4 Hy = H[flat(i0, i1, i2, i3)];

                    std::array<Mat4, 4> dH{};  // d_a H
                    for (int a = 0; a < 4; ++a) {
                        const auto ai = static_cast<size_t>(a);
                        if (n[ai] < 3) {
                            if (std::fabs(B[ai]) > 1e-12)
                                raise(ErrorKind::ValidationError,
                                      "grid has no stencil along an axis the field advects");
                            continue;
                        }
                        std::array<int, 4> ip = idx, im = idx;
                        ++ip[ai];
                        --im[ai];
                        dH[ai] = (1.0 / (2.0 * grid.spacing(a))) *
                                 (H[flat(ip[0], ip[1], ip[2], ip[3])] -
                                  H[flat(im[0], im[1], im[2], im[3])]);
                    }

                    Mat4 R;
                    for (int m = 0; m < 4; ++m)
                        for (int nn = 0; nn < 4; ++nn) {
                            double adv = 0.0, src = 0.0;
                            for (int a = 0; a < 4; ++a) {
                                adv += B[static_cast<size_t>(a)] * dH[static_cast<size_t>(a)](m, nn);
                                src += Hy(a, nn) * dB(m, a);
                            }
                            R(m, nn) = adv - src;
                        }

                    const Ten3 T = conn.torsion(Coordinates(y, chart));
                    if (max_abs(T) > 1e-14) {
                        Mat4 S;
                        for (int m = 0; m < 4; ++m)
                            for (int nn = 0; nn < 4; ++nn) {
                                double s = 0.0;
                                for (int a = 0; a < 4; ++a)
                                    for (int rho = 0; rho < 4; ++rho)
                                        s += T(m, a, rho) * Hy(a, nn) * B[static_cast<size_t>(rho)];
                                S(m, nn) = s;
                            }
                        R = R - S;
                    }
                    worst = std::max(worst, max_abs(R));
                }

    ResidualReport r = ResidualReport::make("eulerian", worst, tolerance);
    r.diagnostics["interior_nodes"] = static_cast<double>(interior_nodes);
    r.diagnostics["transversal_axis"] = static_cast<double>(a0);
    return r;
}

/// Combined exponent of exp(X) exp(Y) = exp(Z) as nested commutators,
/// truncated at the requested polynomial degree (1..5).
inline Mat4 bch_combine(const Mat4& X, const Mat4& Y, int degree) {
    if (degree < 1 || degree > 5)
        raise(ErrorKind::DegreeOutOfRange, "supported combination degrees are 1..5");
    auto c = [](const Mat4& a, const Mat4& b) { return commutator(a, b); };

    Mat4 Z = X + Y;
    if (degree >= 2) Z = Z + (1.0 / 2.0) * c(X, Y);
    if (degree >= 3) Z = Z + (1.0 / 12.0) * (c(X, c(X, Y)) + c(c(X, Y), Y));
    if (degree >= 4) Z = Z + (1.0 / 24.0) * c(c(X, c(X, Y)), Y);
    if (degree >= 5) {
        Z = Z - (1.0 / 720.0) * (c(Y, c(Y, c(Y, c(Y, X)))) + c(X, c(X, c(X, c(X, Y)))));
        Z = Z + (1.0 / 360.0) * (c(X, c(Y, c(Y, c(Y, X)))) + c(Y, c(X, c(X, c(X, Y)))));
        Z = Z + (1.0 / 120.0) * (c(Y, c(X, c(Y, c(X, Y)))) + c(X, c(Y, c(X, c(Y, X)))));
    }
    return Z;
}

/// First-order covariant Taylor remainder R = xi(y+w) - xi(y) - grad_w xi(y).
inline Vec4 covariant_taylor_remainder(const GeneratingField& field, const ConnectionCoeffs& conn,
                                       const Coordinates& y, const ShiftVector& w) {
    Coordinates yw = y;
    yw.x = y.x + w.h;
    if (!field.in_domain(y.x) || !field.in_domain(yw.x))
        raise(ErrorKind::DomainError, "expansion segment leaves the field domain");
    const Mat4 J = covariant_gradient(field, conn, y);
    return field.eval(yw.x) - field.eval(y.x) - J * w.h;
}

/// Integral form of the same remainder: composite-Simpson quadrature of
/// w^n [ (d_n xi(y+sw) - d_n xi(y)) + G(y) (xi(y+sw) - xi(y)) ] over s in [0,1].
inline Vec4 covariant_taylor_remainder_integral(const GeneratingField& field,
                                                const ConnectionCoeffs& conn, const Coordinates& y,
                                                const ShiftVector& w, int segments = 64) {
    if (segments % 2 == 1) ++segments;
    const Mat4 dxi0 = field_partials(field, y.x);
    const Vec4 xi0 = field.eval(y.x);
    const Ten3 G = conn.gamma(y);

    auto integrand = [&](double s) {
        const Vec4 xs = y.x + s * w.h;
        const Mat4 dxi = field_partials(field, xs);
        const Vec4 xi = field.eval(xs);
        Vec4 out{};
        for (int m = 0; m < 4; ++m) {
            double v = 0.0;
            for (int nn = 0; nn < 4; ++nn) {
                double gamma_term = 0.0;
                for (int rho = 0; rho < 4; ++rho)
                    gamma_term += G(m, nn, rho) *
                                  (xi[static_cast<size_t>(rho)] - xi0[static_cast<size_t>(rho)]);
                v += w.h[static_cast<size_t>(nn)] * ((dxi(m, nn) - dxi0(m, nn)) + gamma_term);
            }
            out[static_cast<size_t>(m)] = v;
        }
        return out;
    };

    Vec4 acc{};
    const double h = 1.0 / segments;
    for (int k = 0; k + 2 <= segments; k += 2) {
        const Vec4 f0 = integrand(k * h), f1 = integrand((k + 1) * h), f2 = integrand((k + 2) * h);
        acc = acc + (h / 3.0) * (f0 + 4.0 * f1 + f2);
    }
    return acc;
}

}  // namespace refflow
