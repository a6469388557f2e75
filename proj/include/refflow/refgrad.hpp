#pragma once

// The referential gradient F(lambda, p) — the flow map's deformation
// Jacobian — computed three independent ways: variational ODE, truncated
// path-ordered-exponential series with a rigorous tail bound, and the
// finite-difference definition.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "refflow/charts.hpp"
#include "refflow/error.hpp"
#include "refflow/fields.hpp"
#include "refflow/flow.hpp"
#include "refflow/linalg.hpp"

namespace refflow {

struct RefGradient {
    Mat4 F = Mat4::identity();
    double lambda = 0.0;
    Coordinates p;
    std::string method = "variational";
    std::optional<double> error_bound;
};

struct SeriesTruncation {
    int order = 12;              // N: highest retained iterated-kernel term
    double quadrature_step = 0;  // 0 => derived from the span
    std::optional<double> M;     // sup of the kernel operator norm along the path
    std::optional<double> m;     // sup of |F| along the path

    void validate() const {
        if (order < 0) raise(ErrorKind::ValidationError, "series order must be >= 0");
        if (quadrature_step < 0) raise(ErrorKind::ValidationError, "quadrature step must be > 0");
        if ((M && *M < 0) || (m && *m < 0))
            raise(ErrorKind::ValidationError, "bound constants must be non-negative");
    }
};

/// Integrate x' = B(x), F' = K(x) F jointly from F(0) = I. The kernel K is
/// any position-dependent matrix; passing the covariant gradient recovers
/// the referential gradient, other kernels serve the representation checks.
inline RefGradient propagate_kernel(const GeneratingField& field,
                                    const std::function<Mat4(const Coordinates&)>& kernel,
                                    const Coordinates& p, double lambda,
                                    const IntegratorConfig& cfg = {},
                                    const std::string& method_tag = "variational") {
    if (!all_finite(p.x)) raise(ErrorKind::NonFiniteInput, "non-finite reference point");
    if (!std::isfinite(lambda)) raise(ErrorKind::NonFiniteInput, "non-finite lambda");

    const std::string chart = p.chart;
    detail::Rhs rhs = [&field, &kernel, &chart](double, const std::vector<double>& y,
                                                std::vector<double>& dy) {
        const Vec4 pos{y[0], y[1], y[2], y[3]};
        const Vec4 b = field.eval(pos);
        const Mat4 K = kernel(Coordinates(pos, chart));
        dy.resize(20);
        for (int i = 0; i < 4; ++i) dy[static_cast<size_t>(i)] = b[static_cast<size_t>(i)];
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                double s = 0.0;
                for (int k = 0; k < 4; ++k) s += K(i, k) * y[static_cast<size_t>(4 + 4 * k + j)];
                dy[static_cast<size_t>(4 + 4 * i + j)] = s;
            }
    };

    std::vector<double> y0(20, 0.0);
    for (int i = 0; i < 4; ++i) y0[static_cast<size_t>(i)] = p.x[static_cast<size_t>(i)];
    for (int i = 0; i < 4; ++i) y0[static_cast<size_t>(4 + 5 * i)] = 1.0;

    std::vector<double> yfinal = y0;
    detail::OdeObserver obs;
    obs.on_node = [&yfinal](double, const std::vector<double>& y) { yfinal = y; };
    detail::integrate_ode(rhs, y0, lambda, cfg, obs);

    RefGradient out;
    out.lambda = lambda;
    out.p = p;
    out.method = method_tag;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) out.F(i, j) = yfinal[static_cast<size_t>(4 + 4 * i + j)];
    if (lambda == 0.0) out.F = Mat4::identity();
    if (std::fabs(det(out.F)) < 1e-12)
        raise(ErrorKind::SingularGradient, "gradient determinant fell below 1e-12");
    return out;
}

/// Variational computation: augment the flow with F' = J(x) F where
/// J^m_n = covariant gradient of the field.
inline RefGradient refgrad_variational(const GeneratingField& field, const ConnectionCoeffs& conn,
                                       const Coordinates& p, double lambda,
                                       const IntegratorConfig& cfg = {}) {
    auto kernel = [&field, &conn](const Coordinates& x) {
        return covariant_gradient(field, conn, x);
    };
    return propagate_kernel(field, kernel, p, lambda, cfg, "variational");
}

namespace detail {

/// Cumulative composite-Simpson integral of matrix samples f_0..f_{n} on a
/// uniform grid of spacing h: out[k] = integral from node 0 to node k.
/// Odd interior nodes use the standard three-point end correction.
inline std::vector<Mat4> cumulative_simpson(const std::vector<Mat4>& f, double h) {
    const size_t n = f.size();
    std::vector<Mat4> c(n);
    if (n == 0) return c;
    c[0] = Mat4::zero();
    if (n == 1) return c;
    if (n == 2) {
        c[1] = (h / 2.0) * (f[0] + f[1]);
        return c;
    }
    c[1] = (h / 12.0) * (5.0 * f[0] + 8.0 * f[1] - 1.0 * f[2]);
    for (size_t k = 2; k < n; ++k) {
        if (k % 2 == 0)
            c[k] = c[k - 2] + (h / 3.0) * (f[k - 2] + 4.0 * f[k - 1] + f[k]);
        else
            c[k] = c[k - 1] + (h / 12.0) * (-1.0 * f[k - 2] + 8.0 * f[k - 1] + 5.0 * f[k]);
    }
    return c;
}

inline double factorial(int n) {
    double r = 1.0;
    for (int k = 2; k <= n; ++k) r *= k;
    return r;
}

}  // namespace detail

/// Truncated iterated-kernel series S_N = I + sum_{n=0..N} of the n-th
/// iterated integral of the kernel J along the stored orbit. Later-parameter
/// kernels multiply on the left so that S_N converges to the variational
/// solution of F' = J F. The reported error bound is the analytic tail
/// m * e^{M|lambda|} * (M|lambda|)^{N+2} / (N+2)!.
inline RefGradient refgrad_series(const GeneratingField& field, const ConnectionCoeffs& conn,
                                  const FlowSolution& flowsol, const SeriesTruncation& trunc = {}) {
    trunc.validate();
    if (flowsol.sigma.empty() || flowsol.sigma.front() != 0.0)
        raise(ErrorKind::InsufficientCoverage, "flow solution must start at parameter 0");
    const double lambda = flowsol.lambda;
    if (std::fabs(flowsol.sigma.back()) < std::fabs(lambda) * (1.0 - 1e-12))
        raise(ErrorKind::InsufficientCoverage, "flow solution does not cover the requested span");

    // Uniform quadrature grid over [0, lambda] with an even interval count.
    const std::string chart = flowsol.p.chart;
    const double span = std::fabs(lambda);
    size_t nseg;
    if (lambda == 0.0) {
        RefGradient out;
        out.lambda = 0.0;
        out.p = flowsol.p;
        out.method = "series";
        out.error_bound = 0.0;
        return out;
    }
    if (trunc.quadrature_step > 0)
        nseg = static_cast<size_t>(std::ceil(span / trunc.quadrature_step));
    else
        nseg = std::max<size_t>(flowsol.sigma.size() - 1, 200);
    if (nseg % 2 == 1) ++nseg;
    nseg = std::max<size_t>(nseg, 8);
    const double h = lambda / static_cast<double>(nseg);

    std::vector<Mat4> J(nseg + 1);
    double sampled_M = 0.0;
    for (size_t k = 0; k <= nseg; ++k) {
        const double s = static_cast<double>(k) * h;
        const Vec4 pos = flowsol.position(s);
        J[k] = covariant_gradient(field, conn, Coordinates(pos, chart));
        sampled_M = std::max(sampled_M, operator_norm(J[k]));
    }

    Mat4 S = Mat4::identity();
    std::vector<Mat4> term = J;  // iterated kernel N^(n), starting at n = 0
    for (int n = 0; n <= trunc.order; ++n) {
        const std::vector<Mat4> integral = detail::cumulative_simpson(term, h);
        S = S + integral.back();
        if (n == trunc.order) break;
        for (size_t k = 0; k <= nseg; ++k) term[k] = J[k] * integral[k];
    }

    const double M = trunc.M ? *trunc.M : sampled_M * 1.05;
    if (!(M >= 0.0) || !std::isfinite(M))
        raise(ErrorKind::BoundUnavailable, "kernel bound M could not be determined");
    const double Ml = M * span;
    const double m = trunc.m ? *trunc.m : std::exp(Ml);
    const int N = trunc.order;
    const double bound = m * std::exp(Ml) * std::pow(Ml, N + 2) / detail::factorial(N + 2);

    RefGradient out;
    out.F = S;
    out.lambda = lambda;
    out.p = flowsol.p;
    out.method = "series";
    out.error_bound = bound;
    return out;
}

/// Finite-difference realization: column nu of F is the central difference of
/// flow endpoints from reference points shifted along the nu axis.
inline RefGradient refgrad_finite_difference(const GeneratingField& field, const Coordinates& p,
                                             double lambda, double h,
                                             const IntegratorConfig& cfg = {},
                                             bool one_sided = false) {
    if (h < 1e-12) raise(ErrorKind::StepTooSmall, "finite-difference step below 1e-12");
    if (!all_finite(p.x)) raise(ErrorKind::NonFiniteInput, "non-finite reference point");

    const Vec4 base = one_sided ? integrate_flow(field, p, lambda, cfg).endpoint() : Vec4{};

    RefGradient out;
    out.lambda = lambda;
    out.p = p;
    out.method = one_sided ? "finite-difference(one-sided)" : "finite-difference";
    for (int nu = 0; nu < 4; ++nu) {
        Coordinates pp = p, pm = p;
        pp.x[static_cast<size_t>(nu)] += h;
        const Vec4 xp = integrate_flow(field, pp, lambda, cfg).endpoint();
        Vec4 col;
        if (one_sided) {
            col = (1.0 / h) * (xp - base);
        } else {
            pm.x[static_cast<size_t>(nu)] -= h;
            const Vec4 xm = integrate_flow(field, pm, lambda, cfg).endpoint();
            col = (1.0 / (2.0 * h)) * (xp - xm);
        }
        for (int mu = 0; mu < 4; ++mu) out.F(mu, nu) = col[static_cast<size_t>(mu)];
    }
    if (lambda == 0.0) out.F = Mat4::identity();
    if (std::fabs(det(out.F)) < 1e-12)
        raise(ErrorKind::SingularGradient, "gradient determinant fell below 1e-12");
    return out;
}

/// Deformed image of a unit reference shift: F * h_unit.
inline Vec4 apply_to_shift(const RefGradient& F, const ShiftVector& hdir) {
    return F.F * hdir.unit();
}

}  // namespace refflow
