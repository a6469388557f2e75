#pragma once

// Small fixed-size linear algebra for 4-dimensional charts: vectors,
// 4x4 matrices (mixed tensors), and rank-3 connection arrays.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace refflow {

using Vec4 = std::array<double, 4>;

inline Vec4 operator+(const Vec4& a, const Vec4& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}
inline Vec4 operator-(const Vec4& a, const Vec4& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}
inline Vec4 operator*(double s, const Vec4& a) {
    return {s * a[0], s * a[1], s * a[2], s * a[3]};
}

inline double max_abs(const Vec4& v) {
    double m = 0.0;
    for (double c : v) m = std::max(m, std::fabs(c));
    return m;
}

inline bool all_finite(const Vec4& v) {
    for (double c : v)
        if (!std::isfinite(c)) return false;
    return true;
}

/// 4x4 matrix, row-major. For mixed tensors F^mu_nu the row index is the
/// contravariant mu, the column index the covariant nu.
struct Mat4 {
    std::array<double, 16> a{};

    double& operator()(int i, int j) { return a[static_cast<size_t>(4 * i + j)]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(4 * i + j)]; }

    static Mat4 identity() {
        Mat4 m;
        m(0, 0) = m(1, 1) = m(2, 2) = m(3, 3) = 1.0;
        return m;
    }
    static Mat4 zero() { return Mat4{}; }
};

inline Mat4 operator+(const Mat4& x, const Mat4& y) {
    Mat4 r;
    for (size_t i = 0; i < 16; ++i) r.a[i] = x.a[i] + y.a[i];
    return r;
}
inline Mat4 operator-(const Mat4& x, const Mat4& y) {
    Mat4 r;
    for (size_t i = 0; i < 16; ++i) r.a[i] = x.a[i] - y.a[i];
    return r;
}
inline Mat4 operator*(double s, const Mat4& x) {
    Mat4 r;
    for (size_t i = 0; i < 16; ++i) r.a[i] = s * x.a[i];
    return r;
}
inline Mat4 operator*(const Mat4& x, const Mat4& y) {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) {
            const double xik = x(i, k);
            for (int j = 0; j < 4; ++j) r(i, j) += xik * y(k, j);
        }
    return r;
}
inline Vec4 operator*(const Mat4& x, const Vec4& v) {
    Vec4 r{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r[static_cast<size_t>(i)] += x(i, j) * v[static_cast<size_t>(j)];
    return r;
}

inline Mat4 commutator(const Mat4& x, const Mat4& y) { return x * y - y * x; }

inline double max_abs(const Mat4& m) {
    double r = 0.0;
    for (double c : m.a) r = std::max(r, std::fabs(c));
    return r;
}

inline bool all_finite(const Mat4& m) {
    for (double c : m.a)
        if (!std::isfinite(c)) return false;
    return true;
}

inline double frobenius_norm(const Mat4& m) {
    double s = 0.0;
    for (double c : m.a) s += c * c;
    return std::sqrt(s);
}

/// Spectral norm via power iteration on A^T A. Deterministic start vector;
/// 4x4 inputs converge well inside the fixed iteration count.
inline double operator_norm(const Mat4& m) {
    Vec4 v{0.5, 0.5, 0.5, 0.5};
    double norm = 0.0;
    for (int it = 0; it < 60; ++it) {
        Vec4 w = m * v;
        Vec4 u{};  // u = A^T w
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 4; ++i) u[static_cast<size_t>(j)] += m(i, j) * w[static_cast<size_t>(i)];
        double len = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2] + u[3] * u[3]);
        if (len < 1e-300) return 0.0;
        v = (1.0 / len) * u;
        norm = std::sqrt(len);
    }
    return norm;
}

/// Determinant by cofactor expansion along the first row.
inline double det(const Mat4& m) {
    auto det3 = [&](int r0, int r1, int r2, int c0, int c1, int c2) {
        return m(r0, c0) * (m(r1, c1) * m(r2, c2) - m(r1, c2) * m(r2, c1)) -
               m(r0, c1) * (m(r1, c0) * m(r2, c2) - m(r1, c2) * m(r2, c0)) +
               m(r0, c2) * (m(r1, c0) * m(r2, c1) - m(r1, c1) * m(r2, c0));
    };
    return m(0, 0) * det3(1, 2, 3, 1, 2, 3) - m(0, 1) * det3(1, 2, 3, 0, 2, 3) +
           m(0, 2) * det3(1, 2, 3, 0, 1, 3) - m(0, 3) * det3(1, 2, 3, 0, 1, 2);
}

/// Gauss-Jordan inverse with partial pivoting. Throws std::domain_error on
/// a numerically singular pivot; callers translate to domain errors.
inline Mat4 inverse(const Mat4& m) {
    Mat4 a = m;
    Mat4 inv = Mat4::identity();
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::fabs(a(r, col)) > std::fabs(a(piv, col))) piv = r;
        if (std::fabs(a(piv, col)) < 1e-300) throw std::domain_error("singular 4x4 matrix");
        if (piv != col)
            for (int j = 0; j < 4; ++j) {
                std::swap(a(piv, j), a(col, j));
                std::swap(inv(piv, j), inv(col, j));
            }
        const double d = 1.0 / a(col, col);
        for (int j = 0; j < 4; ++j) {
            a(col, j) *= d;
            inv(col, j) *= d;
        }
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            if (f == 0.0) continue;
            for (int j = 0; j < 4; ++j) {
                a(r, j) -= f * a(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

/// Rank-3 array G^r_{mn}; first index contravariant.
struct Ten3 {
    std::array<double, 64> a{};
    double& operator()(int r, int m, int n) { return a[static_cast<size_t>(16 * r + 4 * m + n)]; }
    double operator()(int r, int m, int n) const { return a[static_cast<size_t>(16 * r + 4 * m + n)]; }
};

inline double max_abs(const Ten3& t) {
    double r = 0.0;
    for (double c : t.a) r = std::max(r, std::fabs(c));
    return r;
}

}  // namespace refflow
