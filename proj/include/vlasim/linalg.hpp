#pragma once

#include <array>
#include <cstddef>

namespace vlasim {

using Vec3 = std::array<double, 3>;

// Symmetric 3x3 matrix, upper-triangle storage.
struct Sym3 {
    double a11 = 0, a12 = 0, a13 = 0, a22 = 0, a23 = 0, a33 = 0;

    double quad(double x, double y, double z) const {
        return a11 * x * x + a22 * y * y + a33 * z * z +
               2.0 * (a12 * x * y + a13 * x * z + a23 * y * z);
    }
    Vec3 apply(const Vec3& v) const {
        return {a11 * v[0] + a12 * v[1] + a13 * v[2],
                a12 * v[0] + a22 * v[1] + a23 * v[2],
                a13 * v[0] + a23 * v[1] + a33 * v[2]};
    }
    double trace() const { return a11 + a22 + a33; }
    double det() const {
        return a11 * (a22 * a33 - a23 * a23) - a12 * (a12 * a33 - a23 * a13) +
               a13 * (a12 * a23 - a22 * a13);
    }
    // Leading principal minors (Sylvester test).
    std::array<double, 3> minors() const {
        return {a11, a11 * a22 - a12 * a12, det()};
    }
    bool positive_definite() const {
        auto m = minors();
        return m[0] > 0.0 && m[1] > 0.0 && m[2] > 0.0;
    }
    double max_abs() const;
};

// Eigenvalues of a symmetric 3x3 matrix, ascending. Analytic trigonometric
// solution of the characteristic cubic followed by a Newton polish; the
// polished residual |p(lambda)| is at the rounding floor of the cubic.
std::array<double, 3> sym3_eigenvalues(const Sym3& s);

// General (not necessarily symmetric) 3x3 matrix, row-major.
struct Mat3 {
    std::array<std::array<double, 3>, 3> m{};

    static Mat3 zero() { return {}; }
    static Mat3 identity() {
        Mat3 r;
        r.m[0][0] = r.m[1][1] = r.m[2][2] = 1.0;
        return r;
    }
    Vec3 apply(const Vec3& v) const {
        return {m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
                m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
                m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2]};
    }
    Mat3 operator*(const Mat3& o) const;
    Mat3 operator+(const Mat3& o) const;
    Mat3 scaled(double s) const;
};

// Drift matrix of the per-coordinate linear system
//   dq = p dt, dp = (-beta_eff q + lambda z) dt, dz = (-lambda p - alpha z) dt.
Mat3 drift_matrix(double beta_eff, double lambda, double alpha);

// Dense Gaussian elimination with partial pivoting; solves A x = b in place.
// A is n x n row-major. Throws SingularLyapunov on a vanishing pivot.
void gauss_solve(std::size_t n, double* A, double* b);

// Solves the continuous Lyapunov equation M S + S M^T + D = 0 for symmetric S
// by direct elimination on the 6 independent entries.
Sym3 solve_lyapunov_3x3(const Mat3& M, const Sym3& D);

}  // namespace vlasim
