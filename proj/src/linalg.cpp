#include "vlasim/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "vlasim/errors.hpp"

namespace vlasim {

double Sym3::max_abs() const {
    double m = 0.0;
    for (double v : {a11, a12, a13, a22, a23, a33}) m = std::max(m, std::fabs(v));
    return m;
}

namespace {

// Characteristic polynomial p(x) = -x^3 + c2 x^2 + c1 x + c0 and derivative.
struct CharCubic {
    double c2, c1, c0;
    explicit CharCubic(const Sym3& s) {
        c2 = s.trace();
        double sum2 = (s.a11 * s.a22 - s.a12 * s.a12) + (s.a11 * s.a33 - s.a13 * s.a13) +
                      (s.a22 * s.a33 - s.a23 * s.a23);
        c1 = -sum2;
        c0 = s.det();
    }
    double value(double x) const { return ((-x + c2) * x + c1) * x + c0; }
    double deriv(double x) const { return (-3.0 * x + 2.0 * c2) * x + c1; }
};

}  // namespace

std::array<double, 3> sym3_eigenvalues(const Sym3& s) {
    std::array<double, 3> eig;
    double p1 = s.a12 * s.a12 + s.a13 * s.a13 + s.a23 * s.a23;
    if (p1 == 0.0) {
        eig = {s.a11, s.a22, s.a33};
        std::sort(eig.begin(), eig.end());
        return eig;
    }
    double q = s.trace() / 3.0;
    double d11 = s.a11 - q, d22 = s.a22 - q, d33 = s.a33 - q;
    double p2 = d11 * d11 + d22 * d22 + d33 * d33 + 2.0 * p1;
    double p = std::sqrt(p2 / 6.0);
    Sym3 b{d11 / p, s.a12 / p, s.a13 / p, d22 / p, s.a23 / p, d33 / p};
    double r = std::clamp(b.det() / 2.0, -1.0, 1.0);
    double phi = std::acos(r) / 3.0;
    double e0 = q + 2.0 * p * std::cos(phi);
    double e2 = q + 2.0 * p * std::cos(phi + 2.0 * 3.14159265358979323846 / 3.0);
    double e1 = 3.0 * q - e0 - e2;
    eig = {e2, e1, e0};

    CharCubic cp(s);
    for (double& x : eig) {
        for (int it = 0; it < 4; ++it) {
            double f = cp.value(x);
            double df = cp.deriv(x);
            if (df == 0.0) break;
            double step = f / df;
            x -= step;
            if (std::fabs(step) <= 1e-15 * (1.0 + std::fabs(x))) break;
        }
    }
    std::sort(eig.begin(), eig.end());
    return eig;
}

Mat3 Mat3::operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k) acc += m[i][k] * o.m[k][j];
            r.m[i][j] = acc;
        }
    return r;
}

Mat3 Mat3::operator+(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] + o.m[i][j];
    return r;
}

Mat3 Mat3::scaled(double s) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] * s;
    return r;
}

Mat3 drift_matrix(double beta_eff, double lambda, double alpha) {
    Mat3 r = Mat3::zero();
    r.m[0][1] = 1.0;
    r.m[1][0] = -beta_eff;
    r.m[1][2] = lambda;
    r.m[2][1] = -lambda;
    r.m[2][2] = -alpha;
    return r;
}

void gauss_solve(std::size_t n, double* A, double* b) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::fabs(A[col * n + col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            double v = std::fabs(A[r * n + col]);
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best == 0.0) throw SingularLyapunov("zero pivot in elimination");
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(A[piv * n + c], A[col * n + c]);
            std::swap(b[piv], b[col]);
        }
        double inv = 1.0 / A[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = A[r * n + col] * inv;
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= A[i * n + c] * b[c];
        b[i] = acc / A[i * n + i];
    }
}

Sym3 solve_lyapunov_3x3(const Mat3& M, const Sym3& D) {
    // Unknowns x = (s11, s12, s13, s22, s23, s33); equations are the upper
    // triangle of M S + S M^T + D = 0.
    auto sidx = [](int i, int j) {
        if (i > j) std::swap(i, j);
        if (i == 0) return j;          // s11 s12 s13
        if (i == 1) return 2 + j;      // s22 s23
        return 5;                      // s33
    };
    double A[36] = {0.0};
    double b[6] = {0.0};
    const double d[3][3] = {{D.a11, D.a12, D.a13}, {D.a12, D.a22, D.a23}, {D.a13, D.a23, D.a33}};
    int row = 0;
    for (int i = 0; i < 3; ++i) {
        for (int j = i; j < 3; ++j) {
            // sum_k M[i][k] S[k][j] + S[i][k] M[j][k] = -D[i][j]
            for (int k = 0; k < 3; ++k) {
                A[row * 6 + sidx(k, j)] += M.m[i][k];
                A[row * 6 + sidx(i, k)] += M.m[j][k];
            }
            b[row] = -d[i][j];
            ++row;
        }
    }
    gauss_solve(6, A, b);
    return Sym3{b[0], b[1], b[2], b[3], b[4], b[5]};
}

}  // namespace vlasim
