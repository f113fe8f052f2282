#include "vlasim/linalg.hpp"

#include <cmath>

#include "oracles.hpp"
#include "test_util.hpp"
#include "vlasim/errors.hpp"
#include "vlasim/rng.hpp"

using namespace vlasim;

static double char_poly(const Sym3& s, double x) {
    double c2 = s.trace();
    double c1 = -((s.a11 * s.a22 - s.a12 * s.a12) + (s.a11 * s.a33 - s.a13 * s.a13) +
                  (s.a22 * s.a33 - s.a23 * s.a23));
    return ((-x + c2) * x + c1) * x + s.det();
}

static void eigenvalue_fixtures() {
    // Diagonal matrix: eigenvalues are the entries.
    Sym3 d{3, 0, 0, 1, 0, 2};
    auto e = sym3_eigenvalues(d);
    CHECK_NEAR(e[0], 1.0, 1e-14);
    CHECK_NEAR(e[1], 2.0, 1e-14);
    CHECK_NEAR(e[2], 3.0, 1e-14);

    // [[1,0,0],[0,1,1],[0,1,1]] has eigenvalues {0, 1, 2}.
    Sym3 s{1, 0, 0, 1, 1, 1};
    e = sym3_eigenvalues(s);
    CHECK_NEAR(e[0], 0.0, 1e-12);
    CHECK_NEAR(e[1], 1.0, 1e-12);
    CHECK_NEAR(e[2], 2.0, 1e-12);
    CHECK(!s.positive_definite());
}

static void eigenvalue_residuals_random() {
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> r(6);
        philox_gaussians(555, 0, static_cast<uint32_t>(trial), 0, r);
        Sym3 s{r[0] * 3, r[1], r[2], r[3] * 3, r[4], r[5] * 3};
        auto e = sym3_eigenvalues(s);
        CHECK(e[0] <= e[1] && e[1] <= e[2]);
        const double scale = std::max(1.0, s.max_abs());
        for (double x : e)
            CHECK_MSG(std::fabs(char_poly(s, x)) <= 1e-10 * scale * scale * scale,
                      "characteristic residual at eigenvalue");
        // trace and determinant identities
        CHECK_REL(e[0] + e[1] + e[2], s.trace(), 1e-10);
        CHECK_REL(e[0] * e[1] * e[2], s.det(), 1e-8);
    }
}

static void gauss_solver() {
    double A[9] = {2, 1, -1, -3, -1, 2, -2, 1, 2};
    double b[3] = {8, -11, -3};
    gauss_solve(3, A, b);
    CHECK_NEAR(b[0], 2.0, 1e-12);
    CHECK_NEAR(b[1], 3.0, 1e-12);
    CHECK_NEAR(b[2], -1.0, 1e-12);

    double S[4] = {1, 2, 2, 4};  // singular
    double c[2] = {1, 2};
    CHECK_THROWS(gauss_solve(2, S, c), SingularLyapunov);
}

static void lyapunov_equation() {
    // Residual check over random stable-ish parameter draws.
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> r(3);
        philox_gaussians(777, 0, static_cast<uint32_t>(trial), 0, r);
        const double alpha = 0.1 + std::fabs(r[0]) * 5;
        const double beta = 0.1 + std::fabs(r[1]) * 5;
        const double lambda = 0.1 + std::fabs(r[2]) * 5;
        Mat3 M = drift_matrix(beta, lambda, alpha);
        Sym3 D{};
        D.a33 = 2.0;
        Sym3 S = solve_lyapunov_3x3(M, D);

        // residual of M S + S M^T + D, max entry
        double sm[3][3] = {{S.a11, S.a12, S.a13}, {S.a12, S.a22, S.a23}, {S.a13, S.a23, S.a33}};
        double dm[3][3] = {{D.a11, D.a12, D.a13}, {D.a12, D.a22, D.a23}, {D.a13, D.a23, D.a33}};
        double worst = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double acc = dm[i][j];
                for (int k = 0; k < 3; ++k) acc += M.m[i][k] * sm[k][j] + sm[i][k] * M.m[j][k];
                worst = std::max(worst, std::fabs(acc));
            }
        CHECK_MSG(worst <= 1e-12 * std::max(1.0, S.max_abs()), "Lyapunov residual");
    }

    // Homogeneity: zero noise gives the zero solution.
    Mat3 M = drift_matrix(1.0, 1.0, 1.0);
    Sym3 S0 = solve_lyapunov_3x3(M, Sym3{});
    CHECK(S0.max_abs() <= 1e-14);
}

static void matrix_exponential_oracle_sanity() {
    // d/dt e^{Mt} = M e^{Mt}: finite-difference check of the test oracle.
    Mat3 M = drift_matrix(1.0, 1.0, 1.0);
    const double t = 0.7, h = 1e-6;
    Mat3 e1 = oracles::expm(M, t);
    Mat3 e2 = oracles::expm(M, t + h);
    Mat3 lhs = (e2 + e1.scaled(-1.0)).scaled(1.0 / h);
    Mat3 rhs = M * e1;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK_NEAR(lhs.m[i][j], rhs.m[i][j], 1e-4);

    // semigroup property
    Mat3 half = oracles::expm(M, t / 2);
    Mat3 prod = half * half;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK_NEAR(prod.m[i][j], e1.m[i][j], 1e-12);
}

int main() {
    eigenvalue_fixtures();
    eigenvalue_residuals_random();
    gauss_solver();
    lyapunov_equation();
    matrix_exponential_oracle_sanity();
    return testutil::summarize("test_linalg");
}
