#include "vlasim/lyapunov.hpp"

#include <cmath>

#include "test_util.hpp"
#include "vlasim/errors.hpp"
#include "vlasim/rng.hpp"

using namespace vlasim;

static ModelParams unit_params() {
    ModelParams prm;  // alpha = beta = lambda = 1
    return prm;
}

static void contraction_fixture() {
    auto sol = solve_contraction(unit_params(), 0.0, 1.0);
    CHECK(sol.ok());
    CHECK_NEAR(sol.form.a4, 0.5, 1e-15);
    CHECK_NEAR(sol.form.a5, -0.5, 1e-15);
    CHECK_NEAR(sol.form.a3, 3.0, 1e-15);
    CHECK_NEAR(sol.form.a2, 4.5, 1e-15);
    CHECK_NEAR(sol.form.a1, 4.0, 1e-15);
    CHECK_NEAR(sol.eta0, 2.0 / 13.0, 1e-12);
    auto minors = sol.form.minors();
    CHECK_NEAR(minors[0], 4.0, 1e-12);
    CHECK_NEAR(minors[1], 17.75, 1e-12);
    CHECK_NEAR(minors[2], 47.625, 1e-12);
    CHECK(sol.form.positive_definite());
}

static void contraction_margins_and_infeasibility() {
    // eta = 0.1 at a3_tilde = 1: margins (0.35, 0.55, 3.9).
    auto sol = solve_contraction(unit_params(), 0.1, 1.0);
    CHECK(sol.ok());
    CHECK_NEAR(sol.margins[0].value, 0.35, 1e-12);
    CHECK_NEAR(sol.margins[1].value, 0.55, 1e-12);
    CHECK_NEAR(sol.margins[2].value, 3.9, 1e-12);

    // eta = 0.2 exceeds eta0(a3_tilde = 1) = 2/13.
    auto bad = solve_contraction(unit_params(), 0.2, 1.0);
    CHECK(bad.status == SolveStatus::infeasible_for_eta);
    CHECK_NEAR(bad.eta0, 2.0 / 13.0, 1e-12);
}

static void eta0_breakdown() {
    auto b = compute_eta0(unit_params(), 1.0);
    CHECK(b.valid);
    CHECK_NEAR(b.f[0], 3.5, 1e-14);
    CHECK_NEAR(b.f[1], 2.5, 1e-14);
    CHECK_NEAR(b.f[2], 1.0, 1e-14);
    CHECK_NEAR(b.f[3], 6.5, 1e-14);
    CHECK_NEAR(b.f[4], 4.0, 1e-14);
    CHECK_NEAR(b.eta0, 2.0 / 13.0, 1e-14);

    // Strict positivity boundary: f3(0) = 0 is invalid.
    auto b0 = compute_eta0(unit_params(), 0.0);
    CHECK(!b0.valid);

    // eta0 -> 0 as a3_tilde grows: motivates the maximization.
    auto bbig = compute_eta0(unit_params(), 1e6);
    CHECK(bbig.valid);
    CHECK(bbig.eta0 < 1e-3);

    // Positive slopes: each f_i strictly increases in a3_tilde.
    auto lo = compute_eta0(unit_params(), 0.5);
    auto hi = compute_eta0(unit_params(), 0.6);
    for (int i = 0; i < 5; ++i) CHECK(hi.f[i] > lo.f[i]);
}

static void contraction_auto_a3() {
    // The maximized threshold beats the a3_tilde = 1 fixture.
    auto sol = solve_contraction(unit_params(), 0.0);
    CHECK(sol.ok());
    CHECK(sol.eta0 > 2.0 / 13.0);
    // eta = 0.16 is infeasible at a3_tilde = 1 (2/13 ~ 0.1538) but feasible
    // at the maximizing a3_tilde (threshold ~ 0.1817).
    auto sol16 = solve_contraction(unit_params(), 0.16);
    CHECK(sol16.ok());
    CHECK(sol16.min_margin() > 0.0);
    auto sol16_fixed = solve_contraction(unit_params(), 0.16, 1.0);
    CHECK(sol16_fixed.status == SolveStatus::infeasible_for_eta);
}

static void eval_form_fixtures() {
    QuadraticForm f{4.0, 4.5, 3.0, 0.5, -0.5};
    State s(1);
    CHECK(eval_form(f, s) == 0.0);
    s.q = {1.0};
    CHECK_NEAR(eval_form(f, s), 4.0, 1e-15);
    s.p = {1.0};
    s.z = {1.0};
    CHECK_NEAR(eval_form(f, s), 13.5, 1e-15);
}

static void eval_form_quadraticity_and_bounds() {
    auto sol = solve_contraction(unit_params(), 0.0, 1.0);
    auto [c_lo, c_hi] = equivalence_constants(sol.form);
    CHECK(c_lo > 0.0);
    CHECK(c_lo <= 3.0 && 3.0 <= c_hi);
    const double tr3 = sol.form.block().trace() / 3.0;
    CHECK(c_lo <= tr3 && tr3 <= c_hi);

    std::vector<double> r(9);
    for (int trial = 0; trial < 1000; ++trial) {
        philox_gaussians(2024, 0, static_cast<uint32_t>(trial), 0, r);
        State s(3);
        State t(3);
        for (int k = 0; k < 3; ++k) {
            s.q[k] = r[k];
            s.p[k] = r[3 + k];
            s.z[k] = r[6 + k];
            t.q[k] = r[(k + 1) % 3] - 0.3;
            t.p[k] = r[3 + (k + 2) % 3] * 0.7;
            t.z[k] = r[6 + (k + 1) % 3] + 0.1;
        }
        double norm2 = 0.0;
        for (int k = 0; k < 3; ++k)
            norm2 += s.q[k] * s.q[k] + s.p[k] * s.p[k] + s.z[k] * s.z[k];
        const double qs = eval_form(sol.form, s);
        CHECK_MSG(qs >= c_lo * norm2 - 1e-10 * (1 + norm2), "lower equivalence bound");
        CHECK_MSG(qs <= c_hi * norm2 + 1e-10 * (1 + norm2), "upper equivalence bound");

        // parallelogram law
        State sum(3), diff(3);
        for (int k = 0; k < 3; ++k) {
            sum.q[k] = s.q[k] + t.q[k]; sum.p[k] = s.p[k] + t.p[k]; sum.z[k] = s.z[k] + t.z[k];
            diff.q[k] = s.q[k] - t.q[k]; diff.p[k] = s.p[k] - t.p[k]; diff.z[k] = s.z[k] - t.z[k];
        }
        const double lhs = eval_form(sol.form, sum) + eval_form(sol.form, diff);
        const double rhs = 2.0 * eval_form(sol.form, s) + 2.0 * eval_form(sol.form, t);
        CHECK_REL(lhs, rhs, 1e-12);
    }
}

static void equivalence_constants_cases() {
    // Singular cross-term block: eigenvalues {0, 1, 2}.
    QuadraticForm singular{1.0, 1.0, 1.0, 0.0, 0.0};
    CHECK_THROWS(equivalence_constants(singular), NotPositiveDefinite);

    // Scaling the block by t scales both equivalence constants by t
    // (eigenvalue homogeneity; t Q itself has a rescaled p-z cross term, so
    // the check runs on the block matrix directly).
    auto sol = solve_contraction(unit_params(), 0.0, 1.0);
    auto [lo, hi] = equivalence_constants(sol.form);
    Sym3 b = sol.form.block();
    const double t = 2.5;
    Sym3 tb{t * b.a11, t * b.a12, t * b.a13, t * b.a22, t * b.a23, t * b.a33};
    auto e = sym3_eigenvalues(tb);
    CHECK_REL(e[0], t * lo, 1e-12);
    CHECK_REL(e[2], t * hi, 1e-12);
}

static void equality_residuals_randomized() {
    // All three variants satisfy their displayed equality sets to 1e-10
    // relative for randomized positive parameters.
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<double> r(3);
        philox_gaussians(404, 0, static_cast<uint32_t>(trial), 0, r);
        ModelParams prm;
        prm.alpha = 0.1 + std::fabs(r[0]) * 3.0;
        prm.beta = 0.1 + std::fabs(r[1]) * 3.0;
        prm.lambda = 0.1 + std::fabs(r[2]) * 3.0;

        for (auto sol : {solve_contraction(prm, 0.0), solve_second_moment(prm, 0.0),
                         solve_chaos(prm, 0.0)}) {
            CHECK_MSG(sol.ok(), std::string("variant ") + variant_name(sol.variant) +
                                    " infeasible at eta=0");
            if (!sol.ok()) continue;
            auto res = equality_residuals(sol, prm);
            for (double v : res) CHECK_MSG(v <= 1e-10, "equality residual");
            CHECK(sol.min_margin() > 0.0);
            CHECK(sol.form.positive_definite());
            CHECK(sol.eta0 > 0.0);
        }
    }
}

static void second_moment_variant() {
    auto sol = solve_second_moment(unit_params(), 0.0);
    CHECK(sol.ok());
    CHECK(sol.min_margin() > 0.0);
    CHECK(sol.form.positive_definite());
    // a4 is a free search variable here; it must respect lambda - 2 a4 > 0.
    CHECK(sol.form.a4 > 0.0 && sol.form.a4 < 0.5);

    // Regression fixture for the searched solution (alpha = beta = lambda = 1).
    // Frozen from the first verified run of the grid + golden search.
    CHECK(sol.eta0 > 0.065 && sol.eta0 < 0.075);

    auto infeasible = solve_second_moment(unit_params(), sol.eta0 * 1.0001);
    CHECK(infeasible.status == SolveStatus::infeasible_for_eta);

    // Margins re-evaluated independently from the returned coefficients.
    auto sol2 = solve_second_moment(unit_params(), 0.03);
    CHECK(sol2.ok());
    const auto& f = sol2.form;
    const double eta = 0.03;
    CHECK_REL(sol2.margins[0].value, 1.0 * f.a4 - (2 * f.a4 + f.a2 + 1) * eta, 1e-12);
    CHECK_REL(sol2.margins[1].value, 1.0 - 2 * f.a4 - f.a2 * eta, 1e-12);
    CHECK_REL(sol2.margins[2].value, 1.0 * f.a3 - 2.0 - eta, 1e-12);
}

static void chaos_variant() {
    auto sol = solve_chaos(unit_params(), 0.0);
    CHECK(sol.ok());
    CHECK_NEAR(sol.form.a4, 0.25, 1e-15);
    CHECK_NEAR(sol.form.a5, -0.75, 1e-15);
    CHECK(sol.eta0 > 0.0);
    CHECK(sol.form.positive_definite());

    // Regression fixture: the maximized threshold for unit parameters.
    // The binding pair is lambda beta / 4 vs the q margin; the optimum sits
    // near a3_tilde = 0.0432.
    CHECK(sol.eta0 > 0.042 && sol.eta0 < 0.045);

    auto above = solve_chaos(unit_params(), sol.eta0 + 1e-6);
    CHECK(above.status == SolveStatus::infeasible_for_eta);

    // The spec's chaos acceptance point eta = 0.05 exceeds this variant's
    // threshold at unit parameters; the runner needs force there.
    auto at_half = solve_chaos(unit_params(), 0.05);
    CHECK(at_half.status == SolveStatus::infeasible_for_eta);
}

static void invalid_a3_tilde_paths() {
    CHECK_THROWS(solve_contraction(unit_params(), -0.1), ConfigError);
    auto sol = solve_contraction(unit_params(), 0.0, -5.0);
    CHECK(sol.status == SolveStatus::invalid_a3_tilde);
}

int main() {
    contraction_fixture();
    contraction_margins_and_infeasibility();
    eta0_breakdown();
    contraction_auto_a3();
    eval_form_fixtures();
    eval_form_quadraticity_and_bounds();
    equivalence_constants_cases();
    equality_residuals_randomized();
    second_moment_variant();
    chaos_variant();
    invalid_a3_tilde_paths();
    return testutil::summarize("test_lyapunov");
}
