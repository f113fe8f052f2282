#include "vlasim/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vlasim/errors.hpp"

namespace vlasim {

double QuadraticForm::eval(std::span<const double> q, std::span<const double> p,
                           std::span<const double> z) const {
    if (q.size() != p.size() || q.size() != z.size())
        throw DimensionMismatch("quadratic form: q/p/z lengths disagree");
    double acc = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
        acc += a1 * q[k] * q[k] + a2 * p[k] * p[k] + a3 * z[k] * z[k] +
               2.0 * (a4 * q[k] * p[k] + a5 * q[k] * z[k] + p[k] * z[k]);
    }
    return acc;
}

std::pair<double, double> equivalence_constants(const QuadraticForm& form) {
    auto eig = sym3_eigenvalues(form.block());
    if (!(eig[0] > 0.0))
        throw NotPositiveDefinite("smallest block eigenvalue is " + std::to_string(eig[0]));
    return {eig[0], eig[2]};
}

const char* variant_name(LyapunovVariant v) {
    switch (v) {
        case LyapunovVariant::contraction: return "contraction";
        case LyapunovVariant::second_moment: return "second_moment";
        case LyapunovVariant::chaos: return "chaos";
    }
    return "contraction";
}

const char* solve_status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::ok: return "ok";
        case SolveStatus::infeasible_for_eta: return "infeasible_for_eta";
        case SolveStatus::invalid_a3_tilde: return "invalid_a3_tilde";
        case SolveStatus::not_positive_definite: return "not_positive_definite";
    }
    return "ok";
}

double CoefficientSolution::min_margin() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& mg : margins) m = std::min(m, mg.value);
    return m;
}

namespace {

constexpr double kGridLo = 1e-3;
constexpr double kGridHi = 1e6;
constexpr int kGridPoints = 200;

// Golden-section maximization of a unimodal objective on [lo, hi].
template <typename F>
double golden_max(F&& f, double lo, double hi, int iters = 80) {
    const double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    return f1 > f2 ? x1 : x2;
}

// 1-D search over a3_tilde: log grid then golden refinement between the
// neighbors of the best grid point. Objective returns -inf when invalid.
template <typename F>
double maximize_over_a3(F&& objective) {
    double best_x = kGridLo;
    double best_v = -std::numeric_limits<double>::infinity();
    const double log_lo = std::log(kGridLo), log_hi = std::log(kGridHi);
    std::vector<double> xs(kGridPoints);
    for (int i = 0; i < kGridPoints; ++i) {
        double t = static_cast<double>(i) / (kGridPoints - 1);
        xs[i] = std::exp(log_lo + t * (log_hi - log_lo));
        double v = objective(xs[i]);
        if (v > best_v) {
            best_v = v;
            best_x = xs[i];
        }
    }
    if (!std::isfinite(best_v)) return best_x;
    // Bracket by grid neighbors (clamped at the ends).
    auto it = std::lower_bound(xs.begin(), xs.end(), best_x);
    std::size_t idx = static_cast<std::size_t>(it - xs.begin());
    double lo = idx > 0 ? xs[idx - 1] : xs.front();
    double hi = idx + 1 < xs.size() ? xs[idx + 1] : xs.back();
    auto log_obj = [&](double u) { return objective(std::exp(u)); };
    double u = golden_max(log_obj, std::log(lo), std::log(hi));
    double x = std::exp(u);
    return objective(x) >= best_v ? x : best_x;
}

struct ContractionEval {
    Eta0Breakdown breakdown;
    QuadraticForm form;
};

ContractionEval eval_contraction(const ModelParams& prm, double a3t) {
    const double al = prm.alpha, be = prm.beta, la = prm.lambda;
    const double a4 = la / 2.0;
    const double a5 = (la * la / 2.0 - be) / al;
    const double a3 = 2.0 + a3t;
    const double a2 = a3 + al / la - a5 / la;
    const double a1 = la * a5 + be * a2;

    ContractionEval ev;
    ev.form = QuadraticForm{a1, a2, a3, a4, a5};
    auto& f = ev.breakdown.f;
    f[0] = a5 * (la - be / la) + be * (a3t + al / la + 2.0) - a5 * a5 - la * la / 4.0;
    f[1] = a3t + al / la - a5 / la;
    f[2] = a3t;
    f[3] = a3t + al / la + la + 3.0 - a5 / la;
    f[4] = 2.0 * al * (2.0 + a3t) - 2.0 * la;
    ev.breakdown.valid = f[0] > 0.0 && f[1] > 0.0 && f[2] > 0.0 && f[3] > 0.0 && f[4] > 0.0;
    if (ev.breakdown.valid)
        ev.breakdown.eta0 = std::min({la * be / f[3], la / (2.0 + f[1]), f[4]});
    return ev;
}

}  // namespace

Eta0Breakdown compute_eta0(const ModelParams& params, double a3_tilde) {
    params.validate();
    return eval_contraction(params, a3_tilde).breakdown;
}

CoefficientSolution solve_contraction(const ModelParams& params, double eta,
                                      std::optional<double> a3_tilde) {
    params.validate();
    if (eta < 0.0) throw ConfigError("solve_contraction: eta must be >= 0");

    double a3t;
    if (a3_tilde) {
        a3t = *a3_tilde;
    } else {
        a3t = maximize_over_a3([&](double x) {
            auto ev = eval_contraction(params, x);
            return ev.breakdown.valid ? ev.breakdown.eta0
                                      : -std::numeric_limits<double>::infinity();
        });
    }

    auto ev = eval_contraction(params, a3t);
    CoefficientSolution sol;
    sol.variant = LyapunovVariant::contraction;
    sol.form = ev.form;
    sol.a3_tilde = a3t;
    sol.eta = eta;
    sol.eta0 = ev.breakdown.eta0;
    if (!ev.breakdown.valid) {
        sol.status = SolveStatus::invalid_a3_tilde;
        return sol;
    }
    const auto& f = ev.breakdown.f;
    sol.margins = {{"q_decay", params.lambda * params.beta - f[3] * eta},
                   {"p_decay", params.lambda - (2.0 + f[1]) * eta},
                   {"z_decay", f[4] - eta}};
    if (eta >= sol.eta0) {
        sol.status = SolveStatus::infeasible_for_eta;
        return sol;
    }
    if (!sol.form.positive_definite()) {
        // f1..f3 > 0 certifies definiteness via the square decomposition;
        // reaching here means the closed forms were evaluated inconsistently.
        sol.status = SolveStatus::not_positive_definite;
        return sol;
    }
    sol.status = SolveStatus::ok;
    return sol;
}

namespace {

struct SecondMomentEval {
    bool valid = false;
    double eta0 = 0.0;
    QuadraticForm form;
    std::array<double, 3> margins_at(double eta) const {
        return {m1_const - m1_slope * eta, m2_const - m2_slope * eta, m3_const - eta};
    }
    double m1_const = 0, m1_slope = 0, m2_const = 0, m2_slope = 0, m3_const = 0;
};

SecondMomentEval eval_second_moment(const ModelParams& prm, double a3t, double a4) {
    const double al = prm.alpha, be = prm.beta, la = prm.lambda;
    SecondMomentEval ev;
    if (!(a4 > 0.0) || !(la - 2.0 * a4 > 0.0)) return ev;
    const double a5 = (la * a4 - be) / al;
    const double a3 = 2.0 + a3t;
    const double a2 = a3 + al / la - a5 / la;
    const double a1 = be * a2 + la * a5;
    ev.form = QuadraticForm{a1, a2, a3, a4, a5};
    if (!(a2 > 0.0) || !ev.form.positive_definite()) return ev;
    ev.m1_const = be * a4;
    ev.m1_slope = 2.0 * a4 + a2 + 1.0;
    ev.m2_const = la - 2.0 * a4;
    ev.m2_slope = a2;
    ev.m3_const = al * a3 - 2.0 * la;
    if (!(ev.m3_const > 0.0)) return ev;
    ev.valid = true;
    ev.eta0 = std::min({ev.m1_const / ev.m1_slope, ev.m2_const / ev.m2_slope, ev.m3_const});
    return ev;
}

}  // namespace

CoefficientSolution solve_second_moment(const ModelParams& params, double eta) {
    params.validate();
    if (eta < 0.0) throw ConfigError("solve_second_moment: eta must be >= 0");
    const double la = params.lambda;

    // a4 is not pinned by the equality set; search it jointly with a3_tilde.
    const int a4_points = 64;
    auto a4_of = [&](int j) { return 0.5 * la * (j + 1) / (a4_points + 1); };

    auto best_over_a4 = [&](double a3t, auto&& score) {
        double best = -std::numeric_limits<double>::infinity();
        double best_a4 = a4_of(a4_points / 2);
        for (int j = 0; j < a4_points; ++j) {
            double v = score(a3t, a4_of(j));
            if (v > best) {
                best = v;
                best_a4 = a4_of(j);
            }
        }
        if (std::isfinite(best)) {
            double refined = golden_max([&](double a4) { return score(a3t, a4); },
                                        std::max(1e-12, best_a4 - 0.5 * la / (a4_points + 1)),
                                        std::min(0.5 * la * (1.0 - 1e-12),
                                                 best_a4 + 0.5 * la / (a4_points + 1)));
            if (score(a3t, refined) > best) best_a4 = refined;
        }
        return best_a4;
    };

    auto eta0_score = [&](double a3t, double a4) {
        auto ev = eval_second_moment(params, a3t, a4);
        return ev.valid ? ev.eta0 : -std::numeric_limits<double>::infinity();
    };
    double a3t_star = maximize_over_a3(
        [&](double a3t) { return eta0_score(a3t, best_over_a4(a3t, eta0_score)); });
    double a4_star = best_over_a4(a3t_star, eta0_score);
    double eta0 = eval_second_moment(params, a3t_star, a4_star).eta0;

    // For the returned coefficients, maximize the worst inequality slack at
    // the requested eta.
    auto margin_score = [&](double a3t, double a4) {
        auto ev = eval_second_moment(params, a3t, a4);
        if (!ev.valid) return -std::numeric_limits<double>::infinity();
        auto m = ev.margins_at(eta);
        return std::min({m[0], m[1], m[2]});
    };
    double a3t_sol = maximize_over_a3(
        [&](double a3t) { return margin_score(a3t, best_over_a4(a3t, margin_score)); });
    double a4_sol = best_over_a4(a3t_sol, margin_score);
    auto ev = eval_second_moment(params, a3t_sol, a4_sol);

    CoefficientSolution sol;
    sol.variant = LyapunovVariant::second_moment;
    sol.form = ev.form;
    sol.a3_tilde = a3t_sol;
    sol.eta = eta;
    sol.eta0 = eta0;
    auto m = ev.margins_at(eta);
    sol.margins = {{"q_decay", m[0]}, {"p_decay", m[1]}, {"z_decay", m[2]}};
    if (!ev.valid || eta >= eta0 || sol.min_margin() <= 0.0) {
        sol.status = SolveStatus::infeasible_for_eta;
        return sol;
    }
    sol.status = SolveStatus::ok;
    return sol;
}

namespace {

struct ChaosEval {
    bool valid = false;
    double eta0 = 0.0;
    QuadraticForm form;
    double m1_const = 0, m1_slope = 0, m2_const = 0, m2_slope = 0, m3_const = 0;
    std::array<double, 3> margins_at(double eta) const {
        return {m1_const - m1_slope * eta, m2_const - m2_slope * eta, m3_const - eta};
    }
};

ChaosEval eval_chaos(const ModelParams& prm, double a3t) {
    const double al = prm.alpha, be = prm.beta, la = prm.lambda;
    ChaosEval ev;
    const double a4 = la / 4.0;
    const double a5 = (la * la / 4.0 - be) / al;
    const double a3 = 2.0 + a3t;
    const double a2 = a3 + al / la - a5 / la;
    const double a1 = la * a5 + be * a2;
    ev.form = QuadraticForm{a1, a2, a3, a4, a5};
    if (!(a2 > 0.0) || !ev.form.positive_definite()) return ev;
    // Inequalities as displayed for this variant: note the eta multiplier of
    // the q-term carries a2 + lambda + 1 and the z-term has a single alpha a3.
    ev.m1_const = la * be / 4.0;
    ev.m1_slope = a2 + la + 1.0;
    ev.m2_const = la / 2.0;
    ev.m2_slope = a2;
    ev.m3_const = al * a3 - 2.0 * la;
    if (!(ev.m3_const > 0.0)) return ev;
    ev.valid = true;
    ev.eta0 = std::min({ev.m1_const / ev.m1_slope, ev.m2_const / ev.m2_slope, ev.m3_const});
    return ev;
}

}  // namespace

CoefficientSolution solve_chaos(const ModelParams& params, double eta) {
    params.validate();
    if (eta < 0.0) throw ConfigError("solve_chaos: eta must be >= 0");

    double a3t = maximize_over_a3([&](double x) {
        auto ev = eval_chaos(params, x);
        return ev.valid ? ev.eta0 : -std::numeric_limits<double>::infinity();
    });
    auto ev = eval_chaos(params, a3t);

    CoefficientSolution sol;
    sol.variant = LyapunovVariant::chaos;
    sol.form = ev.form;
    sol.a3_tilde = a3t;
    sol.eta = eta;
    sol.eta0 = ev.eta0;
    auto m = ev.margins_at(eta);
    sol.margins = {{"q_decay", m[0]}, {"p_decay", m[1]}, {"z_decay", m[2]}};
    if (!ev.valid) {
        sol.status = SolveStatus::not_positive_definite;
        return sol;
    }
    if (eta >= ev.eta0) {
        sol.status = SolveStatus::infeasible_for_eta;
        return sol;
    }
    sol.status = SolveStatus::ok;
    return sol;
}

std::array<double, 3> equality_residuals(const CoefficientSolution& sol,
                                         const ModelParams& params) {
    const double al = params.alpha, be = params.beta, la = params.lambda;
    const auto& f = sol.form;
    auto rel = [](double residual, std::initializer_list<double> terms) {
        double scale = 1.0;
        for (double t : terms) scale = std::max(scale, std::fabs(t));
        return std::fabs(residual) / scale;
    };
    switch (sol.variant) {
        case LyapunovVariant::contraction:
        case LyapunovVariant::chaos:
            return {rel(2 * f.a1 - 2 * la * f.a5 - 2 * f.a2 * be, {2 * f.a1, 2 * la * f.a5, 2 * f.a2 * be}),
                    rel(2 * la * f.a4 - 2 * al * f.a5 - 2 * be, {2 * la * f.a4, 2 * al * f.a5, 2 * be}),
                    rel(2 * la * f.a2 - 2 * la * f.a3 + 2 * f.a5 - 2 * al,
                        {2 * la * f.a2, 2 * la * f.a3, 2 * f.a5, 2 * al})};
        case LyapunovVariant::second_moment:
            return {rel(f.a1 - be * f.a2 - la * f.a5, {f.a1, be * f.a2, la * f.a5}),
                    rel(-be + la * f.a4 - al * f.a5, {be, la * f.a4, al * f.a5}),
                    rel(f.a5 + la * f.a2 - la * f.a3 - al, {f.a5, la * f.a2, la * f.a3, al})};
    }
    return {0, 0, 0};
}

}  // namespace vlasim
