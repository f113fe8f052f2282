#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "vlasim/linalg.hpp"
#include "vlasim/model.hpp"

namespace vlasim {

// Quadratic form Q(q,p,z) = a1|q|^2 + a2|p|^2 + a3|z|^2 + 2 a4 q.p
// + 2 a5 q.z + 2 p.z, applied per coordinate k through the 3x3 block
// [[a1,a4,a5],[a4,a2,1],[a5,1,a3]].
struct QuadraticForm {
    double a1 = 1, a2 = 1, a3 = 1, a4 = 0, a5 = 0;

    Sym3 block() const { return Sym3{a1, a4, a5, a2, 1.0, a3}; }
    std::array<double, 3> minors() const { return block().minors(); }
    bool positive_definite() const { return block().positive_definite(); }

    double eval(std::span<const double> q, std::span<const double> p,
                std::span<const double> z) const;
    double eval_state(const State& s) const { return eval(s.q, s.p, s.z); }
};

inline double eval_form(const QuadraticForm& form, const State& s) { return form.eval_state(s); }

// Smallest/largest eigenvalue of the block, so that
// c_lo |s|^2 <= Q(s) <= c_hi |s|^2. Throws NotPositiveDefinite.
std::pair<double, double> equivalence_constants(const QuadraticForm& form);

enum class LyapunovVariant { contraction, second_moment, chaos };
const char* variant_name(LyapunovVariant v);

enum class SolveStatus { ok, infeasible_for_eta, invalid_a3_tilde, not_positive_definite };
const char* solve_status_name(SolveStatus s);

struct Margin {
    std::string name;
    double value = 0.0;
};

struct CoefficientSolution {
    SolveStatus status = SolveStatus::ok;
    LyapunovVariant variant = LyapunovVariant::contraction;
    QuadraticForm form;
    double a3_tilde = 0.0;          // a3 = 2 + a3_tilde
    double eta = 0.0;               // C_A + C_B supplied by the caller
    double eta0 = 0.0;              // admissibility threshold at the chosen coefficients
    std::vector<Margin> margins;    // inequality slacks at eta; all > 0 when ok

    bool ok() const { return status == SolveStatus::ok; }
    double min_margin() const;
};

// f1..f5 and the threshold eta0 = min{lambda beta / f4, lambda / (2 + f2), f5}
// at a given a3_tilde (contraction variant). valid == all f_i > 0.
struct Eta0Breakdown {
    bool valid = false;
    double eta0 = 0.0;
    std::array<double, 5> f{};
};
Eta0Breakdown compute_eta0(const ModelParams& params, double a3_tilde);

// Coefficient systems for the three dissipativity arguments. When a3_tilde is
// not supplied the solvers pick it by maximizing eta0 over a log-spaced grid
// with golden-section refinement, so the returned threshold is the least
// restrictive one the parameterization offers.
CoefficientSolution solve_contraction(const ModelParams& params, double eta,
                                      std::optional<double> a3_tilde = std::nullopt);
CoefficientSolution solve_second_moment(const ModelParams& params, double eta);
CoefficientSolution solve_chaos(const ModelParams& params, double eta);

// Residuals of the variant's three equality constraints, normalized by the
// magnitude of the terms entering each.
std::array<double, 3> equality_residuals(const CoefficientSolution& sol, const ModelParams& params);

}  // namespace vlasim
