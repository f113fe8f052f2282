#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace vlasim {

// Builtin force families. All are applied componentwise R^d -> R^d, all are
// odd, and all have exact analytic Lipschitz constants, which keeps the
// admissibility threshold computations sharp.
enum class ForceKind { zero, linear, tanh_saturating, sine };

struct ForceSpec {
    ForceKind kind = ForceKind::zero;
    double c = 0.0;

    static ForceSpec zero() { return {ForceKind::zero, 0.0}; }
    static ForceSpec linear(double c) { return {ForceKind::linear, c}; }
    static ForceSpec tanh_saturating(double c) { return {ForceKind::tanh_saturating, c}; }
    static ForceSpec sine(double c) { return {ForceKind::sine, c}; }

    bool is_odd() const { return true; }  // every builtin family is odd
    bool is_zero() const { return kind == ForceKind::zero || c == 0.0; }
    bool is_linear() const { return kind == ForceKind::linear || kind == ForceKind::zero; }
    // Slope of the linear kinds (0 for `zero`); only valid when is_linear().
    double linear_slope() const { return kind == ForceKind::linear ? c : 0.0; }

    double eval_component(double x) const;
    void eval_into(std::span<const double> q, std::span<double> out) const;
};

std::vector<double> eval_force(const ForceSpec& spec, std::span<const double> q);
double lipschitz_constant(const ForceSpec& spec);

const char* force_kind_name(ForceKind kind);
ForceKind force_kind_from_name(const std::string& name);  // throws ConfigError

struct ModelParams {
    double alpha = 1.0;   // friction on z
    double beta = 1.0;    // linear confinement strength
    double lambda = 1.0;  // p-z coupling
    int dim = 1;
    ForceSpec force_a;    // confinement force A
    ForceSpec force_b;    // interaction force B; must be odd

    void validate() const;             // throws ConfigError on bad values
    double eta() const;                // C_A + C_B
};

// One particle's coordinates (q, p, z), each in R^d.
struct State {
    std::vector<double> q, p, z;

    State() = default;
    explicit State(int d) : q(d, 0.0), p(d, 0.0), z(d, 0.0) {}
    int dim() const { return static_cast<int>(q.size()); }
    bool finite() const;
};

struct StateDerivative {
    std::vector<double> dq, dp, dz;
};

// Drift part of the dynamic: (dq, dp, dz) = (p, -beta q - A(q) - mf + lambda z,
// -lambda p - alpha z). The mean-field term comes in pre-evaluated; noise is
// not included here.
StateDerivative drift(const State& s, const ModelParams& params, std::span<const double> mf_term);

struct ContractViolation {
    std::string check;          // "lipschitz" or "odd"
    std::vector<double> x, y;   // witness points (y empty for odd checks)
    double lhs = 0.0, rhs = 0.0;
};

struct ContractReport {
    int samples_checked = 0;
    std::vector<ContractViolation> violations;
    bool ok() const { return violations.empty(); }
};

// Sampled verification of the declared Lipschitz constant and oddness on
// random pairs in the ball of the given radius. Reports violations with
// witness points instead of throwing.
ContractReport check_force_contracts(const ForceSpec& spec, int samples, double radius,
                                     std::uint64_t seed, int dim = 3);

}  // namespace vlasim
