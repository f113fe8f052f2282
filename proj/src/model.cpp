#include "vlasim/model.hpp"

#include <cmath>

#include "vlasim/errors.hpp"
#include "vlasim/rng.hpp"

namespace vlasim {

double ForceSpec::eval_component(double x) const {
    switch (kind) {
        case ForceKind::zero: return 0.0;
        case ForceKind::linear: return c * x;
        case ForceKind::tanh_saturating: return c * std::tanh(x);
        case ForceKind::sine: return c * std::sin(x);
    }
    return 0.0;
}

void ForceSpec::eval_into(std::span<const double> q, std::span<double> out) const {
    switch (kind) {
        case ForceKind::zero:
            for (double& v : out) v = 0.0;
            return;
        case ForceKind::linear:
            for (std::size_t k = 0; k < q.size(); ++k) out[k] = c * q[k];
            return;
        case ForceKind::tanh_saturating:
            for (std::size_t k = 0; k < q.size(); ++k) out[k] = c * std::tanh(q[k]);
            return;
        case ForceKind::sine:
            for (std::size_t k = 0; k < q.size(); ++k) out[k] = c * std::sin(q[k]);
            return;
    }
}

std::vector<double> eval_force(const ForceSpec& spec, std::span<const double> q) {
    std::vector<double> out(q.size());
    spec.eval_into(q, out);
    return out;
}

double lipschitz_constant(const ForceSpec& spec) {
    switch (spec.kind) {
        case ForceKind::zero: return 0.0;
        case ForceKind::linear:
        case ForceKind::tanh_saturating:  // |c sech^2| <= |c|
        case ForceKind::sine:             // |c cos| <= |c|
            return std::fabs(spec.c);
    }
    return 0.0;
}

const char* force_kind_name(ForceKind kind) {
    switch (kind) {
        case ForceKind::zero: return "zero";
        case ForceKind::linear: return "linear";
        case ForceKind::tanh_saturating: return "tanh_saturating";
        case ForceKind::sine: return "sine";
    }
    return "zero";
}

ForceKind force_kind_from_name(const std::string& name) {
    if (name == "zero") return ForceKind::zero;
    if (name == "linear") return ForceKind::linear;
    if (name == "tanh_saturating") return ForceKind::tanh_saturating;
    if (name == "sine") return ForceKind::sine;
    throw ConfigError("unknown force kind '" + name + "'");
}

void ModelParams::validate() const {
    if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
    if (!(beta > 0.0)) throw ConfigError("beta must be > 0");
    if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0");
    if (dim < 1) throw ConfigError("dim must be >= 1");
    if (!force_b.is_odd()) throw ConfigError("interaction force B must be odd");
}

double ModelParams::eta() const {
    return lipschitz_constant(force_a) + lipschitz_constant(force_b);
}

bool State::finite() const {
    for (const auto* comp : {&q, &p, &z})
        for (double v : *comp)
            if (!std::isfinite(v)) return false;
    return true;
}

StateDerivative drift(const State& s, const ModelParams& params, std::span<const double> mf_term) {
    const int d = s.dim();
    if (d != params.dim || static_cast<int>(mf_term.size()) != d ||
        static_cast<int>(s.p.size()) != d || static_cast<int>(s.z.size()) != d)
        throw DimensionMismatch("drift: state/params/mean-field sizes disagree");
    StateDerivative out;
    out.dq.resize(d);
    out.dp.resize(d);
    out.dz.resize(d);
    std::vector<double> a(d);
    params.force_a.eval_into(s.q, a);
    for (int k = 0; k < d; ++k) {
        out.dq[k] = s.p[k];
        out.dp[k] = -params.beta * s.q[k] - a[k] - mf_term[k] + params.lambda * s.z[k];
        out.dz[k] = -params.lambda * s.p[k] - params.alpha * s.z[k];
    }
    return out;
}

namespace {

// Uniform sample in the d-ball of given radius: Gaussian direction scaled by
// radius * u^{1/d}.
std::vector<double> sample_in_ball(std::uint64_t seed, std::uint32_t index, int dim,
                                   double radius) {
    std::vector<double> v(dim);
    philox_gaussians(seed, noise_domain::contracts, index, 0, v);
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    double norm = std::sqrt(norm2);
    double u = philox_uniform(seed, noise_domain::contracts, index, 1);
    double scale = norm > 0.0 ? radius * std::pow(u, 1.0 / dim) / norm : 0.0;
    for (double& x : v) x *= scale;
    return v;
}

double norm2(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

}  // namespace

ContractReport check_force_contracts(const ForceSpec& spec, int samples, double radius,
                                     std::uint64_t seed, int dim) {
    if (samples < 1) throw ConfigError("check_force_contracts: samples must be >= 1");
    if (!(radius > 0.0)) throw ConfigError("check_force_contracts: radius must be > 0");
    const double lip = lipschitz_constant(spec);
    const double lip_tol = 1e-9;
    const double odd_tol = 1e-12;

    ContractReport report;
    report.samples_checked = samples;
    std::vector<double> fx(dim), fy(dim), fneg(dim), diff(dim);
    for (int s = 0; s < samples; ++s) {
        auto x = sample_in_ball(seed, 2 * static_cast<std::uint32_t>(s), dim, radius);
        auto y = sample_in_ball(seed, 2 * static_cast<std::uint32_t>(s) + 1, dim, radius);
        spec.eval_into(x, fx);
        spec.eval_into(y, fy);
        for (int k = 0; k < dim; ++k) diff[k] = fx[k] - fy[k];
        std::vector<double> xy(dim);
        for (int k = 0; k < dim; ++k) xy[k] = x[k] - y[k];
        double lhs = norm2(diff);
        double rhs = (1.0 + lip_tol) * lip * norm2(xy);
        if (lhs > rhs) report.violations.push_back({"lipschitz", x, y, lhs, rhs});

        if (spec.is_odd()) {
            std::vector<double> neg(dim);
            for (int k = 0; k < dim; ++k) neg[k] = -x[k];
            spec.eval_into(neg, fneg);
            for (int k = 0; k < dim; ++k) diff[k] = fneg[k] + fx[k];
            double odd_lhs = norm2(diff);
            double odd_rhs = odd_tol * (1.0 + norm2(fx));
            if (odd_lhs > odd_rhs) report.violations.push_back({"odd", x, {}, odd_lhs, odd_rhs});
        }
    }
    return report;
}

}  // namespace vlasim
