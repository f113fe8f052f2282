#include "vlasim/meanfield.hpp"

#include <algorithm>
#include <cmath>

#include "vlasim/errors.hpp"
#include "vlasim/parallel.hpp"

namespace vlasim {

void MeanTrajectory::value_at(double t, std::span<double> out) const {
    const std::size_t width = 3 * static_cast<std::size_t>(dim);
    if (times.empty() || out.size() != width)
        throw SizeMismatch("mean trajectory query: empty grid or wrong output length");
    if (t <= times.front()) {
        std::copy_n(values.begin(), width, out.begin());
        return;
    }
    if (t >= times.back()) {
        std::copy_n(values.end() - width, width, out.begin());
        return;
    }
    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t hi = static_cast<std::size_t>(it - times.begin());
    std::size_t lo = hi - 1;
    double w = (t - times[lo]) / (times[hi] - times[lo]);
    for (std::size_t k = 0; k < width; ++k)
        out[k] = (1.0 - w) * values[lo * width + k] + w * values[hi * width + k];
}

std::vector<double> MeanTrajectory::q_mean_at(double t) const {
    std::vector<double> full(3 * dim);
    value_at(t, full);
    full.resize(dim);
    return full;
}

MeanFieldProvider MeanFieldProvider::none() {
    return MeanFieldProvider{};
}

MeanFieldProvider MeanFieldProvider::empirical(const ForceSpec& force_b) {
    MeanFieldProvider p;
    if (force_b.is_zero()) return p;  // B = 0 contributes nothing
    p.mode_ = Mode::empirical;
    p.force_b_ = force_b;
    return p;
}

MeanFieldProvider MeanFieldProvider::linear_exact(double kappa, const MeanTrajectory* mean) {
    if (mean == nullptr) throw ConfigError("linear_exact provider needs a mean trajectory");
    MeanFieldProvider p;
    p.mode_ = Mode::linear_exact;
    p.kappa_ = kappa;
    p.mean_ = mean;
    p.force_b_ = ForceSpec::linear(kappa);
    return p;
}

MeanFieldProvider MeanFieldProvider::frozen_reference(const ForceSpec& force_b,
                                                      const ParticleEnsemble* reference) {
    if (reference == nullptr) throw ConfigError("frozen_reference provider needs an ensemble");
    MeanFieldProvider p;
    p.mode_ = Mode::frozen_reference;
    p.force_b_ = force_b;
    p.reference_ = reference;
    return p;
}

namespace {

// Direct pairwise sum for one target position against a source ensemble.
// The inner loop order is fixed, so results do not depend on threading.
void pairwise_sum(std::span<const double> q_target, const ParticleEnsemble& source,
                  const ForceSpec& b, std::span<double> out) {
    const int d = source.dim;
    const std::size_t m = source.size();
    for (int k = 0; k < d; ++k) out[k] = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double* qj = source.q.data() + j * d;
        for (int k = 0; k < d; ++k) out[k] += b.eval_component(q_target[k] - qj[k]);
    }
    for (int k = 0; k < d; ++k) out[k] /= static_cast<double>(m);
}

}  // namespace

void MeanFieldProvider::compute_terms(const ParticleEnsemble& ens, std::vector<double>& out,
                                      int threads) const {
    const int d = ens.dim;
    const std::size_t n = ens.size();
    out.assign(n * d, 0.0);
    switch (mode_) {
        case Mode::none:
            return;
        case Mode::empirical: {
            if (force_b_.kind == ForceKind::linear) {
                // kappa (q_i - qbar): identical to the direct sum for linear B.
                std::vector<double> qbar(d, 0.0);
                for (std::size_t i = 0; i < n; ++i)
                    for (int k = 0; k < d; ++k) qbar[k] += ens.q[i * d + k];
                for (int k = 0; k < d; ++k) qbar[k] /= static_cast<double>(n);
                const double kap = force_b_.c;
                parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
                    for (std::size_t i = lo; i < hi; ++i)
                        for (int k = 0; k < d; ++k)
                            out[i * d + k] = kap * (ens.q[i * d + k] - qbar[k]);
                });
            } else {
                parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
                    for (std::size_t i = lo; i < hi; ++i)
                        pairwise_sum(ens.q_of(i), ens, force_b_,
                                     {out.data() + i * d, static_cast<std::size_t>(d)});
                });
            }
            return;
        }
        case Mode::linear_exact: {
            std::vector<double> mq(3 * d);
            mean_->value_at(ens.time, mq);
            parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i)
                    for (int k = 0; k < d; ++k)
                        out[i * d + k] = kappa_ * (ens.q[i * d + k] - mq[k]);
            });
            return;
        }
        case Mode::frozen_reference: {
            parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i)
                    pairwise_sum(ens.q_of(i), *reference_, force_b_,
                                 {out.data() + i * d, static_cast<std::size_t>(d)});
            });
            return;
        }
    }
}

std::vector<double> empirical_interaction(std::size_t i, const ParticleEnsemble& ens,
                                          const ForceSpec& force_b) {
    if (i >= ens.size())
        throw SizeMismatch("empirical_interaction: index " + std::to_string(i) + " out of range");
    const int d = ens.dim;
    std::vector<double> out(d, 0.0);
    if (force_b.is_zero()) return out;
    if (force_b.kind == ForceKind::linear) {
        auto means = ens.component_means();
        for (int k = 0; k < d; ++k) out[k] = force_b.c * (ens.q[i * d + k] - means[k]);
        return out;
    }
    pairwise_sum(ens.q_of(i), ens, force_b, out);
    return out;
}

std::vector<double> reference_interaction(std::span<const double> q, const ParticleEnsemble& ref,
                                          const ForceSpec& force_b) {
    if (static_cast<int>(q.size()) != ref.dim)
        throw DimensionMismatch("reference_interaction: position length != reference dimension");
    std::vector<double> out(ref.dim, 0.0);
    pairwise_sum(q, ref, force_b, out);
    return out;
}

std::vector<double> reference_interaction(std::span<const double> q, const MeanTrajectory& mean,
                                          const ForceSpec& force_b, double t) {
    if (force_b.kind != ForceKind::linear && force_b.kind != ForceKind::zero)
        throw LinearOnlyMode(std::string("force kind ") + force_kind_name(force_b.kind));
    if (static_cast<int>(q.size()) != mean.dim)
        throw DimensionMismatch("reference_interaction: position length != trajectory dimension");
    auto mq = mean.q_mean_at(t);
    std::vector<double> out(q.size());
    const double kap = force_b.linear_slope();
    for (std::size_t k = 0; k < q.size(); ++k) out[k] = kap * (q[k] - mq[k]);
    return out;
}

MeanTrajectory integrate_mean_ode(const ModelParams& params, std::vector<double> m0, double t_end,
                                  double dt) {
    params.validate();
    if (!params.force_a.is_linear())
        throw NotClosed(std::string("confinement force kind ") + force_kind_name(params.force_a.kind));
    if (!params.force_b.is_linear())
        throw NotClosed(std::string("interaction force kind ") + force_kind_name(params.force_b.kind));
    const int d = params.dim;
    if (static_cast<int>(m0.size()) != 3 * d)
        throw DimensionMismatch("integrate_mean_ode: m0 must have length 3*dim");
    if (!(dt > 0.0) || !(t_end > 0.0)) throw ConfigError("integrate_mean_ode: dt and t_end must be > 0");

    const double beta_eff = params.beta + params.force_a.linear_slope();
    const Mat3 M = drift_matrix(beta_eff, params.lambda, params.alpha);

    MeanTrajectory traj;
    traj.dim = d;
    auto push = [&](double t, const std::vector<double>& m) {
        traj.times.push_back(t);
        traj.values.insert(traj.values.end(), m.begin(), m.end());
    };
    push(0.0, m0);

    auto rk4_step = [&](std::vector<double>& m, double h) {
        // Per coordinate k the 3x3 system acts on (m_Q[k], m_P[k], m_Z[k]).
        for (int k = 0; k < d; ++k) {
            Vec3 y = {m[k], m[d + k], m[2 * d + k]};
            Vec3 k1 = M.apply(y);
            Vec3 k2 = M.apply({y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1], y[2] + 0.5 * h * k1[2]});
            Vec3 k3 = M.apply({y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1], y[2] + 0.5 * h * k2[2]});
            Vec3 k4 = M.apply({y[0] + h * k3[0], y[1] + h * k3[1], y[2] + h * k3[2]});
            for (int c = 0; c < 3; ++c)
                y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            m[k] = y[0];
            m[d + k] = y[1];
            m[2 * d + k] = y[2];
        }
    };

    std::vector<double> m = std::move(m0);
    long steps = static_cast<long>(std::ceil(t_end / dt - 1e-12));
    for (long s = 0; s < steps; ++s) {
        double t0 = s * dt;
        double h = std::min(dt, t_end - t0);
        rk4_step(m, h);
        for (double v : m)
            if (!std::isfinite(v)) throw NonFiniteState(-1, s);
        push(std::min(t0 + h, t_end), m);
    }
    return traj;
}

Sym3 stationary_covariance_oracle(const ModelParams& params, double kappa) {
    params.validate();
    if (!params.force_a.is_linear())
        throw NotClosed(std::string("confinement force kind ") + force_kind_name(params.force_a.kind));
    const double beta_eff = params.beta + params.force_a.linear_slope() + kappa;
    if (!(beta_eff > 0.0)) throw ConfigError("stationary covariance: beta + c + kappa must be > 0");
    const Mat3 M = drift_matrix(beta_eff, params.lambda, params.alpha);
    Sym3 D{};
    D.a33 = 2.0;
    return solve_lyapunov_3x3(M, D);
}

}  // namespace vlasim
