#include "vlasim/sde.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "vlasim/errors.hpp"
#include "vlasim/parallel.hpp"

namespace vlasim {

const char* scheme_name(Scheme s) {
    return s == Scheme::euler_maruyama ? "euler_maruyama" : "ou_splitting";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "euler_maruyama") return Scheme::euler_maruyama;
    if (name == "ou_splitting") return Scheme::ou_splitting;
    throw ConfigError("unknown scheme '" + name + "'");
}

void IntegratorConfig::validate() const {
    if (!(dt > 0.0)) throw ConfigError("integrator: dt must be > 0");
    if (!(t_end > 0.0)) throw ConfigError("integrator: t_end must be > 0");
    if (dt > t_end) throw ConfigError("integrator: dt must not exceed t_end");
}

long IntegratorConfig::total_steps() const {
    return std::lround(t_end / dt);
}

void step_in_place(ParticleEnsemble& ens, const ModelParams& params, const IntegratorConfig& cfg,
                   const GaussianSource& noise, const MeanFieldProvider& mf, int threads) {
    const int d = ens.dim;
    const std::size_t n = ens.size();
    if (d != params.dim) throw DimensionMismatch("step: ensemble dimension != params.dim");

    std::vector<double> terms;
    mf.compute_terms(ens, terms, threads);

    const double dt = cfg.dt;
    const double be = params.beta, la = params.lambda, al = params.alpha;
    const ForceSpec& fa = params.force_a;
    const std::uint32_t step = static_cast<std::uint32_t>(ens.step_count);
    std::atomic<long> first_bad{-1};

    auto note_bad = [&first_bad](std::size_t i) {
        long bad = static_cast<long>(i);
        long cur = first_bad.load(std::memory_order_relaxed);
        while ((cur < 0 || bad < cur) &&
               !first_bad.compare_exchange_weak(cur, bad, std::memory_order_relaxed)) {
        }
    };

    if (cfg.scheme == Scheme::euler_maruyama) {
        const double noise_amp = std::sqrt(2.0 * dt);
        parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
            std::vector<double> xi(d);
            for (std::size_t i = lo; i < hi; ++i) {
                noise.fill(static_cast<std::uint32_t>(i), step, xi);
                bool finite = true;
                for (int k = 0; k < d; ++k) {
                    const std::size_t idx = i * d + k;
                    const double qo = ens.q[idx], po = ens.p[idx], zo = ens.z[idx];
                    const double qn = qo + dt * po;
                    const double pn =
                        po + dt * (-be * qo - fa.eval_component(qo) - terms[idx] + la * zo);
                    const double zn = zo + dt * (-la * po - al * zo) + noise_amp * xi[k];
                    ens.q[idx] = qn;
                    ens.p[idx] = pn;
                    ens.z[idx] = zn;
                    finite = finite && std::isfinite(qn) && std::isfinite(pn) && std::isfinite(zn);
                }
                if (!finite) note_bad(i);
            }
        });
    } else {
        // Drift half-steps for (q,p) wrap an exact OU update of z over dt
        // with p frozen at the half-step value.
        const double half = 0.5 * dt;
        const double decay = std::exp(-al * dt);
        const double z_noise = std::sqrt((1.0 - std::exp(-2.0 * al * dt)) / al);
        parallel_for(n, threads, [&](std::size_t lo, std::size_t hi) {
            std::vector<double> xi(d);
            for (std::size_t i = lo; i < hi; ++i) {
                noise.fill(static_cast<std::uint32_t>(i), step, xi);
                bool finite = true;
                for (int k = 0; k < d; ++k) {
                    const std::size_t idx = i * d + k;
                    const double qo = ens.q[idx], po = ens.p[idx], zo = ens.z[idx];
                    const double q1 = qo + half * po;
                    const double p1 =
                        po + half * (-be * qo - fa.eval_component(qo) - terms[idx] + la * zo);
                    const double zn =
                        decay * zo - (la * p1 / al) * (1.0 - decay) + z_noise * xi[k];
                    const double qn = q1 + half * p1;
                    const double pn =
                        p1 + half * (-be * q1 - fa.eval_component(q1) - terms[idx] + la * zn);
                    ens.q[idx] = qn;
                    ens.p[idx] = pn;
                    ens.z[idx] = zn;
                    finite = finite && std::isfinite(qn) && std::isfinite(pn) && std::isfinite(zn);
                }
                if (!finite) note_bad(i);
            }
        });
    }

    ens.step_count += 1;
    ens.time = static_cast<double>(ens.step_count) * dt;
    long bad = first_bad.load(std::memory_order_relaxed);
    if (bad >= 0) throw NonFiniteState(bad, ens.step_count);
}

ParticleEnsemble step_ensemble(const ParticleEnsemble& ens, const ModelParams& params,
                               const IntegratorConfig& cfg, const GaussianSource& noise,
                               const MeanFieldProvider& mf, int threads) {
    ParticleEnsemble next = ens;
    step_in_place(next, params, cfg, noise, mf, threads);
    return next;
}

namespace {

std::vector<long> steps_for_times(const std::vector<double>& times, double dt, long total) {
    std::vector<long> idx;
    idx.reserve(times.size());
    for (double t : times) {
        long s = std::lround(t / dt);
        if (s < 0 || s > total)
            throw ConfigError("sample time " + std::to_string(t) + " outside [0, t_end]");
        idx.push_back(s);
    }
    if (!std::is_sorted(idx.begin(), idx.end()))
        throw ConfigError("sample times must be increasing");
    return idx;
}

CoupledSample diff_sample(const ParticleEnsemble& a, const ParticleEnsemble& b,
                          const QuadraticForm* form) {
    const int d = a.dim;
    const std::size_t n = a.size();
    CoupledSample s;
    s.time = a.time;
    double q2 = 0, p2 = 0, z2 = 0, qf = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k) {
            const std::size_t idx = i * d + k;
            const double dq = a.q[idx] - b.q[idx];
            const double dp = a.p[idx] - b.p[idx];
            const double dz = a.z[idx] - b.z[idx];
            q2 += dq * dq;
            p2 += dp * dp;
            z2 += dz * dz;
            if (form)
                qf += form->a1 * dq * dq + form->a2 * dp * dp + form->a3 * dz * dz +
                      2.0 * (form->a4 * dq * dp + form->a5 * dq * dz + dp * dz);
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    s.mean_q2 = q2 * inv_n;
    s.mean_p2 = p2 * inv_n;
    s.mean_z2 = z2 * inv_n;
    s.mean_form = qf * inv_n;
    return s;
}

}  // namespace

CoupledRun run_coupled(const ParticleEnsemble& ens_a0, const ParticleEnsemble& ens_b0,
                       const ModelParams& params, const IntegratorConfig& cfg, std::uint64_t seed,
                       std::uint32_t noise_dom, const std::vector<double>& sample_times,
                       const QuadraticForm* form, const std::vector<double>& snapshot_times,
                       int threads) {
    cfg.validate();
    if (ens_a0.size() != ens_b0.size() || ens_a0.dim != ens_b0.dim)
        throw SizeMismatch("coupled run: ensembles must have equal N and dimension");

    const long total = cfg.total_steps();
    auto sample_steps = steps_for_times(sample_times, cfg.dt, total);
    auto snap_steps = steps_for_times(snapshot_times, cfg.dt, total);

    ParticleEnsemble a = ens_a0, b = ens_b0;
    PhiloxSource noise(seed, noise_dom);
    MeanFieldProvider mf_a = MeanFieldProvider::empirical(params.force_b);
    MeanFieldProvider mf_b = MeanFieldProvider::empirical(params.force_b);

    CoupledRun run;
    std::size_t next_sample = 0, next_snap = 0;
    auto record = [&](long step_index) {
        while (next_sample < sample_steps.size() && sample_steps[next_sample] == step_index) {
            run.samples.push_back(diff_sample(a, b, form));
            ++next_sample;
        }
        while (next_snap < snap_steps.size() && snap_steps[next_snap] == step_index) {
            run.snapshot_times.push_back(a.time);
            run.snapshots.emplace_back(a, b);
            ++next_snap;
        }
    };

    record(0);
    for (long s = 0; s < total; ++s) {
        step_in_place(a, params, cfg, noise, mf_a, threads);
        step_in_place(b, params, cfg, noise, mf_b, threads);
        record(s + 1);
    }
    return run;
}

namespace {

// Coarse-step noise as the normalized sum of fine-grid draws, so all grids
// share one Brownian path.
class AggregatedSource final : public GaussianSource {
  public:
    AggregatedSource(const GaussianSource& fine, long ratio, int dim)
        : fine_(fine), ratio_(ratio), dim_(dim) {}
    void fill(std::uint32_t particle, std::uint32_t step, std::span<double> out) const override {
        for (double& v : out) v = 0.0;
        std::vector<double> tmp(dim_);
        for (long j = 0; j < ratio_; ++j) {
            fine_.fill(particle, static_cast<std::uint32_t>(step * ratio_ + j), tmp);
            for (int k = 0; k < dim_; ++k) out[k] += tmp[k];
        }
        const double scale = 1.0 / std::sqrt(static_cast<double>(ratio_));
        for (double& v : out) v *= scale;
    }

  private:
    const GaussianSource& fine_;
    long ratio_;
    int dim_;
};

}  // namespace

StrongOrderResult strong_order_check(const ModelParams& params, Scheme scheme, double t_end,
                                     std::vector<double> dt_list, int n_paths, std::uint64_t seed,
                                     const GaussianSource* noise_override) {
    params.validate();
    if (!params.force_b.is_zero())
        throw ConfigError("strong_order_check requires B = 0 (closed linear reference)");
    if (dt_list.size() < 4) throw ConfigError("strong_order_check: need >= 4 dt entries");
    std::sort(dt_list.begin(), dt_list.end(), std::greater<double>());
    for (std::size_t i = 0; i + 1 < dt_list.size(); ++i) {
        if (std::fabs(dt_list[i] / dt_list[i + 1] - 2.0) > 1e-9)
            throw ConfigError("strong_order_check: dt_list must be a halving sequence");
    }
    const double dt_ref = dt_list.back() / 8.0;
    if (std::fabs(std::round(t_end / dt_ref) - t_end / dt_ref) > 1e-6)
        throw ConfigError("strong_order_check: t_end must be a multiple of the reference step");

    PhiloxSource philox(seed, noise_domain::dynamics);
    const GaussianSource& fine = noise_override ? *noise_override : philox;

    auto run_with_dt = [&](double dt) {
        ParticleEnsemble ens = ParticleEnsemble::gaussian_blob(
            static_cast<std::size_t>(n_paths), params.dim, 1.0, 0.0, 0.0, 1.0, seed,
            noise_domain::init_a);
        IntegratorConfig cfg{dt, scheme, t_end};
        long ratio = std::lround(dt / dt_ref);
        AggregatedSource noise(fine, ratio, params.dim);
        MeanFieldProvider mf = MeanFieldProvider::none();
        long total = cfg.total_steps();
        for (long s = 0; s < total; ++s) step_in_place(ens, params, cfg, noise, mf, 1);
        return ens;
    };

    ParticleEnsemble ref = run_with_dt(dt_ref);

    StrongOrderResult result;
    for (double dt : dt_list) {
        ParticleEnsemble ens = run_with_dt(dt);
        double acc = 0.0;
        for (std::size_t idx = 0; idx < ens.q.size(); ++idx) {
            const double dq = ens.q[idx] - ref.q[idx];
            const double dp = ens.p[idx] - ref.p[idx];
            const double dz = ens.z[idx] - ref.z[idx];
            acc += dq * dq + dp * dp + dz * dz;
        }
        result.dts.push_back(dt);
        result.errors.push_back(std::sqrt(acc / static_cast<double>(n_paths)));
    }
    result.fit = fit_rate(result.dts, result.errors, FitMode::log_log, 0.0,
                          std::numeric_limits<double>::infinity());
    return result;
}

}  // namespace vlasim
