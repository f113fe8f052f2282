#include "vlasim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vlasim/errors.hpp"
#include "vlasim/meanfield.hpp"
#include "vlasim/transport.hpp"

namespace vlasim {

void ExperimentConfig::validate() const {
    params.validate();
    integ.validate();
    if (n_particles < 1) throw ConfigError("experiment: n_particles must be >= 1");
    if (replicates < 1) throw ConfigError("experiment: replicates must be >= 1");
    if (threads < 1) throw ConfigError("experiment: threads must be >= 1");
    if (!std::is_sorted(sample_times.begin(), sample_times.end()))
        throw ConfigError("experiment: sample_times must be increasing");
    for (double t : sample_times)
        if (t < 0.0 || t > integ.t_end + 1e-12)
            throw ConfigError("experiment: sample_times must lie in [0, t_end]");
}

const SeriesColumn* SeriesGroup::find(const std::string& name) const {
    for (const auto& c : columns)
        if (c.name == name) return &c;
    return nullptr;
}

bool ExperimentReport::all_pass() const {
    for (const auto& v : verdicts)
        if (!v.pass) return false;
    return true;
}

const SeriesGroup* ExperimentReport::group(const std::string& axis_name) const {
    for (const auto& g : groups)
        if (g.axis_name == axis_name) return &g;
    return nullptr;
}

double ExperimentReport::scalar(const std::string& name) const {
    for (const auto& [k, v] : scalars)
        if (k == name) return v;
    throw ConfigError("report scalar '" + name + "' not found");
}

namespace {

double snap_to_grid(double t, double dt) { return std::lround(t / dt) * dt; }

// Uniform sampling grid aligned with the integrator step, about `target`
// points including both endpoints.
std::vector<double> default_sample_times(double t_end, double dt, int target) {
    long total = std::lround(t_end / dt);
    long stride = std::max<long>(1, total / target);
    std::vector<double> ts;
    for (long s = 0; s <= total; s += stride) ts.push_back(s * dt);
    if (std::lround(ts.back() / dt) != total) ts.push_back(total * dt);
    return ts;
}

std::vector<double> resolve_sample_times(const ExperimentConfig& cfg, int target) {
    if (!cfg.sample_times.empty()) return cfg.sample_times;
    return default_sample_times(cfg.integ.t_end, cfg.integ.dt, target);
}

std::vector<double> resolve_w2_times(const ExperimentConfig& cfg) {
    if (!cfg.w2_times.empty()) return cfg.w2_times;
    const double T = cfg.integ.t_end, dt = cfg.integ.dt;
    std::vector<double> ts = {0.0, snap_to_grid(T / 4, dt), snap_to_grid(T / 2, dt),
                              snap_to_grid(3 * T / 4, dt), snap_to_grid(T, dt)};
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

ParticleEnsemble make_blob(const ExperimentConfig& cfg, const InitialBlob& blob,
                           std::size_t n, std::uint32_t domain) {
    return ParticleEnsemble::gaussian_blob(n, cfg.params.dim, blob.center_q, blob.center_p,
                                           blob.center_z, blob.scale, cfg.seed, domain);
}

// Mean over particles of |q|^2 + |p|^2 + |z|^2 plus the standard error of
// that mean estimator.
std::pair<double, double> second_moment_with_sem(const ParticleEnsemble& ens) {
    const std::size_t n = ens.size();
    const int d = ens.dim;
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double v = 0.0;
        for (int k = 0; k < d; ++k) {
            const std::size_t idx = i * d + k;
            v += ens.q[idx] * ens.q[idx] + ens.p[idx] * ens.p[idx] + ens.z[idx] * ens.z[idx];
        }
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, sumsq / static_cast<double>(n) - mean * mean);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

// Pooled per-coordinate covariance of (q_k, p_k, z_k) about the empirical
// mean, averaged over coordinates.
Sym3 pooled_covariance(const ParticleEnsemble& ens) {
    const std::size_t n = ens.size();
    const int d = ens.dim;
    auto means = ens.component_means();
    Sym3 s{};
    for (std::size_t i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) {
            const std::size_t idx = i * d + k;
            const double dq = ens.q[idx] - means[k];
            const double dp = ens.p[idx] - means[d + k];
            const double dz = ens.z[idx] - means[2 * d + k];
            s.a11 += dq * dq;
            s.a12 += dq * dp;
            s.a13 += dq * dz;
            s.a22 += dp * dp;
            s.a23 += dp * dz;
            s.a33 += dz * dz;
        }
    const double inv = 1.0 / (static_cast<double>(n) * d);
    s.a11 *= inv; s.a12 *= inv; s.a13 *= inv;
    s.a22 *= inv; s.a23 *= inv; s.a33 *= inv;
    return s;
}

double mean_vector_norm(const ParticleEnsemble& ens) {
    auto means = ens.component_means();
    double acc = 0.0;
    for (double m : means) acc += m * m;
    return std::sqrt(acc);
}

std::vector<long> to_step_indices(const std::vector<double>& times, double dt) {
    std::vector<long> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(std::lround(t / dt));
    return out;
}

void append_margins(ExperimentReport& rep, const CoefficientSolution& sol) {
    rep.margins = sol.margins;
    rep.scalars.emplace_back("eta", sol.eta);
    rep.scalars.emplace_back("eta0", sol.eta0);
    rep.scalars.emplace_back("a3_tilde", sol.a3_tilde);
    rep.scalars.emplace_back("a1", sol.form.a1);
    rep.scalars.emplace_back("a2", sol.form.a2);
    rep.scalars.emplace_back("a3", sol.form.a3);
    rep.scalars.emplace_back("a4", sol.form.a4);
    rep.scalars.emplace_back("a5", sol.form.a5);
}

}  // namespace

std::vector<Verdict> contraction_verdicts(const SeriesGroup& g, double fit_window_lo,
                                          std::vector<NamedFit>* fits_out) {
    const SeriesColumn* eq = g.find("eq_diff_mean");
    if (eq == nullptr) throw ConfigError("contraction verdicts: series eq_diff_mean missing");
    std::vector<Verdict> out;
    double max_abs = 0.0;
    for (double v : eq->values) max_abs = std::max(max_abs, std::fabs(v));
    if (max_abs == 0.0) {
        out.push_back({"null_coupling", true, 0.0, 0.0,
                       "identical initial ensembles stay identical; fit skipped"});
        return out;
    }
    RateFit fit = fit_rate(g.axis, eq->values, FitMode::log_linear, fit_window_lo, g.axis.back());
    if (fits_out) fits_out->push_back({"eq_diff_decay", fit});
    out.push_back({"slope_negative", fit.slope < 0.0, fit.slope, 0.0,
                   "fitted decay rate of log E Q(diff)"});
    out.push_back({"fit_r2", fit.r_squared >= 0.99, fit.r_squared, 0.99, "goodness of the log-linear fit"});
    const double ratio = eq->values.back() / eq->values.front();
    out.push_back({"decay_ratio", ratio <= 1e-3, ratio, 1e-3, "E Q(diff) at t_end over its value at t = 0"});
    return out;
}

ExperimentReport run_contraction(const ExperimentConfig& cfg) {
    cfg.validate();
    const ModelParams& prm = cfg.params;
    const double eta = prm.eta();

    ExperimentReport rep;
    rep.experiment = "contraction";

    CoefficientSolution sol = solve_contraction(prm, eta, cfg.a3_tilde);
    if (sol.status == SolveStatus::invalid_a3_tilde)
        throw ConfigError("contraction: a3_tilde = " + std::to_string(sol.a3_tilde) +
                          " is outside the admissible region");
    if (!sol.ok()) {
        if (!cfg.force) throw InfeasibleForEta(eta, sol.eta0);
        rep.warnings.push_back("forced run with eta >= eta0; decay is not guaranteed");
    }
    append_margins(rep, sol);

    const auto sample_times = resolve_sample_times(cfg, 80);
    const auto w2_times = resolve_w2_times(cfg);
    const std::size_t n = cfg.n_particles;

    SeriesGroup tg;
    tg.axis_name = "time";
    tg.axis = sample_times;
    std::vector<double> eq_mean(sample_times.size(), 0.0);
    std::vector<double> q2_mean(sample_times.size(), 0.0);
    std::vector<double> p2_mean(sample_times.size(), 0.0);
    std::vector<double> z2_mean(sample_times.size(), 0.0);

    SeriesGroup wg;
    wg.axis_name = "w2_time";
    wg.axis = w2_times;

    const bool w2_exact_ok = n <= 1024;
    if (!w2_exact_ok)
        rep.warnings.push_back("w2 cross-check uses the sliced estimator at N > 1024 (trend only)");

    for (int r = 0; r < cfg.replicates; ++r) {
        auto ens_a = make_blob(cfg, cfg.blob_a, n, noise_domain::with_replicate(noise_domain::init_a, r));
        // Identical initial laws with the same seed share the draw stream, so
        // the coupling null test is exact.
        const std::uint32_t dom_b = cfg.blob_a == cfg.blob_b
                                        ? noise_domain::with_replicate(noise_domain::init_a, r)
                                        : noise_domain::with_replicate(noise_domain::init_b, r);
        auto ens_b = make_blob(cfg, cfg.blob_b, n, dom_b);
        CoupledRun run = run_coupled(ens_a, ens_b, prm, cfg.integ, cfg.seed,
                                     noise_domain::with_replicate(noise_domain::dynamics, r),
                                     sample_times, &sol.form, w2_times, cfg.threads);

        SeriesColumn eq_col{"eq_diff_rep" + std::to_string(r), {}};
        for (std::size_t s = 0; s < run.samples.size(); ++s) {
            eq_col.values.push_back(run.samples[s].mean_form);
            eq_mean[s] += run.samples[s].mean_form / cfg.replicates;
            q2_mean[s] += run.samples[s].mean_q2 / cfg.replicates;
            p2_mean[s] += run.samples[s].mean_p2 / cfg.replicates;
            z2_mean[s] += run.samples[s].mean_z2 / cfg.replicates;
        }
        tg.columns.push_back(std::move(eq_col));

        SeriesColumn w2_col{"w2_rep" + std::to_string(r), {}};
        for (const auto& [ea, eb] : run.snapshots) {
            auto ma = EmpiricalMeasure::from_ensemble(ea);
            auto mb = EmpiricalMeasure::from_ensemble(eb);
            double w = w2_exact_ok ? w2_exact(ma, mb, GroundMetric::euclidean(), cfg.threads)
                                   : w2_sliced(ma, mb, 256, cfg.seed);
            w2_col.values.push_back(w);
        }
        wg.columns.push_back(std::move(w2_col));
    }

    tg.columns.push_back({"eq_diff_mean", eq_mean});
    tg.columns.push_back({"q2_diff_mean", q2_mean});
    tg.columns.push_back({"p2_diff_mean", p2_mean});
    tg.columns.push_back({"z2_diff_mean", z2_mean});
    rep.groups.push_back(std::move(tg));
    rep.groups.push_back(std::move(wg));

    long mono_violations = 0;
    for (std::size_t s = 1; s < eq_mean.size(); ++s)
        if (eq_mean[s] > eq_mean[s - 1] * (1.0 + 1e-9)) ++mono_violations;
    rep.scalars.emplace_back("monotonicity_violations", static_cast<double>(mono_violations));

    rep.verdicts = contraction_verdicts(rep.groups.front(), cfg.fit_window_lo, &rep.fits);
    return rep;
}

namespace {

struct SingleRunSamples {
    std::vector<double> times;
    std::vector<double> mean_norm;
    std::vector<Sym3> covariance;
    std::vector<double> m2, m2_sem, qform;
};

SingleRunSamples run_single(const ExperimentConfig& cfg, const std::vector<double>& sample_times,
                            const QuadraticForm* form, int replicate) {
    const ModelParams& prm = cfg.params;
    auto ens = make_blob(cfg, cfg.blob_a, cfg.n_particles,
                         noise_domain::with_replicate(noise_domain::init_a, replicate));
    PhiloxSource noise(cfg.seed, noise_domain::with_replicate(noise_domain::dynamics, replicate));
    MeanFieldProvider mf = MeanFieldProvider::empirical(prm.force_b);

    auto steps = to_step_indices(sample_times, cfg.integ.dt);
    SingleRunSamples out;
    std::size_t next = 0;
    auto record = [&](long step_index) {
        while (next < steps.size() && steps[next] == step_index) {
            out.times.push_back(ens.time);
            out.mean_norm.push_back(mean_vector_norm(ens));
            out.covariance.push_back(pooled_covariance(ens));
            auto [m2, sem] = second_moment_with_sem(ens);
            out.m2.push_back(m2);
            out.m2_sem.push_back(sem);
            if (form) {
                double acc = 0.0;
                for (std::size_t i = 0; i < ens.size(); ++i)
                    acc += form->eval(ens.q_of(i), ens.p_of(i), ens.z_of(i));
                out.qform.push_back(acc / static_cast<double>(ens.size()));
            }
            ++next;
        }
    };

    const long total = cfg.integ.total_steps();
    record(0);
    for (long s = 0; s < total; ++s) {
        step_in_place(ens, prm, cfg.integ, noise, mf, cfg.threads);
        record(s + 1);
    }
    return out;
}

}  // namespace

ExperimentReport run_stationarity(const ExperimentConfig& cfg) {
    cfg.validate();
    const ModelParams& prm = cfg.params;
    ExperimentReport rep;
    rep.experiment = "stationarity";

    const bool oracle_mode = prm.force_a.is_linear() && prm.force_b.is_linear();
    if (!oracle_mode)
        rep.warnings.push_back("nonlinear forces: no covariance oracle, trend verdicts only");

    const auto sample_times = resolve_sample_times(cfg, 50);
    auto samples = run_single(cfg, sample_times, nullptr, 0);

    SeriesGroup g;
    g.axis_name = "time";
    g.axis = samples.times;
    auto col = [&](const char* name, auto&& get) {
        SeriesColumn c{name, {}};
        for (std::size_t i = 0; i < samples.times.size(); ++i) c.values.push_back(get(i));
        g.columns.push_back(std::move(c));
    };
    col("mean_norm", [&](std::size_t i) { return samples.mean_norm[i]; });
    col("cov_qq", [&](std::size_t i) { return samples.covariance[i].a11; });
    col("cov_pp", [&](std::size_t i) { return samples.covariance[i].a22; });
    col("cov_zz", [&](std::size_t i) { return samples.covariance[i].a33; });
    col("cov_qp", [&](std::size_t i) { return samples.covariance[i].a12; });
    col("cov_qz", [&](std::size_t i) { return samples.covariance[i].a13; });
    col("cov_pz", [&](std::size_t i) { return samples.covariance[i].a23; });
    col("second_moment", [&](std::size_t i) { return samples.m2[i]; });
    rep.groups.push_back(std::move(g));

    const Sym3 cov = samples.covariance.back();
    const double n = static_cast<double>(cfg.n_particles);
    if (oracle_mode) {
        const Sym3 oracle = stationary_covariance_oracle(prm, prm.force_b.linear_slope());
        rep.scalars.emplace_back("oracle_qq", oracle.a11);
        rep.scalars.emplace_back("oracle_pp", oracle.a22);
        rep.scalars.emplace_back("oracle_zz", oracle.a33);

        double diag_rel = std::max({std::fabs(cov.a11 - oracle.a11) / oracle.a11,
                                    std::fabs(cov.a22 - oracle.a22) / oracle.a22,
                                    std::fabs(cov.a33 - oracle.a33) / oracle.a33});
        rep.verdicts.push_back({"cov_diag_rel", diag_rel <= 0.05, diag_rel, 0.05,
                                "largest relative error of the covariance diagonal"});

        const double band = 3.0 / std::sqrt(n);
        double off = std::max({std::fabs(cov.a12 - oracle.a12) / std::sqrt(oracle.a11 * oracle.a22),
                               std::fabs(cov.a13 - oracle.a13) / std::sqrt(oracle.a11 * oracle.a33),
                               std::fabs(cov.a23 - oracle.a23) / std::sqrt(oracle.a22 * oracle.a33)});
        rep.verdicts.push_back({"cov_offdiag_band", off <= band, off, band,
                                "largest normalized off-diagonal deviation vs 3/sqrt(N)"});

        const double trace = oracle.a11 + oracle.a22 + oracle.a33;
        const double mean_band = 4.0 * std::sqrt(prm.dim * trace / n);
        rep.verdicts.push_back({"mean_norm_band", samples.mean_norm.back() <= mean_band,
                                samples.mean_norm.back(), mean_band,
                                "ensemble mean versus the CLT band"});
    } else {
        // Trend mode: diagonal drift between the two halves of the run stays
        // within a 10% + MC band.
        std::size_t mid = samples.times.size() / 2;
        double drift = 0.0;
        for (std::size_t i : {std::size_t{0}, std::size_t{1}, std::size_t{2}}) {
            auto get = [&](const Sym3& s) { return i == 0 ? s.a11 : (i == 1 ? s.a22 : s.a33); };
            double a = get(samples.covariance[mid]);
            double b = get(cov);
            drift = std::max(drift, std::fabs(b - a) / std::max(1e-300, std::fabs(a)));
        }
        const double band = 0.10 + 3.0 / std::sqrt(n);
        rep.verdicts.push_back({"cov_drift", drift <= band, drift, band,
                                "covariance diagonal drift between mid-run and end"});
    }
    return rep;
}

ExperimentReport run_moments(const ExperimentConfig& cfg) {
    cfg.validate();
    const ModelParams& prm = cfg.params;
    const double eta = prm.eta();
    ExperimentReport rep;
    rep.experiment = "moments";

    CoefficientSolution sol = solve_second_moment(prm, eta);
    if (!sol.ok()) {
        if (!cfg.force) throw InfeasibleForEta(eta, sol.eta0);
        rep.warnings.push_back("forced run with eta >= eta0; moment bound is not guaranteed");
    }
    append_margins(rep, sol);

    const auto sample_times = resolve_sample_times(cfg, 100);
    auto samples = run_single(cfg, sample_times, &sol.form, 0);

    SeriesGroup g;
    g.axis_name = "time";
    g.axis = samples.times;
    g.columns.push_back({"second_moment", samples.m2});
    g.columns.push_back({"second_moment_sem", samples.m2_sem});
    g.columns.push_back({"q_form_mean", samples.qform});
    rep.groups.push_back(std::move(g));

    // Running-max stabilization: the max over [T/2, T] may exceed the max
    // over [T/4, T/2] by at most 5% plus a Monte Carlo allowance.
    const double T = samples.times.back();
    double max_late = 0.0, max_mid = 0.0, sem_max = 0.0;
    for (std::size_t i = 0; i < samples.times.size(); ++i) {
        const double t = samples.times[i];
        if (t >= T / 4 && t <= T / 2) max_mid = std::max(max_mid, samples.m2[i]);
        if (t >= T / 2) max_late = std::max(max_late, samples.m2[i]);
        sem_max = std::max(sem_max, samples.m2_sem[i]);
    }
    const double bound = 1.05 * max_mid + 3.0 * sem_max;
    rep.verdicts.push_back({"running_max_stable", max_late <= bound, max_late, bound,
                            "max of the second moment over [T/2, T] vs [T/4, T/2]"});
    rep.scalars.emplace_back("max_mid", max_mid);
    rep.scalars.emplace_back("max_late", max_late);

    if (prm.force_a.is_linear() && prm.force_b.is_linear()) {
        const Sym3 oracle = stationary_covariance_oracle(prm, prm.force_b.linear_slope());
        const double plateau_oracle = prm.dim * (oracle.a11 + oracle.a22 + oracle.a33);
        double plateau = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < samples.times.size(); ++i) {
            if (samples.times[i] >= T / 2) {
                plateau += samples.m2[i];
                ++count;
            }
        }
        plateau /= std::max<std::size_t>(1, count);
        const double rel = std::fabs(plateau - plateau_oracle) / plateau_oracle;
        rep.verdicts.push_back({"plateau_rel", rel <= 0.05, rel, 0.05,
                                "late-time second moment vs the stationary trace"});
        rep.scalars.emplace_back("plateau", plateau);
        rep.scalars.emplace_back("plateau_oracle", plateau_oracle);
    }
    return rep;
}

std::vector<Verdict> chaos_verdicts(const SeriesGroup& g, std::vector<NamedFit>* fits_out) {
    const SeriesColumn* e_mean = g.find("e_mean");
    if (e_mean == nullptr) throw ConfigError("chaos verdicts: series e_mean missing");
    std::vector<Verdict> out;
    RateFit fit = fit_rate(g.axis, e_mean->values, FitMode::log_log, 0.0,
                           std::numeric_limits<double>::infinity());
    if (fits_out) fits_out->push_back({"chaos_rate", fit});
    const bool in_range = fit.slope >= -1.25 && fit.slope <= -0.80;
    out.push_back({"slope_in_range", in_range, fit.slope, -1.0,
                   "log-log slope of e(N); admissible range [-1.25, -0.80]"});
    out.push_back({"fit_r2", fit.r_squared >= 0.95, fit.r_squared, 0.95, "goodness of the log-log fit"});

    // W2 between 1-marginals never exceeds sqrt(e) per replicate: the index
    // pairing is itself an admissible coupling.
    bool w2_ok = true;
    double worst = 0.0;
    for (const auto& c : g.columns) {
        if (c.name.rfind("w2_rep", 0) != 0) continue;
        const std::string suffix = c.name.substr(6);
        const SeriesColumn* e_rep = g.find("e_rep" + suffix);
        if (e_rep == nullptr) continue;
        for (std::size_t i = 0; i < c.values.size(); ++i) {
            const double bound = std::sqrt(e_rep->values[i]) * (1.0 + 1e-9) + 1e-12;
            const double excess = c.values[i] - bound;
            worst = std::max(worst, excess);
            if (excess > 0.0) w2_ok = false;
        }
    }
    out.push_back({"w2_below_sqrt_e", w2_ok, worst, 0.0,
                   "largest excess of marginal W2 over sqrt(e(N))"});
    return out;
}

ExperimentReport run_chaos(const ExperimentConfig& cfg) {
    cfg.validate();
    const ModelParams& prm = cfg.params;
    const double eta = prm.eta();
    ExperimentReport rep;
    rep.experiment = "chaos";

    ChaosReference ref_mode = cfg.chaos_reference;
    if (ref_mode == ChaosReference::auto_select)
        ref_mode = prm.force_b.is_linear() ? ChaosReference::exact_mean : ChaosReference::frozen;
    if (ref_mode == ChaosReference::exact_mean && !prm.force_b.is_linear())
        throw LinearOnlyMode("exact mean-field reference requires a linear interaction force");

    CoefficientSolution sol = solve_chaos(prm, eta);
    if (!sol.ok()) {
        if (!cfg.force) throw InfeasibleForEta(eta, sol.eta0);
        rep.warnings.push_back("forced run with eta >= eta0; the O(1/N) bound is not guaranteed");
    }
    append_margins(rep, sol);

    std::vector<std::size_t> sweep;
    for (std::size_t n : cfg.n_sweep) {
        if (n <= 1) {
            rep.warnings.push_back("N = 1 is degenerate and excluded from the sweep");
            continue;
        }
        sweep.push_back(n);
    }
    if (sweep.size() < 4) throw ConfigError("chaos: n_sweep needs at least 4 usable sizes");
    std::sort(sweep.begin(), sweep.end());

    const auto sample_times = resolve_sample_times(cfg, 40);
    const double dt = cfg.integ.dt;
    auto sample_steps = to_step_indices(sample_times, dt);
    const long total = cfg.integ.total_steps();

    // Exact mean trajectory of the reference dynamic; the mean ODE is closed
    // because the linear interaction cancels against its own average.
    MeanTrajectory mean;
    if (ref_mode == ChaosReference::exact_mean) {
        std::vector<double> m0(3 * prm.dim);
        for (int k = 0; k < prm.dim; ++k) {
            m0[k] = cfg.blob_a.center_q;
            m0[prm.dim + k] = cfg.blob_a.center_p;
            m0[2 * prm.dim + k] = cfg.blob_a.center_z;
        }
        mean = integrate_mean_ode(prm, std::move(m0), cfg.integ.t_end, cfg.mean_ode_dt);
    }

    const std::size_t big_n = cfg.reference_multiplier * sweep.back();
    if (ref_mode == ChaosReference::frozen && cfg.reference_multiplier < 16)
        rep.warnings.push_back("ReferenceBias: frozen reference ensemble smaller than 16x the largest N");

    SeriesGroup sg;
    sg.axis_name = "N";
    for (std::size_t n : sweep) sg.axis.push_back(static_cast<double>(n));
    std::vector<SeriesColumn> e_reps(cfg.replicates), w2_reps(cfg.replicates);
    for (int r = 0; r < cfg.replicates; ++r) {
        e_reps[r].name = "e_rep" + std::to_string(r);
        w2_reps[r].name = "w2_rep" + std::to_string(r);
    }
    std::vector<double> e_mean(sweep.size(), 0.0);

    SeriesGroup profile;
    profile.axis_name = "time";
    profile.axis = sample_times;

    for (std::size_t ni = 0; ni < sweep.size(); ++ni) {
        const std::size_t n = sweep[ni];
        for (int r = 0; r < cfg.replicates; ++r) {
            auto interacting =
                make_blob(cfg, cfg.blob_a, n, noise_domain::with_replicate(noise_domain::init_a, r));
            ParticleEnsemble reference = interacting;  // identical initial datum
            PhiloxSource noise(cfg.seed, noise_domain::with_replicate(noise_domain::dynamics, r));

            ParticleEnsemble big_ref;
            PhiloxSource big_noise(cfg.seed,
                                   noise_domain::with_replicate(noise_domain::reference_dynamics, r));
            MeanFieldProvider mf_interacting = MeanFieldProvider::empirical(prm.force_b);
            MeanFieldProvider mf_reference = MeanFieldProvider::none();
            MeanFieldProvider mf_big = MeanFieldProvider::none();
            if (ref_mode == ChaosReference::exact_mean) {
                if (!prm.force_b.is_zero())
                    mf_reference = MeanFieldProvider::linear_exact(prm.force_b.c, &mean);
            } else {
                big_ref = make_blob(cfg, cfg.blob_a, big_n,
                                    noise_domain::with_replicate(noise_domain::reference_init, r));
                mf_reference = MeanFieldProvider::frozen_reference(prm.force_b, &big_ref);
                mf_big = MeanFieldProvider::empirical(prm.force_b);
            }

            double e_max = 0.0;
            double t_max = 0.0;
            EmpiricalMeasure cloud_a, cloud_b;
            std::vector<double> profile_vals;
            std::size_t next = 0;
            auto record = [&](long step_index) {
                while (next < sample_steps.size() && sample_steps[next] == step_index) {
                    double acc = 0.0;
                    for (std::size_t idx = 0; idx < interacting.q.size(); ++idx) {
                        const double dq = interacting.q[idx] - reference.q[idx];
                        const double dp = interacting.p[idx] - reference.p[idx];
                        const double dz = interacting.z[idx] - reference.z[idx];
                        acc += dq * dq + dp * dp + dz * dz;
                    }
                    const double e_t = acc / static_cast<double>(n);
                    if (e_t >= e_max) {
                        e_max = e_t;
                        t_max = interacting.time;
                        cloud_a = EmpiricalMeasure::from_ensemble(interacting);
                        cloud_b = EmpiricalMeasure::from_ensemble(reference);
                    }
                    if (ni + 1 == sweep.size() && r == 0) profile_vals.push_back(e_t);
                    ++next;
                }
            };

            record(0);
            for (long s = 0; s < total; ++s) {
                // The reference systems read the big ensemble's pre-step
                // snapshot, so ordering here is load-bearing.
                step_in_place(reference, prm, cfg.integ, noise, mf_reference, cfg.threads);
                step_in_place(interacting, prm, cfg.integ, noise, mf_interacting, cfg.threads);
                if (ref_mode == ChaosReference::frozen)
                    step_in_place(big_ref, prm, cfg.integ, big_noise, mf_big, cfg.threads);
                record(s + 1);
            }

            double w2 = 0.0;
            if (e_max > 0.0) {
                w2 = n <= kW2CostGuard
                         ? w2_exact(cloud_a, cloud_b, GroundMetric::euclidean(), cfg.threads)
                         : w2_sliced(cloud_a, cloud_b, 256, cfg.seed);
            }
            e_reps[r].values.push_back(e_max);
            w2_reps[r].values.push_back(w2);
            e_mean[ni] += e_max / cfg.replicates;
            if (ni + 1 == sweep.size() && r == 0) {
                profile.columns.push_back({"diff_sq_mean", profile_vals});
                rep.scalars.emplace_back("profile_time_of_max", t_max);
                double late = 0.0;
                for (std::size_t i = 0; i < sample_times.size(); ++i)
                    if (sample_times[i] >= 0.75 * cfg.integ.t_end)
                        late = std::max(late, profile_vals[i]);
                rep.scalars.emplace_back("profile_late_fraction", e_max > 0 ? late / e_max : 0.0);
            }
        }
    }

    for (auto& c : e_reps) sg.columns.push_back(std::move(c));
    for (auto& c : w2_reps) sg.columns.push_back(std::move(c));
    sg.columns.push_back({"e_mean", e_mean});
    rep.groups.push_back(std::move(sg));
    rep.groups.push_back(std::move(profile));

    rep.verdicts = chaos_verdicts(rep.groups.front(), &rep.fits);
    return rep;
}

}  // namespace vlasim
