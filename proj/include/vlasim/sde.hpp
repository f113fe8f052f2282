#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "vlasim/ensemble.hpp"
#include "vlasim/lyapunov.hpp"
#include "vlasim/meanfield.hpp"
#include "vlasim/model.hpp"
#include "vlasim/ratefit.hpp"
#include "vlasim/rng.hpp"

namespace vlasim {

enum class Scheme { euler_maruyama, ou_splitting };
const char* scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);  // throws ConfigError

struct IntegratorConfig {
    double dt = 1e-2;
    Scheme scheme = Scheme::euler_maruyama;
    double t_end = 20.0;

    void validate() const;  // dt > 0, dt <= t_end
    long total_steps() const;
};

// Advances the ensemble by one step in place. The mean-field term is frozen
// at step start for all particles; each particle consumes exactly one
// Gaussian d-vector from the source, addressed by (particle, step_count).
// Throws NonFiniteState if any updated component is not finite.
void step_in_place(ParticleEnsemble& ens, const ModelParams& params, const IntegratorConfig& cfg,
                   const GaussianSource& noise, const MeanFieldProvider& mf, int threads = 1);

// Value-semantics wrapper around step_in_place.
ParticleEnsemble step_ensemble(const ParticleEnsemble& ens, const ModelParams& params,
                               const IntegratorConfig& cfg, const GaussianSource& noise,
                               const MeanFieldProvider& mf, int threads = 1);

struct CoupledSample {
    double time = 0.0;
    double mean_q2 = 0.0;   // averages of |q_t|^2, |p_t|^2, |z_t|^2 over pairs
    double mean_p2 = 0.0;
    double mean_z2 = 0.0;
    double mean_form = 0.0; // average of Q(difference) when a form is given
};

struct CoupledRun {
    std::vector<CoupledSample> samples;
    std::vector<double> snapshot_times;
    std::vector<std::pair<ParticleEnsemble, ParticleEnsemble>> snapshots;
};

// Synchronous coupling: advances both ensembles with identical noise streams
// per particle index, so the pairwise difference obeys the noise-free
// difference dynamic. Each ensemble self-interacts through its own empirical
// measure.
CoupledRun run_coupled(const ParticleEnsemble& ens_a0, const ParticleEnsemble& ens_b0,
                       const ModelParams& params, const IntegratorConfig& cfg, std::uint64_t seed,
                       std::uint32_t noise_dom, const std::vector<double>& sample_times,
                       const QuadraticForm* form = nullptr,
                       const std::vector<double>& snapshot_times = {}, int threads = 1);

struct StrongOrderResult {
    std::vector<double> dts;
    std::vector<double> errors;  // RMS endpoint error vs the refined reference
    RateFit fit;                 // log-log slope
};

// Self-convergence study on the closed linear system (B = 0 required): all
// runs share Brownian paths with a reference grid 8x finer than the smallest
// dt (coarse increments are sums of fine ones). `noise_override` replaces the
// Philox fine-grid noise (e.g. ZeroSource turns the study into an ODE one).
StrongOrderResult strong_order_check(const ModelParams& params, Scheme scheme, double t_end,
                                     std::vector<double> dt_list, int n_paths, std::uint64_t seed,
                                     const GaussianSource* noise_override = nullptr);

}  // namespace vlasim
