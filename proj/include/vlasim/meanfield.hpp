#pragma once

#include <span>
#include <vector>

#include "vlasim/ensemble.hpp"
#include "vlasim/linalg.hpp"
#include "vlasim/model.hpp"

namespace vlasim {

// Sampled mean trajectory t -> E(Q,P,Z) in R^{3d}, linearly interpolated.
struct MeanTrajectory {
    int dim = 1;
    std::vector<double> times;    // strictly increasing grid
    std::vector<double> values;   // times.size() * 3*dim, row per time

    void value_at(double t, std::span<double> out) const;  // out has length 3*dim
    std::vector<double> q_mean_at(double t) const;         // first d components
};

// The interaction term B * mu(q) in its three realizations:
//   empirical        - against the stepped ensemble's own snapshot (Eq. of the
//                      interacting system); O(N) fast path for linear B.
//   linear_exact     - kappa (q - m_Q(t)) against the exact mean trajectory.
//   frozen_reference - against a separate reference ensemble snapshot.
class MeanFieldProvider {
  public:
    enum class Mode { none, empirical, linear_exact, frozen_reference };

    static MeanFieldProvider none();
    static MeanFieldProvider empirical(const ForceSpec& force_b);
    static MeanFieldProvider linear_exact(double kappa, const MeanTrajectory* mean);
    static MeanFieldProvider frozen_reference(const ForceSpec& force_b,
                                              const ParticleEnsemble* reference);

    Mode mode() const { return mode_; }

    // Interaction terms for every particle of `ens`, evaluated against the
    // snapshot frozen at step start. `out` is resized to N*d.
    void compute_terms(const ParticleEnsemble& ens, std::vector<double>& out, int threads) const;

  private:
    Mode mode_ = Mode::none;
    ForceSpec force_b_;
    double kappa_ = 0.0;
    const MeanTrajectory* mean_ = nullptr;
    const ParticleEnsemble* reference_ = nullptr;
};

// (1/N) sum_j B(q_i - q_j) over the ensemble's own positions; the j = i term
// contributes B(0) = 0 for odd B. Uses the O(N) mean identity for linear B.
std::vector<double> empirical_interaction(std::size_t i, const ParticleEnsemble& ens,
                                          const ForceSpec& force_b);

// (1/M) sum_j B(q - q_j) against a reference ensemble.
std::vector<double> reference_interaction(std::span<const double> q, const ParticleEnsemble& ref,
                                          const ForceSpec& force_b);

// kappa (q - m_Q(t)) against a mean trajectory; linear B only.
std::vector<double> reference_interaction(std::span<const double> q, const MeanTrajectory& mean,
                                          const ForceSpec& force_b, double t);

// Classical one-step 4th-order integration of the closed mean ODE
//   dm_Q = m_P, dm_P = -(beta + c_A) m_Q + lambda m_Z, dm_Z = -lambda m_P - alpha m_Z,
// valid when A is zero/linear and B is linear (the interaction cancels in the
// mean). m0 has length 3*dim.
MeanTrajectory integrate_mean_ode(const ModelParams& params, std::vector<double> m0, double t_end,
                                  double dt);

// Per-coordinate stationary covariance of the mean-field process in the
// linear case: solves M S + S M^T + diag(0,0,2) = 0 with
// M = [[0,1,0],[-beta_eff,0,lambda],[0,-lambda,-alpha]], beta_eff = beta + c_A + kappa.
Sym3 stationary_covariance_oracle(const ModelParams& params, double kappa);

}  // namespace vlasim
