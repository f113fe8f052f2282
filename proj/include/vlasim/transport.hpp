#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vlasim/ensemble.hpp"
#include "vlasim/lyapunov.hpp"

namespace vlasim {

// Uniformly weighted atoms in R^{3d}, one row of (q, p, z) per particle.
struct EmpiricalMeasure {
    int dim = 1;                  // d; points live in R^{3d}
    std::vector<double> points;   // N * 3*dim

    std::size_t size() const { return dim > 0 ? points.size() / (3 * static_cast<std::size_t>(dim)) : 0; }
    std::span<const double> point(std::size_t i) const {
        const std::size_t w = 3 * static_cast<std::size_t>(dim);
        return {points.data() + i * w, w};
    }
    static EmpiricalMeasure from_ensemble(const ParticleEnsemble& ens);
};

struct GroundMetric {
    enum class Kind { euclidean_sq, qform };
    Kind kind = Kind::euclidean_sq;
    QuadraticForm form;  // used when kind == qform; must be positive definite

    static GroundMetric euclidean() { return {}; }
    static GroundMetric qform_metric(const QuadraticForm& f);  // throws NotPositiveDefinite

    double cost(std::span<const double> x, std::span<const double> y, int dim) const;
};

// Exact Jonker-Volgenant solve of the square linear assignment problem;
// cost is row-major n x n. Fills rowsol (column assigned to each row) and
// returns the minimum total cost.
double solve_assignment(std::size_t n, const double* cost, std::vector<int>& rowsol);

inline constexpr std::size_t kW2CostGuard = 4096;

// Exact empirical W2: sqrt of the optimal mean assignment cost. Equal sizes
// required; N <= 4096 (cost guard).
double w2_exact(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                const GroundMetric& metric = GroundMetric::euclidean(), int threads = 1);

// Sliced estimator: averages squared 1-D Wasserstein distances over random
// unit directions. A lower-bound-flavored proxy for trend fitting only.
double w2_sliced(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, int n_projections,
                 std::uint64_t seed);

// Deterministic-direction variant (directions are rows of length 3*dim).
double w2_sliced_directions(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                            std::span<const double> directions);

struct W2QBoundsReport {
    double w2 = 0.0;
    double w2q = 0.0;
    double c_lo = 0.0, c_hi = 0.0;   // extreme eigenvalues of the form block
    double slack_lo = 0.0, slack_hi = 0.0;
    bool ok = false;                 // sqrt(c_lo) W2 <= W2Q <= sqrt(c_hi) W2
};

// Checks the norm-equivalence sandwich between the plain and Q-weighted
// distances on a concrete pair of empirical measures.
W2QBoundsReport w2q_bounds_check(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                                 const QuadraticForm& form);

}  // namespace vlasim
