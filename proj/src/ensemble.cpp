#include "vlasim/ensemble.hpp"

#include <cmath>

#include "vlasim/errors.hpp"
#include "vlasim/rng.hpp"

namespace vlasim {

State ParticleEnsemble::state(std::size_t i) const {
    if (i >= size()) throw SizeMismatch("particle index " + std::to_string(i) + " out of range");
    State s(dim);
    for (int k = 0; k < dim; ++k) {
        s.q[k] = q[i * dim + k];
        s.p[k] = p[i * dim + k];
        s.z[k] = z[i * dim + k];
    }
    return s;
}

void ParticleEnsemble::set_state(std::size_t i, const State& s) {
    if (i >= size()) throw SizeMismatch("particle index " + std::to_string(i) + " out of range");
    if (s.dim() != dim) throw DimensionMismatch("set_state: state dimension != ensemble dimension");
    for (int k = 0; k < dim; ++k) {
        q[i * dim + k] = s.q[k];
        p[i * dim + k] = s.p[k];
        z[i * dim + k] = s.z[k];
    }
}

bool ParticleEnsemble::finite() const {
    for (const auto* comp : {&q, &p, &z})
        for (double v : *comp)
            if (!std::isfinite(v)) return false;
    return true;
}

std::vector<double> ParticleEnsemble::component_means() const {
    const std::size_t n = size();
    std::vector<double> out(3 * dim, 0.0);
    if (n == 0) return out;
    for (std::size_t i = 0; i < n; ++i)
        for (int k = 0; k < dim; ++k) {
            out[k] += q[i * dim + k];
            out[dim + k] += p[i * dim + k];
            out[2 * dim + k] += z[i * dim + k];
        }
    for (double& v : out) v /= static_cast<double>(n);
    return out;
}

ParticleEnsemble ParticleEnsemble::gaussian_blob(std::size_t n, int dim, double center_q,
                                                 double center_p, double center_z, double scale,
                                                 std::uint64_t seed, std::uint32_t domain) {
    if (n < 1) throw ConfigError("ensemble needs at least one particle");
    if (dim < 1) throw ConfigError("ensemble dimension must be >= 1");
    ParticleEnsemble ens(n, dim);
    std::vector<double> draw(3 * dim);
    for (std::size_t i = 0; i < n; ++i) {
        philox_gaussians(seed, domain, static_cast<std::uint32_t>(i), 0, draw);
        for (int k = 0; k < dim; ++k) {
            ens.q[i * dim + k] = center_q + scale * draw[k];
            ens.p[i * dim + k] = center_p + scale * draw[dim + k];
            ens.z[i * dim + k] = center_z + scale * draw[2 * dim + k];
        }
    }
    return ens;
}

}  // namespace vlasim
