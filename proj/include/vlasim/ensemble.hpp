#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vlasim/model.hpp"

namespace vlasim {

// N particle states in R^{3d}, stored as contiguous per-component arrays of
// length N*d. Exclusively owned by one controller between steps.
struct ParticleEnsemble {
    int dim = 1;
    std::vector<double> q, p, z;
    double time = 0.0;
    long step_count = 0;

    ParticleEnsemble() = default;
    ParticleEnsemble(std::size_t n, int d) : dim(d), q(n * d, 0.0), p(n * d, 0.0), z(n * d, 0.0) {}

    std::size_t size() const { return dim > 0 ? q.size() / static_cast<std::size_t>(dim) : 0; }

    State state(std::size_t i) const;
    void set_state(std::size_t i, const State& s);

    std::span<const double> q_of(std::size_t i) const { return {q.data() + i * dim, static_cast<std::size_t>(dim)}; }
    std::span<const double> p_of(std::size_t i) const { return {p.data() + i * dim, static_cast<std::size_t>(dim)}; }
    std::span<const double> z_of(std::size_t i) const { return {z.data() + i * dim, static_cast<std::size_t>(dim)}; }

    bool finite() const;

    // Component means over particles: out has length 3*dim (q, p, z parts).
    std::vector<double> component_means() const;

    // Isotropic Gaussian blob: every q component centered at center_q, etc.
    static ParticleEnsemble gaussian_blob(std::size_t n, int dim, double center_q, double center_p,
                                          double center_z, double scale, std::uint64_t seed,
                                          std::uint32_t domain);
};

}  // namespace vlasim
