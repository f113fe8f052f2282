#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace vlasim {

// Counter-based RNG: Philox4x32-10. A draw is a pure function of
// (seed, domain, particle, step), so trajectories are reproducible
// bit-exactly regardless of thread schedule, and coupled systems share
// Brownian increments simply by sharing the key/counter coordinates.
//
// Domains keep independent purposes (dynamics noise, initial draws,
// projection directions, ...) on non-overlapping streams.

std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        const std::array<std::uint32_t, 2>& key);

// Fills `out` with i.i.d. standard Gaussians for the given coordinates.
void philox_gaussians(std::uint64_t seed, std::uint32_t domain, std::uint32_t particle,
                      std::uint32_t step, std::span<double> out);

// One uniform double in [0, 1) addressed by (seed, domain, index, slot).
double philox_uniform(std::uint64_t seed, std::uint32_t domain, std::uint32_t index,
                      std::uint32_t slot);

// Per-step Gaussian supplier for the integrators. The Philox-backed
// implementation is the production path; the others are test hooks for
// probing schemes with pinned noise.
class GaussianSource {
  public:
    virtual ~GaussianSource() = default;
    virtual void fill(std::uint32_t particle, std::uint32_t step, std::span<double> out) const = 0;
};

class PhiloxSource final : public GaussianSource {
  public:
    PhiloxSource(std::uint64_t seed, std::uint32_t domain) : seed_(seed), domain_(domain) {}
    void fill(std::uint32_t particle, std::uint32_t step, std::span<double> out) const override {
        philox_gaussians(seed_, domain_, particle, step, out);
    }
    std::uint64_t seed() const { return seed_; }
    std::uint32_t domain() const { return domain_; }

  private:
    std::uint64_t seed_;
    std::uint32_t domain_;
};

class ZeroSource final : public GaussianSource {
  public:
    void fill(std::uint32_t, std::uint32_t, std::span<double> out) const override {
        for (double& v : out) v = 0.0;
    }
};

class ConstSource final : public GaussianSource {
  public:
    explicit ConstSource(double value) : value_(value) {}
    void fill(std::uint32_t, std::uint32_t, std::span<double> out) const override {
        for (double& v : out) v = value_;
    }

  private:
    double value_;
};

// Stream domain conventions used by the runners. A replicate index is
// folded into the high bits so replicates never share draws.
namespace noise_domain {
inline constexpr std::uint32_t dynamics = 0;
inline constexpr std::uint32_t init_a = 1;
inline constexpr std::uint32_t init_b = 2;
inline constexpr std::uint32_t slicing = 3;
inline constexpr std::uint32_t contracts = 4;
inline constexpr std::uint32_t reference_dynamics = 5;
inline constexpr std::uint32_t reference_init = 6;

inline std::uint32_t with_replicate(std::uint32_t purpose, int replicate) {
    return purpose | (static_cast<std::uint32_t>(replicate) << 8);
}
}  // namespace noise_domain

}  // namespace vlasim
