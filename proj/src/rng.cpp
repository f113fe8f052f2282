#include "vlasim/rng.hpp"

#include <cmath>

namespace vlasim {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(prod >> 32);
    lo = static_cast<std::uint32_t>(prod);
}

// (0,1] from 53 random bits; never 0 so log() is safe.
inline double u64_to_unit_open(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

// [0,1) from 53 random bits.
inline double u64_to_unit_halfopen(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        const std::array<std::uint32_t, 2>& key) {
    std::uint32_t c0 = counter[0], c1 = counter[1], c2 = counter[2], c3 = counter[3];
    std::uint32_t k0 = key[0], k1 = key[1];
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, c0, hi0, lo0);
        mulhilo(kPhiloxM1, c2, hi1, lo1);
        std::uint32_t n0 = hi1 ^ c1 ^ k0;
        std::uint32_t n1 = lo1;
        std::uint32_t n2 = hi0 ^ c3 ^ k1;
        std::uint32_t n3 = lo0;
        c0 = n0; c1 = n1; c2 = n2; c3 = n3;
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return {c0, c1, c2, c3};
}

void philox_gaussians(std::uint64_t seed, std::uint32_t domain, std::uint32_t particle,
                      std::uint32_t step, std::span<double> out) {
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                              static_cast<std::uint32_t>(seed >> 32)};
    const double two_pi = 2.0 * 3.14159265358979323846;
    std::size_t i = 0;
    std::uint32_t block = 0;
    while (i < out.size()) {
        auto r = philox4x32({block, step, particle, domain}, key);
        std::uint64_t hi = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
        std::uint64_t lo = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
        double u1 = u64_to_unit_open(hi);
        double u2 = u64_to_unit_halfopen(lo);
        double amp = std::sqrt(-2.0 * std::log(u1));
        out[i++] = amp * std::cos(two_pi * u2);
        if (i < out.size()) out[i++] = amp * std::sin(two_pi * u2);
        ++block;
    }
}

double philox_uniform(std::uint64_t seed, std::uint32_t domain, std::uint32_t index,
                      std::uint32_t slot) {
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                              static_cast<std::uint32_t>(seed >> 32)};
    auto r = philox4x32({slot, 0xA110C8EDu, index, domain}, key);
    std::uint64_t bits = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
    return u64_to_unit_halfopen(bits);
}

}  // namespace vlasim
