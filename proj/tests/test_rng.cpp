#include "vlasim/rng.hpp"

#include <cmath>
#include <set>
#include <vector>

#include "test_util.hpp"

using namespace vlasim;

// Published known-answer vectors for the 10-round philox4x32 block function.
static void known_answer_vectors() {
    auto r0 = philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(r0[0] == 0x6627e8d5u);
    CHECK(r0[1] == 0xe169c58du);
    CHECK(r0[2] == 0xbc57ac4cu);
    CHECK(r0[3] == 0x9b00dbd8u);

    auto r1 = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                         {0xffffffffu, 0xffffffffu});
    CHECK(r1[0] == 0x408f276du);
    CHECK(r1[1] == 0x41c83b0eu);
    CHECK(r1[2] == 0xa20bc7c6u);
    CHECK(r1[3] == 0x6d5451fdu);

    auto r2 = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                         {0xa4093822u, 0x299f31d0u});
    CHECK(r2[0] == 0xd16cfe09u);
    CHECK(r2[1] == 0x94fdccebu);
    CHECK(r2[2] == 0x5001e420u);
    CHECK(r2[3] == 0x24126ea1u);
}

static void deterministic_and_distinct_streams() {
    std::vector<double> a(7), b(7);
    philox_gaussians(42, 0, 3, 17, a);
    philox_gaussians(42, 0, 3, 17, b);
    CHECK(a == b);  // bit-exact reproducibility

    philox_gaussians(42, 0, 4, 17, b);
    CHECK(a != b);  // particle index changes the stream
    philox_gaussians(42, 0, 3, 18, b);
    CHECK(a != b);  // step changes the stream
    philox_gaussians(42, 1, 3, 17, b);
    CHECK(a != b);  // domain changes the stream
    philox_gaussians(43, 0, 3, 17, b);
    CHECK(a != b);  // seed changes the stream

    // Streams for distinct (particle, step) pairs never collide.
    std::set<double> seen;
    std::vector<double> d(1);
    for (uint32_t particle = 0; particle < 50; ++particle)
        for (uint32_t step = 0; step < 50; ++step) {
            philox_gaussians(7, 0, particle, step, d);
            seen.insert(d[0]);
        }
    CHECK(seen.size() == 2500);
}

static void gaussian_moments() {
    const std::size_t n = 200000;
    std::vector<double> buf(4);
    double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
    for (std::size_t i = 0; i < n / 4; ++i) {
        philox_gaussians(123, 0, static_cast<uint32_t>(i), 0, buf);
        for (double g : buf) {
            sum += g;
            sum2 += g * g;
            sum4 += g * g * g * g;
        }
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    const double kurt = sum4 / n / (var * var);
    CHECK_NEAR(mean, 0.0, 5.0 / std::sqrt(static_cast<double>(n)));
    CHECK_NEAR(var, 1.0, 5.0 * std::sqrt(2.0 / n));
    CHECK_NEAR(kurt, 3.0, 0.15);
}

static void uniform_basics() {
    double u = philox_uniform(9, 4, 0, 0);
    CHECK(u >= 0.0 && u < 1.0);
    CHECK(philox_uniform(9, 4, 0, 0) == u);
    CHECK(philox_uniform(9, 4, 1, 0) != u);

    double acc = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) acc += philox_uniform(9, 4, static_cast<uint32_t>(i), 0);
    CHECK_NEAR(acc / n, 0.5, 5.0 / std::sqrt(12.0 * n));
}

static void source_hooks() {
    ZeroSource zero;
    std::vector<double> v(3, 99.0);
    zero.fill(0, 0, v);
    CHECK(v[0] == 0.0 && v[1] == 0.0 && v[2] == 0.0);
    ConstSource ones(1.0);
    ones.fill(5, 7, v);
    CHECK(v[0] == 1.0 && v[2] == 1.0);
    PhiloxSource ph(11, 2);
    std::vector<double> w(3);
    ph.fill(5, 7, v);
    philox_gaussians(11, 2, 5, 7, w);
    CHECK(v == w);
}

int main() {
    known_answer_vectors();
    deterministic_and_distinct_streams();
    gaussian_moments();
    uniform_basics();
    source_hooks();
    return testutil::summarize("test_rng");
}
