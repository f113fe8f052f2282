#include "vlasim/model.hpp"

#include <cmath>

#include "test_util.hpp"
#include "vlasim/errors.hpp"
#include "vlasim/rng.hpp"

using namespace vlasim;

static void force_fixtures() {
    std::vector<double> q = {1.0, 0.0, 0.0};
    auto f = eval_force(ForceSpec::linear(2.0), q);
    CHECK(f[0] == 2.0 && f[1] == 0.0 && f[2] == 0.0);

    q = {0.0, 0.0, 0.0};
    f = eval_force(ForceSpec::tanh_saturating(1.0), q);
    CHECK(f[0] == 0.0 && f[1] == 0.0 && f[2] == 0.0);

    const double half_pi = std::acos(0.0);
    q = {half_pi, 0.0};
    f = eval_force(ForceSpec::sine(0.5), q);
    CHECK_NEAR(f[0], 0.5, 1e-15);
    CHECK(f[1] == 0.0);
}

static void lipschitz_fixtures() {
    CHECK(lipschitz_constant(ForceSpec::zero()) == 0.0);
    CHECK(lipschitz_constant(ForceSpec::linear(-3.0)) == 3.0);
    CHECK(lipschitz_constant(ForceSpec::sine(0.7)) == 0.7);
    CHECK(lipschitz_constant(ForceSpec::tanh_saturating(-1.5)) == 1.5);
}

static void contract_checks() {
    auto r1 = check_force_contracts(ForceSpec::linear(1.0), 100, 10.0, 1);
    CHECK(r1.ok());
    CHECK(r1.samples_checked == 100);

    auto r2 = check_force_contracts(ForceSpec::sine(2.0), 1000, 100.0, 7);
    CHECK(r2.ok());

    auto r3 = check_force_contracts(ForceSpec::zero(), 10, 1.0, 0);
    CHECK(r3.ok());

    auto r4 = check_force_contracts(ForceSpec::tanh_saturating(0.9), 500, 50.0, 3);
    CHECK(r4.ok());

    CHECK_THROWS(check_force_contracts(ForceSpec::zero(), 0, 1.0, 0), ConfigError);
    CHECK_THROWS(check_force_contracts(ForceSpec::zero(), 5, -1.0, 0), ConfigError);
}

static void sampled_odd_and_lipschitz_properties() {
    // The module invariants, sampled directly rather than through the
    // reporting helper.
    for (auto spec : {ForceSpec::linear(2.5), ForceSpec::tanh_saturating(1.2), ForceSpec::sine(0.6)}) {
        const double lip = lipschitz_constant(spec);
        std::vector<double> x(3), y(3), fx(3), fy(3), fneg(3);
        for (int s = 0; s < 300; ++s) {
            philox_gaussians(99, 0, static_cast<uint32_t>(s), 0, x);
            philox_gaussians(99, 0, static_cast<uint32_t>(s), 1, y);
            for (double& v : x) v *= 5.0;
            for (double& v : y) v *= 5.0;
            spec.eval_into(x, fx);
            spec.eval_into(y, fy);
            double num = 0.0, den = 0.0;
            for (int k = 0; k < 3; ++k) {
                num += (fx[k] - fy[k]) * (fx[k] - fy[k]);
                den += (x[k] - y[k]) * (x[k] - y[k]);
            }
            CHECK(std::sqrt(num) <= lip * std::sqrt(den) + 1e-9);

            std::vector<double> neg = {-x[0], -x[1], -x[2]};
            spec.eval_into(neg, fneg);
            for (int k = 0; k < 3; ++k) CHECK(std::fabs(fneg[k] + fx[k]) <= 1e-12);
        }
    }
}

static void drift_fixtures() {
    ModelParams prm;  // alpha = beta = lambda = 1, d = 1, A = B = zero
    State s(1);
    std::vector<double> mf = {0.0};

    auto d0 = drift(s, prm, mf);
    CHECK(d0.dq[0] == 0.0 && d0.dp[0] == 0.0 && d0.dz[0] == 0.0);

    s.q = {1.0};
    auto d1 = drift(s, prm, mf);
    CHECK(d1.dq[0] == 0.0 && d1.dp[0] == -1.0 && d1.dz[0] == 0.0);

    ModelParams prm2 = prm;
    prm2.lambda = 2.0;
    prm2.alpha = 3.0;
    State s2(1);
    s2.p = {1.0};
    s2.z = {1.0};
    auto d2 = drift(s2, prm2, mf);
    CHECK(d2.dq[0] == 1.0);
    CHECK(d2.dp[0] == 2.0);   // lambda z
    CHECK(d2.dz[0] == -5.0);  // -lambda p - alpha z

    State bad(2);
    CHECK_THROWS(drift(bad, prm, mf), DimensionMismatch);
}

static void drift_superposition() {
    // Linear in the state for zero/linear A with the mean-field term fixed.
    ModelParams prm;
    prm.dim = 2;
    prm.force_a = ForceSpec::linear(0.7);
    prm.alpha = 1.3;
    prm.beta = 0.4;
    prm.lambda = 2.1;
    std::vector<double> mf = {0.3, -0.2};

    State s1(2), s2(2), sum(2), zero(2);
    std::vector<double> r(12);
    philox_gaussians(31, 0, 0, 0, r);
    for (int k = 0; k < 2; ++k) {
        s1.q[k] = r[k]; s1.p[k] = r[2 + k]; s1.z[k] = r[4 + k];
        s2.q[k] = r[6 + k]; s2.p[k] = r[8 + k]; s2.z[k] = r[10 + k];
        sum.q[k] = s1.q[k] + s2.q[k];
        sum.p[k] = s1.p[k] + s2.p[k];
        sum.z[k] = s1.z[k] + s2.z[k];
    }
    auto dsum = drift(sum, prm, mf);
    auto d1 = drift(s1, prm, mf);
    auto d2 = drift(s2, prm, mf);
    auto dz = drift(zero, prm, mf);
    for (int k = 0; k < 2; ++k) {
        CHECK_REL(dsum.dq[k], d1.dq[k] + d2.dq[k] - dz.dq[k], 1e-12);
        CHECK_REL(dsum.dp[k], d1.dp[k] + d2.dp[k] - dz.dp[k], 1e-12);
        CHECK_REL(dsum.dz[k], d1.dz[k] + d2.dz[k] - dz.dz[k], 1e-12);
    }
}

static void params_validation() {
    ModelParams prm;
    prm.alpha = 0.0;
    CHECK_THROWS(prm.validate(), ConfigError);
    prm.alpha = 1.0;
    prm.dim = 0;
    CHECK_THROWS(prm.validate(), ConfigError);
    prm.dim = 1;
    prm.validate();
    CHECK(prm.eta() == 0.0);
    prm.force_a = ForceSpec::sine(0.25);
    prm.force_b = ForceSpec::linear(-0.5);
    CHECK_NEAR(prm.eta(), 0.75, 1e-15);
}

int main() {
    force_fixtures();
    lipschitz_fixtures();
    contract_checks();
    sampled_odd_and_lipschitz_properties();
    drift_fixtures();
    drift_superposition();
    params_validation();
    return testutil::summarize("test_model");
}
