#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vlasim/lyapunov.hpp"
#include "vlasim/model.hpp"
#include "vlasim/ratefit.hpp"
#include "vlasim/sde.hpp"

namespace vlasim {

struct InitialBlob {
    double center_q = 0.0, center_p = 0.0, center_z = 0.0;
    double scale = 1.0;
    bool operator==(const InitialBlob&) const = default;
};

enum class ChaosReference { auto_select, exact_mean, frozen };

struct ExperimentConfig {
    ModelParams params;
    IntegratorConfig integ{1e-2, Scheme::euler_maruyama, 20.0};
    std::size_t n_particles = 4096;
    std::uint64_t seed = 1;
    int replicates = 3;
    int threads = 1;
    bool force = false;                    // run past the eta0 gate anyway
    InitialBlob blob_a;
    InitialBlob blob_b;
    std::optional<double> a3_tilde = 1.0;  // contraction form; nullopt = maximize eta0
    double fit_window_lo = 1.0;            // contraction fit starts here
    std::vector<double> sample_times;      // empty = uniform default grid
    std::vector<double> w2_times;          // empty = five evenly spaced times
    std::vector<std::size_t> n_sweep{16, 64, 256, 1024};
    ChaosReference chaos_reference = ChaosReference::auto_select;
    double mean_ode_dt = 1e-3;
    std::size_t reference_multiplier = 16;

    void validate() const;
};

struct SeriesColumn {
    std::string name;
    std::vector<double> values;
};

// One axis (time, or N for the chaos sweep) with aligned columns.
struct SeriesGroup {
    std::string axis_name;
    std::vector<double> axis;
    std::vector<SeriesColumn> columns;

    const SeriesColumn* find(const std::string& name) const;
};

struct Verdict {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct NamedFit {
    std::string name;
    RateFit fit;
};

struct ExperimentReport {
    std::string experiment;
    std::vector<SeriesGroup> groups;
    std::vector<NamedFit> fits;
    std::vector<Margin> margins;
    std::vector<Verdict> verdicts;
    std::vector<std::pair<std::string, double>> scalars;
    std::vector<std::string> warnings;

    bool all_pass() const;
    const SeriesGroup* group(const std::string& axis_name) const;
    double scalar(const std::string& name) const;  // throws if missing
};

ExperimentReport run_contraction(const ExperimentConfig& cfg);
ExperimentReport run_stationarity(const ExperimentConfig& cfg);
ExperimentReport run_moments(const ExperimentConfig& cfg);
ExperimentReport run_chaos(const ExperimentConfig& cfg);

// Verdict rules as pure functions of stored series, so reports can be
// re-judged offline from their CSVs.
std::vector<Verdict> contraction_verdicts(const SeriesGroup& time_group, double fit_window_lo,
                                          std::vector<NamedFit>* fits_out = nullptr);
std::vector<Verdict> chaos_verdicts(const SeriesGroup& sweep_group,
                                    std::vector<NamedFit>* fits_out = nullptr);

}  // namespace vlasim
