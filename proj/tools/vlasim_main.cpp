// Command-line surface: experiment runners plus the lyapunov / w2 / validate
// utilities. Exit codes: 0 all verdicts pass, 1 usage or config error
// (including an eta >= eta0 refusal), 2 verdict failure, 3 runtime error.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "vlasim/errors.hpp"
#include "vlasim/experiments.hpp"
#include "vlasim/io.hpp"
#include "vlasim/lyapunov.hpp"
#include "vlasim/meanfield.hpp"
#include "vlasim/parallel.hpp"
#include "vlasim/sde.hpp"
#include "vlasim/transport.hpp"

namespace fs = std::filesystem;
using namespace vlasim;

namespace {

struct RunOpts {
    std::string config_path;
    std::string out_dir;
    std::string seed_str;
    int threads = 0;
    bool force = false;
    bool plots = false;
    bool no_plots = false;
};

void add_run_options(CLI::App* cmd, RunOpts& opts) {
    cmd->add_option("--config", opts.config_path, "config file (see --print-defaults)");
    cmd->add_option("--out", opts.out_dir, "output directory override");
    cmd->add_option("--seed", opts.seed_str, "master seed override");
    cmd->add_option("--threads", opts.threads, "worker threads (default: VLASIM_THREADS or 1)");
    cmd->add_flag("--force", opts.force, "run even if eta >= eta0");
    cmd->add_flag("--plots", opts.plots, "emit SVG plots");
    cmd->add_flag("--no-plots", opts.no_plots, "suppress SVG plots");
}

struct Prepared {
    LoadedConfig loaded;
    std::string config_echo;
};

Prepared prepare(const RunOpts& opts) {
    Prepared p;
    std::string text;
    if (opts.config_path.empty()) {
        text = default_config_text();
        p.loaded = experiment_config_from(parse_config_text(text, "<defaults>"));
    } else {
        std::ifstream in(opts.config_path, std::ios::binary);
        if (!in) throw ConfigError("cannot open config file '" + opts.config_path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
        p.loaded = experiment_config_from(parse_config_text(text, opts.config_path));
    }
    if (!opts.seed_str.empty()) {
        std::uint64_t s = 0;
        auto res = std::from_chars(opts.seed_str.data(), opts.seed_str.data() + opts.seed_str.size(), s);
        if (res.ec != std::errc() || res.ptr != opts.seed_str.data() + opts.seed_str.size())
            throw ConfigError("--seed must be an unsigned integer");
        p.loaded.experiment.seed = s;
        text += "# override: seed = " + opts.seed_str + "\n";
    }
    if (opts.threads > 0) {
        p.loaded.experiment.threads = opts.threads;
        text += "# override: threads = " + std::to_string(opts.threads) + "\n";
    } else {
        p.loaded.experiment.threads = default_thread_count();
    }
    if (opts.force) {
        p.loaded.experiment.force = true;
        text += "# override: force = true\n";
    }
    if (!opts.out_dir.empty()) p.loaded.output.dir = opts.out_dir;
    if (opts.plots) p.loaded.output.plots = true;
    if (opts.no_plots) p.loaded.output.plots = false;
    p.config_echo = text;
    return p;
}

void print_verdicts(const ExperimentReport& rep) {
    for (const auto& w : rep.warnings) std::cout << "[WARN] " << w << "\n";
    for (const auto& v : rep.verdicts) {
        std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << rep.experiment << "/" << v.name << ": value "
                  << format_double(v.value) << " vs threshold " << format_double(v.threshold) << " ("
                  << v.detail << ")\n";
    }
    for (const auto& f : rep.fits)
        std::cout << "[FIT] " << f.name << ": slope " << format_double(f.fit.slope) << ", r^2 "
                  << format_double(f.fit.r_squared) << "\n";
}

int emit_run(const ExperimentReport& rep, const Prepared& p,
             const std::vector<std::string>& extra_files = {}) {
    const std::string& dir = p.loaded.output.dir;
    fs::create_directories(dir);
    const std::string started = timestamp_utc_now();

    std::vector<ManifestEntry> files;
    auto track = [&](const std::string& name) {
        const std::string full = dir + "/" + name;
        files.push_back({name, static_cast<std::uint64_t>(fs::file_size(full)), fnv1a64_file(full)});
    };
    for (const auto& name : extra_files) track(name);

    write_series_csv(rep, dir + "/series.csv");
    track("series.csv");
    write_report_json(rep, p.config_echo, p.loaded.experiment.seed, dir + "/report.json");
    track("report.json");
    if (p.loaded.output.plots) {
        for (const auto& g : rep.groups) {
            bool log_x = g.axis_name == "N";
            bool log_y = g.axis_name == "N" ||
                         ((rep.experiment == "contraction" || rep.experiment == "chaos") &&
                          g.axis_name != "w2_time");
            const std::string name = "plot-" + g.axis_name + ".svg";
            write_series_svg(g, rep.experiment + " (" + g.axis_name + ")", log_x, log_y,
                             dir + "/" + name);
            track(name);
        }
    }
    write_manifest(dir, p.config_echo, p.loaded.experiment.seed, started, timestamp_utc_now(), files);

    print_verdicts(rep);
    std::cout << (rep.all_pass() ? "RESULT: pass" : "RESULT: fail") << " (outputs in " << dir << ")\n";
    return rep.all_pass() ? 0 : 2;
}

template <typename F>
int guarded(F&& f) {
    try {
        return f();
    } catch (const InfeasibleForEta& e) {
        std::cerr << "refused: " << e.what() << " (pass --force to run anyway)\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const SimError& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

// One-ensemble evolution; writes the sampled series and the final cloud.
int cmd_simulate(const RunOpts& opts) {
    Prepared p = prepare(opts);
    const ExperimentConfig& cfg = p.loaded.experiment;
    ExperimentReport rep = run_stationarity(cfg);
    rep.experiment = "simulate";
    rep.verdicts.clear();  // plain trajectory tool, nothing to judge

    fs::create_directories(p.loaded.output.dir);
    // re-run the final state deterministically for the cloud output
    auto ens = ParticleEnsemble::gaussian_blob(cfg.n_particles, cfg.params.dim,
                                               cfg.blob_a.center_q, cfg.blob_a.center_p,
                                               cfg.blob_a.center_z, cfg.blob_a.scale, cfg.seed,
                                               noise_domain::with_replicate(noise_domain::init_a, 0));
    PhiloxSource noise(cfg.seed, noise_domain::with_replicate(noise_domain::dynamics, 0));
    MeanFieldProvider mf = MeanFieldProvider::empirical(cfg.params.force_b);
    for (long s = 0; s < cfg.integ.total_steps(); ++s)
        step_in_place(ens, cfg.params, cfg.integ, noise, mf, cfg.threads);
    write_cloud_csv(EmpiricalMeasure::from_ensemble(ens), p.loaded.output.dir + "/cloud_final.csv");
    return emit_run(rep, p);
}

int cmd_couple(const RunOpts& opts) {
    Prepared p = prepare(opts);
    ExperimentConfig cfg = p.loaded.experiment;
    cfg.force = true;  // diagnostic tool: always runs, margins still reported
    ExperimentReport rep = run_contraction(cfg);
    rep.experiment = "couple";
    return emit_run(rep, p);
}

int cmd_lyapunov(double alpha, double beta, double lambda, const std::string& variant, double eta,
                 std::optional<double> a3t) {
    ModelParams prm;
    prm.alpha = alpha;
    prm.beta = beta;
    prm.lambda = lambda;
    CoefficientSolution sol;
    if (variant == "contraction") {
        sol = solve_contraction(prm, eta, a3t);
    } else if (variant == "second_moment") {
        sol = solve_second_moment(prm, eta);
    } else if (variant == "chaos") {
        sol = solve_chaos(prm, eta);
    } else {
        throw ConfigError("variant must be contraction, second_moment, or chaos");
    }
    std::cout << "variant = " << variant_name(sol.variant) << "\n"
              << "status = " << solve_status_name(sol.status) << "\n"
              << "a1 = " << format_double(sol.form.a1) << "\n"
              << "a2 = " << format_double(sol.form.a2) << "\n"
              << "a3 = " << format_double(sol.form.a3) << "\n"
              << "a4 = " << format_double(sol.form.a4) << "\n"
              << "a5 = " << format_double(sol.form.a5) << "\n"
              << "a3_tilde = " << format_double(sol.a3_tilde) << "\n"
              << "eta = " << format_double(sol.eta) << "\n"
              << "eta0 = " << format_double(sol.eta0) << "\n";
    auto minors = sol.form.minors();
    std::cout << "minors = " << format_double(minors[0]) << ", " << format_double(minors[1]) << ", "
              << format_double(minors[2]) << "\n";
    for (const auto& m : sol.margins)
        std::cout << "margin " << m.name << " = " << format_double(m.value) << "\n";
    if (sol.ok()) {
        auto [clo, chi] = equivalence_constants(sol.form);
        std::cout << "c_lo = " << format_double(clo) << "\nc_hi = " << format_double(chi) << "\n";
    }
    if (sol.status == SolveStatus::invalid_a3_tilde) return 1;
    return 0;
}

int cmd_w2(const std::string& file_a, const std::string& file_b, int sliced, std::uint64_t seed,
           int threads) {
    EmpiricalMeasure a = read_cloud(file_a);
    EmpiricalMeasure b = read_cloud(file_b);
    double w = sliced > 0 ? w2_sliced(a, b, sliced, seed)
                          : w2_exact(a, b, GroundMetric::euclidean(), threads);
    std::cout << format_double(w) << "\n";
    return 0;
}

int cmd_validate(const RunOpts& opts) {
    Prepared p = prepare(opts);
    const ModelParams& prm = p.loaded.experiment.params;
    bool pass = true;

    for (const auto& [label, spec] : {std::pair<const char*, ForceSpec>{"force_a", prm.force_a},
                                      {"force_b", prm.force_b}}) {
        auto rep = check_force_contracts(spec, 1000, 100.0, p.loaded.experiment.seed, prm.dim);
        std::cout << (rep.ok() ? "[PASS] " : "[FAIL] ") << label << " contracts ("
                  << force_kind_name(spec.kind) << "): " << rep.violations.size()
                  << " violations in " << rep.samples_checked << " samples\n";
        pass = pass && rep.ok();
    }

    ModelParams linear = prm;
    linear.force_b = ForceSpec::zero();
    std::vector<double> dts = {0.08, 0.04, 0.02, 0.01};
    auto em = strong_order_check(linear, Scheme::euler_maruyama, 2.0, dts, 256,
                                 p.loaded.experiment.seed);
    bool em_ok = em.fit.slope >= 0.8 && em.fit.slope <= 1.2;
    std::cout << (em_ok ? "[PASS] " : "[FAIL] ") << "euler_maruyama strong order: slope "
              << format_double(em.fit.slope) << " (expected [0.8, 1.2])\n";
    auto ou = strong_order_check(linear, Scheme::ou_splitting, 2.0, dts, 256,
                                 p.loaded.experiment.seed);
    bool ou_ok = ou.fit.slope >= em.fit.slope - 0.05;
    std::cout << (ou_ok ? "[PASS] " : "[FAIL] ") << "ou_splitting strong order: slope "
              << format_double(ou.fit.slope) << " (>= euler slope - 0.05)\n";
    pass = pass && em_ok && ou_ok;

    // Coupling null test: identical ensembles remain bitwise identical.
    auto ens = ParticleEnsemble::gaussian_blob(64, prm.dim, 0.5, 0.0, 0.0, 1.0,
                                               p.loaded.experiment.seed, noise_domain::init_a);
    IntegratorConfig ic{0.01, Scheme::euler_maruyama, 1.0};
    auto run = run_coupled(ens, ens, prm, ic, p.loaded.experiment.seed, noise_domain::dynamics,
                           {0.0, 0.5, 1.0});
    double max_diff = 0.0;
    for (const auto& s : run.samples)
        max_diff = std::max({max_diff, s.mean_q2, s.mean_p2, s.mean_z2});
    bool null_ok = max_diff == 0.0;
    std::cout << (null_ok ? "[PASS] " : "[FAIL] ") << "coupling null test: max difference "
              << format_double(max_diff) << " (must be exactly 0)\n";
    pass = pass && null_ok;

    std::cout << (pass ? "RESULT: pass" : "RESULT: fail") << "\n";
    return pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator for a mean-field kinetic dynamic with an auxiliary heat-bath "
                 "variable: coupled-pair contraction, stationarity, moment bounds, and "
                 "particle-approximation rate experiments."};
    app.require_subcommand(0, 1);
    bool print_defaults = false;
    app.add_flag("--print-defaults", print_defaults, "print the full default config and exit");

    RunOpts sim_opts, couple_opts, contraction_opts, stationary_opts, moments_opts, chaos_opts,
        validate_opts;
    auto* c_sim = app.add_subcommand("simulate", "evolve one ensemble; write series + final cloud");
    add_run_options(c_sim, sim_opts);
    auto* c_couple = app.add_subcommand("couple", "synchronously coupled pair; difference series");
    add_run_options(c_couple, couple_opts);
    auto* c_contr = app.add_subcommand("contraction", "coupled-pair decay experiment");
    add_run_options(c_contr, contraction_opts);
    auto* c_stat = app.add_subcommand("stationary", "stationary covariance experiment");
    add_run_options(c_stat, stationary_opts);
    auto* c_mom = app.add_subcommand("moments", "uniform-in-time second moment experiment");
    add_run_options(c_mom, moments_opts);
    auto* c_chaos = app.add_subcommand("chaos", "particle-approximation rate experiment");
    add_run_options(c_chaos, chaos_opts);
    auto* c_val = app.add_subcommand("validate", "force contracts + integrator order checks");
    add_run_options(c_val, validate_opts);

    double ly_alpha = 1.0, ly_beta = 1.0, ly_lambda = 1.0, ly_eta = 0.0;
    double ly_a3t = 0.0;
    std::string ly_variant = "contraction";
    auto* c_ly = app.add_subcommand("lyapunov", "coefficient solutions and eta0 threshold");
    c_ly->add_option("--alpha", ly_alpha, "friction on z")->capture_default_str();
    c_ly->add_option("--beta", ly_beta, "confinement strength")->capture_default_str();
    c_ly->add_option("--lambda", ly_lambda, "p-z coupling")->capture_default_str();
    c_ly->add_option("--eta", ly_eta, "C_A + C_B")->capture_default_str();
    c_ly->add_option("--variant", ly_variant, "contraction | second_moment | chaos")
        ->capture_default_str();
    auto* ly_a3t_opt = c_ly->add_option("--a3-tilde", ly_a3t, "fix a3_tilde (contraction only)");

    std::string w2_a, w2_b;
    int w2_sliced_n = 0, w2_threads = 0;
    std::uint64_t w2_seed = 1;
    auto* c_w2 = app.add_subcommand("w2", "Wasserstein-2 distance between two cloud files");
    c_w2->add_option("--a", w2_a, "first cloud CSV")->required();
    c_w2->add_option("--b", w2_b, "second cloud CSV")->required();
    c_w2->add_option("--sliced", w2_sliced_n, "use the sliced estimator with this many projections");
    c_w2->add_option("--seed", w2_seed, "projection seed for --sliced");
    c_w2->add_option("--threads", w2_threads, "cost matrix worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (print_defaults) {
        std::cout << default_config_text();
        return 0;
    }
    if (app.get_subcommands().empty()) {
        std::cout << app.help();
        return 1;
    }

    return guarded([&]() -> int {
        if (c_sim->parsed()) return cmd_simulate(sim_opts);
        if (c_couple->parsed()) return cmd_couple(couple_opts);
        if (c_contr->parsed()) {
            Prepared p = prepare(contraction_opts);
            return emit_run(run_contraction(p.loaded.experiment), p);
        }
        if (c_stat->parsed()) {
            Prepared p = prepare(stationary_opts);
            return emit_run(run_stationarity(p.loaded.experiment), p);
        }
        if (c_mom->parsed()) {
            Prepared p = prepare(moments_opts);
            return emit_run(run_moments(p.loaded.experiment), p);
        }
        if (c_chaos->parsed()) {
            Prepared p = prepare(chaos_opts);
            return emit_run(run_chaos(p.loaded.experiment), p);
        }
        if (c_val->parsed()) return cmd_validate(validate_opts);
        if (c_ly->parsed())
            return cmd_lyapunov(ly_alpha, ly_beta, ly_lambda, ly_variant, ly_eta,
                                ly_a3t_opt->count() ? std::optional<double>(ly_a3t) : std::nullopt);
        if (c_w2->parsed())
            return cmd_w2(w2_a, w2_b, w2_sliced_n, w2_seed,
                          w2_threads > 0 ? w2_threads : default_thread_count());
        std::cout << app.help();
        return 1;
    });
}
