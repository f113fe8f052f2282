#include "vlasim/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "test_util.hpp"
#include "vlasim/errors.hpp"
#include "vlasim/rng.hpp"

using namespace vlasim;
namespace fs = std::filesystem;

static fs::path temp_dir() {
    auto dir = fs::temp_directory_path() / "vlasim_test_io";
    fs::create_directories(dir);
    return dir;
}

static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

static void double_round_trip() {
    std::vector<double> cases = {0.0,  1.0,     -1.5,       0.1,       1e-300,
                                 1e300, 1.0 / 3.0, 6.02214076e23, -2.5e-7, 123456789.12345};
    std::vector<double> r(2);
    for (int i = 0; i < 500; ++i) {
        philox_gaussians(4711, 0, static_cast<uint32_t>(i), 0, r);
        cases.push_back(r[0] * std::pow(10.0, static_cast<int>(r[1] * 80)));
    }
    for (double v : cases) {
        const std::string s = format_double(v);
        const double back = parse_double_strict(s, "round-trip");
        CHECK_MSG(back == v, "shortest round-trip formatting, value " + s);
    }
    CHECK_THROWS(parse_double_strict("1.2.3", "ctx"), ConfigError);
    CHECK_THROWS(parse_double_strict("abc", "ctx"), ConfigError);
    CHECK_THROWS(parse_double_strict("1.5 ", "ctx"), ConfigError);
}

static void config_parsing() {
    const char* text =
        "format_version = 1\n"
        "[model]\n"
        "alpha = 2.0   # trailing comment\n"
        "force_b.kind = \"linear\"\n"
        "force_b.c = 0.05\n"
        "[integrator]\n"
        "dt = 0.01\n"
        "scheme = \"ou_splitting\"\n"
        "t_end = 5.0\n"
        "[experiment]\n"
        "n_particles = 128\n"
        "seed = 18446744073709551615\n"
        "n_sweep = [16, 64, 256, 1024]\n"
        "force = true\n"
        "[output]\n"
        "dir = \"runs/x\"\n"
        "plots = true\n";
    auto doc = parse_config_text(text, "inline");
    auto loaded = experiment_config_from(doc);
    CHECK(loaded.experiment.params.alpha == 2.0);
    CHECK(loaded.experiment.params.force_b.kind == ForceKind::linear);
    CHECK(loaded.experiment.params.force_b.c == 0.05);
    CHECK(loaded.experiment.integ.scheme == Scheme::ou_splitting);
    CHECK(loaded.experiment.n_particles == 128);
    CHECK(loaded.experiment.seed == 18446744073709551615ull);
    CHECK(loaded.experiment.force);
    CHECK(loaded.experiment.n_sweep.size() == 4);
    CHECK(loaded.output.dir == "runs/x");
    CHECK(loaded.output.plots);

    // Unknown keys and sections are hard errors.
    CHECK_THROWS(experiment_config_from(parse_config_text("[model]\nalpha = 1.0\nbogus = 2\n", "x")),
                 ConfigError);
    CHECK_THROWS(experiment_config_from(parse_config_text("[model]\nalpha = 1.0\n[weird]\nk = 1\n", "x")),
                 ConfigError);
    // Missing [model] points at the missing section.
    try {
        experiment_config_from(parse_config_text("[integrator]\ndt = 0.01\n", "cfg"));
        CHECK_MSG(false, "expected missing-section error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("[model]") != std::string::npos);
    }
    // Malformed lines carry line numbers.
    try {
        parse_config_text("[model]\nalpha 1.0\n", "cfg");
        CHECK_MSG(false, "expected parse error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("cfg:2") != std::string::npos);
    }
    CHECK_THROWS(parse_config_text("[model]\nalpha = 1.0\nalpha = 2.0\n", "x"), ConfigError);

    // The shipped defaults parse and validate.
    auto dflt = experiment_config_from(parse_config_text(default_config_text(), "<defaults>"));
    CHECK(dflt.experiment.n_particles == 4096);
    CHECK(dflt.experiment.a3_tilde.has_value());
    CHECK(*dflt.experiment.a3_tilde == 1.0);
}

static void cloud_round_trip() {
    auto dir = temp_dir();
    EmpiricalMeasure cloud;
    cloud.dim = 2;
    std::vector<double> r(6);
    for (int i = 0; i < 1000; ++i) {
        philox_gaussians(999, 0, static_cast<uint32_t>(i), 0, r);
        for (double v : r) cloud.points.push_back(v * 1e3);
    }
    const auto path = (dir / "cloud.csv").string();
    write_cloud_csv(cloud, path);
    auto back = read_cloud(path);
    CHECK(back.dim == cloud.dim);
    CHECK(back.points == cloud.points);  // 0 ULP round trip

    // header-only file: at least one particle required
    {
        std::ofstream out(dir / "empty.csv");
        out << "q1,p1,z1\n";
    }
    CHECK_THROWS(read_cloud((dir / "empty.csv").string()), ConfigError);

    // singleton at origin
    {
        std::ofstream out(dir / "one.csv");
        out << "q1,p1,z1\n0,0,0\n";
    }
    auto one = read_cloud((dir / "one.csv").string());
    CHECK(one.size() == 1);
    CHECK(one.points[0] == 0.0);

    // malformed rows carry line numbers
    {
        std::ofstream out(dir / "bad.csv");
        out << "q1,p1,z1\n1,2\n";
    }
    try {
        read_cloud((dir / "bad.csv").string());
        CHECK_MSG(false, "expected column-count error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
    {
        std::ofstream out(dir / "nonnum.csv");
        out << "q1,p1,z1\n1,x,3\n";
    }
    CHECK_THROWS(read_cloud((dir / "nonnum.csv").string()), ConfigError);
    {
        std::ofstream out(dir / "badhdr.csv");
        out << "a,b,c\n1,2,3\n";
    }
    CHECK_THROWS(read_cloud((dir / "badhdr.csv").string()), ConfigError);
}

static ExperimentReport tiny_report() {
    ExperimentReport rep;
    rep.experiment = "demo";
    SeriesGroup g;
    g.axis_name = "time";
    g.axis = {0.0, 0.5, 1.0};
    g.columns.push_back({"obs_a", {1.0, 0.5, 0.25}});
    g.columns.push_back({"obs_b", {2.0, 2.0, 2.0}});
    rep.groups.push_back(g);
    rep.scalars.emplace_back("eta0", 2.0 / 13.0);
    rep.verdicts.push_back({"demo_pass", true, 0.1, 0.2, "sample"});
    return rep;
}

static void series_and_report_outputs() {
    auto dir = temp_dir();
    auto rep = tiny_report();
    const auto csv_path = (dir / "series.csv").string();
    write_series_csv(rep, csv_path);
    const std::string csv = slurp(csv_path);
    CHECK(csv.rfind("time,observable,value\n", 0) == 0);
    CHECK(csv.find("0.5,obs_a,0.5\n") != std::string::npos);

    // identical report writes identical bytes
    const auto csv2_path = (dir / "series2.csv").string();
    write_series_csv(rep, csv2_path);
    CHECK(slurp(csv2_path) == csv);

    const auto json_path = (dir / "report.json").string();
    write_report_json(rep, "cfg-echo", 7, json_path);
    const std::string js = slurp(json_path);
    CHECK(js.find("\"experiment\": \"demo\"") != std::string::npos);
    CHECK(js.find("\"all_pass\": true") != std::string::npos);

    const auto svg_path = (dir / "plot.svg").string();
    write_series_svg(rep.groups[0], "demo", false, true, svg_path);
    const std::string svg = slurp(svg_path);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("obs_a") != std::string::npos);
    const auto svg2_path = (dir / "plot2.svg").string();
    write_series_svg(rep.groups[0], "demo", false, true, svg2_path);
    CHECK(slurp(svg2_path) == svg);  // deterministic byte stream
}

static void checksums_and_manifest() {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("hello") == 0xa430d84680aabd0bull);

    auto dir = temp_dir();
    {
        std::ofstream out(dir / "file.csv", std::ios::binary);
        out << "time,observable,value\n";
    }
    const std::string bytes = slurp(dir / "file.csv");
    std::vector<ManifestEntry> files = {
        {"file.csv", bytes.size(), fnv1a64(bytes)},
    };
    write_manifest(dir.string(), "echo", 99, "2026-01-01T00:00:00Z", "2026-01-01T00:00:01Z", files);
    const std::string manifest = slurp(dir / "manifest.json");
    CHECK(manifest.find("\"file.csv\"") != std::string::npos);
    CHECK(manifest.find("fnv1a64") != std::string::npos);
    CHECK(fnv1a64_file((dir / "file.csv").string()) == fnv1a64(bytes));
}

int main() {
    double_round_trip();
    config_parsing();
    cloud_round_trip();
    series_and_report_outputs();
    checksums_and_manifest();
    int rc = testutil::summarize("test_io");
    std::error_code ec;
    fs::remove_all(temp_dir(), ec);
    return rc;
}
