#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "vlasim/experiments.hpp"
#include "vlasim/transport.hpp"

namespace vlasim {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kFormatVersion = 1;

// --- shortest round-trip decimal formatting ---------------------------------

std::string format_double(double v);
double parse_double_strict(std::string_view token, const std::string& context);

// --- config documents --------------------------------------------------------

struct ConfigValue {
    enum class Type { number, string, boolean, number_list };
    Type type = Type::number;
    std::string raw;               // original token for exact integer parsing
    double num = 0.0;
    std::string str;
    bool boolean = false;
    std::vector<double> list;
    int line = 0;

    double as_double(const std::string& key) const;
    long as_long(const std::string& key) const;
    std::uint64_t as_u64(const std::string& key) const;
    bool as_bool(const std::string& key) const;
    const std::string& as_string(const std::string& key) const;
    const std::vector<double>& as_list(const std::string& key) const;
};

// Sections of key = value pairs; keys may be dotted (force_a.kind). Values
// are decimal numbers, quoted strings, booleans, or numeric arrays. Unknown
// keys are an error at schema application, never silently ignored.
struct ConfigDocument {
    std::string source;
    std::map<std::string, std::map<std::string, ConfigValue>> sections;

    bool has(const std::string& section, const std::string& key) const;
    const ConfigValue* get(const std::string& section, const std::string& key) const;
};

ConfigDocument parse_config_text(std::string_view text, const std::string& source_name);
ConfigDocument parse_config_file(const std::string& path);

struct OutputOptions {
    std::string dir = "out";
    bool plots = false;
};

struct LoadedConfig {
    ExperimentConfig experiment;
    OutputOptions output;
};

// Applies the schema; requires the [model] section, defaults everything else,
// and rejects unknown sections/keys with line numbers.
LoadedConfig experiment_config_from(const ConfigDocument& doc);

// The full schema with every default, suitable for --print-defaults.
std::string default_config_text();

// --- cloud and series CSV -----------------------------------------------------

void write_cloud_csv(const EmpiricalMeasure& cloud, const std::string& path);
EmpiricalMeasure read_cloud(const std::string& path);

// Long-format rows (time, observable, value); the axis value of non-time
// groups (the chaos N sweep) is emitted in the same leading column.
void write_series_csv(const ExperimentReport& report, const std::string& path);

void write_report_json(const ExperimentReport& report, const std::string& config_echo,
                       std::uint64_t seed, const std::string& path);

// --- plots --------------------------------------------------------------------

// Deterministic polyline SVG for one series group.
void write_series_svg(const SeriesGroup& group, const std::string& title, bool log_x, bool log_y,
                      const std::string& path);

// --- manifests ------------------------------------------------------------------

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64_file(const std::string& path);

struct ManifestEntry {
    std::string path;   // relative to the run directory
    std::uint64_t bytes = 0;
    std::uint64_t checksum = 0;
};

// Run manifest: config echo, master seed, timestamps, and a checksum per
// emitted file. Re-running with the same inputs reproduces identical CSVs.
void write_manifest(const std::string& dir, const std::string& config_echo, std::uint64_t seed,
                    const std::string& started_at, const std::string& finished_at,
                    const std::vector<ManifestEntry>& files);

std::string timestamp_utc_now();

}  // namespace vlasim
