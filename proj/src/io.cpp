#include "vlasim/io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vlasim/errors.hpp"

namespace vlasim {

using json = nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double_strict(std::string_view token, const std::string& context) {
    double v = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw ConfigError(context + ": '" + std::string(token) + "' is not a number");
    return v;
}

// --- config values -------------------------------------------------------------

double ConfigValue::as_double(const std::string& key) const {
    if (type != Type::number) throw ConfigError("key '" + key + "' must be a number");
    return num;
}

long ConfigValue::as_long(const std::string& key) const {
    if (type != Type::number) throw ConfigError("key '" + key + "' must be an integer");
    long v = 0;
    auto res = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (res.ec != std::errc() || res.ptr != raw.data() + raw.size())
        throw ConfigError("key '" + key + "' must be an integer, got '" + raw + "'");
    return v;
}

std::uint64_t ConfigValue::as_u64(const std::string& key) const {
    if (type != Type::number) throw ConfigError("key '" + key + "' must be an unsigned integer");
    std::uint64_t v = 0;
    auto res = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (res.ec != std::errc() || res.ptr != raw.data() + raw.size())
        throw ConfigError("key '" + key + "' must be an unsigned integer, got '" + raw + "'");
    return v;
}

bool ConfigValue::as_bool(const std::string& key) const {
    if (type != Type::boolean) throw ConfigError("key '" + key + "' must be true or false");
    return boolean;
}

const std::string& ConfigValue::as_string(const std::string& key) const {
    if (type != Type::string) throw ConfigError("key '" + key + "' must be a quoted string");
    return str;
}

const std::vector<double>& ConfigValue::as_list(const std::string& key) const {
    if (type != Type::number_list) throw ConfigError("key '" + key + "' must be a numeric array");
    return list;
}

bool ConfigDocument::has(const std::string& section, const std::string& key) const {
    return get(section, key) != nullptr;
}

const ConfigValue* ConfigDocument::get(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    if (s == sections.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Strips a trailing comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

ConfigValue parse_value(std::string_view text, const std::string& where, int line) {
    ConfigValue v;
    v.line = line;
    text = trim(text);
    if (text.empty()) throw ConfigError(where + ": missing value");
    if (text.front() == '"') {
        if (text.size() < 2 || text.back() != '"')
            throw ConfigError(where + ": unterminated string");
        v.type = ConfigValue::Type::string;
        v.str = std::string(text.substr(1, text.size() - 2));
        v.raw = std::string(text);
        return v;
    }
    if (text == "true" || text == "false") {
        v.type = ConfigValue::Type::boolean;
        v.boolean = (text == "true");
        v.raw = std::string(text);
        return v;
    }
    if (text.front() == '[') {
        if (text.back() != ']') throw ConfigError(where + ": unterminated array");
        v.type = ConfigValue::Type::number_list;
        v.raw = std::string(text);
        std::string_view inner = trim(text.substr(1, text.size() - 2));
        while (!inner.empty()) {
            std::size_t comma = inner.find(',');
            std::string_view tok = trim(comma == std::string_view::npos ? inner : inner.substr(0, comma));
            if (tok.empty()) throw ConfigError(where + ": empty array element");
            v.list.push_back(parse_double_strict(tok, where));
            if (comma == std::string_view::npos) break;
            inner = trim(inner.substr(comma + 1));
            if (inner.empty()) throw ConfigError(where + ": trailing comma in array");
        }
        return v;
    }
    v.type = ConfigValue::Type::number;
    v.raw = std::string(text);
    v.num = parse_double_strict(text, where);
    return v;
}

}  // namespace

ConfigDocument parse_config_text(std::string_view text, const std::string& source_name) {
    ConfigDocument doc;
    doc.source = source_name;
    std::string section;  // top-level keys live in the "" section
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                               : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        std::string where = source_name + ":" + std::to_string(line_no);
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": malformed section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section.empty()) throw ConfigError(where + ": empty section name");
            doc.sections[section];
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
        std::string key(trim(line.substr(0, eq)));
        if (key.empty()) throw ConfigError(where + ": empty key");
        if (doc.sections[section].count(key))
            throw ConfigError(where + ": duplicate key '" + key + "'");
        doc.sections[section][key] = parse_value(line.substr(eq + 1), where + " (" + key + ")", line_no);
    }
    return doc;
}

ConfigDocument parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

namespace {

const std::map<std::string, std::vector<std::string>>& schema() {
    static const std::map<std::string, std::vector<std::string>> s = {
        {"", {"format_version"}},
        {"model",
         {"alpha", "beta", "lambda", "dim", "force_a.kind", "force_a.c", "force_b.kind",
          "force_b.c"}},
        {"integrator", {"dt", "scheme", "t_end"}},
        {"experiment",
         {"n_particles", "seed", "replicates", "force", "a3_tilde", "fit_window_lo",
          "sample_times", "w2_times", "n_sweep", "chaos_reference", "mean_ode_dt",
          "reference_multiplier", "blob_a.center_q", "blob_a.center_p", "blob_a.center_z",
          "blob_a.scale", "blob_b.center_q", "blob_b.center_p", "blob_b.center_z",
          "blob_b.scale"}},
        {"output", {"dir", "plots"}},
    };
    return s;
}

void check_against_schema(const ConfigDocument& doc) {
    for (const auto& [section, keys] : doc.sections) {
        auto known = schema().find(section);
        if (known == schema().end())
            throw ConfigError(doc.source + ": unknown section [" + section + "]");
        for (const auto& [key, value] : keys) {
            const auto& allowed = known->second;
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
                throw ConfigError(doc.source + ":" + std::to_string(value.line) +
                                  ": unknown key '" + key + "' in section [" + section + "]");
        }
    }
}

}  // namespace

LoadedConfig experiment_config_from(const ConfigDocument& doc) {
    check_against_schema(doc);
    if (!doc.sections.count("model"))
        throw ConfigError(doc.source + ": missing required section [model]");
    if (const auto* fv = doc.get("", "format_version"); fv && fv->as_long("format_version") != kFormatVersion)
        throw ConfigError(doc.source + ": unsupported format_version " + fv->raw);

    LoadedConfig out;
    ExperimentConfig& cfg = out.experiment;

    auto num = [&](const char* section, const char* key, double dflt) {
        const auto* v = doc.get(section, key);
        return v ? v->as_double(key) : dflt;
    };
    cfg.params.alpha = num("model", "alpha", 1.0);
    cfg.params.beta = num("model", "beta", 1.0);
    cfg.params.lambda = num("model", "lambda", 1.0);
    if (const auto* v = doc.get("model", "dim")) cfg.params.dim = static_cast<int>(v->as_long("dim"));
    if (const auto* v = doc.get("model", "force_a.kind"))
        cfg.params.force_a.kind = force_kind_from_name(v->as_string("force_a.kind"));
    cfg.params.force_a.c = num("model", "force_a.c", 0.0);
    if (const auto* v = doc.get("model", "force_b.kind"))
        cfg.params.force_b.kind = force_kind_from_name(v->as_string("force_b.kind"));
    cfg.params.force_b.c = num("model", "force_b.c", 0.0);

    cfg.integ.dt = num("integrator", "dt", 1e-2);
    if (const auto* v = doc.get("integrator", "scheme"))
        cfg.integ.scheme = scheme_from_name(v->as_string("scheme"));
    cfg.integ.t_end = num("integrator", "t_end", 20.0);

    if (const auto* v = doc.get("experiment", "n_particles"))
        cfg.n_particles = static_cast<std::size_t>(v->as_long("n_particles"));
    if (const auto* v = doc.get("experiment", "seed")) cfg.seed = v->as_u64("seed");
    if (const auto* v = doc.get("experiment", "replicates"))
        cfg.replicates = static_cast<int>(v->as_long("replicates"));
    if (const auto* v = doc.get("experiment", "force")) cfg.force = v->as_bool("force");
    if (const auto* v = doc.get("experiment", "a3_tilde")) cfg.a3_tilde = v->as_double("a3_tilde");
    cfg.fit_window_lo = num("experiment", "fit_window_lo", 1.0);
    if (const auto* v = doc.get("experiment", "sample_times")) cfg.sample_times = v->as_list("sample_times");
    if (const auto* v = doc.get("experiment", "w2_times")) cfg.w2_times = v->as_list("w2_times");
    if (const auto* v = doc.get("experiment", "n_sweep")) {
        cfg.n_sweep.clear();
        for (double d : v->as_list("n_sweep")) {
            if (d < 1 || d != std::floor(d))
                throw ConfigError("n_sweep entries must be positive integers");
            cfg.n_sweep.push_back(static_cast<std::size_t>(d));
        }
    }
    if (const auto* v = doc.get("experiment", "chaos_reference")) {
        const std::string& s = v->as_string("chaos_reference");
        if (s == "auto") cfg.chaos_reference = ChaosReference::auto_select;
        else if (s == "exact_mean") cfg.chaos_reference = ChaosReference::exact_mean;
        else if (s == "frozen") cfg.chaos_reference = ChaosReference::frozen;
        else throw ConfigError("chaos_reference must be auto, exact_mean, or frozen");
    }
    cfg.mean_ode_dt = num("experiment", "mean_ode_dt", 1e-3);
    if (const auto* v = doc.get("experiment", "reference_multiplier"))
        cfg.reference_multiplier = static_cast<std::size_t>(v->as_long("reference_multiplier"));
    cfg.blob_a.center_q = num("experiment", "blob_a.center_q", -2.0);
    cfg.blob_a.center_p = num("experiment", "blob_a.center_p", 0.0);
    cfg.blob_a.center_z = num("experiment", "blob_a.center_z", 0.0);
    cfg.blob_a.scale = num("experiment", "blob_a.scale", 1.0);
    cfg.blob_b.center_q = num("experiment", "blob_b.center_q", 2.0);
    cfg.blob_b.center_p = num("experiment", "blob_b.center_p", 0.0);
    cfg.blob_b.center_z = num("experiment", "blob_b.center_z", 0.0);
    cfg.blob_b.scale = num("experiment", "blob_b.scale", 1.0);

    if (const auto* v = doc.get("output", "dir")) out.output.dir = v->as_string("dir");
    if (const auto* v = doc.get("output", "plots")) out.output.plots = v->as_bool("plots");

    cfg.validate();
    return out;
}

std::string default_config_text() {
    return
        "format_version = 1\n"
        "\n"
        "[model]\n"
        "alpha = 1.0\n"
        "beta = 1.0\n"
        "lambda = 1.0\n"
        "dim = 1\n"
        "force_a.kind = \"zero\"      # zero | linear | tanh_saturating | sine\n"
        "force_a.c = 0.0\n"
        "force_b.kind = \"zero\"      # must be odd; every builtin kind is\n"
        "force_b.c = 0.0\n"
        "\n"
        "[integrator]\n"
        "dt = 0.01\n"
        "scheme = \"euler_maruyama\"  # euler_maruyama | ou_splitting\n"
        "t_end = 20.0\n"
        "\n"
        "[experiment]\n"
        "n_particles = 4096\n"
        "seed = 1\n"
        "replicates = 3\n"
        "force = false               # run even if eta >= eta0\n"
        "a3_tilde = 1.0              # omit to maximize eta0 instead\n"
        "fit_window_lo = 1.0\n"
        "sample_times = []           # empty = uniform grid\n"
        "w2_times = []               # empty = five evenly spaced times\n"
        "n_sweep = [16, 64, 256, 1024]\n"
        "chaos_reference = \"auto\"   # auto | exact_mean | frozen\n"
        "mean_ode_dt = 0.001\n"
        "reference_multiplier = 16\n"
        "blob_a.center_q = -2.0\n"
        "blob_a.center_p = 0.0\n"
        "blob_a.center_z = 0.0\n"
        "blob_a.scale = 1.0\n"
        "blob_b.center_q = 2.0\n"
        "blob_b.center_p = 0.0\n"
        "blob_b.center_z = 0.0\n"
        "blob_b.scale = 1.0\n"
        "\n"
        "[output]\n"
        "dir = \"out\"\n"
        "plots = false\n";
}

// --- cloud CSV -------------------------------------------------------------------

void write_cloud_csv(const EmpiricalMeasure& cloud, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    const int d = cloud.dim;
    for (int k = 0; k < d; ++k) out << (k ? "," : "") << "q" << (k + 1);
    for (int k = 0; k < d; ++k) out << ",p" << (k + 1);
    for (int k = 0; k < d; ++k) out << ",z" << (k + 1);
    out << "\n";
    const std::size_t w = 3 * static_cast<std::size_t>(d);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const double* row = cloud.points.data() + i * w;
        for (std::size_t k = 0; k < w; ++k) {
            if (k) out << ",";
            out << format_double(row[k]);
        }
        out << "\n";
    }
}

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    for (auto& f : out) {
        while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
        while (!f.empty() && f.front() == ' ') f.erase(f.begin());
    }
    return out;
}

}  // namespace

EmpiricalMeasure read_cloud(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open cloud file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
    auto header = split_csv_row(line);
    if (header.size() % 3 != 0 || header.empty())
        throw ConfigError(path + ":1: header must have columns q1..qd,p1..pd,z1..zd");
    const int d = static_cast<int>(header.size() / 3);
    for (int k = 0; k < d; ++k) {
        if (header[k] != "q" + std::to_string(k + 1) ||
            header[d + k] != "p" + std::to_string(k + 1) ||
            header[2 * d + k] != "z" + std::to_string(k + 1))
            throw ConfigError(path + ":1: header must be q1..qd,p1..pd,z1..zd");
    }
    EmpiricalMeasure cloud;
    cloud.dim = d;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_row(line);
        if (fields.size() != header.size())
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(header.size()) + " columns, got " +
                              std::to_string(fields.size()));
        for (const auto& f : fields) {
            const double v = parse_double_strict(f, path + ":" + std::to_string(line_no));
            if (!std::isfinite(v))
                throw ConfigError(path + ":" + std::to_string(line_no) +
                                  ": non-finite coordinate '" + f + "'");
            cloud.points.push_back(v);
        }
    }
    if (cloud.size() == 0) throw ConfigError(path + ": at least one particle required");
    return cloud;
}

// --- series CSV --------------------------------------------------------------------

void write_series_csv(const ExperimentReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << "time,observable,value\n";
    for (const auto& g : report.groups) {
        for (const auto& c : g.columns) {
            for (std::size_t i = 0; i < c.values.size() && i < g.axis.size(); ++i)
                out << format_double(g.axis[i]) << "," << c.name << ","
                    << format_double(c.values[i]) << "\n";
        }
    }
}

// --- report JSON ----------------------------------------------------------------------

void write_report_json(const ExperimentReport& report, const std::string& config_echo,
                       std::uint64_t seed, const std::string& path) {
    json j;
    j["format_version"] = kFormatVersion;
    j["tool_version"] = kToolVersion;
    j["experiment"] = report.experiment;
    j["seed"] = seed;
    j["config"] = config_echo;
    j["all_pass"] = report.all_pass();
    j["scalars"] = json::object();
    for (const auto& [k, v] : report.scalars) j["scalars"][k] = v;
    j["margins"] = json::array();
    for (const auto& m : report.margins) j["margins"].push_back({{"name", m.name}, {"value", m.value}});
    j["fits"] = json::array();
    for (const auto& f : report.fits)
        j["fits"].push_back({{"name", f.name},
                             {"slope", f.fit.slope},
                             {"intercept", f.fit.intercept},
                             {"r_squared", f.fit.r_squared},
                             {"points", f.fit.points}});
    j["verdicts"] = json::array();
    for (const auto& v : report.verdicts)
        j["verdicts"].push_back({{"name", v.name},
                                 {"pass", v.pass},
                                 {"value", v.value},
                                 {"threshold", v.threshold},
                                 {"detail", v.detail}});
    j["warnings"] = report.warnings;
    j["groups"] = json::array();
    for (const auto& g : report.groups) {
        json jg;
        jg["axis_name"] = g.axis_name;
        jg["axis"] = g.axis;
        jg["columns"] = json::object();
        for (const auto& c : g.columns) jg["columns"][c.name] = c.values;
        j["groups"].push_back(std::move(jg));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

// --- SVG plots ------------------------------------------------------------------------

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

double map_coord(double v, double lo, double hi, double out_lo, double out_hi) {
    if (hi <= lo) return 0.5 * (out_lo + out_hi);
    return out_lo + (v - lo) / (hi - lo) * (out_hi - out_lo);
}

}  // namespace

void write_series_svg(const SeriesGroup& group, const std::string& title, bool log_x, bool log_y,
                      const std::string& path) {
    const double width = 640, height = 480;
    const double ml = 70, mr = 20, mt = 40, mb = 50;

    auto tx = [&](double x) { return log_x ? std::log10(x) : x; };
    auto ty = [&](double y) { return log_y ? std::log10(y) : y; };

    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (std::size_t i = 0; i < group.axis.size(); ++i) {
        double x = group.axis[i];
        if (log_x && !(x > 0)) continue;
        xlo = std::min(xlo, tx(x));
        xhi = std::max(xhi, tx(x));
    }
    for (const auto& c : group.columns)
        for (double y : c.values) {
            if (!std::isfinite(y) || (log_y && !(y > 0))) continue;
            ylo = std::min(ylo, ty(y));
            yhi = std::max(yhi, ty(y));
        }
    if (xlo > xhi) { xlo = 0; xhi = 1; }
    if (ylo > yhi) { ylo = 0; yhi = 1; }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" "
           "font-size=\"14\">" << title << "</text>\n";
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << width - ml - mr
        << "\" height=\"" << height - mt - mb << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">"
        << group.axis_name << (log_x ? " (log10)" : "") << "</text>\n";
    // axis range labels
    out << "<text x=\"" << ml << "\" y=\"" << height - mb + 16
        << "\" font-family=\"monospace\" font-size=\"10\">" << format_double(xlo) << "</text>\n";
    out << "<text x=\"" << width - mr << "\" y=\"" << height - mb + 16
        << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"10\">" << format_double(xhi)
        << "</text>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 10
        << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"10\">" << format_double(yhi)
        << (log_y ? " (log10)" : "") << "</text>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << height - mb
        << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"10\">" << format_double(ylo)
        << "</text>\n";

    int color_idx = 0;
    double legend_y = mt + 14;
    for (const auto& c : group.columns) {
        const char* color = kPalette[color_idx % 8];
        ++color_idx;
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < c.values.size() && i < group.axis.size(); ++i) {
            double x = group.axis[i], y = c.values[i];
            if (!std::isfinite(y) || (log_y && !(y > 0)) || (log_x && !(x > 0))) continue;
            double px = map_coord(tx(x), xlo, xhi, ml, width - mr);
            double py = map_coord(ty(y), ylo, yhi, height - mb, mt);
            if (!first) out << " ";
            out << format_double(px) << "," << format_double(py);
            first = false;
        }
        out << "\"/>\n";
        out << "<text x=\"" << width - mr - 6 << "\" y=\"" << legend_y
            << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"10\" fill=\"" << color
            << "\">" << c.name << "</text>\n";
        legend_y += 13;
    }
    out << "</svg>\n";
}

// --- checksums and manifest ----------------------------------------------------------------

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "' for checksum");
    std::ostringstream ss;
    ss << in.rdbuf();
    return fnv1a64(ss.str());
}

void write_manifest(const std::string& dir, const std::string& config_echo, std::uint64_t seed,
                    const std::string& started_at, const std::string& finished_at,
                    const std::vector<ManifestEntry>& files) {
    json j;
    j["format_version"] = kFormatVersion;
    j["tool_version"] = kToolVersion;
    j["seed"] = seed;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    j["config"] = config_echo;
    j["files"] = json::array();
    for (const auto& f : files) {
        char cks[24];
        std::snprintf(cks, sizeof(cks), "%016llx", static_cast<unsigned long long>(f.checksum));
        j["files"].push_back({{"path", f.path}, {"bytes", f.bytes}, {"fnv1a64", cks}});
    }
    std::ofstream out(dir + "/manifest.json", std::ios::binary);
    if (!out) throw ConfigError("cannot open manifest in '" + dir + "' for writing");
    out << j.dump(2) << "\n";
}

std::string timestamp_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

}  // namespace vlasim
