#include "goisac/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace goisac::exp {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(SweepVariable v) {
    switch (v) {
    case SweepVariable::Theta: return "theta";
    case SweepVariable::Epsilon: return "epsilon";
    case SweepVariable::NumUes: return "U";
    }
    return "?";
}

SweepVariable parse_sweep_variable(std::string_view name) {
    if (name == "theta") return SweepVariable::Theta;
    if (name == "epsilon") return SweepVariable::Epsilon;
    if (name == "U" || name == "num_ues") return SweepVariable::NumUes;
    throw ConfigError("sweep.variable", "expected theta, epsilon or U, got '" + std::string(name) + "'");
}

void SweepSpec::validate() const {
    if (values.empty()) throw ConfigError("sweep.values", "must not be empty");
    for (double v : values) {
        switch (variable) {
        case SweepVariable::Theta:
            if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("sweep.values", "theta " + format_number(v) + " outside [0, 1]");
            break;
        case SweepVariable::Epsilon:
            if (!(v > 0.0)) throw ConfigError("sweep.values", "epsilon must be > 0");
            break;
        case SweepVariable::NumUes:
            if (!(v >= 1.0) || v != std::floor(v) || v > 1e6) throw ConfigError("sweep.values", "U must be a positive integer");
            break;
        }
    }
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::vector<double> parse_values(const std::string &text) {
    auto number = [&](const std::string &tok) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used == 0 || used != tok.size()) throw ConfigError("sweep.values", "cannot parse '" + tok + "'");
        return v;
    };
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() != 3) throw ConfigError("sweep.values", "range must be start:stop:step");
        const double start = number(parts[0]);
        const double stop = number(parts[1]);
        const double step = number(parts[2]);
        if (!(step > 0.0) || stop < start) throw ConfigError("sweep.values", "range needs step > 0 and stop >= start");
        const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
        for (long i = 0; i <= n; ++i) {
            // Rounded to 12 digits so 0.02 * 26 prints as 0.52.
            out.push_back(std::stod(format_number(start + static_cast<double>(i) * step)));
        }
    } else {
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ',');) out.push_back(number(p));
    }
    return out;
}

namespace {

template <typename T>
T field(const json &doc, const char *name, T fallback) {
    if (!doc.contains(name)) return fallback;
    try {
        return doc.at(name).get<T>();
    } catch (const json::exception &e) {
        throw ConfigError(name, std::string("wrong type: ") + e.what());
    }
}

double real_field(const json &doc, const char *name, double fallback) {
    if (!doc.contains(name)) return fallback;
    const auto &v = doc.at(name);
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
        throw ConfigError(name, "expected a number or \"inf\"");
    }
    if (!v.is_number()) throw ConfigError(name, "expected a number");
    return v.get<double>();
}

int int_field(const json &doc, const char *name, int fallback) {
    if (!doc.contains(name)) return fallback;
    const auto &v = doc.at(name);
    if (!v.is_number_integer()) throw ConfigError(name, "expected an integer");
    return v.get<int>();
}

const std::set<std::string> kKnownKeys = {
    "policy", "policies", "frames", "episodes", "seed", "theta", "epsilon_m", "num_ues", "num_aps",
    "antennas_per_ap", "num_rbs", "num_slots", "push_slots", "pull_slots", "subcarriers_per_rb",
    "symbols_per_slot", "subcarrier_spacing_hz", "cyclic_prefix_s", "tx_power_dbm", "noise_power_dbm",
    "carrier_hz", "antenna_gain_dbi", "side_m", "ap_offset_m", "array_orientation", "v_max_kmh", "mean_bytes",
    "peb_resolution_m", "sweep"};

} // namespace

RunConfig parse_config_json(const json &doc) {
    if (!doc.is_object()) throw ConfigError("<root>", "configuration must be a JSON object");
    for (const auto &[key, _] : doc.items())
        if (!kKnownKeys.contains(key)) throw ConfigError(key, "unknown key");

    RunConfig rc;
    auto &c = rc.base;
    if (doc.contains("policy")) c.policy = sim::parse_policy(field<std::string>(doc, "policy", ""));
    if (doc.contains("policies")) {
        rc.policies.clear();
        for (const auto &p : field<std::vector<std::string>>(doc, "policies", {})) rc.policies.push_back(sim::parse_policy(p));
        if (rc.policies.empty()) throw ConfigError("policies", "must not be empty");
    }
    c.frames = int_field(doc, "frames", c.frames);
    rc.episodes = int_field(doc, "episodes", rc.episodes);
    if (rc.episodes < 1) throw ConfigError("episodes", "must be >= 1");
    if (doc.contains("seed")) {
        const auto &seed = doc.at("seed");
        if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0))
            throw ConfigError("seed", "expected a non-negative integer");
        c.seed = doc.at("seed").get<std::uint64_t>();
    }
    c.theta = real_field(doc, "theta", c.theta);
    c.epsilon = real_field(doc, "epsilon_m", c.epsilon);
    c.num_ues = int_field(doc, "num_ues", c.num_ues);
    c.num_aps = int_field(doc, "num_aps", c.num_aps);
    c.antennas_per_ap = int_field(doc, "antennas_per_ap", c.antennas_per_ap);
    c.grid.num_rbs = int_field(doc, "num_rbs", c.grid.num_rbs);
    c.grid.num_slots = int_field(doc, "num_slots", c.grid.num_slots);
    c.grid.push_slots = int_field(doc, "push_slots", c.grid.push_slots);
    c.grid.pull_slots = int_field(doc, "pull_slots", c.grid.pull_slots);
    c.grid.subcarriers_per_rb = int_field(doc, "subcarriers_per_rb", c.grid.subcarriers_per_rb);
    c.grid.symbols_per_slot = int_field(doc, "symbols_per_slot", c.grid.symbols_per_slot);
    c.grid.subcarrier_spacing = real_field(doc, "subcarrier_spacing_hz", c.grid.subcarrier_spacing);
    c.grid.cyclic_prefix = real_field(doc, "cyclic_prefix_s", c.grid.cyclic_prefix);
    c.tx_power_dbm = real_field(doc, "tx_power_dbm", c.tx_power_dbm);
    c.noise_power_dbm = real_field(doc, "noise_power_dbm", c.noise_power_dbm);
    c.carrier_hz = real_field(doc, "carrier_hz", c.carrier_hz);
    c.antenna_gain_dbi = real_field(doc, "antenna_gain_dbi", c.antenna_gain_dbi);
    c.side = real_field(doc, "side_m", c.side);
    c.ap_offset = real_field(doc, "ap_offset_m", c.ap_offset);
    if (doc.contains("array_orientation")) {
        const auto o = field<std::string>(doc, "array_orientation", "");
        if (o == "radial") c.orientation = sim::ArrayOrientation::Radial;
        else if (o == "x") c.orientation = sim::ArrayOrientation::AxisX;
        else throw ConfigError("array_orientation", "expected \"radial\" or \"x\"");
    }
    c.v_max_kmh = real_field(doc, "v_max_kmh", c.v_max_kmh);
    c.mean_bytes = real_field(doc, "mean_bytes", c.mean_bytes);
    c.peb_resolution = real_field(doc, "peb_resolution_m", c.peb_resolution);
    c.validate();

    if (doc.contains("sweep")) {
        const auto &s = doc.at("sweep");
        if (!s.is_object()) throw ConfigError("sweep", "expected an object");
        SweepSpec spec;
        spec.variable = parse_sweep_variable(field<std::string>(s, "variable", "theta"));
        if (s.contains("values")) {
            const auto &v = s.at("values");
            if (v.is_string()) spec.values = parse_values(v.get<std::string>());
            else if (v.is_array()) {
                for (const auto &x : v) {
                    if (!x.is_number()) throw ConfigError("sweep.values", "expected numbers");
                    spec.values.push_back(x.get<double>());
                }
            } else throw ConfigError("sweep.values", "expected an array or a start:stop:step string");
        }
        std::sort(spec.values.begin(), spec.values.end());
        spec.validate();
        rc.sweep = spec;
    }
    return rc;
}

RunConfig parse_config(const fs::path &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const auto text = buf.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return parse_config_json(json::object());
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ConfigError("<file>", path.string() + ": malformed JSON: " + e.what());
    }
    return parse_config_json(doc);
}

json to_json(const RunConfig &rc) {
    const auto &c = rc.base;
    json j;
    j["policy"] = std::string(sim::to_string(c.policy));
    j["policies"] = json::array();
    for (auto p : rc.policies) j["policies"].push_back(std::string(sim::to_string(p)));
    j["frames"] = c.frames;
    j["episodes"] = rc.episodes;
    j["seed"] = c.seed;
    j["theta"] = c.theta;
    if (std::isinf(c.epsilon)) j["epsilon_m"] = "inf";
    else j["epsilon_m"] = c.epsilon;
    j["num_ues"] = c.num_ues;
    j["num_aps"] = c.num_aps;
    j["antennas_per_ap"] = c.antennas_per_ap;
    j["num_rbs"] = c.grid.num_rbs;
    j["num_slots"] = c.grid.num_slots;
    j["push_slots"] = c.grid.push_slots;
    j["pull_slots"] = c.grid.pull_slots;
    j["subcarriers_per_rb"] = c.grid.subcarriers_per_rb;
    j["symbols_per_slot"] = c.grid.symbols_per_slot;
    j["subcarrier_spacing_hz"] = c.grid.subcarrier_spacing;
    j["cyclic_prefix_s"] = c.grid.cyclic_prefix;
    j["tx_power_dbm"] = c.tx_power_dbm;
    j["noise_power_dbm"] = c.noise_power_dbm;
    j["carrier_hz"] = c.carrier_hz;
    j["antenna_gain_dbi"] = c.antenna_gain_dbi;
    j["side_m"] = c.side;
    j["ap_offset_m"] = c.ap_offset;
    j["array_orientation"] = c.orientation == sim::ArrayOrientation::Radial ? "radial" : "x";
    j["v_max_kmh"] = c.v_max_kmh;
    j["mean_bytes"] = c.mean_bytes;
    j["peb_resolution_m"] = c.peb_resolution;
    if (rc.sweep) {
        j["sweep"]["variable"] = std::string(to_string(rc.sweep->variable));
        j["sweep"]["values"] = rc.sweep->values;
    }
    return j;
}

sim::SimConfig at_sweep_point(const sim::SimConfig &base, SweepVariable variable, double value) {
    sim::SimConfig c = base;
    switch (variable) {
    case SweepVariable::Theta: c.theta = value; break;
    case SweepVariable::Epsilon: c.epsilon = value; break;
    case SweepVariable::NumUes: c.num_ues = static_cast<int>(value); break;
    }
    c.validate();
    return c;
}

std::vector<PolicySweep> sweep_results(const RunConfig &cfg, const SweepSpec &spec, int threads) {
    spec.validate();
    std::vector<double> values = spec.values;
    std::sort(values.begin(), values.end());
    std::vector<PolicySweep> out;
    for (auto policy : cfg.policies) {
        PolicySweep ps{policy, {}};
        for (double v : values) {
            auto c = at_sweep_point(cfg.base, spec.variable, v);
            c.policy = policy;
            ps.points.push_back({v, sim::run_campaign(c, cfg.episodes, threads)});
        }
        out.push_back(std::move(ps));
    }
    return out;
}

namespace {

std::ofstream open_output(const fs::path &path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::string optional_cell(const std::optional<double> &v) { return v ? format_number(*v) : std::string(); }

std::string lower(std::string_view s) {
    std::string r(s);
    std::transform(r.begin(), r.end(), r.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return r;
}

} // namespace

void write_sweep_csv(const PolicySweep &sweep, const fs::path &path) {
    auto out = open_output(path);
    out << kSweepColumns << '\n';
    for (const auto &p : sweep.points) {
        const auto &r = p.result;
        out << format_number(p.value) << ',' << format_number(r.avg_voi_tot) << ',' << optional_cell(r.avg_pull_access_rate)
            << ',' << optional_cell(r.avg_push_success_rate) << ',' << format_number(r.stderr_voi) << ','
            << optional_cell(r.avg_push_success_rate_per_frame) << ',' << optional_cell(r.com_dominant_share) << ','
            << r.q_loc << ',' << r.episodes << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_push_pmf_csv(const RunConfig &cfg, const SweepSpec &spec, const fs::path &path) {
    auto out = open_output(path);
    out << "sweep_value,theta,num_ues,push_res,s,probability\n";
    std::vector<double> values = spec.values;
    std::sort(values.begin(), values.end());
    for (double v : values) {
        const auto c = at_sweep_point(cfg.base, spec.variable, v);
        const auto pmf = access::success_count_distribution(c.push_config());
        for (std::size_t s = 0; s < pmf.size(); ++s)
            out << format_number(v) << ',' << format_number(c.theta) << ',' << c.num_ues << ',' << c.grid.push_res() << ','
                << s << ',' << format_number(pmf[s]) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<fs::path> run_sweep(const RunConfig &cfg, const SweepSpec &spec, const fs::path &out_dir, int threads) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

    const auto var = std::string(to_string(spec.variable));
    std::vector<fs::path> written;
    for (const auto &ps : sweep_results(cfg, spec, threads)) {
        const auto path = out_dir / (lower(sim::to_string(ps.policy)) + "_vs_" + var + ".csv");
        write_sweep_csv(ps, path);
        written.push_back(path);
    }
    const auto pmf_path = out_dir / ("push_pmf_vs_" + var + ".csv");
    write_push_pmf_csv(cfg, spec, pmf_path);
    written.push_back(pmf_path);

    RunConfig resolved = cfg;
    resolved.sweep = spec;
    json manifest;
    manifest["seed"] = cfg.base.seed;
    manifest["episodes"] = cfg.episodes;
    manifest["frames_per_episode"] = cfg.base.frames;
    manifest["config"] = to_json(resolved);
    manifest["columns"] = kSweepColumns;
    manifest["files"] = json::array();
    for (const auto &p : written) manifest["files"].push_back(p.filename().string());
    const auto manifest_path = out_dir / "manifest.json";
    auto out = open_output(manifest_path);
    out << manifest.dump(2) << '\n';
    written.push_back(manifest_path);
    return written;
}

void emit_peb_map(const sim::SimConfig &cfg, double resolution, const fs::path &path) {
    cfg.validate();
    const auto scn = sim::build_scenario(cfg);
    const auto samples = loc::peb_map(scn, cfg.grid, cfg.peb_model(), resolution);
    auto out = open_output(path);
    out << "x,y,peb\n";
    for (const auto &s : samples) out << format_number(s.x) << ',' << format_number(s.y) << ',' << format_number(s.peb) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

} // namespace goisac::exp
