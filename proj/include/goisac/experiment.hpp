#pragma once

// Run configuration, parameter sweeps and CSV emission.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "goisac/simkit.hpp"

namespace goisac::exp {

enum class SweepVariable { Theta, Epsilon, NumUes };

std::string_view to_string(SweepVariable v);
SweepVariable parse_sweep_variable(std::string_view name);

struct SweepSpec {
    SweepVariable variable = SweepVariable::Theta;
    std::vector<double> values;

    /// Throws ConfigError when a value is outside the variable's domain.
    void validate() const;
};

struct RunConfig {
    sim::SimConfig base;
    int episodes = 100;
    std::vector<sim::Policy> policies{std::begin(sim::kAllPolicies), std::end(sim::kAllPolicies)};
    std::optional<SweepSpec> sweep;
};

/// Parses "start:stop:step" (stop inclusive) or a comma separated list.
std::vector<double> parse_values(const std::string &text);

/// Reads a JSON run configuration. Omitted keys keep their defaults; an
/// empty file yields the defaults.
RunConfig parse_config(const std::filesystem::path &path);
RunConfig parse_config_json(const nlohmann::json &doc);
nlohmann::json to_json(const RunConfig &cfg);

/// Applies one sweep value to a copy of `base`.
sim::SimConfig at_sweep_point(const sim::SimConfig &base, SweepVariable variable, double value);

struct SweepPoint {
    double value;
    sim::CampaignResult result;
};

struct PolicySweep {
    sim::Policy policy;
    std::vector<SweepPoint> points; // ascending sweep value
};

std::vector<PolicySweep> sweep_results(const RunConfig &cfg, const SweepSpec &spec, int threads = 0);

/// Writes <policy>_vs_<variable>.csv per policy, push_pmf_vs_<variable>.csv
/// and manifest.json into `out_dir`. Returns the written paths.
std::vector<std::filesystem::path> run_sweep(const RunConfig &cfg, const SweepSpec &spec,
                                             const std::filesystem::path &out_dir, int threads = 0);

void write_sweep_csv(const PolicySweep &sweep, const std::filesystem::path &path);
void write_push_pmf_csv(const RunConfig &cfg, const SweepSpec &spec, const std::filesystem::path &path);

/// x, y, peb rows over the deployment square.
void emit_peb_map(const sim::SimConfig &cfg, double resolution, const std::filesystem::path &path);

/// printf("%.12g"), the precision of every emitted number.
std::string format_number(double v);

inline constexpr const char *kSweepColumns =
    "sweep_value,avg_voi_tot,avg_pull_access_rate,avg_push_success_rate,stderr_voi,"
    "avg_push_success_rate_per_frame,com_dominant_share,q_loc,episodes";

} // namespace goisac::exp
