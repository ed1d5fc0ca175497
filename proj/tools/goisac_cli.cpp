// Command line front end: campaigns, sweeps, PEB maps and push analytics.

#include <algorithm>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "goisac/experiment.hpp"

using namespace goisac;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> episodes;
    std::string policies;
    int threads = 0;
};

void add_common(CLI::App *cmd, Common &opt) {
    cmd->add_option("-c,--config", opt.config, "JSON configuration (defaults when omitted)");
    cmd->add_option("--seed", opt.seed, "master seed");
    cmd->add_option("--episodes", opt.episodes, "episodes per point");
    cmd->add_option("--policies", opt.policies, "comma separated subset of GOIA,GOCA,POIA,VIBA");
    cmd->add_option("--threads", opt.threads, "worker threads (0 = hardware concurrency)");
}

exp::RunConfig load(const Common &opt) {
    exp::RunConfig rc = opt.config.empty() ? exp::parse_config_json(nlohmann::json::object()) : exp::parse_config(opt.config);
    if (opt.seed) rc.base.seed = *opt.seed;
    if (opt.episodes) {
        if (*opt.episodes < 1) throw ConfigError("episodes", "must be >= 1");
        rc.episodes = *opt.episodes;
    }
    if (!opt.policies.empty()) {
        rc.policies.clear();
        std::stringstream ss(opt.policies);
        for (std::string p; std::getline(ss, p, ',');) rc.policies.push_back(sim::parse_policy(p));
    }
    return rc;
}

std::string cell(const std::optional<double> &v) { return v ? exp::format_number(*v) : std::string(); }

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Goal-oriented push/pull ISAC access simulator"};
    app.require_subcommand(1);

    Common run_opt;
    auto *run = app.add_subcommand("run", "run one campaign per policy at the configured point");
    add_common(run, run_opt);

    Common sweep_opt;
    std::string sweep_var;
    std::string sweep_values;
    std::string out_dir = "results";
    auto *sweep = app.add_subcommand("sweep", "sweep theta, epsilon or U and write CSV files");
    add_common(sweep, sweep_opt);
    sweep->add_option("--variable", sweep_var, "theta | epsilon | U (overrides the config)");
    sweep->add_option("--values", sweep_values, "start:stop:step or comma list");
    sweep->add_option("-o,--out", out_dir, "output directory");

    Common map_opt;
    double resolution = 1.0;
    std::string map_out = "peb_map.csv";
    auto *map = app.add_subcommand("peb-map", "write the single-RE PEB over the deployment square");
    map->add_option("-c,--config", map_opt.config, "JSON configuration");
    map->add_option("--resolution", resolution, "grid spacing [m]")->check(CLI::PositiveNumber);
    map->add_option("-o,--out", map_out, "output CSV");

    Common pmf_opt;
    auto *pmf = app.add_subcommand("pmf", "print the analytic distribution of push successes");
    pmf->add_option("-c,--config", pmf_opt.config, "JSON configuration");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const auto rc = load(run_opt);
            std::cout << "policy,avg_voi_tot,stderr_voi,avg_pull_access_rate,avg_push_success_rate,q_loc\n";
            for (auto p : rc.policies) {
                auto c = rc.base;
                c.policy = p;
                const auto r = sim::run_campaign(c, rc.episodes, run_opt.threads);
                std::cout << sim::to_string(p) << ',' << exp::format_number(r.avg_voi_tot) << ','
                          << exp::format_number(r.stderr_voi) << ',' << cell(r.avg_pull_access_rate) << ','
                          << cell(r.avg_push_success_rate) << ',' << r.q_loc << '\n';
            }
        } else if (*sweep) {
            const auto rc = load(sweep_opt);
            exp::SweepSpec spec = rc.sweep.value_or(exp::SweepSpec{exp::SweepVariable::Theta, exp::parse_values("0:1:0.02")});
            if (!sweep_var.empty()) spec.variable = exp::parse_sweep_variable(sweep_var);
            if (!sweep_values.empty()) spec.values = exp::parse_values(sweep_values);
            std::sort(spec.values.begin(), spec.values.end());
            spec.validate();
            for (const auto &p : exp::run_sweep(rc, spec, out_dir, sweep_opt.threads)) std::cout << p.string() << '\n';
        } else if (*map) {
            const auto rc = load(map_opt);
            exp::emit_peb_map(rc.base, resolution, map_out);
            const auto scn = sim::build_scenario(rc.base);
            const auto wc = loc::worst_case_position(scn, rc.base.grid, rc.base.peb_model(), resolution);
            std::cout << "worst_case_x,worst_case_y,peb\n"
                      << exp::format_number(wc.position.x()) << ',' << exp::format_number(wc.position.y()) << ','
                      << exp::format_number(wc.peb) << '\n';
        } else if (*pmf) {
            const auto rc = load(pmf_opt);
            const auto dist = access::success_count_distribution(rc.base.push_config());
            std::cout << "s,probability\n";
            for (std::size_t s = 0; s < dist.size(); ++s) std::cout << s << ',' << exp::format_number(dist[s]) << '\n';
        }
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
