#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "goisac/experiment.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace goisac;

namespace {

access::PushConfig push_config(int num_ues, int push_res, double theta) {
    access::PushConfig c;
    c.num_ues = num_ues;
    c.push_res = push_res;
    c.theta = theta;
    return c;
}

py::dict campaign_dict(const sim::CampaignResult &r) {
    auto opt = [](const std::optional<double> &v) -> py::object {
        if (v) return py::float_(*v);
        return py::none();
    };
    return py::dict("episodes"_a = r.episodes, "frames"_a = r.frames, "avg_voi_tot"_a = r.avg_voi_tot,
                    "stderr_voi"_a = r.stderr_voi, "avg_pull_access_rate"_a = opt(r.avg_pull_access_rate),
                    "avg_push_success_rate"_a = opt(r.avg_push_success_rate),
                    "avg_push_success_rate_per_frame"_a = opt(r.avg_push_success_rate_per_frame),
                    "com_dominant_share"_a = opt(r.com_dominant_share), "avg_attempts"_a = r.avg_attempts,
                    "avg_successes"_a = r.avg_successes, "avg_served"_a = r.avg_served, "q_loc"_a = r.q_loc);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Goal-oriented push/pull ISAC access: analytics, PHY, localization bound, scheduling and simulation";

    py::register_exception<SingularGeometry>(m, "SingularGeometry", PyExc_ValueError);
    py::register_exception<Unidentifiable>(m, "Unidentifiable", PyExc_RuntimeError);
    py::register_exception<Undeliverable>(m, "Undeliverable", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    // Push analytics (uniform VoI).
    m.def("tx_count_pmf", [](int u, int p, double theta, int n) { return access::tx_count_pmf(push_config(u, p, theta), n); },
          "num_ues"_a, "push_res"_a, "theta"_a, "n"_a);
    m.def("outcome_pmf", &access::outcome_pmf, "push_res"_a, "n"_a, "s"_a, "c"_a);
    m.def("success_count_distribution",
          [](int u, int p, double theta) { return access::success_count_distribution(push_config(u, p, theta)); },
          "num_ues"_a, "push_res"_a, "theta"_a);
    m.def(
        "simulate_push",
        [](int u, int p, double theta, const std::vector<double> &voi, std::uint64_t seed) {
            const auto out = access::simulate_push(push_config(u, p, theta), voi, seed);
            py::list singles;
            for (const auto &s : out.singletons) singles.append(py::make_tuple(s.ue, s.re));
            return py::dict("attempts"_a = out.attempts, "singletons"_a = singles, "collided_res"_a = out.collided_res);
        },
        "num_ues"_a, "push_res"_a, "theta"_a, "voi"_a, "seed"_a);

    // PHY
    m.def("uatf_se", py::overload_cast<const Eigen::VectorXd &, double, double, int>(&phy::uatf_se), "beta"_a,
          "tx_power"_a, "noise_power"_a, "antennas"_a);

    // Localization
    m.def("peb_from_fim", py::overload_cast<const Eigen::MatrixXd &>(&loc::peb_from_fim), "fim"_a);
    m.def("q_loc", &loc::q_loc, "peb_single"_a, "epsilon"_a);

    // Scheduling
    py::class_<alloc::UeDemand>(m, "UeDemand")
        .def(py::init([](int ue, double voi, int q_com, int q_loc, std::int64_t bytes) {
                 return alloc::UeDemand{ue, voi, bytes, q_com, q_loc};
             }),
             "ue"_a, "voi"_a, "q_com"_a, "q_loc"_a = 0, "bytes"_a = 1)
        .def_readwrite("ue", &alloc::UeDemand::ue)
        .def_readwrite("voi", &alloc::UeDemand::voi)
        .def_readwrite("bytes", &alloc::UeDemand::bytes)
        .def_readwrite("q_com", &alloc::UeDemand::q_com)
        .def_readwrite("q_loc", &alloc::UeDemand::q_loc)
        .def_property_readonly("q", &alloc::UeDemand::q);
    py::class_<alloc::Schedule>(m, "Schedule")
        .def_readonly("assignment", &alloc::Schedule::assignment)
        .def_readonly("served", &alloc::Schedule::served)
        .def_readonly("total_voi", &alloc::Schedule::total_voi);
    auto as_span = [](const std::vector<alloc::UeDemand> &d) { return std::span<const alloc::UeDemand>(d); };
    m.def("schedule_heuristic", [as_span](const std::vector<alloc::UeDemand> &d, int q) { return alloc::schedule_heuristic(as_span(d), q); },
          "demands"_a, "capacity"_a);
    m.def("schedule_exact", [as_span](const std::vector<alloc::UeDemand> &d, int q) { return alloc::schedule_exact(as_span(d), q); },
          "demands"_a, "capacity"_a);
    m.def("schedule_voi_blind", [as_span](const std::vector<alloc::UeDemand> &d, int q) { return alloc::schedule_voi_blind(as_span(d), q); },
          "demands"_a, "capacity"_a);

    // Simulation
    py::enum_<sim::Policy>(m, "Policy")
        .value("GOIA", sim::Policy::Goia)
        .value("GOCA", sim::Policy::Goca)
        .value("POIA", sim::Policy::Poia)
        .value("VIBA", sim::Policy::Viba);

    py::class_<sim::SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("policy", &sim::SimConfig::policy)
        .def_readwrite("frames", &sim::SimConfig::frames)
        .def_readwrite("theta", &sim::SimConfig::theta)
        .def_readwrite("epsilon", &sim::SimConfig::epsilon)
        .def_readwrite("num_ues", &sim::SimConfig::num_ues)
        .def_readwrite("antennas_per_ap", &sim::SimConfig::antennas_per_ap)
        .def_readwrite("tx_power_dbm", &sim::SimConfig::tx_power_dbm)
        .def_readwrite("noise_power_dbm", &sim::SimConfig::noise_power_dbm)
        .def_readwrite("carrier_hz", &sim::SimConfig::carrier_hz)
        .def_readwrite("antenna_gain_dbi", &sim::SimConfig::antenna_gain_dbi)
        .def_readwrite("side", &sim::SimConfig::side)
        .def_readwrite("v_max_kmh", &sim::SimConfig::v_max_kmh)
        .def_readwrite("mean_bytes", &sim::SimConfig::mean_bytes)
        .def_readwrite("peb_resolution", &sim::SimConfig::peb_resolution)
        .def_readwrite("seed", &sim::SimConfig::seed)
        .def_property_readonly("push_res", [](const sim::SimConfig &c) { return c.grid.push_res(); })
        .def_property_readonly("pull_res", [](const sim::SimConfig &c) { return c.grid.pull_res(); })
        .def("validate", &sim::SimConfig::validate);

    m.def("run_campaign", [](const sim::SimConfig &c, int episodes, int threads) {
        sim::CampaignResult r;
        {
            py::gil_scoped_release release;
            r = sim::run_campaign(c, episodes, threads);
        }
        return campaign_dict(r);
    }, "config"_a, "episodes"_a, "threads"_a = 0);

    m.def("worst_case_position", [](const sim::SimConfig &c, double resolution) {
        const auto scn = sim::build_scenario(c);
        const auto wc = loc::worst_case_position(scn, c.grid, c.peb_model(), resolution);
        return py::make_tuple(wc.position.x(), wc.position.y(), wc.peb);
    }, "config"_a, "resolution"_a = 1.0);

    m.def("single_re_peb", [](const sim::SimConfig &c, double x, double y) {
        const auto scn = sim::build_scenario(c);
        return loc::single_re_peb(scn, c.grid, c.peb_model(), Point(x, y));
    }, "config"_a, "x"_a, "y"_a);

    m.def("run_sweep", [](const std::filesystem::path &config, const std::filesystem::path &out_dir) {
        const auto rc = exp::parse_config(config);
        if (!rc.sweep) throw ConfigError("sweep", "config has no sweep section");
        return exp::run_sweep(rc, *rc.sweep, out_dir);
    }, "config"_a, "out_dir"_a);

    m.def("emit_peb_map", [](const sim::SimConfig &c, double resolution, const std::filesystem::path &path) {
        exp::emit_peb_map(c, resolution, path);
    }, "config"_a, "resolution"_a, "path"_a);
}
