#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "goisac/simkit.hpp"

using namespace goisac;
using namespace goisac::sim;

namespace {

std::vector<UeState> scattered(int n, double side, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> pos(1.0, side - 1.0);
    std::uniform_real_distribution<double> voi(0.0, 1.0);
    std::vector<UeState> ues(static_cast<std::size_t>(n));
    for (auto &u : ues) {
        u.position = Point(pos(rng), pos(rng));
        u.voi = voi(rng);
        u.bytes = 200 + static_cast<std::int64_t>(rng() % 2000);
    }
    return ues;
}

FrameRng frame_rng(std::uint64_t s) { return {std::mt19937_64(s), std::mt19937_64(s + 1)}; }

} // namespace

TEST_CASE("policy names") {
    CHECK(parse_policy("goia") == Policy::Goia);
    CHECK(parse_policy("Viba") == Policy::Viba);
    CHECK(to_string(Policy::Poia) == "POIA");
    try {
        parse_policy("ALOHA");
        FAIL("expected ConfigError");
    } catch (const ConfigError &e) {
        CHECK(e.field() == "policy");
    }
}

TEST_CASE("config validation names the field") {
    auto expect_field = [](SimConfig c, const std::string &field) {
        try {
            c.validate();
            FAIL("expected ConfigError for " << field);
        } catch (const ConfigError &e) {
            CHECK(e.field() == field);
        }
    };
    SimConfig c;
    CHECK_NOTHROW(c.validate());
    c.theta = 1.5;
    expect_field(c, "theta");
    c = {};
    c.num_aps = 3;
    expect_field(c, "num_aps");
    c = {};
    c.epsilon = 0.0;
    expect_field(c, "epsilon");
    c = {};
    c.grid.pull_slots = 1;
    expect_field(c, "pull_slots");
    c = {};
    c.ap_offset = 120.0;
    expect_field(c, "ap_offset_m");
    c = {};
    c.num_ues = 100;
    CHECK_NOTHROW(c.validate());
    CHECK(c.push_config().push_res == 50);
    CHECK(c.grid.pull_res() == 125);
}

TEST_CASE("link budget defaults") {
    const SimConfig c;
    CHECK(c.tx_power() == doctest::Approx(1e-3));
    CHECK(c.noise_power() == doctest::Approx(std::pow(10.0, -12.5)));
    CHECK(c.link_gain_db() == doctest::Approx(4.3));
    CHECK(c.v_max() == doctest::Approx(20.0 / 3.6));
    CHECK(c.wavelength() == doctest::Approx(0.0856549880));
}

TEST_CASE("radial layout is symmetric") {
    const SimConfig c;
    const auto scn = build_scenario(c);
    for (int l = 0; l < 4; ++l) {
        const Point out = scn.center(l) - Point(100.0, 100.0);
        CHECK(std::abs(out.x()) == doctest::Approx(50.0));
        CHECK(std::abs(out.y()) == doctest::Approx(50.0));
        const Point axis = scn.antennas(l).col(1) - scn.antennas(l).col(0);
        CHECK(std::abs(axis.normalized().dot(out.normalized())) == doctest::Approx(1.0));
    }
}

TEST_CASE("mobility") {
    std::mt19937_64 rng(1);
    const double dt = phy::FrameGrid{}.frame_duration();
    UeState still;
    still.position = Point(10.0, 20.0);
    CHECK(step_mobility(still, dt, 200.0, rng).position == still.position);

    UeState ue;
    ue.v_max = 50.0;
    ue.position = Point(100.0, 100.0);
    for (int i = 0; i < 10000; ++i) {
        const auto next = step_mobility(ue, dt, 200.0, rng);
        CHECK((next.position - ue.position).norm() <= ue.v_max * dt * (1.0 + 1e-12));
    }

    // A fast UE pinned in a corner keeps bouncing back into the square.
    UeState edge;
    edge.v_max = 5000.0;
    edge.position = Point(0.0, 200.0);
    for (int i = 0; i < 10000; ++i) {
        edge = step_mobility(edge, dt, 200.0, rng);
        CHECK(edge.position.x() >= 0.0);
        CHECK(edge.position.x() <= 200.0);
        CHECK(edge.position.y() >= 0.0);
        CHECK(edge.position.y() <= 200.0);
    }
    CHECK_THROWS(step_mobility(ue, 0.0, 200.0, rng));
}

TEST_CASE("frame invariants for every policy") {
    const SimConfig base;
    const auto scn = build_scenario(base);
    std::mt19937_64 rng(42);
    for (Policy p : kAllPolicies) {
        auto cfg = base;
        cfg.policy = p;
        for (int trial = 0; trial < 50; ++trial) {
            cfg.theta = (trial % 11) / 10.0;
            const auto ues = scattered(50, 200.0, rng);
            const std::vector<double> dtau(50, 1e-7);
            auto fr = frame_rng(rng());
            const auto fm = run_frame(cfg, scn, ues, dtau, 8, fr);
            CHECK(fm.n_success <= fm.n_attempt);
            CHECK(fm.n_success <= cfg.grid.push_res());
            CHECK(fm.n_demands <= fm.n_success);
            CHECK(fm.n_served <= fm.n_demands);
            CHECK(fm.n_com_dominant <= fm.n_demands);
            CHECK(fm.voi_total <= fm.success_voi + 1e-12);
            CHECK(fm.voi_total >= 0.0);
            if (p == Policy::Viba) CHECK(fm.n_attempt == 50);
        }
    }
}

TEST_CASE("threshold one silences the goal-oriented policies") {
    SimConfig cfg;
    cfg.theta = 1.0;
    const auto scn = build_scenario(cfg);
    std::mt19937_64 rng(3);
    auto ues = scattered(50, 200.0, rng);
    const std::vector<double> dtau(50, 0.0);
    for (Policy p : {Policy::Goia, Policy::Goca, Policy::Poia}) {
        cfg.policy = p;
        auto fr = frame_rng(9);
        const auto fm = run_frame(cfg, scn, ues, dtau, 8, fr);
        CHECK(fm.n_attempt == 0);
        CHECK(fm.voi_total == 0.0);
        CHECK_FALSE(fm.push_success_rate().has_value());
        CHECK_FALSE(fm.pull_access_rate().has_value());
    }
}

TEST_CASE("push oracle admits everyone when U <= P") {
    SimConfig cfg;
    cfg.policy = Policy::Poia;
    cfg.theta = 0.0;
    cfg.num_ues = 40;
    const auto scn = build_scenario(cfg);
    std::mt19937_64 rng(6);
    const auto ues = scattered(40, 200.0, rng);
    const std::vector<double> dtau(40, 0.0);
    auto fr = frame_rng(1);
    const auto fm = run_frame(cfg, scn, ues, dtau, 0, fr);
    CHECK(fm.n_attempt == 40);
    CHECK(fm.n_success == 40);

    // U > P: the P highest-VoI UEs get through.
    cfg.num_ues = 80;
    const auto many = scattered(80, 200.0, rng);
    const std::vector<double> dtau80(80, 0.0);
    auto fr2 = frame_rng(2);
    const auto fm2 = run_frame(cfg, scn, many, dtau80, 0, fr2);
    CHECK(fm2.n_success == 50);
    std::vector<double> v;
    for (const auto &u : many) v.push_back(u.voi);
    std::sort(v.rbegin(), v.rend());
    double top = 0.0;
    for (int i = 0; i < 50; ++i) top += v[i];
    CHECK(fm2.success_voi == doctest::Approx(top));
}

TEST_CASE("localization demand") {
    SimConfig cfg;
    const auto scn = build_scenario(cfg);
    const int q1 = localization_demand(cfg, scn);
    CHECK(q1 >= 1);
    cfg.epsilon = 2.8;
    CHECK(localization_demand(cfg, scn) <= q1);
    cfg.epsilon = std::numeric_limits<double>::infinity();
    CHECK(localization_demand(cfg, scn) == 0);
}

TEST_CASE("campaigns are reproducible and thread independent") {
    SimConfig cfg;
    cfg.frames = 30;
    cfg.seed = 17;
    const auto a = run_campaign(cfg, 4, 1);
    const auto b = run_campaign(cfg, 4, 3);
    CHECK(a.avg_voi_tot == b.avg_voi_tot);
    CHECK(a.stderr_voi == b.stderr_voi);
    CHECK(a.avg_pull_access_rate == b.avg_pull_access_rate);
    cfg.seed = 18;
    CHECK(run_campaign(cfg, 4, 1).avg_voi_tot != a.avg_voi_tot);
    CHECK(a.frames == 120);
    CHECK(a.episodes == 4);
    CHECK_THROWS(run_campaign(cfg, 0, 1));
}

TEST_CASE("common random numbers across policies") {
    SimConfig cfg;
    cfg.frames = 40;
    cfg.epsilon = std::numeric_limits<double>::infinity();
    cfg.policy = Policy::Goia;
    const auto goia = run_campaign(cfg, 3, 1);
    cfg.policy = Policy::Goca;
    const auto goca = run_campaign(cfg, 3, 1);
    // Without a localization constraint the two policies coincide frame by frame.
    CHECK(goia.avg_voi_tot == goca.avg_voi_tot);
    CHECK(goia.avg_successes == goca.avg_successes);
}

TEST_CASE("dropping the localization constraint does not hurt") {
    SimConfig cfg;
    cfg.frames = 100;
    cfg.policy = Policy::Goia;
    const auto goia = run_campaign(cfg, 5, 1);
    cfg.policy = Policy::Goca;
    const auto goca = run_campaign(cfg, 5, 1);
    CHECK(goca.avg_voi_tot >= goia.avg_voi_tot);
    CHECK(goca.q_loc == 0);
    CHECK(goia.q_loc > 0);
    REQUIRE(goia.avg_pull_access_rate);
    REQUIRE(goca.avg_pull_access_rate);
    CHECK(*goca.avg_pull_access_rate >= *goia.avg_pull_access_rate);
}
