#include "goisac/simkit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace goisac::sim {

std::string_view to_string(Policy p) {
    switch (p) {
    case Policy::Goia: return "GOIA";
    case Policy::Goca: return "GOCA";
    case Policy::Poia: return "POIA";
    case Policy::Viba: return "VIBA";
    }
    return "?";
}

Policy parse_policy(std::string_view name) {
    std::string up(name);
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    for (Policy p : kAllPolicies)
        if (to_string(p) == up) return p;
    throw ConfigError("policy", "unknown policy '" + std::string(name) + "'");
}

void SimConfig::validate() const {
    auto need = [](bool ok, const char *field, const char *what) {
        if (!ok) throw ConfigError(field, what);
    };
    need(frames >= 1, "frames", "must be >= 1");
    need(theta >= 0.0 && theta <= 1.0, "theta", "must lie in [0, 1]");
    need(epsilon > 0.0, "epsilon", "must be > 0");
    need(num_ues >= 1, "num_ues", "must be >= 1");
    need(num_aps == 4, "num_aps", "the symmetric layout places exactly 4 APs");
    need(antennas_per_ap >= 1, "antennas_per_ap", "must be >= 1");
    need(grid.num_slots >= 1, "num_slots", "must be >= 1");
    need(grid.num_rbs >= 1, "num_rbs", "must be >= 1");
    need(grid.push_slots >= 1, "push_slots", "must be >= 1");
    need(grid.pull_slots >= 1, "pull_slots", "must be >= 1");
    need(grid.push_slots + grid.pull_slots <= grid.num_slots, "pull_slots", "push + pull slots exceed num_slots");
    need(grid.pull_slots >= grid.push_slots, "pull_slots", "pull subframe must be at least as large as the push subframe");
    need(grid.subcarriers_per_rb >= 1, "subcarriers_per_rb", "must be >= 1");
    need(grid.symbols_per_slot >= 2, "symbols_per_slot", "must be >= 2");
    need(grid.subcarrier_spacing > 0.0, "subcarrier_spacing_hz", "must be > 0");
    need(grid.cyclic_prefix >= 0.0, "cyclic_prefix_s", "must be >= 0");
    need(std::isfinite(tx_power_dbm), "tx_power_dbm", "must be finite");
    need(std::isfinite(noise_power_dbm), "noise_power_dbm", "must be finite");
    need(carrier_hz > 0.0, "carrier_hz", "must be > 0");
    need(std::isfinite(antenna_gain_dbi), "antenna_gain_dbi", "must be finite");
    need(side > 0.0, "side_m", "must be > 0");
    need(ap_offset > 0.0 && ap_offset < side / 2.0, "ap_offset_m", "must lie in (0, side/2)");
    need(v_max_kmh >= 0.0, "v_max_kmh", "must be >= 0");
    need(mean_bytes >= 1.0, "mean_bytes", "must be >= 1");
    need(peb_resolution > 0.0, "peb_resolution_m", "must be > 0");
}

access::PushConfig SimConfig::push_config() const {
    access::PushConfig pc;
    pc.num_ues = num_ues;
    pc.push_res = grid.push_res();
    pc.theta = theta;
    return pc;
}

phy::Scenario build_scenario(const SimConfig &cfg) {
    const double lambda = cfg.wavelength();
    const int m_count = cfg.antennas_per_ap;
    const Point mid(cfg.side / 2.0, cfg.side / 2.0);
    std::vector<Eigen::Matrix2Xd> aps;
    for (double sy : {-1.0, 1.0}) {
        for (double sx : {-1.0, 1.0}) {
            const Point center = mid + cfg.ap_offset * Point(sx, sy);
            const Point axis = cfg.orientation == ArrayOrientation::Radial ? Point(sx, sy).normalized() : Point(1.0, 0.0);
            Eigen::Matrix2Xd b(2, m_count);
            for (int m = 0; m < m_count; ++m) b.col(m) = center + (m - (m_count - 1) / 2.0) * (lambda / 2.0) * axis;
            aps.push_back(std::move(b));
        }
    }
    return phy::Scenario(std::move(aps), lambda, cfg.side);
}

UeState step_mobility(const UeState &ue, double frame_duration, double side, std::mt19937_64 &rng) {
    if (!(frame_duration > 0.0)) throw std::domain_error("frame duration must be positive");
    UeState next = ue;
    const double reach = ue.v_max * frame_duration;
    if (reach <= 0.0) return next;
    std::normal_distribution<double> gauss(0.0, reach / 3.0);
    Point step;
    step.x() = gauss(rng);
    step.y() = gauss(rng);
    if (const double n = step.norm(); n > reach) step *= reach / n;
    Point p = ue.position + step;
    for (int axis = 0; axis < 2; ++axis) {
        // The step is far shorter than the side, so one bounce suffices.
        if (p[axis] < 0.0) p[axis] = -p[axis];
        if (p[axis] > side) p[axis] = 2.0 * side - p[axis];
        p[axis] = std::clamp(p[axis], 0.0, side);
    }
    next.position = p;
    return next;
}

int localization_demand(const SimConfig &cfg, const phy::Scenario &scn) {
    if (std::isinf(cfg.epsilon)) return 0;
    const auto wc = loc::WorstCaseCache::global().get(scn, cfg.grid, cfg.peb_model(), cfg.peb_resolution);
    return loc::q_loc(wc.peb, cfg.epsilon);
}

namespace {

alloc::DecodedPush decode(const SimConfig &cfg, const phy::Scenario &scn, const UeState &ue, int ue_index,
                          double dtau, const Eigen::VectorXd &psi, int push_re, std::mt19937_64 &rng) {
    phy::ChannelRealization ch;
    ch.position = ue.position;
    ch.beta = phy::fspl_betas(scn, ue.position, cfg.link_gain_db());
    ch.psi = psi;
    ch.dtau = dtau;
    const auto re = cfg.grid.push_element(push_re);

    // QPSK pilot per subcarrier.
    std::uniform_int_distribution<int> quadrant(0, 3);
    std::vector<Complex> pilots(re.subcarriers.size());
    for (auto &s : pilots) s = std::polar(1.0, kPi / 4.0 + kPi / 2.0 * quadrant(rng));

    const auto hhat = phy::receive_and_ls_estimate(scn, cfg.grid, re, ch, cfg.tx_power(), cfg.noise_power(), pilots, rng);
    return {ue_index, ue.voi, ue.bytes,
            phy::estimate_beta(hhat, scn.num_aps(), cfg.grid.subcarriers_per_rb, scn.antennas_per_ap())};
}

} // namespace

FrameMetrics run_frame(const SimConfig &cfg, const phy::Scenario &scn, std::span<const UeState> ues,
                       std::span<const double> dtau, int q_loc, FrameRng &rng) {
    const int u_count = static_cast<int>(ues.size());
    const int push_res = cfg.grid.push_res();
    if (static_cast<int>(dtau.size()) != u_count) throw std::invalid_argument("need one clock offset per UE");

    // Drawn for every UE regardless of policy so that policies and thresholds
    // share the same random numbers.
    std::uniform_int_distribution<int> pick(0, push_res - 1);
    std::vector<int> re_choice(static_cast<std::size_t>(u_count));
    for (auto &re : re_choice) re = pick(rng.access);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    std::vector<Eigen::VectorXd> psi(static_cast<std::size_t>(u_count), Eigen::VectorXd(scn.num_aps()));
    for (auto &p : psi)
        for (Eigen::Index l = 0; l < p.size(); ++l) p[l] = phase(rng.channel);

    FrameMetrics fm;
    std::vector<access::Singleton> decoded;
    switch (cfg.policy) {
    case Policy::Goia:
    case Policy::Goca: {
        std::vector<int> tx;
        for (int u = 0; u < u_count; ++u)
            if (ues[u].voi > cfg.theta) tx.push_back(u);
        const auto out = access::contend(tx, re_choice, push_res);
        fm.n_attempt = out.attempts;
        decoded = out.singletons;
        break;
    }
    case Policy::Poia: {
        std::vector<int> eligible;
        for (int u = 0; u < u_count; ++u)
            if (ues[u].voi >= cfg.theta) eligible.push_back(u);
        std::stable_sort(eligible.begin(), eligible.end(), [&](int a, int b) { return ues[a].voi > ues[b].voi; });
        fm.n_attempt = static_cast<int>(eligible.size());
        const int admitted = std::min(push_res, fm.n_attempt);
        for (int k = 0; k < admitted; ++k) decoded.push_back({eligible[k], k});
        std::sort(decoded.begin(), decoded.end(), [](const auto &a, const auto &b) { return a.ue < b.ue; });
        break;
    }
    case Policy::Viba: {
        std::vector<int> tx(static_cast<std::size_t>(u_count));
        std::iota(tx.begin(), tx.end(), 0);
        const auto out = access::contend(tx, re_choice, push_res);
        fm.n_attempt = out.attempts;
        decoded = out.singletons;
        break;
    }
    }
    fm.n_success = static_cast<int>(decoded.size());

    std::vector<alloc::DecodedPush> pushes;
    pushes.reserve(decoded.size());
    for (const auto &s : decoded) {
        pushes.push_back(decode(cfg, scn, ues[s.ue], s.ue, dtau[s.ue], psi[s.ue], s.re, rng.channel));
        fm.success_voi += ues[s.ue].voi;
    }

    const int loc_res = cfg.policy == Policy::Goca ? 0 : q_loc;
    const auto demands = alloc::build_demands(pushes, cfg.grid, scn.antennas_per_ap(), cfg.tx_power(),
                                              cfg.noise_power(), loc_res);
    fm.n_demands = static_cast<int>(demands.size());
    for (const auto &d : demands)
        if (d.q_com >= d.q_loc) ++fm.n_com_dominant;

    const int capacity = cfg.grid.pull_res();
    const auto schedule = cfg.policy == Policy::Viba ? alloc::schedule_voi_blind(demands, capacity)
                                                     : alloc::schedule_heuristic(demands, capacity);
    fm.n_served = static_cast<int>(schedule.served.size());
    fm.voi_total = schedule.total_voi;
    return fm;
}

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t episode, std::uint64_t frame, std::uint64_t tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(episode), static_cast<std::uint32_t>(episode >> 32),
                      static_cast<std::uint32_t>(frame), static_cast<std::uint32_t>(tag)};
    return std::mt19937_64(seq);
}

enum StreamTag : std::uint64_t { kInit = 0, kApplication = 1, kAccess = 2, kChannel = 3 };

} // namespace

std::vector<FrameMetrics> run_episode(const SimConfig &cfg, const phy::Scenario &scn, int q_loc, int episode) {
    auto init = stream(cfg.seed, static_cast<std::uint64_t>(episode), 0, kInit);
    std::uniform_real_distribution<double> where(0.0, cfg.side);
    std::uniform_real_distribution<double> cto(0.0, cfg.grid.cyclic_prefix / 4.0);
    std::vector<UeState> ues(static_cast<std::size_t>(cfg.num_ues));
    std::vector<double> dtau(ues.size());
    for (std::size_t u = 0; u < ues.size(); ++u) {
        ues[u].position.x() = where(init);
        ues[u].position.y() = where(init);
        ues[u].v_max = cfg.v_max();
        dtau[u] = cto(init);
    }

    std::uniform_real_distribution<double> voi(0.0, 1.0);
    std::geometric_distribution<std::int64_t> size(1.0 / cfg.mean_bytes);
    const double dt = cfg.grid.frame_duration();

    std::vector<FrameMetrics> out;
    out.reserve(static_cast<std::size_t>(cfg.frames));
    for (int k = 0; k < cfg.frames; ++k) {
        auto app = stream(cfg.seed, static_cast<std::uint64_t>(episode), static_cast<std::uint64_t>(k) + 1, kApplication);
        for (auto &ue : ues) {
            ue.voi = voi(app);
            ue.bytes = 1 + size(app);
        }
        FrameRng rng{stream(cfg.seed, static_cast<std::uint64_t>(episode), static_cast<std::uint64_t>(k) + 1, kAccess),
                     stream(cfg.seed, static_cast<std::uint64_t>(episode), static_cast<std::uint64_t>(k) + 1, kChannel)};
        out.push_back(run_frame(cfg, scn, ues, dtau, q_loc, rng));
        for (auto &ue : ues) ue = step_mobility(ue, dt, cfg.side, app);
    }
    return out;
}

namespace {

struct EpisodeSums {
    double voi = 0.0;
    double pull_rate = 0.0;
    long pull_frames = 0;
    double push_rate = 0.0;
    long push_frames = 0;
    long attempts = 0;
    long successes = 0;
    long served = 0;
    long demands = 0;
    long com_dominant = 0;
};

EpisodeSums summarize(const std::vector<FrameMetrics> &frames) {
    EpisodeSums s;
    for (const auto &f : frames) {
        s.voi += f.voi_total;
        if (auto r = f.pull_access_rate()) {
            s.pull_rate += *r;
            ++s.pull_frames;
        }
        if (auto r = f.push_success_rate()) {
            s.push_rate += *r;
            ++s.push_frames;
        }
        s.attempts += f.n_attempt;
        s.successes += f.n_success;
        s.served += f.n_served;
        s.demands += f.n_demands;
        s.com_dominant += f.n_com_dominant;
    }
    return s;
}

} // namespace

CampaignResult run_campaign(const SimConfig &cfg, int episodes, int threads) {
    cfg.validate();
    if (episodes < 1) throw std::domain_error("episodes must be >= 1");
    const auto scn = build_scenario(cfg);
    const int q_loc = cfg.policy == Policy::Goca ? 0 : localization_demand(cfg, scn);

    std::vector<EpisodeSums> sums(static_cast<std::size_t>(episodes));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int e = next++; e < episodes; e = next++) sums[static_cast<std::size_t>(e)] = summarize(run_episode(cfg, scn, q_loc, e));
    };
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, episodes);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    // Reduced in episode order so the result is independent of scheduling.
    CampaignResult r;
    r.episodes = episodes;
    r.frames = static_cast<long>(episodes) * cfg.frames;
    r.q_loc = q_loc;
    EpisodeSums total;
    double sq = 0.0;
    for (const auto &s : sums) {
        const double ep_mean = s.voi / cfg.frames;
        sq += ep_mean * ep_mean;
        total.voi += s.voi;
        total.pull_rate += s.pull_rate;
        total.pull_frames += s.pull_frames;
        total.push_rate += s.push_rate;
        total.push_frames += s.push_frames;
        total.attempts += s.attempts;
        total.successes += s.successes;
        total.served += s.served;
        total.demands += s.demands;
        total.com_dominant += s.com_dominant;
    }
    const double frames = static_cast<double>(r.frames);
    r.avg_voi_tot = total.voi / frames;
    if (episodes > 1) {
        const double ep_avg = total.voi / frames;
        const double var = std::max(0.0, (sq - episodes * ep_avg * ep_avg) / (episodes - 1));
        r.stderr_voi = std::sqrt(var / episodes);
    }
    if (total.pull_frames > 0) r.avg_pull_access_rate = total.pull_rate / static_cast<double>(total.pull_frames);
    if (total.attempts > 0) r.avg_push_success_rate = static_cast<double>(total.successes) / static_cast<double>(total.attempts);
    if (total.push_frames > 0) r.avg_push_success_rate_per_frame = total.push_rate / static_cast<double>(total.push_frames);
    if (total.demands > 0) r.com_dominant_share = static_cast<double>(total.com_dominant) / static_cast<double>(total.demands);
    r.avg_attempts = static_cast<double>(total.attempts) / frames;
    r.avg_successes = static_cast<double>(total.successes) / frames;
    r.avg_served = static_cast<double>(total.served) / frames;
    return r;
}

} // namespace goisac::sim
