#pragma once

// Scenario construction, UE mobility, per-frame protocol execution for the
// four access policies, and Monte-Carlo campaigns.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "goisac/access.hpp"
#include "goisac/allocation.hpp"
#include "goisac/locfim.hpp"
#include "goisac/phy.hpp"

namespace goisac::sim {

enum class Policy {
    Goia, ///< goal-oriented push + ISAC-constrained pull
    Goca, ///< as Goia without the localization constraint
    Poia, ///< collision-free push oracle, then as Goia
    Viba, ///< everyone pushes, VoI ignored when scheduling
};

std::string_view to_string(Policy p);
Policy parse_policy(std::string_view name);
inline constexpr Policy kAllPolicies[] = {Policy::Goia, Policy::Goca, Policy::Poia, Policy::Viba};

enum class ArrayOrientation {
    Radial, ///< ULA axis points away from the square center
    AxisX,
};

struct SimConfig {
    Policy policy = Policy::Goia;
    int frames = 100;
    double theta = 0.7;
    double epsilon = 1.0; // [m]; infinity disables the PEB constraint

    int num_ues = 50;
    int num_aps = 4;
    int antennas_per_ap = 2;
    phy::FrameGrid grid;

    double tx_power_dbm = 0.0;
    double noise_power_dbm = -95.0;
    double carrier_hz = 3.5e9;
    double antenna_gain_dbi = 2.15; // applied at both link ends

    double side = 200.0;
    double ap_offset = 50.0; // per-axis offset of each AP center from the square center
    ArrayOrientation orientation = ArrayOrientation::Radial;

    double v_max_kmh = 20.0;
    double mean_bytes = 1024.0;
    double peb_resolution = 1.0;

    std::uint64_t seed = 1;

    /// Throws ConfigError naming the offending field.
    void validate() const;

    double tx_power() const { return dbm_to_watt(tx_power_dbm); }
    double noise_power() const { return dbm_to_watt(noise_power_dbm); }
    double wavelength() const { return kLightspeed / carrier_hz; }
    double link_gain_db() const { return 2.0 * antenna_gain_dbi; }
    double v_max() const { return v_max_kmh / 3.6; }
    loc::PebModel peb_model() const { return {tx_power(), noise_power(), link_gain_db()}; }
    access::PushConfig push_config() const;
};

/// Four APs at (+-offset, +-offset) from the square center, each an M-antenna
/// ULA with lambda/2 spacing.
phy::Scenario build_scenario(const SimConfig &cfg);

struct UeState {
    Point position = Point::Zero();
    double v_max = 0.0;
    double voi = 0.0;
    std::int64_t bytes = 1;
};

/// One frame of Brownian motion, clipped to v_max * dt and reflected at the
/// square boundary.
UeState step_mobility(const UeState &ue, double frame_duration, double side, std::mt19937_64 &rng);

struct FrameMetrics {
    double voi_total = 0.0;
    int n_attempt = 0;
    int n_success = 0;
    int n_served = 0;
    int n_demands = 0;
    int n_com_dominant = 0; // demands with q_com >= q_loc
    double success_voi = 0.0;

    std::optional<double> push_success_rate() const {
        if (n_attempt == 0) return std::nullopt;
        return static_cast<double>(n_success) / n_attempt;
    }
    std::optional<double> pull_access_rate() const {
        if (n_success == 0) return std::nullopt;
        return static_cast<double>(n_served) / n_success;
    }
};

/// Independent random streams consumed by one frame.
struct FrameRng {
    std::mt19937_64 access;
    std::mt19937_64 channel;
};

/// Executes push contention, decoding, demand sizing and pull scheduling.
/// `dtau` holds each UE's clock offset; `q_loc` is the localization demand
/// shared by all UEs (ignored by Goca).
FrameMetrics run_frame(const SimConfig &cfg, const phy::Scenario &scn, std::span<const UeState> ues,
                       std::span<const double> dtau, int q_loc, FrameRng &rng);

/// REs per UE needed to meet cfg.epsilon at the cached worst-case position.
int localization_demand(const SimConfig &cfg, const phy::Scenario &scn);

struct CampaignResult {
    int episodes = 0;
    long frames = 0;
    double avg_voi_tot = 0.0;
    double stderr_voi = 0.0;
    std::optional<double> avg_pull_access_rate;
    std::optional<double> avg_push_success_rate;           // sum |S| / sum n
    std::optional<double> avg_push_success_rate_per_frame; // mean of |S|/n over frames with n > 0
    std::optional<double> com_dominant_share;
    double avg_attempts = 0.0;
    double avg_successes = 0.0;
    double avg_served = 0.0;
    int q_loc = 0;
};

/// Runs `episodes` episodes of cfg.frames frames. Episode e draws from streams
/// seeded by (cfg.seed, e), so the result does not depend on `threads`.
CampaignResult run_campaign(const SimConfig &cfg, int episodes, int threads = 0);

/// Per-frame metrics of one episode, in frame order.
std::vector<FrameMetrics> run_episode(const SimConfig &cfg, const phy::Scenario &scn, int q_loc, int episode);

} // namespace goisac::sim
