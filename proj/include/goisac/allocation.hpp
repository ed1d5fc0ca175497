#pragma once

// Per-UE resource sizing and pull-subframe knapsack scheduling.

#include <cstdint>
#include <span>
#include <vector>

#include "goisac/phy.hpp"

namespace goisac::alloc {

struct UeDemand {
    int ue = 0;
    double voi = 0.0;
    std::int64_t bytes = 1;
    int q_com = 1;
    int q_loc = 0;

    int q() const { return q_com > q_loc ? q_com : q_loc; }
};

/// REs needed to carry `bytes` at the UatF rate of `beta_hat`.
/// Throws Undeliverable when the rate is zero.
int q_com(std::int64_t bytes, const Eigen::VectorXd &beta_hat, const phy::FrameGrid &grid, int antennas,
          double tx_power, double noise_power);

/// REs needed for `bytes` at spectral efficiency `rate` [bit/s/Hz].
int q_com_at_rate(std::int64_t bytes, double rate, const phy::FrameGrid &grid);

/// A UE decoded from a singleton push RE, with the channel estimate taken there.
struct DecodedPush {
    int ue = 0;
    double voi = 0.0;
    std::int64_t bytes = 1;
    Eigen::VectorXd beta_hat;
};

/// One demand per decodable UE; undeliverable UEs are dropped.
std::vector<UeDemand> build_demands(std::span<const DecodedPush> pushes, const phy::FrameGrid &grid, int antennas,
                                    double tx_power, double noise_power, int q_loc);

struct Schedule {
    std::vector<int> assignment; // pull RE -> UE, -1 when unassigned
    std::vector<int> served;     // ascending UE indices
    double total_voi = 0.0;
};

/// Checks capacity, orthogonality and per-UE allocation; throws std::logic_error.
void check_feasible(const Schedule &schedule, std::span<const UeDemand> demands, int capacity);

/// Density-ordered greedy fill only.
Schedule schedule_greedy(std::span<const UeDemand> demands, int capacity);

/// Greedy fill followed by remove-one local search.
Schedule schedule_heuristic(std::span<const UeDemand> demands, int capacity);

/// Optimal 0/1 knapsack by dynamic programming over capacity.
Schedule schedule_exact(std::span<const UeDemand> demands, int capacity);

inline constexpr int kMaxExactCapacity = 100000;

/// schedule_heuristic with every VoI set to 1; the reported total_voi uses
/// the true VoI of the served UEs.
Schedule schedule_voi_blind(std::span<const UeDemand> demands, int capacity);

} // namespace goisac::alloc
