#pragma once

// Push subframe: framed slotted ALOHA with a VoI threshold.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace goisac::access {

using VoiCdf = std::function<double(double)>;

double uniform_voi_cdf(double v);

struct PushConfig {
    int num_ues = 50;
    int push_res = 50;
    double theta = 0.7;
    VoiCdf voi_cdf = uniform_voi_cdf;

    void validate() const;
    /// 1 - P_v(theta): chance that a single UE transmits.
    double tx_probability() const;
};

/// Binomial(U, 1 - P_v(theta)) pmf of the number of transmitting UEs.
double tx_count_pmf(const PushConfig &cfg, int n);

/// Calls `visit` with every ordered composition of `total` into `parts`
/// integers, each at least `min_part`.
void for_each_composition(int parts, int total, int min_part,
                          const std::function<void(std::span<const int>)> &visit);

/// log of sum over compositions k of `total` into `parts` parts (all >= 2) of
/// the multinomial coefficient total! / prod(k_i!). Filled by a log-space
/// recurrence so it stays finite for a few hundred UEs.
class CollisionWeights {
public:
    CollisionWeights(int max_parts, int max_total);

    /// -inf when no composition exists.
    double log_weight(int parts, int total) const;

private:
    int max_parts_;
    int max_total_;
    std::vector<double> table_;
};

/// log p_o(s, c | n); -inf when infeasible.
double log_outcome_pmf(int push_res, int n, int s, int c, const CollisionWeights &weights);

/// Probability that `n` transmitters on `push_res` REs leave `s` singleton
/// and `c` collided REs.
double outcome_pmf(int push_res, int n, int s, int c);

/// p(s | theta) for every s in 0..min(P, U).
std::vector<double> success_count_distribution(const PushConfig &cfg);

double success_count_pmf(const PushConfig &cfg, int s);

/// E[|S|] under `cfg`.
double expected_successes(const PushConfig &cfg);

struct Singleton {
    int ue;
    int re;
};

struct PushOutcome {
    int attempts = 0;
    std::vector<Singleton> singletons; // sorted by UE
    std::vector<int> collided_res;     // sorted
};

/// Every listed UE picks one of `push_res` REs; REs hit once succeed.
/// `re_choice[u]` holds a pre-drawn choice for each UE so that callers can
/// share the draws between policies.
PushOutcome contend(std::span<const int> transmitters, std::span<const int> re_choice, int push_res);

/// Threshold policy: UEs with V_u > theta transmit on a uniform RE.
PushOutcome simulate_push(const PushConfig &cfg, std::span<const double> voi, std::mt19937_64 &rng);
PushOutcome simulate_push(const PushConfig &cfg, std::span<const double> voi, std::uint64_t seed);

} // namespace goisac::access
