#include "goisac/access.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace goisac::access {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_factorial(int k) { return std::lgamma(static_cast<double>(k) + 1.0); }

double log_binomial(int n, int k) { return log_factorial(n) - log_factorial(k) - log_factorial(n - k); }

double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

void compose(int parts, int total, int min_part, std::vector<int> &prefix,
             const std::function<void(std::span<const int>)> &visit) {
    if (parts == 0) {
        if (total == 0) visit(prefix);
        return;
    }
    // Leave room for the remaining parts.
    for (int k = min_part; k <= total - (parts - 1) * min_part; ++k) {
        prefix.push_back(k);
        compose(parts - 1, total - k, min_part, prefix, visit);
        prefix.pop_back();
    }
}

} // namespace

double uniform_voi_cdf(double v) { return std::clamp(v, 0.0, 1.0); }

void PushConfig::validate() const {
    if (num_ues < 1) throw std::domain_error("num_ues must be >= 1");
    if (push_res < 1) throw std::domain_error("push_res must be >= 1");
    if (!(theta >= 0.0 && theta <= 1.0)) throw std::domain_error("theta must lie in [0, 1]");
    if (!voi_cdf) throw std::domain_error("voi_cdf is empty");
}

double PushConfig::tx_probability() const {
    const double cdf = voi_cdf(theta);
    if (!(cdf >= 0.0 && cdf <= 1.0)) throw std::domain_error("voi_cdf must map into [0, 1]");
    return 1.0 - cdf;
}

double tx_count_pmf(const PushConfig &cfg, int n) {
    cfg.validate();
    if (n < 0 || n > cfg.num_ues)
        throw std::domain_error("tx count " + std::to_string(n) + " outside 0..U");
    const double p = cfg.tx_probability();
    const int u = cfg.num_ues;
    // Degenerate endpoints would hit log(0).
    if (p == 0.0) return n == 0 ? 1.0 : 0.0;
    if (p == 1.0) return n == u ? 1.0 : 0.0;
    return std::exp(log_binomial(u, n) + n * std::log(p) + (u - n) * std::log1p(-p));
}

void for_each_composition(int parts, int total, int min_part,
                          const std::function<void(std::span<const int>)> &visit) {
    if (parts < 0 || total < 0 || min_part < 1) return;
    std::vector<int> prefix;
    prefix.reserve(static_cast<std::size_t>(parts));
    compose(parts, total, min_part, prefix, visit);
}

CollisionWeights::CollisionWeights(int max_parts, int max_total)
    : max_parts_(std::max(max_parts, 0)), max_total_(std::max(max_total, 0)),
      table_(static_cast<std::size_t>(max_parts_ + 1) * (max_total_ + 1), kNegInf) {
    auto at = [this](int c, int m) -> double & { return table_[static_cast<std::size_t>(c) * (max_total_ + 1) + m]; };
    at(0, 0) = 0.0;
    // W(c, m) = sum_{k >= 2} C(m, k) W(c - 1, m - k): the first group takes k labelled UEs.
    for (int c = 1; c <= max_parts_; ++c) {
        for (int m = 2 * c; m <= max_total_; ++m) {
            double acc = kNegInf;
            for (int k = 2; m - k >= 2 * (c - 1); ++k) acc = log_add(acc, log_binomial(m, k) + at(c - 1, m - k));
            at(c, m) = acc;
        }
    }
}

double CollisionWeights::log_weight(int parts, int total) const {
    if (parts < 0 || total < 0) return kNegInf;
    if (parts > max_parts_ || total > max_total_)
        throw std::out_of_range("CollisionWeights table too small");
    return table_[static_cast<std::size_t>(parts) * (max_total_ + 1) + total];
}

double log_outcome_pmf(int push_res, int n, int s, int c, const CollisionWeights &weights) {
    if (push_res < 1 || n < 0 || s < 0 || c < 0) throw std::domain_error("outcome_pmf arguments must be non-negative, P >= 1");
    if (s + c > push_res) return kNegInf;
    const double log_p = std::log(static_cast<double>(push_res));
    if (c == 0) {
        if (s != n) return kNegInf;
        return log_factorial(push_res) - s * log_p - log_factorial(push_res - s);
    }
    if (n < s + 2 * c) return kNegInf;
    return log_binomial(n, s) + weights.log_weight(c, n - s) + log_factorial(push_res) - n * log_p -
           log_factorial(push_res - s - c) - log_factorial(c);
}

double outcome_pmf(int push_res, int n, int s, int c) {
    if (push_res < 1 || n < 0 || s < 0 || c < 0) throw std::domain_error("outcome_pmf arguments must be non-negative, P >= 1");
    const CollisionWeights weights(c, std::max(n - s, 0));
    return std::exp(log_outcome_pmf(push_res, n, s, c, weights));
}

std::vector<double> success_count_distribution(const PushConfig &cfg) {
    cfg.validate();
    const int u = cfg.num_ues;
    const int p = cfg.push_res;
    const int s_max = std::min(p, u);
    const CollisionWeights weights(std::min(u / 2, p), u);

    std::vector<double> tx(static_cast<std::size_t>(u) + 1);
    for (int n = 0; n <= u; ++n) tx[n] = tx_count_pmf(cfg, n);

    std::vector<double> pmf(static_cast<std::size_t>(s_max) + 1, 0.0);
    for (int s = 0; s <= s_max; ++s) {
        double acc = 0.0;
        for (int n = s; n <= u; ++n) {
            if (tx[n] == 0.0) continue;
            const double log_tx = std::log(tx[n]);
            const int c_max = std::min((n - s) / 2, p - s);
            for (int c = 0; c <= c_max; ++c) {
                const double lp = log_outcome_pmf(p, n, s, c, weights);
                if (lp != kNegInf) acc += std::exp(lp + log_tx);
            }
        }
        pmf[s] = acc;
    }
    return pmf;
}

double success_count_pmf(const PushConfig &cfg, int s) {
    cfg.validate();
    if (s < 0 || s > std::min(cfg.push_res, cfg.num_ues))
        throw std::domain_error("success count " + std::to_string(s) + " outside 0..min(P, U)");
    return success_count_distribution(cfg)[s];
}

double expected_successes(const PushConfig &cfg) {
    const auto pmf = success_count_distribution(cfg);
    double mean = 0.0;
    for (std::size_t s = 0; s < pmf.size(); ++s) mean += static_cast<double>(s) * pmf[s];
    return mean;
}

PushOutcome contend(std::span<const int> transmitters, std::span<const int> re_choice, int push_res) {
    if (push_res < 1) throw std::domain_error("push_res must be >= 1");
    PushOutcome out;
    out.attempts = static_cast<int>(transmitters.size());
    std::vector<int> load(static_cast<std::size_t>(push_res), 0);
    std::vector<int> owner(static_cast<std::size_t>(push_res), -1);
    for (int ue : transmitters) {
        const int re = re_choice[ue];
        if (re < 0 || re >= push_res) throw std::out_of_range("RE choice outside the push subframe");
        ++load[re];
        owner[re] = ue;
    }
    for (int re = 0; re < push_res; ++re) {
        if (load[re] == 1) out.singletons.push_back({owner[re], re});
        else if (load[re] >= 2) out.collided_res.push_back(re);
    }
    std::sort(out.singletons.begin(), out.singletons.end(),
              [](const Singleton &a, const Singleton &b) { return a.ue < b.ue; });
    return out;
}

PushOutcome simulate_push(const PushConfig &cfg, std::span<const double> voi, std::mt19937_64 &rng) {
    cfg.validate();
    if (static_cast<int>(voi.size()) != cfg.num_ues) throw std::domain_error("need one VoI draw per UE");
    std::uniform_int_distribution<int> pick(0, cfg.push_res - 1);
    std::vector<int> choice(voi.size());
    std::vector<int> transmitters;
    for (std::size_t u = 0; u < voi.size(); ++u) {
        choice[u] = pick(rng);
        if (voi[u] > cfg.theta) transmitters.push_back(static_cast<int>(u));
    }
    return contend(transmitters, choice, cfg.push_res);
}

PushOutcome simulate_push(const PushConfig &cfg, std::span<const double> voi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return simulate_push(cfg, voi, rng);
}

} // namespace goisac::access
