#include "goisac/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

namespace goisac::alloc {

int q_com_at_rate(std::int64_t bytes, double rate, const phy::FrameGrid &grid) {
    if (bytes < 1) throw std::domain_error("payload must be at least one byte");
    if (!(rate > 0.0)) throw Undeliverable("zero achievable rate");
    const double bits_per_re = rate * (grid.symbols_per_slot - 1) * grid.subcarriers_per_rb;
    const double need = std::ceil(8.0 * static_cast<double>(bytes) / bits_per_re);
    if (!(need <= 1e9)) throw Undeliverable("payload needs more than 1e9 REs");
    return std::max(1, static_cast<int>(need));
}

int q_com(std::int64_t bytes, const Eigen::VectorXd &beta_hat, const phy::FrameGrid &grid, int antennas,
          double tx_power, double noise_power) {
    return q_com_at_rate(bytes, phy::uatf_se(beta_hat, tx_power, noise_power, antennas), grid);
}

std::vector<UeDemand> build_demands(std::span<const DecodedPush> pushes, const phy::FrameGrid &grid, int antennas,
                                    double tx_power, double noise_power, int q_loc) {
    if (q_loc < 0) throw std::domain_error("q_loc must be non-negative");
    std::vector<UeDemand> out;
    out.reserve(pushes.size());
    for (const auto &p : pushes) {
        try {
            out.push_back({p.ue, p.voi, p.bytes, q_com(p.bytes, p.beta_hat, grid, antennas, tx_power, noise_power), q_loc});
        } catch (const Undeliverable &) {
        }
    }
    return out;
}

namespace {

void validate(std::span<const UeDemand> demands, int capacity) {
    if (capacity < 0) throw std::domain_error("capacity must be non-negative");
    std::set<int> seen;
    for (const auto &d : demands) {
        if (!std::isfinite(d.voi) || d.voi < 0.0) throw std::domain_error("VoI must be finite and non-negative");
        if (d.q() < 1) throw std::domain_error("every demand needs at least one RE");
        if (!seen.insert(d.ue).second) throw std::domain_error("duplicate UE " + std::to_string(d.ue) + " in demands");
    }
}

// Density V/Q descending, then higher V, then lower UE index.
std::vector<std::size_t> density_order(std::span<const UeDemand> demands, std::span<const double> value) {
    std::vector<std::size_t> order(demands.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double da = value[a] / demands[a].q();
        const double db = value[b] / demands[b].q();
        if (da != db) return da > db;
        if (value[a] != value[b]) return value[a] > value[b];
        return demands[a].ue < demands[b].ue;
    });
    return order;
}

long used_res(std::span<const UeDemand> demands, const std::vector<char> &in) {
    long used = 0;
    for (std::size_t i = 0; i < demands.size(); ++i)
        if (in[i]) used += demands[i].q();
    return used;
}

void greedy_fill(std::span<const UeDemand> demands, const std::vector<std::size_t> &order, std::vector<char> &in,
                 const std::vector<char> &eligible, long capacity) {
    long used = used_res(demands, in);
    for (std::size_t i : order) {
        if (in[i] || !eligible[i]) continue;
        if (used + demands[i].q() <= capacity) {
            in[i] = 1;
            used += demands[i].q();
        }
    }
}

// Summed in index order so a given subset always yields the same value.
double subset_value(std::span<const double> value, const std::vector<char> &in) {
    double total = 0.0;
    for (std::size_t i = 0; i < value.size(); ++i)
        if (in[i]) total += value[i];
    return total;
}

Schedule make_schedule(std::span<const UeDemand> demands, const std::vector<char> &in, int capacity) {
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < demands.size(); ++i)
        if (in[i]) chosen.push_back(i);
    std::sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) { return demands[a].ue < demands[b].ue; });

    Schedule s;
    s.assignment.assign(static_cast<std::size_t>(capacity), -1);
    std::size_t next = 0;
    for (std::size_t i : chosen) {
        for (int k = 0; k < demands[i].q(); ++k) s.assignment[next++] = demands[i].ue;
        s.served.push_back(demands[i].ue);
        s.total_voi += demands[i].voi;
    }
    return s;
}

std::vector<double> vois(std::span<const UeDemand> demands) {
    std::vector<double> v(demands.size());
    for (std::size_t i = 0; i < demands.size(); ++i) v[i] = demands[i].voi;
    return v;
}

std::vector<char> greedy_set(std::span<const UeDemand> demands, std::span<const double> value, int capacity) {
    const auto order = density_order(demands, value);
    std::vector<char> in(demands.size(), 0);
    greedy_fill(demands, order, in, std::vector<char>(demands.size(), 1), capacity);
    return in;
}

std::vector<char> local_search_set(std::span<const UeDemand> demands, std::span<const double> value, int capacity) {
    const auto order = density_order(demands, value);
    std::vector<char> in(demands.size(), 0);
    greedy_fill(demands, order, in, std::vector<char>(demands.size(), 1), capacity);
    double best = subset_value(value, in);

    // Each accepted move strictly increases the value, so no subset repeats.
    for (bool improved = true; improved;) {
        improved = false;
        for (std::size_t removed : order) {
            if (!in[removed]) continue;
            std::vector<char> eligible(demands.size());
            for (std::size_t i = 0; i < demands.size(); ++i) eligible[i] = !in[i] && i != removed;
            std::vector<char> candidate = in;
            candidate[removed] = 0;
            greedy_fill(demands, order, candidate, eligible, capacity);
            const double v = subset_value(value, candidate);
            if (v > best) {
                in = std::move(candidate);
                best = v;
                improved = true;
                break;
            }
        }
    }
    return in;
}

} // namespace

void check_feasible(const Schedule &schedule, std::span<const UeDemand> demands, int capacity) {
    if (static_cast<int>(schedule.assignment.size()) != capacity) throw std::logic_error("assignment does not cover the pull subframe");
    std::vector<int> count;
    std::vector<int> ids;
    for (const auto &d : demands) ids.push_back(d.ue);
    for (int ue : schedule.assignment) {
        if (ue < 0) continue;
        const auto it = std::find(ids.begin(), ids.end(), ue);
        if (it == ids.end()) throw std::logic_error("RE assigned to a UE without a demand");
    }
    for (int ue : schedule.served) {
        const auto it = std::find(ids.begin(), ids.end(), ue);
        if (it == ids.end()) throw std::logic_error("served UE without a demand");
        const auto have = std::count(schedule.assignment.begin(), schedule.assignment.end(), ue);
        if (have < demands[static_cast<std::size_t>(it - ids.begin())].q()) throw std::logic_error("served UE below its minimum allocation");
    }
    for (int ue : schedule.assignment)
        if (ue >= 0 && std::find(schedule.served.begin(), schedule.served.end(), ue) == schedule.served.end())
            throw std::logic_error("RE assigned to a UE that is not served");
}

Schedule schedule_greedy(std::span<const UeDemand> demands, int capacity) {
    validate(demands, capacity);
    const auto v = vois(demands);
    return make_schedule(demands, greedy_set(demands, v, capacity), capacity);
}

Schedule schedule_heuristic(std::span<const UeDemand> demands, int capacity) {
    validate(demands, capacity);
    const auto v = vois(demands);
    return make_schedule(demands, local_search_set(demands, v, capacity), capacity);
}

Schedule schedule_voi_blind(std::span<const UeDemand> demands, int capacity) {
    validate(demands, capacity);
    const std::vector<double> ones(demands.size(), 1.0);
    return make_schedule(demands, local_search_set(demands, ones, capacity), capacity);
}

Schedule schedule_exact(std::span<const UeDemand> demands, int capacity) {
    validate(demands, capacity);
    if (capacity > kMaxExactCapacity) throw std::length_error("capacity too large for the exact knapsack solver");
    const std::size_t n = demands.size();
    const auto cap = static_cast<std::size_t>(capacity);
    std::vector<double> best(cap + 1, 0.0);
    std::vector<std::vector<char>> take(n, std::vector<char>(cap + 1, 0));
    for (std::size_t i = 0; i < n; ++i) {
        const auto w = static_cast<std::size_t>(demands[i].q());
        if (w > cap) continue;
        for (std::size_t c = cap; c >= w; --c) {
            const double with = best[c - w] + demands[i].voi;
            if (with > best[c]) {
                best[c] = with;
                take[i][c] = 1;
            }
            if (c == w) break;
        }
    }
    std::vector<char> in(n, 0);
    std::size_t c = cap;
    for (std::size_t i = n; i-- > 0;) {
        if (take[i][c]) {
            in[i] = 1;
            c -= static_cast<std::size_t>(demands[i].q());
        }
    }
    return make_schedule(demands, in, capacity);
}

} // namespace goisac::alloc
