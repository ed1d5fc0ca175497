#include "goisac/phy.hpp"

#include <stdexcept>
#include <utility>

namespace goisac::phy {

Scenario::Scenario(std::vector<Eigen::Matrix2Xd> antennas, double wavelength, double side, double lightspeed)
    : antennas_(std::move(antennas)), wavelength_(wavelength), lightspeed_(lightspeed), side_(side) {
    if (antennas_.empty()) throw std::invalid_argument("scenario needs at least one AP");
    if (!(wavelength_ > 0.0) || !(lightspeed_ > 0.0) || !(side_ > 0.0))
        throw std::invalid_argument("wavelength, lightspeed and side must be positive");
    const auto m = antennas_.front().cols();
    if (m < 1) throw std::invalid_argument("APs need at least one antenna");
    centers_.reserve(antennas_.size());
    for (const auto &b : antennas_) {
        if (b.cols() != m) throw std::invalid_argument("all APs must have the same number of antennas");
        centers_.push_back(b.rowwise().mean());
    }
}

void FrameGrid::validate() const {
    if (num_slots < 1 || num_rbs < 1 || subcarriers_per_rb < 1) throw std::invalid_argument("grid dimensions must be positive");
    if (symbols_per_slot < 2) throw std::invalid_argument("a slot needs a pilot and at least one data symbol");
    if (push_slots < 1 || pull_slots < 1) throw std::invalid_argument("push and pull subframes must be non-empty");
    if (push_slots + pull_slots > num_slots) throw std::invalid_argument("push + pull slots exceed the frame");
    if (pull_res() < push_res()) throw std::invalid_argument("pull subframe must be at least as large as the push subframe");
    if (!(subcarrier_spacing > 0.0) || !(cyclic_prefix >= 0.0)) throw std::invalid_argument("invalid numerology");
}

ReElement FrameGrid::element(int slot, int rb) const {
    if (slot < 0 || slot >= num_slots || rb < 0 || rb >= num_rbs) throw std::out_of_range("RE outside the grid");
    ReElement re;
    re.subcarriers.resize(static_cast<std::size_t>(subcarriers_per_rb));
    re.symbols.resize(static_cast<std::size_t>(symbols_per_slot));
    for (int f = 0; f < subcarriers_per_rb; ++f) re.subcarriers[f] = rb * subcarriers_per_rb + f;
    for (int t = 0; t < symbols_per_slot; ++t) re.symbols[t] = slot * symbols_per_slot + t;
    return re;
}

ReElement FrameGrid::push_element(int index) const {
    if (index < 0 || index >= push_res()) throw std::out_of_range("push RE index");
    return element(index / num_rbs, index % num_rbs);
}

ReElement FrameGrid::pull_element(int index) const {
    if (index < 0 || index >= pull_res()) throw std::out_of_range("pull RE index");
    return element(num_slots - pull_slots + index / num_rbs, index % num_rbs);
}

double ap_distance(const Scenario &scn, int ap, const Point &x) {
    const double d = (x - scn.center(ap)).norm();
    if (d == 0.0) throw SingularGeometry("UE position coincides with the center of AP " + std::to_string(ap));
    return d;
}

Eigen::VectorXcd steering_vector(const Scenario &scn, int ap, const Point &x) {
    const double d = ap_distance(scn, ap, x);
    const Point dir = (x - scn.center(ap)) / d;
    const auto &b = scn.antennas(ap);
    const double k = 2.0 * kPi / scn.wavelength();
    Eigen::VectorXcd a(b.cols());
    for (Eigen::Index m = 0; m < b.cols(); ++m) a[m] = std::polar(1.0, k * (b.col(m) - scn.center(ap)).dot(dir));
    return a;
}

Eigen::VectorXcd delay_vector(const FrameGrid &grid, const ReElement &re, double tau) {
    if (!std::isfinite(tau)) throw std::domain_error("delay must be finite");
    Eigen::VectorXcd f(static_cast<Eigen::Index>(re.subcarriers.size()));
    for (std::size_t i = 0; i < re.subcarriers.size(); ++i)
        f[static_cast<Eigen::Index>(i)] = std::polar(1.0, -2.0 * kPi * re.subcarriers[i] * grid.subcarrier_spacing * tau);
    return f;
}

double total_delay(const Scenario &scn, int ap, const Point &x, double dtau) {
    return ap_distance(scn, ap, x) / scn.lightspeed() + dtau;
}

Eigen::VectorXcd channel_vector(const Scenario &scn, const FrameGrid &grid, const ReElement &re,
                                const ChannelRealization &ch) {
    const int l_count = scn.num_aps();
    const int m_count = scn.antennas_per_ap();
    const int f_count = static_cast<int>(re.subcarriers.size());
    if (ch.beta.size() != l_count || ch.psi.size() != l_count) throw std::invalid_argument("realization size does not match the AP count");

    Eigen::VectorXcd h(static_cast<Eigen::Index>(l_count) * f_count * m_count);
    for (int l = 0; l < l_count; ++l) {
        if (ch.beta[l] < 0.0) throw std::domain_error("large-scale fading must be non-negative");
        const Complex gain = std::sqrt(ch.beta[l]) * std::polar(1.0, ch.psi[l]);
        const Eigen::VectorXcd a = steering_vector(scn, l, ch.position);
        const Eigen::VectorXcd f = delay_vector(grid, re, total_delay(scn, l, ch.position, ch.dtau));
        for (int fi = 0; fi < f_count; ++fi)
            h.segment((static_cast<Eigen::Index>(l) * f_count + fi) * m_count, m_count) = gain * f[fi] * a;
    }
    return h;
}

Eigen::VectorXcd receive_and_ls_estimate(const Scenario &scn, const FrameGrid &grid, const ReElement &re,
                                         const ChannelRealization &ch, double tx_power, double noise_power,
                                         std::span<const Complex> pilots, std::mt19937_64 &rng) {
    if (!(tx_power > 0.0)) throw std::domain_error("transmit power must be positive");
    if (noise_power < 0.0) throw std::domain_error("noise power must be non-negative");
    const int m_count = scn.antennas_per_ap();
    const int f_count = static_cast<int>(re.subcarriers.size());
    if (static_cast<int>(pilots.size()) != f_count) throw std::invalid_argument("need one pilot per subcarrier");
    for (const auto &s : pilots)
        if (std::abs(std::abs(s) - 1.0) > 1e-9) throw std::domain_error("pilots must be unit modulus");

    const Eigen::VectorXcd h = channel_vector(scn, grid, re, ch);
    const double sqrt_p = std::sqrt(tx_power);
    std::normal_distribution<double> noise(0.0, std::sqrt(noise_power / 2.0));

    Eigen::VectorXcd hhat(h.size());
    for (Eigen::Index i = 0; i < h.size(); ++i) {
        const Complex pilot = pilots[static_cast<std::size_t>((i / m_count) % f_count)];
        Complex y = sqrt_p * h[i] * pilot;
        if (noise_power > 0.0) {
            const double re_part = noise(rng); // sequenced: argument order is unspecified
            y += Complex(re_part, noise(rng));
        }
        hhat[i] = y * std::conj(pilot) / sqrt_p;
    }
    return hhat;
}

Eigen::VectorXd estimate_beta(const Eigen::VectorXcd &hhat, int num_aps, int subcarriers, int antennas) {
    const Eigen::Index block = static_cast<Eigen::Index>(subcarriers) * antennas;
    if (hhat.size() != block * num_aps) throw std::invalid_argument("estimate size does not match L*F*M");
    Eigen::VectorXd beta(num_aps);
    for (int l = 0; l < num_aps; ++l) beta[l] = hhat.segment(l * block, block).squaredNorm() / static_cast<double>(block);
    return beta;
}

double uatf_se(std::span<const double> beta, double tx_power, double noise_power, int antennas) {
    double sum = 0.0;
    for (double b : beta) {
        if (b < 0.0) throw std::domain_error("large-scale fading must be non-negative");
        sum += b;
    }
    if (sum == 0.0) return 0.0;
    const double inv_snr = noise_power / tx_power;
    const double sinr = antennas * sum * sum / (inv_snr * (2.0 * sum + inv_snr * static_cast<double>(beta.size())));
    return std::log2(1.0 + sinr);
}

double uatf_se(const Eigen::VectorXd &beta, double tx_power, double noise_power, int antennas) {
    return uatf_se(std::span<const double>(beta.data(), static_cast<std::size_t>(beta.size())), tx_power, noise_power, antennas);
}

double fspl_beta(const Scenario &scn, const Point &x, int ap, double gain_db) {
    const double d = ap_distance(scn, ap, x);
    const double r = scn.wavelength() / (4.0 * kPi * d);
    return db_to_linear(gain_db) * r * r;
}

Eigen::VectorXd fspl_betas(const Scenario &scn, const Point &x, double gain_db) {
    Eigen::VectorXd beta(scn.num_aps());
    for (int l = 0; l < scn.num_aps(); ++l) beta[l] = fspl_beta(scn, x, l, gain_db);
    return beta;
}

} // namespace goisac::phy
