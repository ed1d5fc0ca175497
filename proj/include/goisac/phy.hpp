#pragma once

// LOS multi-AP OFDM channel, LS estimation, energy detection and the UatF rate.

#include <random>
#include <span>
#include <vector>

#include "goisac/common.hpp"

namespace goisac::phy {

/// AP antenna geometry and propagation constants.
class Scenario {
public:
    /// `antennas[l]` holds the 2-D antenna positions of AP l as columns.
    Scenario(std::vector<Eigen::Matrix2Xd> antennas, double wavelength, double side,
             double lightspeed = kLightspeed);

    int num_aps() const { return static_cast<int>(antennas_.size()); }
    int antennas_per_ap() const { return static_cast<int>(antennas_.front().cols()); }
    const Eigen::Matrix2Xd &antennas(int ap) const { return antennas_.at(ap); }
    const Point &center(int ap) const { return centers_.at(ap); }
    double wavelength() const { return wavelength_; }
    double lightspeed() const { return lightspeed_; }
    double side() const { return side_; }

    bool contains(const Point &x) const {
        return x.x() >= 0.0 && x.x() <= side_ && x.y() >= 0.0 && x.y() <= side_;
    }

private:
    std::vector<Eigen::Matrix2Xd> antennas_;
    std::vector<Point> centers_;
    double wavelength_;
    double lightspeed_;
    double side_;
};

/// One slot-RB resource element: F subcarriers by T OFDM symbols.
struct ReElement {
    std::vector<int> subcarriers; // absolute grid indices
    std::vector<int> symbols;
};

/// Slot x RB grid of one frame. Push slots come first, pull slots last,
/// control signalling sits in between.
struct FrameGrid {
    int num_slots = 11;
    int num_rbs = 25;
    int push_slots = 2;
    int pull_slots = 5;
    int subcarriers_per_rb = 12;
    int symbols_per_slot = 7;
    double subcarrier_spacing = 30e3;
    double cyclic_prefix = 2.35e-6;

    int push_res() const { return push_slots * num_rbs; }
    int pull_res() const { return pull_slots * num_rbs; }
    /// Seconds spanned by all slots of the frame.
    double frame_duration() const {
        return num_slots * symbols_per_slot * (1.0 / subcarrier_spacing + cyclic_prefix);
    }

    void validate() const;

    ReElement element(int slot, int rb) const;
    ReElement push_element(int index) const;
    ReElement pull_element(int index) const;
};

struct ChannelRealization {
    Eigen::VectorXd beta; // per AP, >= 0
    Eigen::VectorXd psi;  // per AP, [0, 2pi)
    double dtau = 0.0;    // residual clock offset [s]
    Point position = Point::Zero();
};

/// Range |x - b_l|; throws SingularGeometry at the AP center.
double ap_distance(const Scenario &scn, int ap, const Point &x);

Eigen::VectorXcd steering_vector(const Scenario &scn, int ap, const Point &x);

Eigen::VectorXcd delay_vector(const FrameGrid &grid, const ReElement &re, double tau);

/// Propagation delay to AP `ap` plus the clock offset.
double total_delay(const Scenario &scn, int ap, const Point &x, double dtau);

/// Stacked channel, AP-major, subcarrier-middle, antenna-minor (length L*F*M).
Eigen::VectorXcd channel_vector(const Scenario &scn, const FrameGrid &grid, const ReElement &re,
                                const ChannelRealization &ch);

/// Simulates the pilot symbol of `re` through the channel plus AWGN and
/// returns the LS estimate h + w / sqrt(p_u). `pilots` has one unit-modulus
/// symbol per subcarrier.
Eigen::VectorXcd receive_and_ls_estimate(const Scenario &scn, const FrameGrid &grid, const ReElement &re,
                                         const ChannelRealization &ch, double tx_power, double noise_power,
                                         std::span<const Complex> pilots, std::mt19937_64 &rng);

/// Energy detector: per-AP block energy over F*M.
Eigen::VectorXd estimate_beta(const Eigen::VectorXcd &hhat, int num_aps, int subcarriers, int antennas);

/// UatF spectral efficiency in bit/s/Hz for a single (f, t).
double uatf_se(std::span<const double> beta, double tx_power, double noise_power, int antennas);
double uatf_se(const Eigen::VectorXd &beta, double tx_power, double noise_power, int antennas);

/// Free-space path gain with `gain_db` of combined antenna gain.
double fspl_beta(const Scenario &scn, const Point &x, int ap, double gain_db);

Eigen::VectorXd fspl_betas(const Scenario &scn, const Point &x, double gain_db);

} // namespace goisac::phy
