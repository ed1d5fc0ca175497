#pragma once

// Fisher information of the channel with respect to position and nuisance
// parameters, the position error bound, and the worst-case position search.

#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "goisac/phy.hpp"

namespace goisac::loc {

/// Layout of the parameter vector [x (2), beta (L), psi (L), dtau (1)].
struct ParamIndex {
    int num_aps;

    explicit ParamIndex(int aps) : num_aps(aps) {}

    int size() const { return 2 * num_aps + 3; }
    static constexpr int position() { return 0; }
    int beta(int ap = 0) const { return 2 + ap; }
    int psi(int ap = 0) const { return 2 + num_aps + ap; }
    int dtau() const { return 2 + 2 * num_aps; }
};

/// Projector onto the tangent of the range direction at `x` for AP `ap`.
Eigen::Matrix2d tangent_projector(const phy::Scenario &scn, int ap, const Point &x);

/// d h / d kappa, one column per parameter in ParamIndex order.
/// Throws std::domain_error if any beta is zero.
Eigen::MatrixXcd channel_jacobian(const phy::Scenario &scn, const phy::FrameGrid &grid, const phy::ReElement &re,
                                  const phy::ChannelRealization &ch);

struct FisherInfo {
    Eigen::MatrixXd matrix;
    int num_aps = 0;
};

/// J = 2 T (p / sigma^2) Re{G^H G} for one RE.
FisherInfo fim_single_re(const phy::Scenario &scn, const phy::FrameGrid &grid, const phy::ReElement &re,
                         const phy::ChannelRealization &ch, double tx_power, double noise_power, int symbols);

/// Condition number above which J counts as singular. Measured after
/// scaling J to unit diagonal.
inline constexpr double kMaxCondition = 1e12;

/// sqrt(tr[J^-1]_{1:2,1:2}); throws Unidentifiable if J is singular or
/// ill-conditioned.
double peb_from_fim(const Eigen::MatrixXd &fim);
inline double peb_from_fim(const FisherInfo &fim) { return peb_from_fim(fim.matrix); }

/// Smallest number of REs whose aggregated FIM reaches PEB <= epsilon when
/// one RE gives `peb_single`. Returns 0 for infinite epsilon.
int q_loc(double peb_single, double epsilon);

/// Parameters needed to evaluate the single-RE PEB at an arbitrary point.
struct PebModel {
    double tx_power = 1e-3;
    double noise_power = 3.1622776601683794e-13;
    double gain_db = 4.3;
};

/// PEB of one RE at `x`, with beta from free-space path loss.
double single_re_peb(const phy::Scenario &scn, const phy::FrameGrid &grid, const PebModel &model, const Point &x);

struct PebSample {
    double x;
    double y;
    double peb;
};

/// PEB over a uniform grid with spacing `resolution` covering the square,
/// corners included. Singular points are skipped.
std::vector<PebSample> peb_map(const phy::Scenario &scn, const phy::FrameGrid &grid, const PebModel &model,
                               double resolution);

struct WorstCase {
    Point position;
    double peb;
};

using BetaModel = std::function<Eigen::VectorXd(const Point &)>;

/// Grid point with the largest single-RE PEB.
WorstCase worst_case_position(const phy::Scenario &scn, const phy::FrameGrid &grid, const BetaModel &beta_model,
                              double tx_power, double noise_power, double resolution);
WorstCase worst_case_position(const phy::Scenario &scn, const phy::FrameGrid &grid, const PebModel &model,
                              double resolution);

/// Write-once cache of worst-case searches keyed by the scenario and model.
class WorstCaseCache {
public:
    WorstCase get(const phy::Scenario &scn, const phy::FrameGrid &grid, const PebModel &model, double resolution);
    std::size_t size() const;

    static WorstCaseCache &global();

private:
    mutable std::mutex mutex_;
    std::map<std::string, WorstCase> entries_;
};

} // namespace goisac::loc
