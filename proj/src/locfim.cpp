#include "goisac/locfim.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace goisac::loc {

Eigen::Matrix2d tangent_projector(const phy::Scenario &scn, int ap, const Point &x) {
    const double d = phy::ap_distance(scn, ap, x);
    const Point u = (x - scn.center(ap)) / d;
    return Eigen::Matrix2d::Identity() - u * u.transpose();
}

Eigen::MatrixXcd channel_jacobian(const phy::Scenario &scn, const phy::FrameGrid &grid, const phy::ReElement &re,
                                  const phy::ChannelRealization &ch) {
    const int l_count = scn.num_aps();
    const int m_count = scn.antennas_per_ap();
    const int f_count = static_cast<int>(re.subcarriers.size());
    const ParamIndex idx(l_count);
    const Complex j(0.0, 1.0);
    const double k_delay = 2.0 * kPi * grid.subcarrier_spacing;
    const double k_wave = 2.0 * kPi / scn.wavelength();

    Eigen::MatrixXcd jac = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(l_count) * f_count * m_count, idx.size());
    for (int l = 0; l < l_count; ++l) {
        if (!(ch.beta[l] > 0.0))
            throw std::domain_error("beta of AP " + std::to_string(l) + " is zero; d h / d beta is singular");
        const double d = phy::ap_distance(scn, l, ch.position);
        const Point u = (ch.position - scn.center(l)) / d;
        const Eigen::Matrix2d proj = tangent_projector(scn, l, ch.position);
        const Complex gain = std::sqrt(ch.beta[l]) * std::polar(1.0, ch.psi[l]);
        const Eigen::VectorXcd a = phy::steering_vector(scn, l, ch.position);
        const Eigen::VectorXcd f = phy::delay_vector(grid, re, phy::total_delay(scn, l, ch.position, ch.dtau));

        // d a_m / d x (row per antenna), from the derivative of the unit direction.
        Eigen::MatrixX2cd da(m_count, 2);
        for (int m = 0; m < m_count; ++m) {
            const Eigen::RowVector2d lever = (scn.antennas(l).col(m) - scn.center(l)).transpose() * proj / d;
            da.row(m) = (j * k_wave * a[m]) * lever.cast<Complex>();
        }

        for (int fi = 0; fi < f_count; ++fi) {
            const double n_f = re.subcarriers[static_cast<std::size_t>(fi)];
            const Complex df_dtau = -j * k_delay * n_f * f[fi];
            for (int m = 0; m < m_count; ++m) {
                const Eigen::Index row = (static_cast<Eigen::Index>(l) * f_count + fi) * m_count + m;
                const Complex h = gain * f[fi] * a[m];
                for (int axis = 0; axis < 2; ++axis) {
                    const Complex df_dx = df_dtau * (u[axis] / scn.lightspeed());
                    jac(row, ParamIndex::position() + axis) = gain * (df_dx * a[m] + f[fi] * da(m, axis));
                }
                jac(row, idx.beta(l)) = h / (2.0 * ch.beta[l]);
                jac(row, idx.psi(l)) = j * h;
                jac(row, idx.dtau()) = gain * df_dtau * a[m];
            }
        }
    }
    return jac;
}

FisherInfo fim_single_re(const phy::Scenario &scn, const phy::FrameGrid &grid, const phy::ReElement &re,
                         const phy::ChannelRealization &ch, double tx_power, double noise_power, int symbols) {
    if (!(noise_power > 0.0)) throw std::domain_error("noise power must be positive for a finite FIM");
    const Eigen::MatrixXcd g = channel_jacobian(scn, grid, re, ch);
    FisherInfo fim;
    fim.num_aps = scn.num_aps();
    fim.matrix = (2.0 * symbols * tx_power / noise_power) * (g.adjoint() * g).real();
    fim.matrix = 0.5 * (fim.matrix + fim.matrix.transpose()).eval();
    return fim;
}

double peb_from_fim(const Eigen::MatrixXd &fim) {
    if (fim.rows() != fim.cols() || fim.rows() < 2) throw std::invalid_argument("FIM must be square with a 2-D position block");
    const Eigen::VectorXd diag = fim.diagonal();
    if ((diag.array() <= 0.0).any() || !diag.allFinite()) throw Unidentifiable("FIM has a non-positive diagonal entry");

    const Eigen::VectorXd scale = diag.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd unit = scale.asDiagonal() * fim * scale.asDiagonal();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(unit);
    if (eig.info() != Eigen::Success) throw Unidentifiable("FIM eigen-decomposition failed");
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kMaxCondition) throw Unidentifiable("FIM is singular or ill-conditioned");

    const Eigen::MatrixXd pos_rows = eig.eigenvectors().topRows(2);
    const Eigen::Matrix2d block = pos_rows * eig.eigenvalues().cwiseInverse().asDiagonal() * pos_rows.transpose();
    const double speb = block(0, 0) * scale[0] * scale[0] + block(1, 1) * scale[1] * scale[1];
    return std::sqrt(speb);
}

int q_loc(double peb_single, double epsilon) {
    if (!(peb_single > 0.0)) throw std::domain_error("single-RE PEB must be positive");
    if (!(epsilon > 0.0)) throw std::domain_error("PEB target must be positive");
    if (std::isinf(epsilon)) return 0;
    const double need = std::ceil(peb_single * peb_single / (epsilon * epsilon));
    if (need > static_cast<double>(std::numeric_limits<int>::max())) throw std::overflow_error("q_loc overflows int");
    return static_cast<int>(need);
}

double single_re_peb(const phy::Scenario &scn, const phy::FrameGrid &grid, const PebModel &model, const Point &x) {
    phy::ChannelRealization ch;
    ch.position = x;
    ch.beta = phy::fspl_betas(scn, x, model.gain_db);
    ch.psi = Eigen::VectorXd::Zero(scn.num_aps());
    const auto fim = fim_single_re(scn, grid, grid.push_element(0), ch, model.tx_power, model.noise_power,
                                   grid.symbols_per_slot);
    return peb_from_fim(fim);
}

namespace {

std::vector<double> axis_points(double side, double resolution) {
    if (!(resolution > 0.0)) throw std::domain_error("grid resolution must be positive");
    const auto n = static_cast<long>(std::floor(side / resolution + 1e-9)) + 1;
    std::vector<double> pts(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) pts[static_cast<std::size_t>(i)] = static_cast<double>(i) * resolution;
    return pts;
}

double peb_at(const phy::Scenario &scn, const phy::FrameGrid &grid, const BetaModel &beta_model, double tx_power,
              double noise_power, const Point &x) {
    phy::ChannelRealization ch;
    ch.position = x;
    ch.beta = beta_model(x);
    ch.psi = Eigen::VectorXd::Zero(scn.num_aps());
    const auto fim = fim_single_re(scn, grid, grid.push_element(0), ch, tx_power, noise_power, grid.symbols_per_slot);
    return peb_from_fim(fim);
}

BetaModel fspl_model(const phy::Scenario &scn, double gain_db) {
    return [&scn, gain_db](const Point &x) { return phy::fspl_betas(scn, x, gain_db); };
}

} // namespace

std::vector<PebSample> peb_map(const phy::Scenario &scn, const phy::FrameGrid &grid, const PebModel &model,
                               double resolution) {
    const auto beta_model = fspl_model(scn, model.gain_db);
    const auto pts = axis_points(scn.side(), resolution);
    std::vector<PebSample> out;
    out.reserve(pts.size() * pts.size());
    for (double x : pts) {
        for (double y : pts) {
            try {
                out.push_back({x, y, peb_at(scn, grid, beta_model, model.tx_power, model.noise_power, Point(x, y))});
            } catch (const SingularGeometry &) {
            } catch (const Unidentifiable &) {
            }
        }
    }
    return out;
}

WorstCase worst_case_position(const phy::Scenario &scn, const phy::FrameGrid &grid, const BetaModel &beta_model,
                              double tx_power, double noise_power, double resolution) {
    const auto pts = axis_points(scn.side(), resolution);
    WorstCase worst{Point::Zero(), -1.0};
    for (double x : pts) {
        for (double y : pts) {
            try {
                const double peb = peb_at(scn, grid, beta_model, tx_power, noise_power, Point(x, y));
                if (peb > worst.peb) worst = {Point(x, y), peb};
            } catch (const SingularGeometry &) {
            } catch (const Unidentifiable &) {
            } catch (const std::domain_error &) {
                // beta_model returned a zero gain
            }
        }
    }
    if (worst.peb < 0.0) throw Unidentifiable("no grid point admits a finite PEB");
    return worst;
}

WorstCase worst_case_position(const phy::Scenario &scn, const phy::FrameGrid &grid, const PebModel &model,
                              double resolution) {
    return worst_case_position(scn, grid, fspl_model(scn, model.gain_db), model.tx_power, model.noise_power, resolution);
}

WorstCase WorstCaseCache::get(const phy::Scenario &scn, const phy::FrameGrid &grid, const PebModel &model,
                              double resolution) {
    std::string key;
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g,", v);
        key += buf;
    };
    for (int l = 0; l < scn.num_aps(); ++l)
        for (Eigen::Index m = 0; m < scn.antennas(l).cols(); ++m) {
            put(scn.antennas(l)(0, m));
            put(scn.antennas(l)(1, m));
        }
    for (double v : {scn.wavelength(), scn.lightspeed(), scn.side(), grid.subcarrier_spacing,
                     static_cast<double>(grid.subcarriers_per_rb), static_cast<double>(grid.symbols_per_slot),
                     model.tx_power, model.noise_power, model.gain_db, resolution})
        put(v);

    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    const WorstCase wc = worst_case_position(scn, grid, model, resolution);
    entries_.emplace(std::move(key), wc);
    return wc;
}

std::size_t WorstCaseCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

WorstCaseCache &WorstCaseCache::global() {
    static WorstCaseCache cache;
    return cache;
}

} // namespace goisac::loc
