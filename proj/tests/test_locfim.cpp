#include "doctest.h"

#include <cmath>
#include <random>

#include "goisac/simkit.hpp"

using namespace goisac;
using namespace goisac::loc;

namespace {

struct Setup {
    sim::SimConfig cfg;
    phy::Scenario scn = sim::build_scenario(cfg);
    phy::FrameGrid grid = cfg.grid;
};

phy::ChannelRealization realization(const phy::Scenario &scn, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> pos(0.5, scn.side() - 0.5);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    std::uniform_real_distribution<double> off(0.0, 5e-7);
    std::uniform_real_distribution<double> fade(0.5, 2.0);
    phy::ChannelRealization ch;
    ch.position = Point(pos(rng), pos(rng));
    ch.beta = phy::fspl_betas(scn, ch.position, 4.3);
    ch.psi.resize(scn.num_aps());
    for (int l = 0; l < scn.num_aps(); ++l) {
        ch.beta[l] *= fade(rng);
        ch.psi[l] = phase(rng);
    }
    ch.dtau = off(rng);
    return ch;
}

phy::ChannelRealization perturbed(phy::ChannelRealization ch, const ParamIndex &idx, int col, double step) {
    if (col < 2)
        ch.position[col] += step;
    else if (col < idx.psi(0))
        ch.beta[col - idx.beta(0)] += step;
    else if (col < idx.dtau())
        ch.psi[col - idx.psi(0)] += step;
    else
        ch.dtau += step;
    return ch;
}

double step_for(const phy::ChannelRealization &ch, const ParamIndex &idx, int col) {
    if (col < 2) return 1e-4;
    if (col < idx.psi(0)) return 1e-5 * ch.beta[col - idx.beta(0)];
    if (col < idx.dtau()) return 1e-5;
    return 1e-12;
}

// Schur complement of the nuisance block. The raw FIM mixes scales of 1e-20
// and 1e+20, so it is equilibrated first and the position block rescaled.
double peb_by_schur(const Eigen::MatrixXd &raw) {
    const Eigen::VectorXd d = raw.diagonal().cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd j = d.asDiagonal() * raw * d.asDiagonal();
    const Eigen::Index n = j.rows() - 2;
    const Eigen::Matrix2d jxx = j.topLeftCorner(2, 2);
    const Eigen::MatrixXd jxn = j.topRightCorner(2, n);
    const Eigen::MatrixXd jnn = j.bottomRightCorner(n, n);
    const Eigen::Matrix2d eff = jxx - jxn * jnn.fullPivLu().solve(jxn.transpose());
    const Eigen::Matrix2d inv = eff.inverse();
    return std::sqrt(inv(0, 0) * d[0] * d[0] + inv(1, 1) * d[1] * d[1]);
}

} // namespace

TEST_CASE("parameter layout") {
    const ParamIndex idx(4);
    CHECK(idx.size() == 11);
    CHECK(idx.beta(0) == 2);
    CHECK(idx.psi(0) == 6);
    CHECK(idx.dtau() == 10);
}

TEST_CASE("tangent projector") {
    const Setup s;
    const Point x(37.0, 151.0);
    for (int l = 0; l < 4; ++l) {
        const auto a = tangent_projector(s.scn, l, x);
        CHECK((a * (x - s.scn.center(l))).norm() < 1e-12);
        CHECK((a * a - a).norm() < 1e-12);
        CHECK(a.trace() == doctest::Approx(1.0));
    }
}

TEST_CASE("Jacobian matches central differences") {
    const Setup s;
    const ParamIndex idx(4);
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto ch = realization(s.scn, rng);
        const auto re = s.grid.push_element(trial % s.grid.push_res());
        const auto jac = channel_jacobian(s.scn, s.grid, re, ch);
        REQUIRE(jac.cols() == idx.size());
        for (int col = 0; col < idx.size(); ++col) {
            const double h = step_for(ch, idx, col);
            const Eigen::VectorXcd fd = (phy::channel_vector(s.scn, s.grid, re, perturbed(ch, idx, col, h)) -
                                         phy::channel_vector(s.scn, s.grid, re, perturbed(ch, idx, col, -h))) /
                                        (2.0 * h);
            worst = std::max(worst, (fd - jac.col(col)).norm() / jac.col(col).norm());
        }
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("Jacobian structure") {
    const Setup s;
    const ParamIndex idx(4);
    std::mt19937_64 rng(8);
    const auto ch = realization(s.scn, rng);
    const auto re = s.grid.pull_element(40);
    const auto jac = channel_jacobian(s.scn, s.grid, re, ch);
    const auto h = phy::channel_vector(s.scn, s.grid, re, ch);
    const Eigen::Index block = s.grid.subcarriers_per_rb * s.scn.antennas_per_ap();
    for (int l = 0; l < 4; ++l) {
        const auto hl = h.segment(l * block, block);
        CHECK((jac.col(idx.psi(l)).segment(l * block, block) - Complex(0.0, 1.0) * hl).norm() < 1e-12 * hl.norm());
        CHECK((jac.col(idx.beta(l)).segment(l * block, block) - hl / (2.0 * ch.beta[l])).norm() <
              1e-12 * hl.norm() / ch.beta[l]);
        // Per-AP nuisance columns vanish outside their own block.
        CHECK(jac.col(idx.psi(l)).norm() == doctest::Approx(hl.norm()));
    }
    auto dead = ch;
    dead.beta[2] = 0.0;
    CHECK_THROWS_AS(channel_jacobian(s.scn, s.grid, re, dead), std::domain_error);
}

TEST_CASE("single-RE FIM") {
    const Setup s;
    std::mt19937_64 rng(31);
    const double p = 1e-3, s2 = 3e-13;
    const int t = s.grid.symbols_per_slot;
    for (int trial = 0; trial < 200; ++trial) {
        const auto ch = realization(s.scn, rng);
        const auto re = s.grid.push_element(trial % 50);
        const auto fim = fim_single_re(s.scn, s.grid, re, ch, p, s2, t).matrix;
        CHECK((fim - fim.transpose()).norm() == 0.0);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fim);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-9 * eig.eigenvalues().maxCoeff());

        if (trial < 5) {
            const auto g = channel_jacobian(s.scn, s.grid, re, ch);
            Eigen::MatrixXd gram(g.cols(), g.cols());
            for (Eigen::Index a = 0; a < g.cols(); ++a)
                for (Eigen::Index b = 0; b < g.cols(); ++b) {
                    double acc = 0.0;
                    for (Eigen::Index i = 0; i < g.rows(); ++i) acc += (std::conj(g(i, a)) * g(i, b)).real();
                    gram(a, b) = 2.0 * t * p / s2 * acc;
                }
            CHECK((fim - gram).norm() < 1e-10 * gram.norm());
            const auto twice = fim_single_re(s.scn, s.grid, re, ch, 2.0 * p, s2, t).matrix;
            CHECK((twice - 2.0 * fim).norm() < 1e-12 * fim.norm());
        }
    }
}

TEST_CASE("FIM is invariant to translating the whole deployment") {
    const Setup s;
    std::vector<Eigen::Matrix2Xd> shifted;
    const Point offset(-731.0, 412.5);
    for (int l = 0; l < 4; ++l) shifted.push_back(s.scn.antennas(l).colwise() + offset);
    const phy::Scenario moved(shifted, s.scn.wavelength(), 2000.0);
    std::mt19937_64 rng(77);
    auto ch = realization(s.scn, rng);
    const auto a = fim_single_re(s.scn, s.grid, s.grid.push_element(5), ch, 1e-3, 3e-13, 7).matrix;
    ch.position += offset;
    const auto b = fim_single_re(moved, s.grid, s.grid.push_element(5), ch, 1e-3, 3e-13, 7).matrix;
    CHECK((a - b).norm() < 1e-6 * a.norm());
}

TEST_CASE("PEB from FIM") {
    const Eigen::MatrixXd diag = Eigen::VectorXd::Constant(5, 8.0).asDiagonal();
    CHECK(peb_from_fim(diag) == doctest::Approx(std::sqrt(2.0 / 8.0)).epsilon(1e-14));

    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(5, 5);
    CHECK_THROWS_AS(peb_from_fim(z), Unidentifiable);
    Eigen::MatrixXd rank1 = Eigen::VectorXd::Ones(5) * Eigen::RowVectorXd::Ones(5);
    CHECK_THROWS_AS(peb_from_fim(rank1), Unidentifiable);
    CHECK_THROWS_AS(peb_from_fim(Eigen::MatrixXd::Identity(2, 3)), std::invalid_argument);

    const Setup s;
    const auto model = s.cfg.peb_model();
    for (const Point &x : {Point(100.0, 100.0), Point(12.0, 170.0), Point(199.0, 3.0)}) {
        phy::ChannelRealization ch;
        ch.position = x;
        ch.beta = phy::fspl_betas(s.scn, x, model.gain_db);
        ch.psi = Eigen::VectorXd::Zero(4);
        const auto fim = fim_single_re(s.scn, s.grid, s.grid.push_element(0), ch, model.tx_power, model.noise_power,
                                       s.grid.symbols_per_slot);
        const double peb = peb_from_fim(fim);
        CHECK(peb == doctest::Approx(peb_by_schur(fim.matrix)).epsilon(1e-8));
        CHECK(peb == doctest::Approx(single_re_peb(s.scn, s.grid, model, x)).epsilon(1e-14));
        for (double q : {1.0, 4.0, 16.0, 100.0})
            CHECK(std::abs(peb_from_fim(Eigen::MatrixXd(q * fim.matrix)) - peb / std::sqrt(q)) < 1e-10 * peb);
    }
}

TEST_CASE("q_loc") {
    CHECK(q_loc(2.826, 1.0) == 8);
    CHECK(q_loc(2.826, 2.8) == 2);
    CHECK(q_loc(2.0, 1.0) == 4);
    CHECK(q_loc(0.5, 1.0) == 1);
    CHECK(q_loc(3.0, std::numeric_limits<double>::infinity()) == 0);
    CHECK_THROWS(q_loc(1.0, 0.0));
    CHECK_THROWS(q_loc(0.0, 1.0));
    int prev = q_loc(4.0, 0.1);
    for (double eps = 0.15; eps < 10.0; eps *= 1.3) {
        const int q = q_loc(4.0, eps);
        CHECK(q <= prev);
        CHECK(4.0 / std::sqrt(q) <= eps * (1.0 + 1e-12));
        if (q > 1) CHECK(4.0 / std::sqrt(q - 1) > eps);
        prev = q;
    }
}

TEST_CASE("PEB map symmetry and worst case") {
    const Setup s;
    const auto model = s.cfg.peb_model();
    const auto map = peb_map(s.scn, s.grid, model, 10.0);
    CHECK(map.size() == 21 * 21 - 4); // AP centers are singular
    auto at = [&](double x, double y) {
        for (const auto &p : map)
            if (p.x == x && p.y == y) return p.peb;
        FAIL("missing grid point");
        return 0.0;
    };
    for (const auto &p : map) {
        CHECK(p.peb > 0.0);
        for (const auto &q : {std::pair{p.y, p.x}, std::pair{200.0 - p.x, p.y}, std::pair{p.x, 200.0 - p.y}})
            CHECK(at(q.first, q.second) == doctest::Approx(p.peb).epsilon(1e-6));
    }

    const auto coarse = worst_case_position(s.scn, s.grid, model, 2.0);
    const auto fine = worst_case_position(s.scn, s.grid, model, 1.0);
    CHECK(fine.peb >= coarse.peb * (1.0 - 1e-12));
    CHECK(fine.peb <= coarse.peb * 1.01);
    double map_max = 0.0;
    for (const auto &p : map) map_max = std::max(map_max, p.peb);
    CHECK(fine.peb >= map_max * (1.0 - 1e-12));

    const int q = q_loc(fine.peb, 1.0);
    for (const auto &p : map) CHECK(p.peb / std::sqrt(q) <= 1.0 + 1e-12);

    auto &cache = WorstCaseCache::global();
    const auto a = cache.get(s.scn, s.grid, model, 2.0);
    const auto n = cache.size();
    const auto b = cache.get(s.scn, s.grid, model, 2.0);
    CHECK(cache.size() == n);
    CHECK(a.peb == b.peb);
    CHECK(a.peb == coarse.peb);
    CHECK(a.position == coarse.position);
}

TEST_CASE("x-aligned arrays localize the center better than a corner") {
    sim::SimConfig cfg;
    cfg.orientation = sim::ArrayOrientation::AxisX;
    const auto scn = sim::build_scenario(cfg);
    const auto model = cfg.peb_model();
    CHECK(single_re_peb(scn, cfg.grid, model, Point(100.0, 100.0)) < single_re_peb(scn, cfg.grid, model, Point(0.0, 0.0)));
}

TEST_CASE("custom beta model with a dead AP is skipped") {
    const Setup s;
    const auto model = s.cfg.peb_model();
    const BetaModel dead = [&](const Point &x) {
        Eigen::VectorXd b = phy::fspl_betas(s.scn, x, model.gain_db);
        if (x.x() < 50.0) b[0] = 0.0;
        return b;
    };
    const auto wc = worst_case_position(s.scn, s.grid, dead, model.tx_power, model.noise_power, 25.0);
    CHECK(wc.position.x() >= 50.0);
}
