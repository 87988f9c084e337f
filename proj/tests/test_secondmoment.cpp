#include "doctest.h"

#include <cmath>

#include "fsheat/heatkernel.hpp"
#include "fsheat/quadrature.hpp"
#include "fsheat/rng.hpp"
#include "fsheat/secondmoment.hpp"

using namespace fsheat;

namespace {

constexpr double kPi = 3.14159265358979323846;

const SpectralBasis& basis64() {
    static const SpectralBasis b = exact_basis_interval(Grid1D::make(64), 63);
    return b;
}

const SpatialCovariance& white64() {
    static const SpatialCovariance cov =
        build_covariance(CovarianceModel::parse("white"), basis64().grid);
    return cov;
}

const SpatialCovariance& riesz64() {
    static const SpatialCovariance cov =
        build_covariance(CovarianceModel::parse("riesz:0.5"), basis64().grid);
    return cov;
}

// space-independent noise: unit covariance between every pair of cells
SpatialCovariance flat_covariance(const Grid1D& grid) {
    SpatialCovariance cov;
    cov.model = CovarianceModel::parse("riesz:0.5"); // any non-white tag
    cov.grid = grid;
    cov.M = Eigen::MatrixXd::Ones(grid.n_cells, grid.n_cells);
    cov.L = Eigen::MatrixXd::Zero(grid.n_cells, grid.n_cells);
    cov.L.col(0).setOnes();
    return cov;
}

} // namespace

// ---------------------------------------------------------------------------
// simplex integrals
// ---------------------------------------------------------------------------

TEST_CASE("simplex closed form matches the frozen oracle values") {
    CHECK(simplex_integral(1, 0.0, 0.5, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(simplex_integral(1, 0.5, 0.5, 1.0) == doctest::Approx(kPi).epsilon(1e-12));
    CHECK(simplex_integral(2, 0.0, 0.5, 1.0) == doctest::Approx(kPi).epsilon(1e-12));
    CHECK(simplex_integral(2, 0.25, 0.5, 2.0) ==
          doctest::Approx(7.044677334909498).epsilon(1e-12));
    CHECK(simplex_integral(2, 0.5, 0.25, 1.0) ==
          doctest::Approx(2.661598403213911).epsilon(1e-12));
}

TEST_CASE("simplex integral scales with the exact homogeneity power") {
    const int n = 3;
    const double a = 0.3, b = 0.45;
    const double base = simplex_integral(n, a, b, 1.0);
    for (double t : {0.5, 2.0, 7.0})
        CHECK(simplex_integral(n, a, b, t) ==
              doctest::Approx(base * std::pow(t, n * (1.0 - b) - a)).epsilon(1e-12));
}

TEST_CASE("simplex closed form agrees with Monte Carlo sampling") {
    // exponents kept below 1/2 so the MC variance is finite
    const struct { int n; double a, b, t; } cases[] = {
        {1, 0.3, 0.4, 1.0}, {2, 0.45, 0.2, 1.5}, {3, 0.1, 0.45, 1.0}, {4, 0.25, 0.25, 2.0}};
    for (const auto& c : cases) {
        const MonteCarloEstimate mc = simplex_integral_mc(c.n, c.a, c.b, c.t, 1000000, 17);
        const double exact = simplex_integral(c.n, c.a, c.b, c.t);
        REQUIRE(mc.stderr_ > 0.0);
        CHECK(std::abs(mc.value - exact) <= 4.0 * mc.stderr_);
        CHECK(mc.stderr_ < 0.05 * exact);
    }
}

TEST_CASE("simplex integral rejects non-integrable exponents") {
    CHECK_THROWS_AS(simplex_integral(1, 1.0, 0.5, 1.0), ConfigError);
    CHECK_THROWS_AS(simplex_integral(1, 0.5, 1.2, 1.0), ConfigError);
    CHECK_THROWS_AS(simplex_integral(0, 0.1, 0.1, 1.0), ConfigError);
    CHECK_THROWS_AS(simplex_integral(2, 0.1, 0.1, -1.0), ConfigError);
}

// ---------------------------------------------------------------------------
// Mittag-Leffler
// ---------------------------------------------------------------------------

TEST_CASE("mittag-leffler matches the erfc closed form at rho = 1/2") {
    CHECK(mittag_leffler(0.5, 1.0) == doctest::Approx(5.0089800807622835).epsilon(1e-12));
    CHECK(mittag_leffler(0.5, 3.0) == doctest::Approx(16205.988853999587).epsilon(1e-12));
    CHECK(mittag_leffler(0.5, 0.0) == 1.0);
}

TEST_CASE("mittag-leffler matches series oracles at other orders") {
    CHECK(mittag_leffler(1.0, 2.0) == doctest::Approx(std::exp(2.0)).epsilon(1e-13));
    CHECK(mittag_leffler(2.0 / 3.0, 2.0) == doctest::Approx(25.242923468125056).epsilon(1e-12));
    CHECK(mittag_leffler_log(0.5, 40.0) ==
          doctest::Approx(1600.6931471805599).epsilon(1e-13));
    CHECK(std::log(mittag_leffler(2.0 / 3.0, 2.0)) ==
          doctest::Approx(mittag_leffler_log(2.0 / 3.0, 2.0)).epsilon(1e-12));
}

TEST_CASE("mittag-leffler is increasing in its argument") {
    for (double rho : {0.5, 0.75, 1.0}) {
        double prev = mittag_leffler(rho, 0.0);
        for (double z : {0.5, 1.0, 2.0, 5.0}) {
            const double cur = mittag_leffler(rho, z);
            CHECK(cur > prev);
            prev = cur;
        }
    }
    CHECK_THROWS_AS(mittag_leffler(0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(mittag_leffler(0.5, -1.0), ConfigError);
}

// ---------------------------------------------------------------------------
// scalar kernels, survival, renewal
// ---------------------------------------------------------------------------

TEST_CASE("power-law kernel mass is the exact antiderivative") {
    const ScalarKernel q = ScalarKernel::power_law(1.3, 0.5);
    CHECK(q.density(0.25) == doctest::Approx(1.3 * std::pow(0.25, -0.5)).epsilon(1e-14));
    const double direct = 1.3 / 0.5 * (std::sqrt(0.7) - std::sqrt(0.2));
    CHECK(q.mass(0.2, 0.7) == doctest::Approx(direct).epsilon(1e-14));
    CHECK(q.mass(0.0, 1.0) == doctest::Approx(2.6).epsilon(1e-14));
}

TEST_CASE("theta kernel density matches the spectral kernel on both branches") {
    const SpectralBasis fine = exact_basis_interval(Grid1D::make(129), 128);
    const KernelEvaluator k(fine, 128);
    const ScalarKernel q = ScalarKernel::heat_diagonal(0.0);
    // large tau: eigen branch, compare with the kernel evaluator at x = 0
    CHECK(q.density(0.5) == doctest::Approx(k.value(1.0, 64, 64)).epsilon(1e-12));
    CHECK(q.density(0.35) == doctest::Approx(k.value(0.7, 64, 64)).epsilon(1e-12));
    // small tau: image branch collapses onto the free Gaussian
    CHECK(q.density(0.001) ==
          doctest::Approx(1.0 / std::sqrt(8.0 * kPi * 0.001)).epsilon(1e-12));
    // continuity across the branch switch (probe gap contributes ~1e-7 itself)
    CHECK(q.density(0.49999999) == doctest::Approx(q.density(0.50000001)).epsilon(1e-6));
}

TEST_CASE("theta kernel mass agrees with direct quadrature of the density") {
    const ScalarKernel q = ScalarKernel::heat_diagonal(0.0);
    const ScalarKernel qoff = ScalarKernel::heat_diagonal(0.4);
    for (const ScalarKernel* kq : {&q, &qoff}) {
        for (auto [t1, t2] : {std::pair{0.3, 0.8}, {0.45, 0.55}, {1.0, 2.0}}) {
            const QuadRule rule = gauss_jacobi01(48, 0.0, 0.0);
            double s = 0.0;
            for (size_t i = 0; i < rule.nodes.size(); ++i)
                s += rule.weights[i] * kq->density(t1 + (t2 - t1) * rule.nodes[i]);
            s *= (t2 - t1);
            CHECK(kq->mass(t1, t2) == doctest::Approx(s).epsilon(1e-10));
        }
        // additivity
        CHECK(kq->mass(0.1, 0.9) ==
              doctest::Approx(kq->mass(0.1, 0.4) + kq->mass(0.4, 0.9)).epsilon(1e-12));
    }
}

TEST_CASE("survival mass matches the frozen series oracle") {
    CHECK(heat_survival(0.1, 0.0) == doctest::Approx(0.94930536268447035).epsilon(1e-10));
    CHECK(heat_survival(0.5, 0.25) == doctest::Approx(0.34255713821694955).epsilon(1e-10));
    CHECK(heat_survival(2.0, 0.0) == doctest::Approx(0.0091569902897607558).epsilon(1e-10));
    CHECK(heat_survival(0.02, -0.9) == doctest::Approx(0.38292492254802613).epsilon(1e-10));
}

TEST_CASE("scalar renewal reproduces the mittag-leffler solution") {
    // v = 1 + int_0^t (t-s)^(-gamma) v(s) ds  =>  v(t) = E_{1-gamma}(Gamma(1-gamma) t^(1-gamma))
    const int K = 4000;
    std::vector<double> ts(K), g(K, 1.0);
    for (int k = 0; k < K; ++k) ts[k] = (k + 1) * (1.0 / K);
    SUBCASE("gamma = 1/2") {
        const auto v = scalar_renewal_solve(ScalarKernel::power_law(1.0, 0.5), 1.0, g, ts);
        CHECK(v.back() == doctest::Approx(45.999326089382855).epsilon(5e-3));
    }
    SUBCASE("gamma = 1/3 out to t = 2") {
        std::vector<double> ts2(K), g2(K, 1.0);
        for (int k = 0; k < K; ++k) ts2[k] = (k + 1) * (2.0 / K);
        const auto v = scalar_renewal_solve(ScalarKernel::power_law(1.0, 1.0 / 3.0), 1.0, g2, ts2);
        CHECK(v.back() == doctest::Approx(34.927500498301712).epsilon(5e-3));
    }
}

TEST_CASE("scalar renewal is monotone in the coupling") {
    const int K = 400;
    std::vector<double> ts(K), g(K);
    for (int k = 0; k < K; ++k) {
        ts[k] = (k + 1) * (1.0 / K);
        const double s = heat_survival(ts[k], 0.0);
        g[k] = s * s;
    }
    const ScalarKernel q = ScalarKernel::heat_diagonal(0.0);
    std::vector<double> prev(K, 0.0);
    for (double lam : {0.0, 0.5, 1.0, 2.0}) {
        const auto v = scalar_renewal_solve(q, lam * lam, g, ts);
        for (int k = 0; k < K; ++k) {
            CHECK(v[k] >= prev[k] - 1e-12);
            CHECK(v[k] > 0.0);
        }
        prev = v;
    }
}

TEST_CASE("scalar renewal refuses a grid too coarse for the coupling") {
    std::vector<double> ts = {0.5, 1.0};
    std::vector<double> g = {1.0, 1.0};
    CHECK_THROWS_AS(scalar_renewal_solve(ScalarKernel::power_law(1.0, 0.5), 50.0, g, ts),
                    NumericError);
}

// ---------------------------------------------------------------------------
// pair-matrix second-moment solver
// ---------------------------------------------------------------------------

TEST_CASE("pair solver at lambda = 0 is the squared semigroup") {
    const SpectralBasis& b = basis64();
    const Eigen::VectorXd u0 = Eigen::VectorXd::Ones(64);
    const SecondMomentField f =
        renewal_solve_white(b, white64(), 0.0, 1.0, u0, {0.1, 0.3}, 1e-3);
    for (int i = 0; i < 2; ++i) {
        Eigen::VectorXd su = u0;
        const double t = f.times[i];
        Eigen::VectorXd a = b.grid.h * (b.phi * su);
        a.array() *= (-b.mu.array() * t).exp();
        su = b.phi.transpose() * a;
        for (int j = 0; j < 64; ++j)
            CHECK(f.second_moment(i, j) == doctest::Approx(su[j] * su[j]).epsilon(1e-10));
    }
}

TEST_CASE("space-independent noise has the exact lognormal growth rate") {
    const SpectralBasis& b = basis64();
    const SpatialCovariance cov = flat_covariance(b.grid);
    const Eigen::VectorXd u0 = b.phi.row(0).transpose();
    const double lambda = 1.0;
    std::vector<double> ts = {0.1, 0.2, 0.3, 0.4, 0.5};
    const SecondMomentField f = solve_second_moment(b, cov, lambda, 1.0, u0, ts, 2.5e-4);
    const double rate = lambda * lambda - 2.0 * b.mu1();
    for (size_t i = 0; i < ts.size(); ++i)
        CHECK(f.mode_energy(i, 0) == doctest::Approx(std::exp(rate * ts[i])).epsilon(1e-3));
}

TEST_CASE("pair solver output is stable under step halving") {
    const SpectralBasis& b = basis64();
    const Eigen::VectorXd u0 = Eigen::VectorXd::Ones(64);
    const int jc = b.grid.nearest_node(0.0);
    const SecondMomentField coarse =
        renewal_solve_white(b, white64(), 1.0, 1.0, u0, {0.25}, 2e-3);
    const SecondMomentField fine =
        renewal_solve_white(b, white64(), 1.0, 1.0, u0, {0.25}, 1e-3);
    CHECK(std::abs(coarse.second_moment(0, jc) - fine.second_moment(0, jc)) <
          0.01 * fine.second_moment(0, jc));
}

TEST_CASE("second moment grows pointwise with the coupling") {
    const SpectralBasis& b = basis64();
    const Eigen::VectorXd u0 = Eigen::VectorXd::Ones(64);
    for (const SpatialCovariance* cov : {&white64(), &riesz64()}) {
        Eigen::VectorXd prev = Eigen::VectorXd::Zero(64);
        for (double lam : {0.0, 0.5, 1.0, 2.0}) {
            const SecondMomentField f =
                solve_second_moment(b, *cov, lam, 1.0, u0, {0.25}, 1e-3);
            const Eigen::VectorXd cur = f.second_moment.row(0).transpose();
            for (int j = 0; j < 64; ++j) CHECK(cur[j] >= prev[j] - 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("stored pair matrices are exactly symmetric with a positive diagonal") {
    const SpectralBasis& b = basis64();
    const Eigen::VectorXd u0 = Eigen::VectorXd::Ones(64);
    const SecondMomentField f =
        volterra_solve_colored(b, riesz64(), 1.0, 1.0, u0, {0.1, 0.25}, 1e-3);
    REQUIRE(f.pair_values.size() == 2);
    for (const Eigen::MatrixXd& V : f.pair_values) {
        CHECK((V - V.transpose()).cwiseAbs().maxCoeff() == 0.0);
        for (int j = 0; j < 64; ++j) CHECK(V(j, j) > 0.0);
    }
    // diagonal of the pair matrix is the second-moment field
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 64; ++j)
            CHECK(f.pair_values[i](j, j) == doctest::Approx(f.second_moment(i, j)).epsilon(1e-12));
}

TEST_CASE("colored solver rejects white noise and oversized grids") {
    const SpectralBasis& b = basis64();
    const Eigen::VectorXd u0 = Eigen::VectorXd::Ones(64);
    CHECK_THROWS_AS(volterra_solve_colored(b, white64(), 1.0, 1.0, u0, {0.1}, 1e-3),
                    ConfigError);
    const SpectralBasis big = exact_basis_interval(Grid1D::make(192), 160);
    const SpatialCovariance covb = build_covariance(CovarianceModel::parse("riesz:0.5"), big.grid);
    const Eigen::VectorXd u0b = Eigen::VectorXd::Ones(192);
    CHECK_THROWS_AS(volterra_solve_colored(big, covb, 1.0, 1.0, u0b, {0.1}, 1e-3), ConfigError);
    CHECK_THROWS_AS(renewal_solve_white(b, riesz64(), 1.0, 1.0, u0, {0.1}, 1e-3), ConfigError);
}

// ---------------------------------------------------------------------------
// Picard resolution by noise order
// ---------------------------------------------------------------------------

TEST_CASE("picard terms sum to the full second moment") {
    const SpectralBasis& b = basis64();
    const Eigen::VectorXd u0 = Eigen::VectorXd::Ones(64);
    const std::vector<double> ts = {0.1, 0.25};
    for (const SpatialCovariance* cov : {&white64(), &riesz64()}) {
        const double lambda = 0.5;
        const auto terms = picard_chaos_terms(b, *cov, lambda, 1.0, u0, ts, 1e-3, 8);
        REQUIRE(terms.size() == 9);
        const SecondMomentField full =
            solve_second_moment(b, *cov, lambda, 1.0, u0, ts, 1e-3);
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(2, 64);
        for (const ChaosTerm& term : terms) sum += term.second_moment;
        CHECK((sum - full.second_moment).cwiseAbs().maxCoeff() <
              1e-6 * full.second_moment.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("picard term n scales exactly as lambda to the 2n") {
    const SpectralBasis& b = basis64();
    const Eigen::VectorXd u0 = Eigen::VectorXd::Ones(64);
    const std::vector<double> ts = {0.25};
    const auto at1 = picard_chaos_terms(b, white64(), 1.0, 1.0, u0, ts, 1e-3, 5);
    const auto at2 = picard_chaos_terms(b, white64(), 2.0, 1.0, u0, ts, 1e-3, 5);
    for (int n = 0; n <= 5; ++n) {
        const double scale = std::pow(4.0, n);
        const double denom = at1[n].second_moment.cwiseAbs().maxCoeff();
        REQUIRE(denom > 0.0);
        CHECK((at2[n].second_moment - scale * at1[n].second_moment).cwiseAbs().maxCoeff() <
              1e-10 * scale * denom);
    }
}

TEST_CASE("picard terms are nonnegative and start from the squared semigroup") {
    const SpectralBasis& b = basis64();
    const Eigen::VectorXd u0 = Eigen::VectorXd::Ones(64);
    const auto terms = picard_chaos_terms(b, riesz64(), 1.0, 1.0, u0, {0.2}, 1e-3, 4);
    for (const ChaosTerm& term : terms) {
        CHECK(term.order >= 0);
        CHECK(term.second_moment.minCoeff() > -1e-12);
    }
    const SecondMomentField none =
        solve_second_moment(b, riesz64(), 0.0, 1.0, u0, {0.2}, 1e-3);
    CHECK((terms[0].second_moment - none.second_moment).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("polynomial fit in lambda^2 recovers the first picard increments") {
    const SpectralBasis& b = basis64();
    const Eigen::VectorXd u0 = Eigen::VectorXd::Ones(64);
    const std::vector<double> ts = {0.25};
    const int jc = b.grid.nearest_node(0.0);
    const auto terms = picard_chaos_terms(b, white64(), 1.0, 1.0, u0, ts, 1e-3, 3);

    // small couplings so the unmodelled order-4 tail stays below the fit error
    const std::vector<double> l2s = {0.01, 0.02, 0.03, 0.04};
    Eigen::MatrixXd V(4, 4);
    Eigen::VectorXd y(4);
    for (int i = 0; i < 4; ++i) {
        for (int k = 0; k < 4; ++k) V(i, k) = std::pow(l2s[i], k);
        const SecondMomentField f =
            solve_second_moment(b, white64(), std::sqrt(l2s[i]), 1.0, u0, ts, 1e-3);
        y[i] = f.second_moment(0, jc);
    }
    const Eigen::VectorXd coef = V.fullPivLu().solve(y);
    for (int k = 0; k < 3; ++k)
        CHECK(coef[k] == doctest::Approx(terms[k].second_moment(0, jc)).epsilon(1e-3));
}

// ---------------------------------------------------------------------------
// moment series and calibration
// ---------------------------------------------------------------------------

TEST_CASE("chaos series matches a direct small-sum evaluation") {
    const double lambda = 0.8, t = 0.7, alpha = 2.0, beta = 1.0, C = 0.9, mu1 = kPi * kPi / 4.0;
    const double r = 1.0 - beta / alpha;
    double direct = 0.0;
    for (int n = 0; n <= 40; ++n)
        direct += std::pow(lambda * lambda * C, n) * std::pow(t, n * r) /
                  std::pow(std::tgamma(n + 1.0), 1.0 - beta / alpha);
    direct *= std::exp(-2.0 * mu1 * t);
    CHECK(chaos_series_value(lambda, t, alpha, beta, C, mu1, 200) ==
          doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("chaos series calibration sandwiches the picard sums on the lattice") {
    const SpectralBasis& b = basis64();
    const Eigen::VectorXd u0 = Eigen::VectorXd::Ones(64);
    const int jc = b.grid.nearest_node(0.0);
    const std::vector<double> lams = {0.5, 1.0};
    const std::vector<double> ts = {0.25, 0.5};
    const double phi1_sq = b.phi(0, jc) * b.phi(0, jc);

    Eigen::MatrixXd targets(2, 2);
    for (int j = 0; j < 2; ++j) {
        const auto terms = picard_chaos_terms(b, white64(), lams[j], 1.0, u0, ts, 1e-3, 8);
        for (int i = 0; i < 2; ++i) {
            double sum = 0.0;
            for (const ChaosTerm& term : terms) sum += term.second_moment(i, jc);
            targets(i, j) = sum / phi1_sq;
        }
    }
    const ChaosCalibration cal = calibrate_chaos_series(lams, ts, targets, 2.0, 1.0, b.mu1(), 400);
    CHECK(cal.C_low > 0.0);
    CHECK(cal.C_low <= cal.C_high);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const ChaosSeriesBounds bd = chaos_series_bounds(lams[j], ts[i], 2.0, 1.0, cal.C_low,
                                                             cal.C_high, b.mu1(), 400);
            CHECK(bd.lower <= targets(i, j) * (1.0 + 1e-9));
            CHECK(bd.upper >= targets(i, j) * (1.0 - 1e-9));
        }
}

// ---------------------------------------------------------------------------
// gronwall certificates
// ---------------------------------------------------------------------------

TEST_CASE("gronwall equality solution passes the residual check") {
    std::vector<double> grid;
    for (int i = 1; i <= 100; ++i) grid.push_back(0.05 * i);
    for (double rho : {0.5, 2.0 / 3.0, 1.0}) {
        for (double k : {1.0, 4.0}) {
            const GronwallReport rep = gronwall_verify(rho, k, 1.0, grid, BoundDirection::upper);
            CHECK(rep.max_residual <= 1e-6);
            CHECK(rep.window_ok);
        }
    }
}

TEST_CASE("gronwall growth rate scales as k to the 1/rho") {
    std::vector<double> grid;
    for (int i = 1; i <= 100; ++i) grid.push_back(0.05 * i);
    const struct { double rho, ratio; } cases[] = {{0.5, 16.0}, {2.0 / 3.0, 8.0}, {1.0, 4.0}};
    for (const auto& c : cases) {
        std::vector<double> g1 = grid, g4 = grid;
        if (c.rho < 0.6) // keep k = 4 growth inside the representable range
            for (double& t : g4) t *= 0.25;
        const GronwallReport r1 = gronwall_verify(c.rho, 1.0, 1.0, g1, BoundDirection::upper);
        const GronwallReport r4 = gronwall_verify(c.rho, 4.0, 1.0, g4, BoundDirection::upper);
        CHECK(r4.rate_fit / r1.rate_fit == doctest::Approx(c.ratio).epsilon(0.05));
    }
}

TEST_CASE("gronwall fitted c3 approaches the self-similar constant") {
    std::vector<double> grid;
    for (int i = 1; i <= 100; ++i) grid.push_back(0.05 * i);
    const GronwallReport half = gronwall_verify(0.5, 1.0, 1.0, grid, BoundDirection::upper);
    CHECK(half.c3_fit == doctest::Approx(kPi).epsilon(0.02));
    const GronwallReport one = gronwall_verify(1.0, 1.0, 1.0, grid, BoundDirection::upper);
    CHECK(one.c3_fit == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("gronwall lower bound holds from zero only at rho = 1/2") {
    std::vector<double> grid;
    for (int i = 1; i <= 100; ++i) grid.push_back(0.05 * i);
    const GronwallReport half = gronwall_verify(0.5, 1.0, 1.0, grid, BoundDirection::lower);
    CHECK(half.threshold == 0.0);
    CHECK(half.window_ok);
    const GronwallReport twothirds =
        gronwall_verify(2.0 / 3.0, 1.0, 1.0, grid, BoundDirection::lower);
    const double expect = (std::exp(1.0) / (2.0 / 3.0)) *
                          std::pow(std::tgamma(2.0 / 3.0) * 1.0, -1.5);
    CHECK(twothirds.threshold == doctest::Approx(expect).epsilon(1e-12));
    CHECK(twothirds.window_ok);
}

// ---------------------------------------------------------------------------
// free-space collision kernels
// ---------------------------------------------------------------------------

TEST_CASE("white free kernel reduces to the gaussian diagonal at alpha = 2") {
    const PowerKernel pk = free_collision_white(2.0);
    CHECK(pk.gamma == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(pk.c == doctest::Approx(0.19947114020071634).epsilon(1e-13));
    // against the free heat kernel itself: G(2 tau, 0) = (8 pi tau)^(-1/2)
    for (double tau : {0.01, 0.1, 1.0})
        CHECK(pk.c * std::pow(tau, -pk.gamma) ==
              doctest::Approx(1.0 / std::sqrt(8.0 * kPi * tau)).epsilon(1e-13));
}

TEST_CASE("riesz free kernel matches the frozen constant and an MC oracle") {
    const PowerKernel pk = free_collision_riesz(0.5);
    CHECK(pk.gamma == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(pk.c == doctest::Approx(1.2162802142575203).epsilon(1e-13));

    // Monte Carlo cross-check at beta = 0.4 (finite variance needs beta < 1/2):
    // E |Y - Z|^{-beta} with Y, Z independent free motions at time tau.
    const PowerKernel pk4 = free_collision_riesz(0.4);
    const double tau = 0.3;
    RngStream rng(23, 0, 0);
    const int n = 400000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double y = std::sqrt(2.0 * tau) * rng.normal();
        const double z = std::sqrt(2.0 * tau) * rng.normal();
        const double v = std::pow(std::abs(y - z), -0.4);
        s += v;
        s2 += v * v;
    }
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(pk4.c * std::pow(tau, -pk4.gamma) - mean) <= 4.0 * se);
}
