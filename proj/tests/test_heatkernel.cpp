#include "doctest.h"

#include <cmath>

#include "fsheat/heatkernel.hpp"
#include "fsheat/secondmoment.hpp"

using namespace fsheat;

namespace {

// 129 cells put a node exactly at x = 0; 128 modes keep the discrete basis
// orthonormal.
const SpectralBasis& center_basis() {
    static const SpectralBasis b = exact_basis_interval(Grid1D::make(129), 128);
    return b;
}

} // namespace

TEST_CASE("kernel value at the centre matches the series oracle") {
    const KernelEvaluator k(center_basis(), 128);
    const int c = 64; // x = 0
    CHECK(k.value(1.0, c, c) == doctest::Approx(0.084804972697991502).epsilon(1e-12));
    CHECK(k.value(0.1, c, c) > 0.0);
}

TEST_CASE("kernel values at off-centre nodes match the series oracle") {
    const SpectralBasis b = exact_basis_interval(Grid1D::make(128), 127);
    const KernelEvaluator k(b, 127);
    const int ix = 79; // x = 31/128
    const int iy = 31; // x = -65/128
    CHECK(b.grid.x[ix] == doctest::Approx(31.0 / 128).epsilon(1e-15));
    CHECK(b.grid.x[iy] == doctest::Approx(-65.0 / 128).epsilon(1e-15));
    CHECK(k.value(0.1, ix, iy) == doctest::Approx(0.21812327788996933).epsilon(1e-12));
    CHECK(k.value(0.1, ix, ix) == doctest::Approx(0.88920212020056938).epsilon(1e-12));
    CHECK(k.value(0.5, ix, iy) == doctest::Approx(0.18387383769222696).epsilon(1e-12));
    CHECK(k.value(0.5, ix, ix) == doctest::Approx(0.25448363719284342).epsilon(1e-12));
}

TEST_CASE("kernel is symmetric and refuses unresolvable times") {
    const KernelEvaluator k(center_basis(), 64);
    CHECK(k.value(0.3, 10, 90) == k.value(0.3, 90, 10));
    CHECK(k.t_min() > 0.0);
    CHECK_THROWS_AS(k.value(0.5 * k.t_min(), 0, 0), ConfigError);
    CHECK_THROWS_AS(KernelEvaluator(center_basis(), 0), ConfigError);
}

TEST_CASE("truncation tail bounds the modes dropped from the series") {
    const KernelEvaluator coarse(center_basis(), 16);
    const KernelEvaluator fine(center_basis(), 128);
    for (double t : {coarse.t_min(), 0.02, 0.05}) {
        double worst = 0.0;
        for (int ix : {5, 40, 64, 100})
            for (int iy : {5, 64, 120})
                worst = std::max(worst, std::abs(coarse.value(t, ix, iy) - fine.value(t, ix, iy)));
        CHECK(worst <= coarse.truncation_tail(t) + 1e-15);
    }
    CHECK(coarse.truncation_tail(0.02) > 0.0);
    CHECK(coarse.truncation_tail(0.05) < coarse.truncation_tail(0.02));
}

TEST_CASE("chapman-kolmogorov holds on the discrete basis") {
    const KernelEvaluator k(center_basis(), 128);
    for (auto [t, s] : {std::pair{0.3, 0.2}, {0.1, 0.1}, {1.0, 0.5}}) {
        CHECK(semigroup_residual(k, t, s, 64, 64) <= 1e-10);
        CHECK(semigroup_residual(k, t, s, 20, 100) <= 1e-10);
    }
}

TEST_CASE("mass integral approximates the survival probability") {
    const KernelEvaluator k(center_basis(), 128);
    CHECK(mass_integral(k, 0.1, 64, Region::full) ==
          doctest::Approx(0.94930536268447035).epsilon(1e-4));
    CHECK(mass_integral(k, 2.0, 64, Region::full) ==
          doctest::Approx(0.0091569902897607558).epsilon(1e-4));
    // restricting the region can only lose mass
    CHECK(mass_integral(k, 0.3, 64, Region::eps_interior, 0.25) <
          mass_integral(k, 0.3, 64, Region::full));
}

TEST_CASE("square mass uses the exact semigroup identity") {
    const KernelEvaluator k(center_basis(), 128);
    for (double t : {0.2, 0.6}) {
        for (int ix : {30, 64, 101}) {
            const double direct = k.row(t, ix).squaredNorm() * k.basis().grid.h;
            CHECK(square_mass_integral(k, t, ix, Region::full) ==
                  doctest::Approx(direct).epsilon(1e-12));
            CHECK(square_mass_integral(k, t, ix, Region::full) ==
                  doctest::Approx(k.value(2.0 * t, ix, ix)).epsilon(1e-12));
            CHECK(square_mass_integral(k, t, ix, Region::eps_interior, 0.25) <=
                  square_mass_integral(k, t, ix, Region::full));
        }
    }
}

TEST_CASE("white correlated double integral collapses to the diagonal kernel") {
    const SpectralBasis& b = center_basis();
    const KernelEvaluator k(b, 128);
    const SpatialCovariance cov = build_covariance(CovarianceModel::parse("white"), b.grid);
    for (double t : {0.2, 0.5})
        for (auto [ix, iw] : {std::pair{64, 64}, {40, 80}})
            CHECK(correlated_double_integral(k, cov, t, ix, iw, Region::full) ==
                  doctest::Approx(k.value(2.0 * t, ix, iw)).epsilon(1e-10));
}

TEST_CASE("gaussian sandwich closes with a moderate constant") {
    const SpectralBasis& b = center_basis();
    const KernelEvaluator k(b, 128);
    const std::vector<double> ts = default_t_lattice();
    const std::vector<int> nodes = default_node_set(b.grid, 0.25);
    const BoundConstants bc = fit_gaussian_bound(k, ts, nodes);
    CHECK(bc.C >= 1.0);
    CHECK(bc.C <= 50.0);
    // post-condition: lower/C <= p <= C upper across the lattice
    const double mu1 = b.mu1();
    for (double t : ts)
        for (int ix : nodes)
            for (int iy : nodes) {
                const double p = k.value(t, ix, iy);
                const double shape =
                    bound_gaussian(t, std::abs(b.grid.x[ix] - b.grid.x[iy]), b.phi(0, ix),
                                   b.phi(0, iy), mu1, bc.c1, 1);
                const double shape_lo =
                    bound_gaussian(t, std::abs(b.grid.x[ix] - b.grid.x[iy]), b.phi(0, ix),
                                   b.phi(0, iy), mu1, bc.c2, 1);
                CHECK(p <= bc.C * shape * (1.0 + 1e-12));
                CHECK(p >= shape_lo / bc.C * (1.0 - 1e-12));
            }
}

TEST_CASE("stable sandwich closes for a fractional order") {
    const SpectralBasis b = numeric_basis(1.5, Grid1D::make(128), 96);
    const KernelEvaluator k(b, 96);
    const std::vector<double> ts = default_t_lattice();
    const std::vector<int> nodes = default_node_set(b.grid, 0.25);
    const BoundConstants bc = fit_stable_bound(k, ts, nodes);
    CHECK(bc.C >= 1.0);
    CHECK(bc.C <= 50.0);
    const double mu1 = b.mu1();
    for (double t : ts)
        for (int ix : nodes)
            for (int iy : nodes) {
                const double p = k.value(t, ix, iy);
                const double shape = bound_stable(1.5, t, std::abs(b.grid.x[ix] - b.grid.x[iy]),
                                                  b.phi(0, ix), b.phi(0, iy), mu1, 1);
                CHECK(p <= bc.C * shape * (1.0 + 1e-12));
                CHECK(p >= shape / bc.C * (1.0 - 1e-12));
            }
}

TEST_CASE("proposition sweeps stay finite and positive") {
    const SpectralBasis& b = center_basis();
    const KernelEvaluator k(b, 128);
    for (const char* spec : {"white", "riesz:0.5"}) {
        const SpatialCovariance cov = build_covariance(CovarianceModel::parse(spec), b.grid);
        const CertificationReport rep = certify_propositions(
            k, cov, 0.25, 0.5, default_t_lattice(), default_node_set(b.grid, 0.25));
        CHECK(!rep.rows.empty());
        for (const auto& [key, val] : rep.constants) {
            CHECK(std::isfinite(val));
            if (key.find("lower") != std::string::npos) CHECK(val > 0.0);
        }
        // the recorded extrema really are extrema of the rows
        for (const CertRow& r : rep.rows) {
            CHECK(r.normalized >= rep.constants.at(r.quantity + ".min") - 1e-12);
            CHECK(r.normalized <= rep.constants.at(r.quantity + ".max") + 1e-12);
        }
    }
}
