#include "fsheat/secondmoment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fsheat/errors.hpp"
#include "fsheat/fit.hpp"
#include "fsheat/quadrature.hpp"
#include "fsheat/rng.hpp"

namespace fsheat {

namespace {

constexpr double kPi = 3.14159265358979323846;

double log_add_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

} // namespace

// ---------------------------------------------------------------------------
// Simplex integrals
// ---------------------------------------------------------------------------

double simplex_integral(int n, double a, double b, double t) {
    require(n >= 1, "simplex order must be >= 1");
    require(a < 1.0 && b < 1.0, "simplex exponents must be < 1");
    require(t > 0.0, "simplex time must be positive");
    const double expo = n * (1.0 - b) - a;
    const double lg = n * std::lgamma(1.0 - b) + std::lgamma(1.0 - a) -
                      std::lgamma(n * (1.0 - b) + 1.0 - a) + expo * std::log(t);
    return std::exp(lg);
}

MonteCarloEstimate simplex_integral_mc(int n, double a, double b, double t,
                                       std::int64_t n_samples, std::uint64_t seed) {
    require(n >= 1 && n <= 16, "simplex order out of range for sampling");
    require(a < 1.0 && b < 1.0, "simplex exponents must be < 1");
    require(t > 0.0 && n_samples >= 2, "bad sampling request");

    RngStream rng(seed, 0x51ADu, 0);
    // Ordered uniforms carry density n!/t^n on the simplex, so the integral is
    // (t^n / n!) times the mean of the integrand over sorted samples.
    double mean = 0.0, m2 = 0.0;
    std::int64_t count = 0;
    std::vector<double> pts(static_cast<std::size_t>(n));
    while (count < n_samples) {
        for (int i = 0; i < n; ++i) pts[static_cast<std::size_t>(i)] = t * rng.uniform();
        std::sort(pts.begin(), pts.end());
        double f = std::pow(t - pts.back(), -a);
        double prev = 0.0;
        for (int i = 0; i < n; ++i) {
            f *= std::pow(pts[static_cast<std::size_t>(i)] - prev, -b);
            prev = pts[static_cast<std::size_t>(i)];
        }
        if (!std::isfinite(f)) continue; // zero-gap draw, measure zero
        ++count;
        const double d = f - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (f - mean);
    }
    const double log_vol = n * std::log(t) - std::lgamma(n + 1.0);
    const double vol = std::exp(log_vol);
    const double var = m2 / static_cast<double>(count - 1);
    MonteCarloEstimate est;
    est.value = vol * mean;
    est.stderr_ = vol * std::sqrt(var / static_cast<double>(count));
    est.n_samples = count;
    return est;
}

// ---------------------------------------------------------------------------
// Mittag-Leffler
// ---------------------------------------------------------------------------

double mittag_leffler_log(double rho, double z) {
    require(rho > 0.0 && rho <= 1.0, "Mittag-Leffler order must lie in (0, 1]");
    require(z >= 0.0, "Mittag-Leffler argument must be nonnegative");
    if (z == 0.0) return 0.0;
    if (rho == 1.0) return z;

    const double lz = std::log(z);
    const double peak = std::pow(z, 1.0 / rho) / rho;
    const long max_terms = static_cast<long>(peak) + 200 +
                           static_cast<long>(20.0 * std::sqrt(peak + 1.0));
    double lse = -std::numeric_limits<double>::infinity();
    for (long k = 0; k <= max_terms; ++k) {
        const double lt = k * lz - std::lgamma(rho * k + 1.0);
        lse = log_add_exp(lse, lt);
        if (k > static_cast<long>(peak) + 4 && lt < lse - 45.0) return lse;
    }
    throw NumericError("Mittag-Leffler series did not converge");
}

double mittag_leffler(double rho, double z) {
    const double lg = mittag_leffler_log(rho, z);
    if (lg > 700.0)
        throw NumericError("Mittag-Leffler value overflows double; use mittag_leffler_log");
    return std::exp(lg);
}

// ---------------------------------------------------------------------------
// Scalar renewal kernels
// ---------------------------------------------------------------------------

namespace {

// Crossover between Gaussian images and the eigenfunction series for the
// alpha = 2 diagonal kernel p(2 tau, x, x); both are accurate near it.
constexpr double kThetaCross = 0.5;

double theta_density_images(double tau, double x) {
    // p(t, x, y) = sum_k G(t, x - y + 4k) - G(t, x + y + 2 + 4k) at y = x,
    // with G(t, z) the N(0, 2t) density; here t = 2 tau.
    const double t = 2.0 * tau;
    const double pref = 1.0 / std::sqrt(4.0 * kPi * t);
    double s = 0.0;
    for (int k = -8; k <= 8; ++k) {
        const double zs = 4.0 * k;
        const double zk = 2.0 * x + 2.0 + 4.0 * k;
        const double es = zs * zs / (4.0 * t);
        const double ek = zk * zk / (4.0 * t);
        if (es < 700.0) s += std::exp(-es);
        if (ek < 700.0) s -= std::exp(-ek);
    }
    return pref * s;
}

double theta_density_series(double tau, double x) {
    const double t = 2.0 * tau;
    double s = 0.0;
    for (int n = 1; n <= 2000; ++n) {
        const double mu = (n * kPi / 2.0) * (n * kPi / 2.0);
        const double e = mu * t;
        if (e > 46.0) break;
        const double phi = std::sin(n * kPi * (x + 1.0) / 2.0);
        s += std::exp(-e) * phi * phi;
    }
    return s;
}

// int_0^tau (8 pi s)^(-1/2) exp(-z^2 / (8 s)) ds, the running mass of one
// image term of p(2 s, x, x).
double image_mass_primitive(double tau, double z) {
    if (tau <= 0.0) return 0.0;
    const double c = z * z / 8.0;
    const double pref = 1.0 / std::sqrt(8.0 * kPi);
    if (c == 0.0) return pref * 2.0 * std::sqrt(tau);
    if (c / tau > 700.0) return 0.0;
    const double r = std::sqrt(c / tau);
    return pref * (2.0 * std::sqrt(tau) * std::exp(-c / tau) -
                   2.0 * std::sqrt(kPi * c) * std::erfc(r));
}

double theta_mass_images(double tau1, double tau2, double x) {
    double s = 0.0;
    for (int k = -8; k <= 8; ++k) {
        const double zs = 4.0 * k;
        const double zk = 2.0 * x + 2.0 + 4.0 * k;
        s += image_mass_primitive(tau2, zs) - image_mass_primitive(tau1, zs);
        s -= image_mass_primitive(tau2, zk) - image_mass_primitive(tau1, zk);
    }
    return s;
}

double theta_mass_series(double tau1, double tau2, double x) {
    double s = 0.0;
    for (int n = 1; n <= 2000; ++n) {
        const double mu = (n * kPi / 2.0) * (n * kPi / 2.0);
        const double e1 = 2.0 * mu * tau1;
        if (e1 > 46.0) break;
        const double phi = std::sin(n * kPi * (x + 1.0) / 2.0);
        const double e2 = 2.0 * mu * tau2;
        const double upper = e2 > 700.0 ? 0.0 : std::exp(-e2);
        s += phi * phi * (std::exp(-e1) - upper) / (2.0 * mu);
    }
    return s;
}

} // namespace

ScalarKernel ScalarKernel::power_law(double c, double gamma) {
    require(c > 0.0, "kernel amplitude must be positive");
    require(gamma >= 0.0 && gamma < 1.0, "kernel singularity must lie in [0, 1)");
    ScalarKernel k;
    k.kind_ = Kind::power;
    k.c_ = c;
    k.gamma_ = gamma;
    return k;
}

ScalarKernel ScalarKernel::heat_diagonal(double x) {
    require(std::abs(x) < 1.0, "kernel point must lie inside (-1, 1)");
    ScalarKernel k;
    k.kind_ = Kind::theta;
    k.x_ = x;
    return k;
}

double ScalarKernel::density(double tau) const {
    require(tau > 0.0, "kernel density needs tau > 0");
    if (kind_ == Kind::power) return c_ * std::pow(tau, -gamma_);
    return tau < kThetaCross ? theta_density_images(tau, x_) : theta_density_series(tau, x_);
}

double ScalarKernel::mass(double tau1, double tau2) const {
    require(tau1 >= 0.0 && tau2 >= tau1, "kernel mass needs 0 <= tau1 <= tau2");
    if (tau2 == tau1) return 0.0;
    if (kind_ == Kind::power) {
        const double p = 1.0 - gamma_;
        return c_ * (std::pow(tau2, p) - std::pow(tau1, p)) / p;
    }
    if (tau2 <= kThetaCross) return theta_mass_images(tau1, tau2, x_);
    if (tau1 >= kThetaCross) return theta_mass_series(tau1, tau2, x_);
    return theta_mass_images(tau1, kThetaCross, x_) + theta_mass_series(kThetaCross, tau2, x_);
}

double heat_survival(double t, double x) {
    require(t > 0.0, "survival needs t > 0");
    require(std::abs(x) < 1.0, "survival point must lie inside (-1, 1)");
    if (t < 1.0) {
        // Images integrated in y over (-1, 1); each Gaussian integrates to a
        // difference of normal CDFs.
        const double sd = std::sqrt(2.0 * t);
        auto cdf = [&](double z) { return 0.5 * std::erfc(-z / (sd * std::sqrt(2.0))); };
        double s = 0.0;
        for (int k = -8; k <= 8; ++k) {
            // source images centred at x - 4k, sinks at -x - 2 - 4k
            const double cs = x - 4.0 * k;
            const double ck = -x - 2.0 - 4.0 * k;
            s += cdf(1.0 - cs) - cdf(-1.0 - cs);
            s -= cdf(1.0 - ck) - cdf(-1.0 - ck);
        }
        return s;
    }
    double s = 0.0;
    for (int n = 1; n <= 2000; n += 2) { // even modes have zero mean
        const double mu = (n * kPi / 2.0) * (n * kPi / 2.0);
        if (mu * t > 46.0) break;
        const double phi = std::sin(n * kPi * (x + 1.0) / 2.0);
        s += std::exp(-mu * t) * phi * 4.0 / (n * kPi);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Scalar renewal solve
// ---------------------------------------------------------------------------

std::vector<double> scalar_renewal_solve(const ScalarKernel& kernel, double coupling,
                                         const std::vector<double>& g,
                                         const std::vector<double>& t_grid) {
    require(coupling >= 0.0 && std::isfinite(coupling), "coupling must be finite and >= 0");
    require(!t_grid.empty() && t_grid.size() == g.size(),
            "renewal grid and inhomogeneity must have equal, nonzero length");
    require(t_grid.front() > 0.0, "renewal grid must start after 0");
    const std::size_t K = t_grid.size();
    for (std::size_t k = 1; k < K; ++k)
        require(t_grid[k] > t_grid[k - 1], "renewal grid must be strictly increasing");

    // Uniform grids admit stationary weights W_j = mass(j dt, (j+1) dt).
    const double dt0 = t_grid[0];
    bool uniform = true;
    for (std::size_t k = 1; k < K && uniform; ++k)
        uniform = std::abs((t_grid[k] - t_grid[k - 1]) - dt0) <= 1e-12 * dt0;

    std::vector<double> v(K);
    if (uniform) {
        std::vector<double> w(K);
        for (std::size_t j = 0; j < K; ++j)
            w[j] = kernel.mass(j * dt0, (j + 1) * dt0);
        const double denom = 1.0 - coupling * w[0];
        if (denom <= 0.0)
            throw NumericError("renewal grid too coarse: implicit weight exceeds 1/coupling");
        for (std::size_t k = 0; k < K; ++k) {
            double s = g[k];
            for (std::size_t j = 1; j <= k; ++j) s += coupling * w[j] * v[k - j];
            v[k] = s / denom;
        }
        return v;
    }

    for (std::size_t k = 0; k < K; ++k) {
        const double tk = t_grid[k];
        const double w_kk = kernel.mass(0.0, tk - (k == 0 ? 0.0 : t_grid[k - 1]));
        const double denom = 1.0 - coupling * w_kk;
        if (denom <= 0.0)
            throw NumericError("renewal grid too coarse: implicit weight exceeds 1/coupling");
        double s = g[k];
        for (std::size_t m = 0; m < k; ++m) {
            const double lo = m == 0 ? 0.0 : t_grid[m - 1];
            s += coupling * v[m] * kernel.mass(tk - t_grid[m], tk - lo);
        }
        v[k] = s / denom;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Pair-coordinate second-moment recursion
// ---------------------------------------------------------------------------

namespace {

struct PairMasks {
    double dt = -1.0;
    Eigen::MatrixXd E; // exp(-(mu_n + mu_m) dt)
    Eigen::MatrixXd W; // (1 - E) / (mu_n + mu_m), exactly integrated
};

void update_masks(PairMasks& masks, const Eigen::VectorXd& mu, double dt) {
    if (masks.dt == dt) return;
    const int N = static_cast<int>(mu.size());
    masks.E.resize(N, N);
    masks.W.resize(N, N);
    for (int n = 0; n < N; ++n)
        for (int m = 0; m < N; ++m) {
            const double s = mu(n) + mu(m);
            const double e = std::exp(-s * dt);
            masks.E(n, m) = e;
            masks.W(n, m) = s * dt < 1e-8 ? dt * (1.0 - 0.5 * s * dt) : (1.0 - e) / s;
        }
    masks.dt = dt;
}

} // namespace

SecondMomentField solve_second_moment(const SpectralBasis& basis,
                                      const SpatialCovariance& cov, double lambda,
                                      double sigma_slope, const Eigen::VectorXd& u0,
                                      const std::vector<double>& t_out,
                                      double dt_target, bool store_pairs) {
    require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be finite and >= 0");
    require(sigma_slope > 0.0, "sigma slope must be positive");
    require(u0.size() == basis.grid.n_cells, "initial data does not match the grid");
    require(!t_out.empty() && t_out.front() >= 0.0, "output times must start at or after 0");
    for (std::size_t i = 1; i < t_out.size(); ++i)
        require(t_out[i] > t_out[i - 1], "output times must be strictly increasing");
    require(dt_target > 0.0, "dt_target must be positive");

    const int N = basis.n_modes();
    const int n = basis.grid.n_cells;
    const double h = basis.grid.h;
    const Eigen::MatrixXd& Psi = basis.phi; // N x n
    const bool white = cov.model.kind == CovarianceModel::Kind::white;
    const double coupling = lambda * lambda * sigma_slope * sigma_slope;

    Eigen::VectorXd a0 = h * (Psi * u0);
    Eigen::MatrixXd R = a0 * a0.transpose();

    // B(X) = h^2 Psi (M o (Psi^T X Psi)) Psi^T; white noise has M = I/h, so
    // only the spatial diagonal of Psi^T X Psi survives.
    auto collision = [&](const Eigen::MatrixXd& X) -> Eigen::MatrixXd {
        if (white) {
            const Eigen::MatrixXd T = X * Psi;
            const Eigen::VectorXd d =
                (Psi.cwiseProduct(T)).colwise().sum().transpose();
            return h * (Psi * d.asDiagonal() * Psi.transpose());
        }
        const Eigen::MatrixXd V = Psi.transpose() * (X * Psi);
        const Eigen::MatrixXd G = cov.M.cwiseProduct(V);
        return h * h * (Psi * G * Psi.transpose());
    };

    SecondMomentField out;
    out.times = t_out;
    out.second_moment.resize(static_cast<Eigen::Index>(t_out.size()), n);
    out.mode_energy.resize(static_cast<Eigen::Index>(t_out.size()), N);

    PairMasks masks;
    double t_prev = 0.0;
    for (std::size_t i = 0; i < t_out.size(); ++i) {
        const double span = t_out[i] - t_prev;
        if (span > 0.0) {
            const int n_sub =
                std::max(1, static_cast<int>(std::ceil(span / dt_target - 1e-12)));
            const double dt = span / n_sub;
            update_masks(masks, basis.mu, dt);
            for (int s = 0; s < n_sub; ++s) {
                const Eigen::MatrixXd source = masks.E.cwiseProduct(R);
                Eigen::MatrixXd X = source + coupling * masks.W.cwiseProduct(collision(R));
                for (int it = 0;; ++it) {
                    if (it >= 200)
                        throw NumericError(
                            "implicit collision step did not contract; refine dt_target");
                    Eigen::MatrixXd Xn =
                        source + coupling * masks.W.cwiseProduct(collision(X));
                    const double dn = (Xn - X).norm();
                    X.swap(Xn);
                    if (dn <= 1e-12 * (X.norm() + 1e-300)) break;
                }
                R = 0.5 * (X + X.transpose());
                if (!R.allFinite())
                    throw NumericError("second-moment recursion overflowed");
            }
        }
        const Eigen::MatrixXd T = R * Psi;
        out.second_moment.row(static_cast<Eigen::Index>(i)) =
            (Psi.cwiseProduct(T)).colwise().sum();
        out.mode_energy.row(static_cast<Eigen::Index>(i)) = R.diagonal().transpose();
        if (store_pairs) {
            Eigen::MatrixXd V = Psi.transpose() * (R * Psi);
            out.pair_values.push_back(0.5 * (V + V.transpose()));
        }
        t_prev = t_out[i];
    }
    return out;
}

SecondMomentField renewal_solve_white(const SpectralBasis& basis,
                                      const SpatialCovariance& cov, double lambda,
                                      double sigma_slope, const Eigen::VectorXd& u0,
                                      const std::vector<double>& t_out,
                                      double dt_target) {
    require(cov.model.kind == CovarianceModel::Kind::white,
            "renewal_solve_white needs white noise");
    return solve_second_moment(basis, cov, lambda, sigma_slope, u0, t_out, dt_target,
                               false);
}

SecondMomentField volterra_solve_colored(const SpectralBasis& basis,
                                         const SpatialCovariance& cov, double lambda,
                                         double sigma_slope, const Eigen::VectorXd& u0,
                                         const std::vector<double>& t_out,
                                         double dt_target) {
    require(cov.model.kind != CovarianceModel::Kind::white,
            "volterra_solve_colored needs a colored model");
    require(basis.grid.n_cells <= 128,
            "colored second-moment solve is limited to 128 cells");
    return solve_second_moment(basis, cov, lambda, sigma_slope, u0, t_out, dt_target,
                               true);
}

// ---------------------------------------------------------------------------
// Picard terms resolved by noise order
// ---------------------------------------------------------------------------

std::vector<ChaosTerm> picard_chaos_terms(const SpectralBasis& basis,
                                          const SpatialCovariance& cov, double lambda,
                                          double sigma_slope, const Eigen::VectorXd& u0,
                                          const std::vector<double>& t_out,
                                          double dt_target, int n_max) {
    require(n_max >= 0 && n_max <= 12, "chaos order must lie in [0, 12]");
    require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be finite and >= 0");
    require(sigma_slope > 0.0, "sigma slope must be positive");
    require(u0.size() == basis.grid.n_cells, "initial data does not match the grid");
    require(!t_out.empty() && t_out.front() >= 0.0, "output times must start at or after 0");
    for (std::size_t i = 1; i < t_out.size(); ++i)
        require(t_out[i] > t_out[i - 1], "output times must be strictly increasing");
    require(dt_target > 0.0, "dt_target must be positive");

    const int N = basis.n_modes();
    const int n = basis.grid.n_cells;
    const double h = basis.grid.h;
    const Eigen::MatrixXd& Psi = basis.phi;
    const bool white = cov.model.kind == CovarianceModel::Kind::white;
    const double coupling = lambda * lambda * sigma_slope * sigma_slope;

    auto collision = [&](const Eigen::MatrixXd& X) -> Eigen::MatrixXd {
        if (white) {
            const Eigen::MatrixXd T = X * Psi;
            const Eigen::VectorXd d =
                (Psi.cwiseProduct(T)).colwise().sum().transpose();
            return h * (Psi * d.asDiagonal() * Psi.transpose());
        }
        const Eigen::MatrixXd V = Psi.transpose() * (X * Psi);
        const Eigen::MatrixXd G = cov.M.cwiseProduct(V);
        return h * h * (Psi * G * Psi.transpose());
    };

    Eigen::VectorXd a0 = h * (Psi * u0);
    std::vector<Eigen::MatrixXd> R(static_cast<std::size_t>(n_max) + 1,
                                   Eigen::MatrixXd::Zero(N, N));
    R[0] = a0 * a0.transpose();

    std::vector<ChaosTerm> terms(static_cast<std::size_t>(n_max) + 1);
    for (int p = 0; p <= n_max; ++p) {
        terms[static_cast<std::size_t>(p)].order = p;
        terms[static_cast<std::size_t>(p)].times = t_out;
        terms[static_cast<std::size_t>(p)].second_moment.resize(
            static_cast<Eigen::Index>(t_out.size()), n);
    }

    PairMasks masks;
    double t_prev = 0.0;
    for (std::size_t i = 0; i < t_out.size(); ++i) {
        const double span = t_out[i] - t_prev;
        if (span > 0.0) {
            const int n_sub =
                std::max(1, static_cast<int>(std::ceil(span / dt_target - 1e-12)));
            const double dt = span / n_sub;
            update_masks(masks, basis.mu, dt);
            for (int s = 0; s < n_sub; ++s) {
                // Ascending order: the collision source of order p is the
                // already updated order p-1, matching the implicit step
                // expanded in powers of lambda^2.
                for (int p = 0; p <= n_max; ++p) {
                    Eigen::MatrixXd next =
                        masks.E.cwiseProduct(R[static_cast<std::size_t>(p)]);
                    if (p >= 1)
                        next += coupling *
                                masks.W.cwiseProduct(
                                    collision(R[static_cast<std::size_t>(p) - 1]));
                    R[static_cast<std::size_t>(p)].swap(next);
                }
            }
        }
        for (int p = 0; p <= n_max; ++p) {
            const Eigen::MatrixXd T = R[static_cast<std::size_t>(p)] * Psi;
            terms[static_cast<std::size_t>(p)].second_moment.row(
                static_cast<Eigen::Index>(i)) = (Psi.cwiseProduct(T)).colwise().sum();
        }
        t_prev = t_out[i];
    }
    return terms;
}

// ---------------------------------------------------------------------------
// Moment series and calibration
// ---------------------------------------------------------------------------

double chaos_series_value(double lambda, double t, double alpha, double beta, double C,
                          double mu1, int n_max) {
    require(lambda >= 0.0 && t > 0.0, "series needs lambda >= 0, t > 0");
    require(C >= 0.0, "series constant must be >= 0");
    require(alpha > 0.0 && beta >= 0.0 && beta < alpha, "series needs 0 <= beta < alpha");
    require(n_max >= 0, "series order must be >= 0");
    const double r = beta / alpha;
    double lse = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= n_max; ++k) {
        if (k > 0 && (lambda == 0.0 || C == 0.0)) break;
        const double lt = 2.0 * k * std::log(lambda > 0 ? lambda : 1.0) +
                          (k > 0 ? k * std::log(C) : 0.0) +
                          (r - 1.0) * std::lgamma(k + 1.0) +
                          k * (1.0 - r) * std::log(t);
        lse = log_add_exp(lse, lt);
    }
    const double lg = lse - 2.0 * mu1 * t;
    if (lg > 700.0) throw NumericError("moment series overflows double");
    return std::exp(lg);
}

ChaosSeriesBounds chaos_series_bounds(double lambda, double t, double alpha, double beta,
                                      double C_low, double C_high, double mu1,
                                      int n_max) {
    require(C_low <= C_high, "series bounds need C_low <= C_high");
    ChaosSeriesBounds b;
    b.lower = chaos_series_value(lambda, t, alpha, beta, C_low, mu1, n_max);
    b.upper = chaos_series_value(lambda, t, alpha, beta, C_high, mu1, n_max);
    return b;
}

ChaosCalibration calibrate_chaos_series(const std::vector<double>& lambdas,
                                        const std::vector<double>& ts,
                                        const Eigen::MatrixXd& targets, double alpha,
                                        double beta, double mu1, int n_max) {
    require(!lambdas.empty() && !ts.empty(), "calibration lattice must be nonempty");
    require(targets.rows() == static_cast<Eigen::Index>(ts.size()) &&
                targets.cols() == static_cast<Eigen::Index>(lambdas.size()),
            "calibration target shape mismatch");

    double c_min = std::numeric_limits<double>::infinity();
    double c_max = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        for (std::size_t j = 0; j < lambdas.size(); ++j) {
            const double target = targets(static_cast<Eigen::Index>(i),
                                          static_cast<Eigen::Index>(j));
            require(target > 0.0, "calibration targets must be positive");
            const double base = chaos_series_value(lambdas[j], ts[i], alpha, beta, 0.0,
                                                   mu1, n_max);
            require(target > base,
                    "calibration target does not exceed the order-zero series term");
            double hi = 1.0;
            int guard = 0;
            while (chaos_series_value(lambdas[j], ts[i], alpha, beta, hi, mu1, n_max) <
                   target) {
                hi *= 2.0;
                if (++guard > 80) throw NumericError("series calibration diverged");
            }
            double lo = 0.0;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (chaos_series_value(lambdas[j], ts[i], alpha, beta, mid, mu1, n_max) <
                    target)
                    lo = mid;
                else
                    hi = mid;
            }
            const double c_star = 0.5 * (lo + hi);
            c_min = std::min(c_min, c_star);
            c_max = std::max(c_max, c_star);
        }
    }
    return ChaosCalibration{c_min, c_max};
}

// ---------------------------------------------------------------------------
// Gronwall certificate
// ---------------------------------------------------------------------------

namespace {

int rational_denominator(double rho) {
    for (int q = 1; q <= 12; ++q) {
        const double p = rho * q;
        if (std::abs(p - std::round(p)) < 1e-9) return q;
    }
    return 1;
}

} // namespace

GronwallReport gronwall_verify(double rho, double k, double c1,
                               const std::vector<double>& t_grid, BoundDirection dir) {
    require(rho > 0.0 && rho <= 1.0, "Gronwall exponent must lie in (0, 1]");
    require(k > 0.0 && c1 > 0.0, "Gronwall constants must be positive");
    require(t_grid.size() >= 8, "Gronwall verification needs at least 8 grid points");
    require(t_grid.front() > 0.0, "Gronwall grid must start after 0");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        require(t_grid[i] > t_grid[i - 1], "Gronwall grid must be strictly increasing");

    GronwallReport rep;
    rep.rho = rho;
    rep.k = k;
    rep.c1 = c1;
    rep.direction = dir;

    const double kg = k * std::tgamma(rho);
    const double rate = std::pow(kg, 1.0 / rho);

    std::vector<double> log_g(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        log_g[i] = std::log(c1) + mittag_leffler_log(rho, kg * std::pow(t_grid[i], rho));

    // --- residual of the integral equation, by Gauss-Jacobi quadrature ---
    // int_0^t (t-s)^(rho-1) g(s) ds = t^rho int_0^1 (1-xi)^(rho-1) Phi(xi) dxi
    // after s = t xi^q with q clearing the xi^rho branch point at 0.
    const int q = rational_denominator(rho);
    const QuadRule rule = gauss_jacobi01(96, rho - 1.0, 0.0);
    std::vector<std::size_t> check_idx;
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        if (rate * t_grid[i] <= 30.0) check_idx.push_back(i);
    if (check_idx.size() > 64) {
        std::vector<std::size_t> thin;
        const double step = static_cast<double>(check_idx.size() - 1) / 63.0;
        for (int j = 0; j < 64; ++j)
            thin.push_back(check_idx[static_cast<std::size_t>(std::lround(j * step))]);
        check_idx.swap(thin);
    }
    require(!check_idx.empty(),
            "Gronwall grid has no points with rate * t <= 30 for the residual check");

    double max_res = 0.0;
    for (std::size_t idx : check_idx) {
        const double t = t_grid[idx];
        double quad = 0.0;
        for (std::size_t m = 0; m < rule.nodes.size(); ++m) {
            const double xi = rule.nodes[m];
            double ring = 1.0; // ((1 - xi^q) / (1 - xi))^(rho-1) = (sum xi^j)^(rho-1)
            if (q > 1) {
                double s = 0.0, p = 1.0;
                for (int j = 0; j < q; ++j) {
                    s += p;
                    p *= xi;
                }
                ring = std::pow(s, rho - 1.0);
            }
            const double sxq = std::pow(xi, q);
            const double gs =
                c1 * std::exp(mittag_leffler_log(rho, kg * std::pow(t * sxq, rho)));
            quad += rule.weights[m] * ring * q * std::pow(xi, q - 1) * gs;
        }
        quad *= std::pow(t, rho);
        const double g = c1 * std::exp(mittag_leffler_log(rho, kg * std::pow(t, rho)));
        const double res = std::abs(g - c1 - k * quad) / g;
        max_res = std::max(max_res, res);
    }
    rep.max_residual = max_res;

    // --- asymptotic rate from the tail of the grid ---
    const double T = t_grid.back();
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        if (t_grid[i] >= 0.5 * T) {
            xs.push_back(t_grid[i]);
            ys.push_back(log_g[i]);
        }
    const LineFit lf = fit_line(xs, ys);
    rep.rate_fit = lf.slope;
    rep.c3_fit = lf.slope / std::pow(k, 1.0 / rho);

    // --- exponential envelope in the requested direction ---
    if (dir == BoundDirection::upper) {
        rep.threshold = 0.0;
        double lc2 = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < t_grid.size(); ++i)
            lc2 = std::max(lc2, log_g[i] - rep.rate_fit * t_grid[i]);
        rep.c2_fit = std::exp(lc2);
        bool ok = std::isfinite(rep.c2_fit) && rep.c2_fit > 0.0;
        for (std::size_t i = 0; i < t_grid.size() && ok; ++i)
            ok = lc2 + rep.rate_fit * t_grid[i] >= log_g[i] - 1e-12;
        rep.window_ok = ok;
    } else {
        rep.threshold =
            rho == 0.5 ? 0.0 : (std::exp(1.0) / rho) * std::pow(std::tgamma(rho) * k,
                                                                -1.0 / rho);
        double lc2 = std::numeric_limits<double>::infinity();
        std::size_t in_window = 0;
        for (std::size_t i = 0; i < t_grid.size(); ++i)
            if (t_grid[i] > rep.threshold) {
                lc2 = std::min(lc2, log_g[i] - rep.rate_fit * t_grid[i]);
                ++in_window;
            }
        bool ok = in_window >= 4 && std::isfinite(lc2);
        rep.c2_fit = ok ? std::exp(lc2) : 0.0;
        for (std::size_t i = 0; i < t_grid.size() && ok; ++i)
            if (t_grid[i] > rep.threshold)
                ok = lc2 + rep.rate_fit * t_grid[i] <= log_g[i] + 1e-12;
        rep.window_ok = ok && rep.c2_fit > 1e-250;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Free-space collision kernels
// ---------------------------------------------------------------------------

PowerKernel free_collision_white(double alpha) {
    require(alpha > 1.0 && alpha <= 2.0, "white collision kernel needs alpha in (1, 2]");
    // p_free(2 tau, 0) with symbol exp(-t |xi|^alpha)
    const double c = std::tgamma(1.0 + 1.0 / alpha) / (kPi * std::pow(2.0, 1.0 / alpha));
    return PowerKernel{c, 1.0 / alpha};
}

PowerKernel free_collision_riesz(double beta) {
    require(beta > 0.0 && beta < 1.0, "Riesz collision kernel needs beta in (0, 1)");
    // E |Y - Z|^(-beta) for independent N(x, 2 tau) copies: Y - Z ~ N(0, 4 tau)
    const double c = std::pow(2.0, -1.5 * beta) * std::tgamma((1.0 - beta) / 2.0) /
                     std::sqrt(kPi);
    return PowerKernel{c, beta / 2.0};
}

} // namespace fsheat
