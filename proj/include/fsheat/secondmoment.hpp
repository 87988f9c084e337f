#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fsheat/noise.hpp"
#include "fsheat/spectral.hpp"

namespace fsheat {

// ---------------------------------------------------------------------------
// Weighted time-simplex integrals
//
//   I_n(t) = integral over 0 < t_1 < ... < t_n < t of
//            (t - t_n)^(-a) * prod_{i=1..n} (t_i - t_{i-1})^(-b),   t_0 = 0.
//
// Closed form: Gamma(1-b)^n Gamma(1-a) / Gamma(n(1-b) + 1 - a) * t^(n(1-b)-a).
// ---------------------------------------------------------------------------

double simplex_integral(int n, double a, double b, double t);

struct MonteCarloEstimate {
    double value;
    double stderr_;
    std::int64_t n_samples;
};

// Brute-force check of simplex_integral: sample ordered uniforms on (0,t)^n.
MonteCarloEstimate simplex_integral_mc(int n, double a, double b, double t,
                                       std::int64_t n_samples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Mittag-Leffler function E_rho(z) = sum_k z^k / Gamma(rho k + 1), z >= 0.
// ---------------------------------------------------------------------------

double mittag_leffler(double rho, double z);
double mittag_leffler_log(double rho, double z); // log E_rho(z); safe for large z

// ---------------------------------------------------------------------------
// Scalar renewal equation at a fixed spatial point:
//
//   v(t) = g(t) + coupling * int_0^t q(t - s) v(s) ds
//
// with a weakly singular memory kernel q.  The solver uses product
// integration: v is frozen on each step and the kernel mass
// W(tau1, tau2) = int_{tau1}^{tau2} q(tau) dtau is applied exactly, with the
// value taken implicitly at the right endpoint.
// ---------------------------------------------------------------------------

class ScalarKernel {
  public:
    // q(tau) = c * tau^(-gamma), 0 <= gamma < 1.
    static ScalarKernel power_law(double c, double gamma);

    // q(tau) = p(2 tau, x, x) for the alpha = 2 Dirichlet kernel on (-1,1):
    // Gaussian images for small tau, eigenfunction series for large tau.
    static ScalarKernel heat_diagonal(double x);

    double density(double tau) const;                 // q(tau), tau > 0
    double mass(double tau1, double tau2) const;      // int_{tau1}^{tau2} q

  private:
    enum class Kind { power, theta };
    Kind kind_;
    double c_ = 0.0, gamma_ = 0.0; // power law
    double x_ = 0.0;               // theta diagonal
};

// Survival mass of the alpha = 2 Dirichlet kernel started at x:
// int_{-1}^{1} p(t, x, y) dy, by images (small t) or eigen series (large t).
double heat_survival(double t, double x);

std::vector<double> scalar_renewal_solve(const ScalarKernel& kernel, double coupling,
                                         const std::vector<double>& g,
                                         const std::vector<double>& t_grid);

// ---------------------------------------------------------------------------
// Deterministic evolution of the full second-moment matrix
// R(t)_{nm} = E[a_n(t) a_m(t)] in eigenfunction coordinates, for sigma(u) =
// slope * u.  Each step applies the exact two-point semigroup decay and an
// exactly integrated, implicitly evaluated collision term built from the
// spatial covariance.
// ---------------------------------------------------------------------------

struct SecondMomentField {
    std::vector<double> times;
    Eigen::MatrixXd second_moment; // times x n_cells, E[u(t,x)^2] at cell centers
    Eigen::MatrixXd mode_energy;   // times x n_modes, E[a_n(t)^2]
    std::vector<Eigen::MatrixXd> pair_values; // E[u(t,x)u(t,w)], when requested
};

SecondMomentField solve_second_moment(const SpectralBasis& basis,
                                      const SpatialCovariance& cov, double lambda,
                                      double sigma_slope, const Eigen::VectorXd& u0,
                                      const std::vector<double>& t_out,
                                      double dt_target, bool store_pairs = false);

// Convenience wrappers with the model checked up front.
SecondMomentField renewal_solve_white(const SpectralBasis& basis,
                                      const SpatialCovariance& cov, double lambda,
                                      double sigma_slope, const Eigen::VectorXd& u0,
                                      const std::vector<double>& t_out,
                                      double dt_target);

SecondMomentField volterra_solve_colored(const SpectralBasis& basis,
                                         const SpatialCovariance& cov, double lambda,
                                         double sigma_slope, const Eigen::VectorXd& u0,
                                         const std::vector<double>& t_out,
                                         double dt_target);

// ---------------------------------------------------------------------------
// Picard iteration resolved by noise order: term n collects the lambda^(2n)
// contribution to E[u(t,x)^2], so the terms sum to the full second moment and
// scale exactly as lambda^(2n).
// ---------------------------------------------------------------------------

struct ChaosTerm {
    int order;
    std::vector<double> times;
    Eigen::MatrixXd second_moment; // times x n_cells
};

std::vector<ChaosTerm> picard_chaos_terms(const SpectralBasis& basis,
                                          const SpatialCovariance& cov, double lambda,
                                          double sigma_slope, const Eigen::VectorXd& u0,
                                          const std::vector<double>& t_out,
                                          double dt_target, int n_max);

// ---------------------------------------------------------------------------
// Moment series  e^(-2 mu1 t) sum_n lambda^(2n) C^n (n!)^(beta/alpha - 1)
//                             t^(n (1 - beta/alpha))
// and its calibration against Picard terms on a (lambda, t) lattice.
// ---------------------------------------------------------------------------

double chaos_series_value(double lambda, double t, double alpha, double beta, double C,
                          double mu1, int n_max);

struct ChaosSeriesBounds {
    double lower;
    double upper;
};

ChaosSeriesBounds chaos_series_bounds(double lambda, double t, double alpha, double beta,
                                      double C_low, double C_high, double mu1, int n_max);

struct ChaosCalibration {
    double C_low;
    double C_high;
};

// For each (lambda_j, t_i) find C with series == target by bisection; the
// envelope [min C, max C] then sandwiches every target on the lattice.
ChaosCalibration calibrate_chaos_series(const std::vector<double>& lambdas,
                                        const std::vector<double>& ts,
                                        const Eigen::MatrixXd& targets, double alpha,
                                        double beta, double mu1, int n_max);

// ---------------------------------------------------------------------------
// Gronwall-type certificate for  g(t) = c1 E_rho(k Gamma(rho) t^rho):
//   * g solves g(t) = c1 + k int_0^t (t-s)^(rho-1) g(s) ds with equality
//     (residual checked by Gauss-Jacobi quadrature, independent of the series),
//   * fitted c2 e^(c3 k^(1/rho) t) bound in the requested direction, with the
//     validity window reported (lower bounds hold for all t only when
//     rho = 1/2; otherwise past (e/rho) (Gamma(rho) k)^(-1/rho)).
// ---------------------------------------------------------------------------

enum class BoundDirection { lower, upper };

struct GronwallReport {
    double rho = 0.0, k = 0.0, c1 = 0.0;
    BoundDirection direction = BoundDirection::upper;
    double max_residual = 0.0; // relative, over the verification grid
    double rate_fit = 0.0;     // d log g / dt in the asymptotic window
    double c2_fit = 0.0;
    double c3_fit = 0.0;     // rate_fit / k^(1/rho)
    double threshold = 0.0;  // start of the validity window
    bool window_ok = false;  // bound verified on the whole window
};

GronwallReport gronwall_verify(double rho, double k, double c1,
                               const std::vector<double>& t_grid, BoundDirection dir);

// ---------------------------------------------------------------------------
// Free-space collision kernels q(tau) for the renewal equation at a point:
// white noise gives p_free(2 tau, 0) and the Riesz kernel gives
// E f(Y - Z) with Y, Z independent copies of the free motion at time tau.
// Both are exact power laws c tau^(-gamma).
// ---------------------------------------------------------------------------

struct PowerKernel {
    double c;
    double gamma;
};

PowerKernel free_collision_white(double alpha);
PowerKernel free_collision_riesz(double beta); // alpha = 2

} // namespace fsheat
