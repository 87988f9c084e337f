#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fsheat/fit.hpp"
#include "fsheat/noise.hpp"
#include "fsheat/solver.hpp"
#include "fsheat/spectral.hpp"

namespace fsheat {

// ---------------------------------------------------------------------------
// Monte Carlo moment estimation with batch-mean error bars
// ---------------------------------------------------------------------------

struct MomentRow {
    double t = 0.0;
    double x = 0.0;
    int p = 2;
    double lambda = 0.0;
    double estimate = 0.0;
    double stderr_ = 0.0;
    std::int64_t n_paths = 0;
    std::string aggregate; // "node", "sup_D" or "inf_D_eps"
};

struct MomentTable {
    std::vector<MomentRow> rows;
    int n_blowups = 0;

    // First matching row; aggregate "" matches pointwise rows at the node
    // nearest to x.
    const MomentRow* find(double t, int p, const std::string& aggregate,
                          double x = 0.0) const;
};

struct MomentRequest {
    std::vector<double> t_out;
    std::vector<int> orders = {2};
    std::vector<int> probe_nodes;
    double eps = 0.25;
    int n_paths = 10000;
    int n_batches = 20;
    double dt_target = 1e-3;
    std::uint64_t master_seed = 1;
};

MomentTable estimate_moments(const SpectralBasis& basis, const SpatialCovariance& cov,
                             const SigmaSpec& sigma, const Eigen::VectorXd& u0,
                             double lambda, const MomentRequest& req);

// ---------------------------------------------------------------------------
// Exponent fits
// ---------------------------------------------------------------------------

struct ExponentFit {
    double rate = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double t_lo = 0.0, t_hi = 0.0;
    int n_used = 0;
};

// Least squares of log(value) against t; values must be finite and positive.
ExponentFit lyapunov_fit(const std::vector<double>& ts,
                         const std::vector<double>& values);

// Start of the validity window for lower-bound fits at coupling lambda.
double lower_fit_window_start(double alpha, double lambda);

// ---------------------------------------------------------------------------
// Excitation-index probes: the growth rate of the second moment at the centre
// as a function of lambda, taken from the scalar renewal equation on the
// self-similar window t in (0, 32 lambda^(-2 alpha / (alpha - beta))].
// ---------------------------------------------------------------------------

struct ExcitationProbe {
    double alpha = 2.0;
    double beta_eff = 1.0; // 1 for white noise in d = 1, else the Riesz beta
    double mu1 = 0.0;
    std::vector<double> lambdas;
    std::vector<double> rates; // fitted d log E|u|^2 / dt, Dirichlet convention
};

// alpha = 2, space-time white: exact Dirichlet diagonal kernel at x = 0.
ExcitationProbe excitation_probe_white(const std::vector<double>& lambdas, int k_steps);

// Free-space power-law collision kernel (boundary effect enters only through
// the -2 mu1 shift); beta = 0 selects white noise.
ExcitationProbe excitation_probe_free(double alpha, double beta,
                                      const std::vector<double>& lambdas, int k_steps,
                                      double mu1);

struct ExcitationFit {
    double index = 0.0;
    double r2 = 0.0;
    std::vector<double> log_lambda;
    std::vector<double> log_rate; // log((rate + 2 mu1) / 2)
};

ExcitationFit excitation_index(const ExcitationProbe& probe);

// ---------------------------------------------------------------------------
// Calibration against the exactly solvable space-independent noise
// du = Delta u dt + lambda u dW_t: every mode carries the same scalar
// martingale, so E |u_t|_{L^2}^2 has rate lambda^2 - 2 mu_{k0}.
// ---------------------------------------------------------------------------

struct CalibrationResult {
    std::vector<double> ts;
    std::vector<double> mc;       // batch-combined MC estimates of E |u_t|^2_{L2}
    std::vector<double> stderr_;  // batch standard errors
    std::vector<double> analytic; // closed form
    ExponentFit fit;
    double rate_se = 0.0; // spread of per-batch slopes
    double target = 0.0;  // lambda^2 - 2 mu_k0
};

CalibrationResult space_independent_calibration(const SpectralBasis& basis, int k0,
                                                double lambda,
                                                const std::vector<double>& t_grid,
                                                int n_paths, int n_batches,
                                                std::uint64_t master_seed);

} // namespace fsheat
