#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "fsheat/grid.hpp"
#include "fsheat/rng.hpp"

namespace fsheat {

// Spatial correlation model of the driving noise.  Spec strings:
//   "white"      space-time white noise
//   "riesz:B"    Riesz kernel |x - y|^-B, 0 < B < d
//   "bessel:E"   Bessel kernel of order E > 0
//   "frac:H"     product fractional noise with one Hurst index per dimension,
//                each in (1/2, 1), comma-separated for d > 1
struct CovarianceModel {
    enum class Kind { white, riesz, bessel, fractional };
    Kind kind = Kind::white;
    double beta = 0.0;         // riesz
    double eta = 0.0;          // bessel
    std::vector<double> hurst; // fractional

    static CovarianceModel parse(const std::string& spec);
    std::string str() const;
};

// Spectral integrability condition for the mild solution to exist:
//   white      alpha > d
//   riesz      beta < alpha
//   bessel     eta > d - alpha
//   fractional sum H_i > d - alpha/2
bool dalang_condition(const CovarianceModel& m, double alpha, int d);

// The standing assumption for the two-sided moment bounds: Riesz kernel with
// 0 < beta < min(alpha, d).
bool hypothesis_h0(const CovarianceModel& m, double alpha, int d);

// Cell-averaged covariance of the noise increments on a grid, with its
// Cholesky factor.  Only white and riesz models are sampleable.
struct SpatialCovariance {
    CovarianceModel model;
    Grid1D grid;
    Eigen::MatrixXd M;     // n_cells x n_cells, symmetric Toeplitz PSD
    Eigen::MatrixXd L;     // lower Cholesky factor of M (after any jitter)
    double jitter = 0.0;   // total diagonal shift applied before LLT succeeded
    int jitter_rounds = 0; // number of retries that were needed

    double norm_bound() const; // max row sum of |M|, an upper bound on ||M||_2
};

SpatialCovariance build_covariance(const CovarianceModel& m, const Grid1D& grid);

// One spatial noise increment over a step of length dt: sqrt(dt) * L * xi
// with xi standard normal from the given stream.
Eigen::VectorXd sample_increment(const SpatialCovariance& cov, double dt, RngStream& rng);

} // namespace fsheat
