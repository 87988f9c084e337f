#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fsheat/noise.hpp"
#include "fsheat/spectral.hpp"

namespace fsheat {

enum class Region { full, eps_interior };

// Truncated eigenfunction series for the Dirichlet heat kernel
//   p(t, x, y) = sum_n exp(-mu_n t) phi_n(x) phi_n(y).
// Evaluation refuses t below t_min = 3 / mu_{n_terms}, where the dropped
// tail is no longer negligible.  Holds a non-owning pointer to the basis,
// which must outlive the evaluator.
class KernelEvaluator {
public:
    KernelEvaluator(const SpectralBasis& basis, int n_terms);

    const SpectralBasis& basis() const { return *basis_; }
    int n_terms() const { return n_terms_; }
    double t_min() const { return t_min_; }

    double value(double t, int ix, int iy) const;
    Eigen::VectorXd row(double t, int ix) const; // p(t, x_ix, .) at all nodes

    // Geometric bound on the dropped series tail at time t:
    //   exp(-mu_{N+1} t) max_n ||phi_n||_inf^2 / (1 - exp(-(mu_{N+2} - mu_{N+1}) t)),
    // with eigenvalues beyond the basis extrapolated by the growth law.
    double truncation_tail(double t) const;

private:
    void check_time(double t) const;

    const SpectralBasis* basis_;
    int n_terms_;
    double t_min_;
    double max_phi_sq_; // max_n ||phi_n||_inf^2 over the kept modes
};

// |p(t + s, x, y) - h sum_z p(t, x, z) p(s, z, y)|.
double semigroup_residual(const KernelEvaluator& k, double t, double s, int ix, int iy);

// Two-sided bound shape for alpha = 2 (evaluated without the leading C):
//   min(1, phi1x phi1y / (1 ^ t)) e^(-mu1 t) e^(-c dist^2 / t) / (1 ^ t^(d/2)).
double bound_gaussian(double t, double dist, double phi1x, double phi1y,
                      double mu1, double c, int d);

// Two-sided bound shape for alpha in (1, 2) (no free rate constant):
//   t < 1:  e^(-mu1 t) (1 ^ phi1x/sqrt(t)) (1 ^ phi1y/sqrt(t)) (t^(-d/alpha) ^ t/dist^(alpha+d))
//   t >= 1: e^(-mu1 t) phi1x phi1y.
double bound_stable(double alpha, double t, double dist, double phi1x,
                    double phi1y, double mu1, int d);

// h-weighted node sum of p(t, x, .) over the region (eps-interior: |y| <= 1-eps).
double mass_integral(const KernelEvaluator& k, double t, int ix, Region region, double eps = 0.0);

// Integral of p(t, x, .)^2 over the region.  The full-domain value uses the
// semigroup identity p(2t, x, x); the restricted one falls back to node sums.
double square_mass_integral(const KernelEvaluator& k, double t, int ix, Region region, double eps = 0.0);

// h^2-weighted double node sum of p(t, x, y) f(y, z) p(t, w, z) over the
// region, with f the cell-averaged covariance.
double correlated_double_integral(const KernelEvaluator& k, const SpatialCovariance& cov,
                                  double t, int ix, int iw, Region region, double eps = 0.0);

struct BoundConstants {
    double C = 0.0;  // smallest constant closing the sandwich on the lattice
    double c1 = 0.0; // decay rate inside the upper bound (alpha = 2 only)
    double c2 = 0.0; // decay rate inside the lower bound (alpha = 2 only)
};

// Fit the sandwich constant over a (t, x, y) lattice: C is the max over the
// lattice of max(p / upper_shape, lower_shape / p).  By construction
// lower/C <= p <= C * upper holds at every lattice point afterwards.
BoundConstants fit_gaussian_bound(const KernelEvaluator& k, const std::vector<double>& t_lattice,
                                  const std::vector<int>& nodes, double c1 = 0.125, double c2 = 0.5);
BoundConstants fit_stable_bound(const KernelEvaluator& k, const std::vector<double>& t_lattice,
                                const std::vector<int>& nodes);

struct CertRow {
    std::string quantity;
    double t = 0.0;
    double x = 0.0;
    double w = 0.0; // second spatial point where applicable, else = x
    double value = 0.0;
    double normalized = 0.0;
};

struct CertificationReport {
    std::vector<CertRow> rows;
    std::map<std::string, double> constants; // fitted min/max of normalized quantities
};

// Sweeps the survival-mass and collision quantities over the certification
// lattice and records the normalized values whose extrema play the role of
// the "there exist constants" statements:
//   mass_lower        e^(mu1 t)  int_{D_eps} p             (>= c, x in D_eps)
//   mass_upper        e^(mu1 t)  int_D p                   (<= c)
//   square_mass_lower t^(d/a) e^(2 mu1 t) int_{D_eps} p^2  (>= c, x in D_eps)
//   corr_lower        t^(B/a) e^(2 mu1 t) double integral  (>= c, |x-w| <= t^(1/a), riesz only)
//   corr_upper        t^(q/a) e^((2-delta) mu1 t) double integral (<= c; q = d white, B riesz)
// Throws PropertyError if a lower-type quantity fails to stay positive.
CertificationReport certify_propositions(const KernelEvaluator& k, const SpatialCovariance& cov,
                                         double eps, double delta,
                                         const std::vector<double>& t_lattice,
                                         const std::vector<int>& nodes);

// Default certification lattice pieces.
std::vector<double> default_t_lattice();
std::vector<int> default_node_set(const Grid1D& grid, double eps);

} // namespace fsheat
