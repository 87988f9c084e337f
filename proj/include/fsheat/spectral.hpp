#pragma once

#include <vector>

#include <Eigen/Core>

#include "fsheat/grid.hpp"

namespace fsheat {

// Dirichlet eigenpairs of the generator on (-1, 1) with exterior condition
// u = 0 outside the interval.  mu holds the eigenvalues (positive, ascending),
// phi the eigenfunctions sampled at the grid nodes, one mode per row,
// normalized so that h * sum_i phi(n, i)^2 = 1 and the first nonzero node
// value of each mode is positive.
struct SpectralBasis {
    double alpha = 2.0;
    Grid1D grid;
    Eigen::VectorXd mu;  // n_modes
    Eigen::MatrixXd phi; // n_modes x n_cells

    int n_modes() const { return static_cast<int>(mu.size()); }
    double mu1() const { return mu[0]; }

    // Extrapolated eigenvalue for a mode index beyond the computed range,
    // using the n^alpha growth law (1-based mode index).
    double mu_extrapolated(int n_one_based) const;
};

// Normalization constant of the 1-d fractional Laplacian,
// C(a) = a 2^(a-1) Gamma((a+1)/2) / (sqrt(pi) Gamma(1 - a/2)),
// chosen so the operator's Fourier symbol is |xi|^a.
double normalization_constant(double alpha);

// Closed-form basis for alpha = 2: mu_n = (n pi / 2)^2 and
// phi_n(x) = sin(n pi (x + 1) / 2), which vanishes at both endpoints.
SpectralBasis exact_basis_interval(const Grid1D& grid, int n_modes);

// Matrix of the positive operator (-A) for the restricted fractional
// Laplacian with exterior Dirichlet condition, 1 < alpha < 2.  Piecewise-
// constant cell quadrature with closed-form kernel antiderivatives, exact
// exterior killing integrals, and a second-difference completion of the
// diagonal cell carrying its exact curvature weight.  Symmetric by assembly.
Eigen::MatrixXd fractional_laplacian_matrix(double alpha, const Grid1D& grid);

// Matrix of the positive operator (-A) for alpha = 2: the standard second
// difference on the cell-centered grid with the wall value u(+-1) = 0 imposed
// by antisymmetric reflection (diagonal 3/h^2 in the boundary rows).
Eigen::MatrixXd second_difference_matrix(const Grid1D& grid);

// Dense symmetric eigensolve of the discretized generator; keeps the lowest
// n_modes pairs.  alpha = 2 uses the second-difference matrix, otherwise the
// fractional assembly.  Throws PropertyError if the computed spectrum is not
// positive ascending or the ground state changes sign in the interior.
SpectralBasis numeric_basis(double alpha, const Grid1D& grid, int n_modes);

struct GrowthFit {
    double exponent = 0.0; // log-log slope of mu_n vs n
    double c_low = 0.0;    // min mu_n / n^alpha over the fit window
    double c_high = 0.0;   // max mu_n / n^alpha over the fit window
    int n_lo = 0, n_hi = 0;
};

// Fits mu_n ~ c n^alpha over modes n in [4, 0.8 * n_modes] (1-based).
// Requires at least 16 modes.
GrowthFit check_eigenvalue_growth(const SpectralBasis& basis);

// Two-sided comparison of the ground state with the boundary profile
// (1 - |x|)^(alpha/2): returns the smallest c such that
//   c^-1 (1-|x|)^(alpha/2) <= phi_1(x) <= c (1-|x|)^(alpha/2)
// at every node.  Throws PropertyError if phi_1 is not strictly positive.
double check_first_eigenfunction_bound(const SpectralBasis& basis);

} // namespace fsheat
