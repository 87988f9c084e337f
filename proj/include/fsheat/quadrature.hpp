#pragma once

#include <vector>

namespace fsheat {

struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Jacobi rule: integrates f(x) (1-x)^a (1+x)^b exactly on [-1, 1] for
// polynomials f up to degree 2n - 1 (a, b > -1).  Golub-Welsch construction.
QuadRule gauss_jacobi(int n, double a, double b);

// The same rule mapped to [0, 1] with weight (1-x)^a x^b.
QuadRule gauss_jacobi01(int n, double a, double b);

} // namespace fsheat
