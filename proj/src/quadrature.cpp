#include "fsheat/quadrature.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "fsheat/errors.hpp"

namespace fsheat {

QuadRule gauss_jacobi(int n, double a, double b) {
    require(n >= 1, "quadrature order must be >= 1");
    require(a > -1.0 && b > -1.0, "Jacobi exponents must exceed -1");

    // Three-term recurrence coefficients of the monic Jacobi polynomials.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    const double apb = a + b;
    for (int k = 0; k < n; ++k) {
        double alpha;
        if (k == 0) {
            alpha = (b - a) / (apb + 2.0);
        } else {
            const double den = (2.0 * k + apb) * (2.0 * k + apb + 2.0);
            alpha = (b * b - a * a) / den;
        }
        J(k, k) = alpha;
        if (k >= 1) {
            double beta;
            if (k == 1) {
                // the generic formula is 0/0 here whenever a + b is 0 or -1
                beta = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + apb) * (2.0 + apb) * (3.0 + apb));
            } else {
                const double num = 4.0 * k * (k + a) * (k + b) * (k + apb);
                const double den = (2.0 * k + apb) * (2.0 * k + apb) *
                                   (2.0 * k + apb + 1.0) * (2.0 * k + apb - 1.0);
                beta = num / den;
            }
            const double sb = std::sqrt(beta);
            J(k, k - 1) = sb;
            J(k - 1, k) = sb;
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    if (es.info() != Eigen::Success)
        throw NumericError("Gauss-Jacobi eigensolve failed");

    // mu0 = integral of the weight = 2^(a+b+1) B(a+1, b+1)
    const double log_mu0 = (apb + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) +
                           std::lgamma(b + 1.0) - std::lgamma(apb + 2.0);
    const double mu0 = std::exp(log_mu0);

    QuadRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int k = 0; k < n; ++k) {
        rule.nodes[k] = es.eigenvalues()(k);
        const double v0 = es.eigenvectors()(0, k);
        rule.weights[k] = mu0 * v0 * v0;
    }
    return rule;
}

QuadRule gauss_jacobi01(int n, double a, double b) {
    // x = (1 + u) / 2 maps [-1,1] to [0,1]; the weight picks up 2^(-a-b-1).
    QuadRule rule = gauss_jacobi(n, a, b);
    const double scale = std::pow(2.0, -a - b - 1.0);
    for (int k = 0; k < n; ++k) {
        rule.nodes[k] = 0.5 * (1.0 + rule.nodes[k]);
        rule.weights[k] *= scale;
    }
    return rule;
}

} // namespace fsheat
