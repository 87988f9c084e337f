#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fsheat/noise.hpp"
#include "fsheat/spectral.hpp"

namespace fsheat {

// Multiplicative noise coefficient.  Spec strings:
//   "linear"        sigma(x) = x
//   "pinched:l,L"   sigma(x) = x (l + (L - l)/(1 + x^2)), so l|x| <= |sigma| <= L|x|
//   "const:c"       sigma(x) = c (additive-noise diagnostic; no pinching bounds)
struct SigmaSpec {
    enum class Kind { linear, pinched, constant };
    Kind kind = Kind::linear;
    double l = 1.0, L = 1.0; // pinching slopes
    double c = 1.0;          // constant kind

    static SigmaSpec parse(const std::string& spec);
    std::string str() const;

    double apply(double x) const {
        switch (kind) {
            case Kind::linear: return x;
            case Kind::pinched: return x * (l + (L - l) / (1.0 + x * x));
            case Kind::constant: return c;
        }
        return x;
    }
    // Lipschitz/growth slope used by the step-size rule.
    double slope_high() const { return kind == Kind::constant ? std::max(1.0, std::abs(c)) : L; }
    double slope_low() const { return kind == Kind::constant ? 0.0 : l; }
};

// Initial data.  Spec strings: "const:c", "eigen1", "bump:eps,level"
// (level * indicator of |x| <= 1 - eps).
struct InitialCondition {
    enum class Kind { constant, first_eigenfunction, bump };
    Kind kind = Kind::constant;
    double c = 1.0;
    double eps = 0.25;
    double level = 1.0;

    static InitialCondition parse(const std::string& spec);
    std::string str() const;
    Eigen::VectorXd values(const SpectralBasis& basis) const;

    // inf over the eps-interior is positive (the standing positivity
    // assumption on the initial data).
    bool positive_on_interior(const SpectralBasis& basis, double eps_check) const;
};

struct FieldState {
    double t = 0.0;
    Eigen::VectorXd u; // node values
};

// Largest admissible step: min(0.1 / mu_1, (2 lambda L_sigma ||M||^(1/2))^-2),
// i.e. snapshots resolve the slowest mode and the noise recursion stays
// contractive.  lambda = 0 leaves only the first term.
double dt_max(const SpectralBasis& basis, const SpatialCovariance& cov,
              double lambda, double sigma_slope);

// One application of the exact semigroup over dt in eigencoordinates:
// project, decay by exp(-mu_n dt), synthesize.
Eigen::VectorXd deterministic_drift(const SpectralBasis& basis, const Eigen::VectorXd& u, double dt);

// One exponential Euler step: u -> S(dt)[u + lambda sigma(u) dW].
// Throws NumericError on non-finite output (trajectory blow-up).
Eigen::VectorXd em_step(const SpectralBasis& basis, const SpatialCovariance& cov,
                        const SigmaSpec& sigma, double lambda, double dt,
                        const Eigen::VectorXd& u, RngStream& rng);

struct PathResult {
    std::vector<FieldState> snapshots; // one per requested output time
    bool blew_up = false;
    long blowup_step = -1;
    double blowup_time = 0.0;
};

// Simulates one path from t = 0 through the requested output times (strictly
// increasing, positive).  The step within each interval is the largest
// divisor of the interval not exceeding dt_target.  Noise for step k of path
// p is drawn from the stream keyed by (master_seed, p, k), so results are
// independent of how paths are scheduled.  On blow-up the remaining
// snapshots are filled with NaN and the path is flagged.
PathResult simulate_path(const SpectralBasis& basis, const SpatialCovariance& cov,
                         const SigmaSpec& sigma, const Eigen::VectorXd& u0,
                         double lambda, const std::vector<double>& t_out,
                         double dt_target, std::uint64_t master_seed, std::uint64_t path_id);

} // namespace fsheat
