#include "fsheat/heatkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fsheat {

KernelEvaluator::KernelEvaluator(const SpectralBasis& basis, int n_terms)
    : basis_(&basis), n_terms_(n_terms) {
    require(n_terms >= 1 && n_terms <= basis.n_modes(),
            "KernelEvaluator: need 1 <= n_terms <= basis.n_modes()");
    t_min_ = 3.0 / basis.mu[n_terms - 1];
    max_phi_sq_ = 0.0;
    for (int n = 0; n < n_terms; ++n)
        max_phi_sq_ = std::max(max_phi_sq_, basis.phi.row(n).cwiseAbs().maxCoeff());
    max_phi_sq_ *= max_phi_sq_;
}

void KernelEvaluator::check_time(double t) const {
    if (!(t >= t_min_))
        throw ConfigError("KernelEvaluator: t below resolvable time t_min = " + std::to_string(t_min_));
}

double KernelEvaluator::value(double t, int ix, int iy) const {
    check_time(t);
    double s = 0.0;
    for (int n = 0; n < n_terms_; ++n)
        s += std::exp(-basis_->mu[n] * t) * basis_->phi(n, ix) * basis_->phi(n, iy);
    return s;
}

Eigen::VectorXd KernelEvaluator::row(double t, int ix) const {
    check_time(t);
    Eigen::VectorXd w(n_terms_);
    for (int n = 0; n < n_terms_; ++n)
        w[n] = std::exp(-basis_->mu[n] * t) * basis_->phi(n, ix);
    return basis_->phi.topRows(n_terms_).transpose() * w;
}

double KernelEvaluator::truncation_tail(double t) const {
    const double mu_n1 = basis_->mu_extrapolated(n_terms_ + 1);
    const double mu_n2 = basis_->mu_extrapolated(n_terms_ + 2);
    const double gap = mu_n2 - mu_n1;
    if (gap * t <= 0.0) return std::numeric_limits<double>::infinity();
    return std::exp(-mu_n1 * t) * max_phi_sq_ / (1.0 - std::exp(-gap * t));
}

double semigroup_residual(const KernelEvaluator& k, double t, double s, int ix, int iy) {
    const double lhs = k.value(t + s, ix, iy);
    const Eigen::VectorXd pt = k.row(t, ix);
    const Eigen::VectorXd ps = k.row(s, iy);
    return std::abs(lhs - k.basis().grid.h * pt.dot(ps));
}

double bound_gaussian(double t, double dist, double phi1x, double phi1y,
                      double mu1, double c, int d) {
    require(t > 0.0, "bound_gaussian: t must be positive");
    const double t1 = std::min(1.0, t);
    return std::min(1.0, phi1x * phi1y / t1) * std::exp(-mu1 * t) *
           std::exp(-c * dist * dist / t) / std::pow(t1, d / 2.0);
}

double bound_stable(double alpha, double t, double dist, double phi1x,
                    double phi1y, double mu1, int d) {
    require(t > 0.0, "bound_stable: t must be positive");
    require(alpha > 1.0 && alpha < 2.0, "bound_stable: alpha must lie in (1, 2)");
    if (t >= 1.0) return std::exp(-mu1 * t) * phi1x * phi1y;
    const double st = std::sqrt(t);
    const double near = std::pow(t, -static_cast<double>(d) / alpha);
    const double far = (dist > 0.0) ? t / std::pow(dist, alpha + d)
                                    : std::numeric_limits<double>::infinity();
    return std::exp(-mu1 * t) * std::min(1.0, phi1x / st) * std::min(1.0, phi1y / st) *
           std::min(near, far);
}

namespace {

std::vector<int> region_nodes(const Grid1D& grid, Region region, double eps) {
    if (region == Region::full) return grid.interior_nodes(0.0);
    return grid.interior_nodes(eps);
}

} // namespace

double mass_integral(const KernelEvaluator& k, double t, int ix, Region region, double eps) {
    const Grid1D& grid = k.basis().grid;
    const Eigen::VectorXd p = k.row(t, ix);
    double s = 0.0;
    for (int i : region_nodes(grid, region, eps)) s += p[i];
    return grid.h * s;
}

double square_mass_integral(const KernelEvaluator& k, double t, int ix, Region region, double eps) {
    if (region == Region::full) return k.value(2.0 * t, ix, ix);
    const Grid1D& grid = k.basis().grid;
    const Eigen::VectorXd p = k.row(t, ix);
    double s = 0.0;
    for (int i : region_nodes(grid, region, eps)) s += p[i] * p[i];
    return grid.h * s;
}

double correlated_double_integral(const KernelEvaluator& k, const SpatialCovariance& cov,
                                  double t, int ix, int iw, Region region, double eps) {
    const Grid1D& grid = k.basis().grid;
    require(cov.grid.n_cells == grid.n_cells, "correlated_double_integral: covariance grid mismatch");
    const Eigen::VectorXd px = k.row(t, ix);
    const Eigen::VectorXd pw = k.row(t, iw);
    const auto idx = region_nodes(grid, region, eps);
    double s = 0.0;
    for (int i : idx) {
        double inner = 0.0;
        for (int j : idx) inner += cov.M(i, j) * pw[j];
        s += px[i] * inner;
    }
    return grid.h * grid.h * s;
}

namespace {

double sandwich_ratio(double p, double lower_shape, double upper_shape) {
    if (!(p > 0.0)) throw PropertyError("bound fit: kernel not positive on the lattice");
    return std::max(p / upper_shape, lower_shape / p);
}

} // namespace

BoundConstants fit_gaussian_bound(const KernelEvaluator& k, const std::vector<double>& t_lattice,
                                  const std::vector<int>& nodes, double c1, double c2) {
    require(c1 < c2, "fit_gaussian_bound: need c1 < c2");
    const SpectralBasis& b = k.basis();
    require(b.alpha == 2.0, "fit_gaussian_bound: basis must have alpha = 2");
    BoundConstants bc;
    bc.c1 = c1;
    bc.c2 = c2;
    for (double t : t_lattice)
        for (int ix : nodes)
            for (int iy : nodes) {
                const double p = k.value(t, ix, iy);
                const double dist = std::abs(b.grid.x[ix] - b.grid.x[iy]);
                const double up = bound_gaussian(t, dist, b.phi(0, ix), b.phi(0, iy), b.mu1(), c1, 1);
                const double lo = bound_gaussian(t, dist, b.phi(0, ix), b.phi(0, iy), b.mu1(), c2, 1);
                bc.C = std::max(bc.C, sandwich_ratio(p, lo, up));
            }
    return bc;
}

BoundConstants fit_stable_bound(const KernelEvaluator& k, const std::vector<double>& t_lattice,
                                const std::vector<int>& nodes) {
    const SpectralBasis& b = k.basis();
    BoundConstants bc;
    for (double t : t_lattice)
        for (int ix : nodes)
            for (int iy : nodes) {
                const double p = k.value(t, ix, iy);
                const double dist = std::abs(b.grid.x[ix] - b.grid.x[iy]);
                const double shape = bound_stable(b.alpha, t, dist, b.phi(0, ix), b.phi(0, iy), b.mu1(), 1);
                bc.C = std::max(bc.C, sandwich_ratio(p, shape, shape));
            }
    return bc;
}

std::vector<double> default_t_lattice() {
    return {0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0};
}

std::vector<int> default_node_set(const Grid1D& grid, double eps) {
    std::vector<int> idx;
    for (double target : {-0.9, -0.6, -0.3, 0.0, 0.3, 0.6, 0.9}) {
        if (std::abs(target) > 1.0 - eps) continue;
        const int i = grid.nearest_node(target);
        if (idx.empty() || idx.back() != i) idx.push_back(i);
    }
    return idx;
}

CertificationReport certify_propositions(const KernelEvaluator& k, const SpatialCovariance& cov,
                                         double eps, double delta,
                                         const std::vector<double>& t_lattice,
                                         const std::vector<int>& nodes) {
    require(eps > 0.0 && eps < 0.5, "certify_propositions: eps must lie in (0, 1/2)");
    require(delta > 0.0 && delta < 2.0, "certify_propositions: delta must lie in (0, 2)");
    const SpectralBasis& b = k.basis();
    const Grid1D& grid = b.grid;
    const double alpha = b.alpha;
    const double mu1 = b.mu1();
    const bool riesz = cov.model.kind == CovarianceModel::Kind::riesz;
    require(riesz || cov.model.kind == CovarianceModel::Kind::white,
            "certify_propositions: covariance must be white or riesz");
    const int d = 1;

    CertificationReport rep;
    auto track = [&rep](const std::string& q, const CertRow& row, bool lower) {
        rep.rows.push_back(row);
        const std::string lo_key = q + ".min", hi_key = q + ".max";
        auto [it_lo, fresh_lo] = rep.constants.try_emplace(lo_key, row.normalized);
        if (!fresh_lo) it_lo->second = std::min(it_lo->second, row.normalized);
        auto [it_hi, fresh_hi] = rep.constants.try_emplace(hi_key, row.normalized);
        if (!fresh_hi) it_hi->second = std::max(it_hi->second, row.normalized);
        if (lower && !(row.normalized > 0.0))
            throw PropertyError("certify_propositions: " + q + " not positive at t = " +
                                std::to_string(row.t));
    };

    std::vector<int> eps_nodes;
    for (int i : nodes)
        if (std::abs(grid.x[i]) <= 1.0 - eps) eps_nodes.push_back(i);

    for (double t : t_lattice) {
        for (int ix : eps_nodes) {
            CertRow r{"mass_lower", t, grid.x[ix], grid.x[ix],
                      mass_integral(k, t, ix, Region::eps_interior, eps), 0.0};
            r.normalized = std::exp(mu1 * t) * r.value;
            track("mass_lower", r, true);

            CertRow r2{"square_mass_lower", t, grid.x[ix], grid.x[ix],
                       square_mass_integral(k, t, ix, Region::eps_interior, eps), 0.0};
            r2.normalized = std::pow(t, static_cast<double>(d) / alpha) * std::exp(2.0 * mu1 * t) * r2.value;
            track("square_mass_lower", r2, true);
        }
        for (int ix : nodes) {
            CertRow r{"mass_upper", t, grid.x[ix], grid.x[ix],
                      mass_integral(k, t, ix, Region::full), 0.0};
            r.normalized = std::exp(mu1 * t) * r.value;
            track("mass_upper", r, false);

            const double q = riesz ? cov.model.beta : static_cast<double>(d);
            double v;
            if (riesz)
                v = correlated_double_integral(k, cov, t, ix, ix, Region::full);
            else
                v = square_mass_integral(k, t, ix, Region::full);
            CertRow r2{"corr_upper", t, grid.x[ix], grid.x[ix], v, 0.0};
            r2.normalized = std::pow(t, q / alpha) * std::exp((2.0 - delta) * mu1 * t) * r2.value;
            track("corr_upper", r2, false);
        }
        if (riesz) {
            const double reach = std::pow(t, 1.0 / alpha);
            for (int ix : eps_nodes)
                for (int iw : eps_nodes) {
                    if (std::abs(grid.x[ix] - grid.x[iw]) > reach) continue;
                    CertRow r{"corr_lower", t, grid.x[ix], grid.x[iw],
                              correlated_double_integral(k, cov, t, ix, iw, Region::eps_interior, eps), 0.0};
                    r.normalized = std::pow(t, cov.model.beta / alpha) * std::exp(2.0 * mu1 * t) * r.value;
                    track("corr_lower", r, true);
                }
        }
    }
    return rep;
}

} // namespace fsheat
