#include "fsheat/noise.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Cholesky>

namespace fsheat {

CovarianceModel CovarianceModel::parse(const std::string& spec) {
    CovarianceModel m;
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    const std::string arg = (colon == std::string::npos) ? "" : spec.substr(colon + 1);

    if (name == "white") {
        require(arg.empty(), "noise spec: white takes no parameter");
        m.kind = Kind::white;
        return m;
    }
    if (name == "riesz") {
        m.kind = Kind::riesz;
        try {
            m.beta = std::stod(arg);
        } catch (...) {
            throw ConfigError("noise spec: riesz needs a numeric exponent, e.g. riesz:0.5");
        }
        require(m.beta > 0.0 && m.beta < 1.0, "noise spec: riesz exponent must lie in (0, d) with d = 1");
        return m;
    }
    if (name == "bessel") {
        m.kind = Kind::bessel;
        try {
            m.eta = std::stod(arg);
        } catch (...) {
            throw ConfigError("noise spec: bessel needs a numeric order, e.g. bessel:0.7");
        }
        require(m.eta > 0.0, "noise spec: bessel order must be positive");
        return m;
    }
    if (name == "frac") {
        m.kind = Kind::fractional;
        std::stringstream ss(arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            double H = 0.0;
            try {
                H = std::stod(tok);
            } catch (...) {
                throw ConfigError("noise spec: frac needs Hurst indices, e.g. frac:0.8");
            }
            require(H > 0.5 && H < 1.0, "noise spec: Hurst indices must lie in (1/2, 1)");
            m.hurst.push_back(H);
        }
        require(!m.hurst.empty(), "noise spec: frac needs at least one Hurst index");
        return m;
    }
    throw ConfigError("noise spec: unknown model '" + name + "'");
}

std::string CovarianceModel::str() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::white: return "white";
        case Kind::riesz: os << "riesz:" << beta; return os.str();
        case Kind::bessel: os << "bessel:" << eta; return os.str();
        case Kind::fractional: {
            os << "frac:";
            for (size_t i = 0; i < hurst.size(); ++i) os << (i ? "," : "") << hurst[i];
            return os.str();
        }
    }
    return "?";
}

bool dalang_condition(const CovarianceModel& m, double alpha, int d) {
    require(alpha > 0.0 && alpha <= 2.0, "dalang_condition: alpha must lie in (0, 2]");
    require(d >= 1, "dalang_condition: d must be >= 1");
    switch (m.kind) {
        case CovarianceModel::Kind::white: return alpha > d;
        case CovarianceModel::Kind::riesz: return m.beta < alpha;
        case CovarianceModel::Kind::bessel: return m.eta > d - alpha;
        case CovarianceModel::Kind::fractional: {
            const double s = std::accumulate(m.hurst.begin(), m.hurst.end(), 0.0);
            return s > d - alpha / 2.0;
        }
    }
    return false;
}

bool hypothesis_h0(const CovarianceModel& m, double alpha, int d) {
    if (m.kind != CovarianceModel::Kind::riesz) return false;
    return m.beta > 0.0 && m.beta < std::min(alpha, static_cast<double>(d));
}

double SpatialCovariance::norm_bound() const {
    return M.cwiseAbs().rowwise().sum().maxCoeff();
}

namespace {

// Second antiderivative of |u|^-beta, so that the exact double integral of
// the Riesz kernel over two cells at center distance d is
// G(d + h) - 2 G(d) + G(d - h).
double riesz_g2(double u, double beta) {
    return std::pow(std::abs(u), 2.0 - beta) / ((1.0 - beta) * (2.0 - beta));
}

} // namespace

SpatialCovariance build_covariance(const CovarianceModel& m, const Grid1D& grid) {
    SpatialCovariance cov;
    cov.model = m;
    cov.grid = grid;
    const int n = grid.n_cells;
    const double h = grid.h;
    cov.M = Eigen::MatrixXd::Zero(n, n);

    switch (m.kind) {
        case CovarianceModel::Kind::white:
            cov.M.diagonal().setConstant(1.0 / h);
            break;
        case CovarianceModel::Kind::riesz: {
            // Entries depend on |i - j| only: precompute one value per offset.
            std::vector<double> row(n);
            for (int k = 0; k < n; ++k) {
                const double d = k * h;
                row[k] = (riesz_g2(d + h, m.beta) - 2.0 * riesz_g2(d, m.beta) + riesz_g2(d - h, m.beta)) / (h * h);
            }
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) cov.M(i, j) = row[std::abs(i - j)];
            break;
        }
        default:
            throw ConfigError("build_covariance: only white and riesz models are sampleable");
    }

    Eigen::LLT<Eigen::MatrixXd> llt(cov.M);
    const double unit = 1e-12 * cov.M.trace() / n;
    Eigen::MatrixXd Mj = cov.M;
    while (llt.info() != Eigen::Success) {
        if (cov.jitter_rounds >= 3)
            throw NumericError("build_covariance: covariance not factorizable after 3 jitter rounds");
        ++cov.jitter_rounds;
        cov.jitter += unit;
        Mj.diagonal().array() += unit;
        llt.compute(Mj);
    }
    cov.L = llt.matrixL();
    return cov;
}

Eigen::VectorXd sample_increment(const SpatialCovariance& cov, double dt, RngStream& rng) {
    require(dt > 0.0, "sample_increment: dt must be positive");
    Eigen::VectorXd xi(cov.grid.n_cells);
    rng.fill_normal(xi);
    if (cov.model.kind == CovarianceModel::Kind::white)
        return std::sqrt(dt) * cov.L.diagonal().cwiseProduct(xi);
    Eigen::VectorXd w = cov.L.triangularView<Eigen::Lower>() * xi;
    w *= std::sqrt(dt);
    return w;
}

} // namespace fsheat
