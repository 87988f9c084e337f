#include "fsheat/solver.hpp"

#include <cmath>
#include <sstream>

namespace fsheat {

namespace {

std::vector<double> split_args(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            out.push_back(std::stod(tok));
        } catch (...) {
            throw ConfigError("expected a numeric parameter list, got '" + s + "'");
        }
    }
    return out;
}

} // namespace

SigmaSpec SigmaSpec::parse(const std::string& spec) {
    SigmaSpec s;
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    const std::string arg = (colon == std::string::npos) ? "" : spec.substr(colon + 1);
    if (name == "linear") {
        require(arg.empty(), "sigma spec: linear takes no parameter");
        return s;
    }
    if (name == "pinched") {
        const auto a = split_args(arg);
        require(a.size() == 2, "sigma spec: pinched needs l,L");
        s.kind = Kind::pinched;
        s.l = a[0];
        s.L = a[1];
        require(s.l > 0.0 && s.L >= s.l, "sigma spec: pinched needs 0 < l <= L");
        return s;
    }
    if (name == "const") {
        const auto a = split_args(arg);
        require(a.size() == 1, "sigma spec: const needs one value");
        s.kind = Kind::constant;
        s.c = a[0];
        return s;
    }
    throw ConfigError("sigma spec: unknown kind '" + name + "'");
}

std::string SigmaSpec::str() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::linear: return "linear";
        case Kind::pinched: os << "pinched:" << l << "," << L; return os.str();
        case Kind::constant: os << "const:" << c; return os.str();
    }
    return "?";
}

InitialCondition InitialCondition::parse(const std::string& spec) {
    InitialCondition ic;
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    const std::string arg = (colon == std::string::npos) ? "" : spec.substr(colon + 1);
    if (name == "const") {
        const auto a = split_args(arg);
        require(a.size() == 1, "u0 spec: const needs one value");
        ic.c = a[0];
        return ic;
    }
    if (name == "eigen1") {
        require(arg.empty(), "u0 spec: eigen1 takes no parameter");
        ic.kind = Kind::first_eigenfunction;
        return ic;
    }
    if (name == "bump") {
        const auto a = split_args(arg);
        require(a.size() == 2, "u0 spec: bump needs eps,level");
        ic.kind = Kind::bump;
        ic.eps = a[0];
        ic.level = a[1];
        require(ic.eps > 0.0 && ic.eps < 1.0, "u0 spec: bump eps must lie in (0, 1)");
        require(ic.level > 0.0, "u0 spec: bump level must be positive");
        return ic;
    }
    throw ConfigError("u0 spec: unknown kind '" + name + "'");
}

std::string InitialCondition::str() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::constant: os << "const:" << c; return os.str();
        case Kind::first_eigenfunction: return "eigen1";
        case Kind::bump: os << "bump:" << eps << "," << level; return os.str();
    }
    return "?";
}

Eigen::VectorXd InitialCondition::values(const SpectralBasis& basis) const {
    const Grid1D& g = basis.grid;
    Eigen::VectorXd u(g.n_cells);
    switch (kind) {
        case Kind::constant:
            u.setConstant(c);
            break;
        case Kind::first_eigenfunction:
            u = basis.phi.row(0).transpose();
            break;
        case Kind::bump:
            for (int i = 0; i < g.n_cells; ++i)
                u[i] = (std::abs(g.x[i]) <= 1.0 - eps) ? level : 0.0;
            break;
    }
    return u;
}

bool InitialCondition::positive_on_interior(const SpectralBasis& basis, double eps_check) const {
    const Eigen::VectorXd u = values(basis);
    for (int i : basis.grid.interior_nodes(eps_check))
        if (!(u[i] > 0.0)) return false;
    return true;
}

double dt_max(const SpectralBasis& basis, const SpatialCovariance& cov,
              double lambda, double sigma_slope) {
    double dt = 0.1 / basis.mu1();
    if (lambda != 0.0 && sigma_slope > 0.0) {
        const double a = 2.0 * std::abs(lambda) * sigma_slope * std::sqrt(cov.norm_bound());
        dt = std::min(dt, 1.0 / (a * a));
    }
    return dt;
}

Eigen::VectorXd deterministic_drift(const SpectralBasis& basis, const Eigen::VectorXd& u, double dt) {
    require(dt >= 0.0, "deterministic_drift: dt must be nonnegative");
    Eigen::VectorXd a = basis.grid.h * (basis.phi * u);
    a.array() *= (-basis.mu.array() * dt).exp();
    return basis.phi.transpose() * a;
}

Eigen::VectorXd em_step(const SpectralBasis& basis, const SpatialCovariance& cov,
                        const SigmaSpec& sigma, double lambda, double dt,
                        const Eigen::VectorXd& u, RngStream& rng) {
    Eigen::VectorXd v = u;
    if (lambda != 0.0) {
        const Eigen::VectorXd dW = sample_increment(cov, dt, rng);
        for (Eigen::Index i = 0; i < v.size(); ++i)
            v[i] += lambda * sigma.apply(u[i]) * dW[i];
    }
    Eigen::VectorXd next = deterministic_drift(basis, v, dt);
    if (!next.allFinite())
        throw NumericError("em_step: trajectory left the representable range");
    return next;
}

PathResult simulate_path(const SpectralBasis& basis, const SpatialCovariance& cov,
                         const SigmaSpec& sigma, const Eigen::VectorXd& u0,
                         double lambda, const std::vector<double>& t_out,
                         double dt_target, std::uint64_t master_seed, std::uint64_t path_id) {
    require(!t_out.empty(), "simulate_path: need at least one output time");
    require(t_out.front() > 0.0, "simulate_path: output times must be positive");
    for (size_t i = 1; i < t_out.size(); ++i)
        require(t_out[i] > t_out[i - 1], "simulate_path: output times must be strictly increasing");
    const double cap = dt_max(basis, cov, lambda, sigma.slope_high());
    require(dt_target > 0.0 && dt_target <= cap,
            "simulate_path: dt_target must lie in (0, dt_max], dt_max = " + std::to_string(cap));
    require(u0.size() == basis.grid.n_cells, "simulate_path: u0 size mismatch");

    PathResult res;
    res.snapshots.reserve(t_out.size());
    Eigen::VectorXd u = u0;
    double t_prev = 0.0;
    std::uint64_t step_index = 0;
    for (double t_next : t_out) {
        const double span = t_next - t_prev;
        const long n_steps = std::max(1L, static_cast<long>(std::ceil(span / dt_target - 1e-12)));
        const double dt = span / n_steps;
        if (!res.blew_up) {
            for (long s = 0; s < n_steps; ++s) {
                RngStream rng(master_seed, path_id, step_index++);
                try {
                    u = em_step(basis, cov, sigma, lambda, dt, u, rng);
                } catch (const NumericError&) {
                    res.blew_up = true;
                    res.blowup_step = static_cast<long>(step_index) - 1;
                    res.blowup_time = t_prev + (s + 1) * dt;
                    break;
                }
            }
        } else {
            step_index += n_steps; // keep stream indexing aligned with clean runs
        }
        FieldState snap;
        snap.t = t_next;
        snap.u = res.blew_up
                     ? Eigen::VectorXd::Constant(u.size(), std::numeric_limits<double>::quiet_NaN())
                     : u;
        res.snapshots.push_back(std::move(snap));
        t_prev = t_next;
    }
    return res;
}

} // namespace fsheat
