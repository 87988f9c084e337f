#include "fsheat/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fsheat/rng.hpp"
#include "fsheat/secondmoment.hpp"

namespace fsheat {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

// log(sum exp(l_c)) over the entries of a row, tolerating -inf entries.
// Any NaN entry (blown-up path) makes the result NaN.
double log_sum_exp_row(const Eigen::ArrayXXd& l, Eigen::Index row) {
    double m = kNegInf;
    for (Eigen::Index c = 0; c < l.cols(); ++c) {
        const double v = l(row, c);
        if (std::isnan(v)) return kNaN;
        m = std::max(m, v);
    }
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (Eigen::Index c = 0; c < l.cols(); ++c) s += std::exp(l(row, c) - m);
    return m + std::log(s);
}

// Combines per-batch log-means into an estimate and a batch-mean standard
// error, rescaling by the largest log so the arithmetic stays in range.
void combine_batches(const std::vector<double>& log_means, double& estimate, double& se) {
    const int B = static_cast<int>(log_means.size());
    double m = kNegInf;
    for (double l : log_means) {
        if (std::isnan(l)) { estimate = kNaN; se = kNaN; return; }
        m = std::max(m, l);
    }
    if (m == kNegInf) { estimate = 0.0; se = 0.0; return; }
    double mean = 0.0;
    for (double l : log_means) mean += std::exp(l - m);
    mean /= B;
    double var = 0.0;
    for (double l : log_means) {
        const double d = std::exp(l - m) - mean;
        var += d * d;
    }
    var /= (B - 1);
    estimate = std::exp(m) * mean;
    se = std::exp(m) * std::sqrt(var / B);
}

void apply_sigma_increment(const SigmaSpec& sigma, double lambda,
                           const Eigen::MatrixXd& dW, Eigen::MatrixXd& u) {
    switch (sigma.kind) {
        case SigmaSpec::Kind::linear:
            u.array() += lambda * u.array() * dW.array();
            return;
        case SigmaSpec::Kind::constant:
            u.array() += (lambda * sigma.c) * dW.array();
            return;
        case SigmaSpec::Kind::pinched: {
            const Eigen::ArrayXXd s =
                u.array() * (sigma.l + (sigma.L - sigma.l) / (1.0 + u.array().square()));
            u.array() += lambda * s * dW.array();
            return;
        }
    }
}

} // namespace

const MomentRow* MomentTable::find(double t, int p, const std::string& aggregate,
                                   double x) const {
    const std::string want = aggregate.empty() ? "node" : aggregate;
    const MomentRow* best = nullptr;
    double best_dx = std::numeric_limits<double>::infinity();
    for (const MomentRow& r : rows) {
        if (r.p != p || r.aggregate != want) continue;
        if (std::abs(r.t - t) > 1e-9 * std::max(1.0, std::abs(t))) continue;
        if (want != "node") return &r;
        const double dx = std::abs(r.x - x);
        if (dx < best_dx) { best_dx = dx; best = &r; }
    }
    return best;
}

MomentTable estimate_moments(const SpectralBasis& basis, const SpatialCovariance& cov,
                             const SigmaSpec& sigma, const Eigen::VectorXd& u0,
                             double lambda, const MomentRequest& req) {
    const Grid1D& grid = basis.grid;
    const int n = grid.n_cells;
    require(u0.size() == n, "estimate_moments: u0 size mismatch");
    require(req.n_paths >= 100, "estimate_moments: need at least 100 paths");
    require(req.n_batches >= 2 && req.n_batches <= req.n_paths,
            "estimate_moments: n_batches must lie in [2, n_paths]");
    require(!req.t_out.empty() && req.t_out.front() > 0.0,
            "estimate_moments: output times must be positive");
    for (size_t i = 1; i < req.t_out.size(); ++i)
        require(req.t_out[i] > req.t_out[i - 1],
                "estimate_moments: output times must be strictly increasing");
    require(!req.orders.empty(), "estimate_moments: need at least one moment order");
    for (int p : req.orders)
        require(p >= 2 && p <= 30, "estimate_moments: moment orders must lie in [2, 30]");
    for (int j : req.probe_nodes)
        require(j >= 0 && j < n, "estimate_moments: probe node out of range");
    const std::vector<int> interior = grid.interior_nodes(req.eps);
    require(!interior.empty(), "estimate_moments: eps leaves no interior nodes");
    const double cap = dt_max(basis, cov, lambda, sigma.slope_high());
    require(req.dt_target > 0.0 && req.dt_target <= cap,
            "estimate_moments: dt_target must lie in (0, dt_max], dt_max = " + std::to_string(cap));

    const int T = static_cast<int>(req.t_out.size());
    const int P = static_cast<int>(req.orders.size());
    const int B = req.n_batches;

    // Per-batch log of the sample mean of |u(x_j)|^p, indexed [t][order][node][batch].
    std::vector<double> batch_log(static_cast<size_t>(T) * P * n * B, kNaN);
    auto slot = [&](int i, int pi, int j, int b) -> double& {
        return batch_log[((static_cast<size_t>(i) * P + pi) * n + j) * B + b];
    };

    MomentTable table;
    std::vector<char> blown(req.n_paths, 0);
    const Eigen::ArrayXd decay_base = basis.mu.array();
    const int base = req.n_paths / B, rem = req.n_paths % B;
    std::uint64_t first_path = 0;
    for (int b = 0; b < B; ++b) {
        const int Pb = base + (b < rem ? 1 : 0);
        Eigen::MatrixXd U = u0.replicate(1, Pb);
        Eigen::MatrixXd Xi(n, Pb), dW(n, Pb);
        double t_prev = 0.0;
        std::uint64_t step_index = 0;
        for (int i = 0; i < T; ++i) {
            const double span = req.t_out[i] - t_prev;
            const long n_steps = std::max(1L, static_cast<long>(std::ceil(span / req.dt_target - 1e-12)));
            const double dt = span / n_steps;
            const Eigen::ArrayXd decay = (-decay_base * dt).exp();
            for (long s = 0; s < n_steps; ++s) {
                if (lambda != 0.0) {
                    // Same stream keying as the single-path solver, so batch
                    // estimates agree with per-path runs up to rounding.
                    for (int c = 0; c < Pb; ++c) {
                        RngStream rng(req.master_seed, first_path + c, step_index);
                        rng.fill_normal(Xi.col(c));
                    }
                    if (cov.model.kind == CovarianceModel::Kind::white) {
                        dW.noalias() = cov.L.diagonal().asDiagonal() * Xi;
                    } else {
                        dW.noalias() = cov.L.triangularView<Eigen::Lower>() * Xi;
                    }
                    dW *= std::sqrt(dt);
                    apply_sigma_increment(sigma, lambda, dW, U);
                }
                Eigen::MatrixXd A = grid.h * (basis.phi * U);
                A.array().colwise() *= decay;
                U.noalias() = basis.phi.transpose() * A;
                ++step_index;
            }
            for (int c = 0; c < Pb; ++c) {
                if (!U.col(c).allFinite()) {
                    // Poison the whole column; later snapshots inherit the NaNs.
                    if (U.col(c).array().isFinite().any()) U.col(c).setConstant(kNaN);
                    const auto pid = static_cast<size_t>(first_path) + c;
                    if (!blown[pid]) {
                        blown[pid] = 1;
                        ++table.n_blowups;
                    }
                }
            }
            const Eigen::ArrayXXd logu = U.array().abs().log();
            for (int pi = 0; pi < P; ++pi) {
                const Eigen::ArrayXXd plogu = req.orders[pi] * logu;
                for (int j = 0; j < n; ++j)
                    slot(i, pi, j, b) = log_sum_exp_row(plogu, j) - std::log(static_cast<double>(Pb));
            }
            t_prev = req.t_out[i];
        }
        first_path += Pb;
    }

    std::vector<double> logs(B), est(n), se(n);
    for (int i = 0; i < T; ++i) {
        for (int pi = 0; pi < P; ++pi) {
            for (int j = 0; j < n; ++j) {
                for (int b = 0; b < B; ++b) logs[b] = slot(i, pi, j, b);
                combine_batches(logs, est[j], se[j]);
            }
            MomentRow row;
            row.t = req.t_out[i];
            row.p = req.orders[pi];
            row.lambda = lambda;
            row.n_paths = req.n_paths;
            for (int j : req.probe_nodes) {
                row.aggregate = "node";
                row.x = grid.x[j];
                row.estimate = est[j];
                row.stderr_ = se[j];
                table.rows.push_back(row);
            }
            int j_sup = 0, j_inf = interior.front();
            bool poisoned = false;
            for (int j = 0; j < n; ++j) {
                if (std::isnan(est[j])) { poisoned = true; break; }
                if (est[j] > est[j_sup]) j_sup = j;
            }
            for (int j : interior)
                if (!poisoned && est[j] < est[j_inf]) j_inf = j;
            row.aggregate = "sup_D";
            row.x = poisoned ? kNaN : grid.x[j_sup];
            row.estimate = poisoned ? kNaN : est[j_sup];
            row.stderr_ = poisoned ? kNaN : se[j_sup];
            table.rows.push_back(row);
            row.aggregate = "inf_D_eps";
            row.x = poisoned ? kNaN : grid.x[j_inf];
            row.estimate = poisoned ? kNaN : est[j_inf];
            row.stderr_ = poisoned ? kNaN : se[j_inf];
            table.rows.push_back(row);
        }
    }
    return table;
}

ExponentFit lyapunov_fit(const std::vector<double>& ts, const std::vector<double>& values) {
    require(ts.size() == values.size() && ts.size() >= 2,
            "lyapunov_fit: need matching grids with >= 2 points");
    std::vector<double> logs(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
        if (!(std::isfinite(values[i]) && values[i] > 0.0))
            throw NumericError("lyapunov_fit: nonpositive or non-finite value in fit window");
        logs[i] = std::log(values[i]);
    }
    const LineFit lf = fit_line(ts, logs);
    ExponentFit f;
    f.rate = lf.slope;
    f.intercept = lf.intercept;
    f.r2 = lf.r2;
    f.t_lo = ts.front();
    f.t_hi = ts.back();
    f.n_used = lf.n;
    return f;
}

double lower_fit_window_start(double alpha, double lambda) {
    require(alpha > 1.0, "lower_fit_window_start: needs alpha > 1");
    require(lambda > 0.0, "lower_fit_window_start: needs lambda > 0");
    return 2.0 * std::pow(lambda, -2.0 * alpha / (alpha - 1.0));
}

namespace {

// Growth rate of the renewal solution v on the self-similar window
// (0, 32 lambda^(-q)], fitted on the upper fifteen sixteenths where the
// transient from the forcing has died out.
double renewal_rate(const ScalarKernel& kern, double lambda, int k_steps, double q_exp,
                    bool dirichlet_forcing) {
    require(k_steps >= 64, "excitation probe: need at least 64 renewal steps");
    const double T = 32.0 * std::pow(lambda, -q_exp);
    const double dt = T / k_steps;
    std::vector<double> ts(k_steps), g(k_steps);
    for (int k = 0; k < k_steps; ++k) {
        ts[k] = (k + 1) * dt;
        if (dirichlet_forcing) {
            const double s = heat_survival(ts[k], 0.0);
            g[k] = s * s;
        } else {
            g[k] = 1.0;
        }
    }
    const std::vector<double> v = scalar_renewal_solve(kern, lambda * lambda, g, ts);
    std::vector<double> xs, ys;
    for (int k = 0; k < k_steps; ++k) {
        if (ts[k] < T / 16.0 - 1e-12 * T) continue;
        if (!(std::isfinite(v[k]) && v[k] > 0.0))
            throw NumericError("excitation probe: renewal solution left (0, inf) in fit window");
        xs.push_back(ts[k]);
        ys.push_back(std::log(v[k]));
    }
    return fit_line(xs, ys).slope;
}

} // namespace

ExcitationProbe excitation_probe_white(const std::vector<double>& lambdas, int k_steps) {
    require(lambdas.size() >= 2, "excitation_probe_white: need at least two couplings");
    ExcitationProbe probe;
    probe.alpha = 2.0;
    probe.beta_eff = 1.0;
    probe.mu1 = 0.25 * kPi * kPi;
    const ScalarKernel kern = ScalarKernel::heat_diagonal(0.0);
    for (double lambda : lambdas) {
        require(lambda > 1.0, "excitation_probe_white: couplings must exceed 1");
        probe.lambdas.push_back(lambda);
        probe.rates.push_back(renewal_rate(kern, lambda, k_steps, 4.0, true));
    }
    return probe;
}

ExcitationProbe excitation_probe_free(double alpha, double beta,
                                      const std::vector<double>& lambdas, int k_steps,
                                      double mu1) {
    require(lambdas.size() >= 2, "excitation_probe_free: need at least two couplings");
    require(mu1 > 0.0, "excitation_probe_free: mu1 must be positive");
    ExcitationProbe probe;
    probe.alpha = alpha;
    probe.mu1 = mu1;
    PowerKernel pk;
    if (beta == 0.0) {
        pk = free_collision_white(alpha);
        probe.beta_eff = 1.0;
    } else {
        pk = free_collision_riesz(beta);
        probe.beta_eff = beta;
    }
    const double q_exp = 2.0 * alpha / (alpha - probe.beta_eff);
    const ScalarKernel kern = ScalarKernel::power_law(pk.c, pk.gamma);
    for (double lambda : lambdas) {
        require(lambda > 1.0, "excitation_probe_free: couplings must exceed 1");
        probe.lambdas.push_back(lambda);
        // The free-space rate; subtracting 2 mu1 restates it in the Dirichlet
        // convention shared with the theta-kernel probe.
        probe.rates.push_back(renewal_rate(kern, lambda, k_steps, q_exp, false) - 2.0 * mu1);
    }
    return probe;
}

ExcitationFit excitation_index(const ExcitationProbe& probe) {
    require(probe.lambdas.size() == probe.rates.size() && probe.lambdas.size() >= 4,
            "excitation_index: need at least four couplings");
    ExcitationFit fit;
    for (size_t i = 0; i < probe.lambdas.size(); ++i) {
        const double normalized = 0.5 * (probe.rates[i] + 2.0 * probe.mu1);
        if (!(normalized > 0.0))
            throw NumericError("excitation_index: rate not above the -2 mu1 decay floor");
        fit.log_lambda.push_back(std::log(probe.lambdas[i]));
        fit.log_rate.push_back(std::log(normalized));
    }
    const LineFit lf = fit_line(fit.log_lambda, fit.log_rate);
    fit.index = lf.slope;
    fit.r2 = lf.r2;
    return fit;
}

CalibrationResult space_independent_calibration(const SpectralBasis& basis, int k0,
                                                double lambda,
                                                const std::vector<double>& t_grid,
                                                int n_paths, int n_batches,
                                                std::uint64_t master_seed) {
    require(k0 >= 1 && k0 <= basis.n_modes(), "calibration: mode index out of range");
    require(!t_grid.empty() && t_grid.front() > 0.0, "calibration: times must be positive");
    for (size_t i = 1; i < t_grid.size(); ++i)
        require(t_grid[i] > t_grid[i - 1], "calibration: times must be strictly increasing");
    require(n_paths >= 100, "calibration: need at least 100 paths");
    require(n_batches >= 2 && n_batches <= n_paths, "calibration: n_batches must lie in [2, n_paths]");

    const double mu = basis.mu[k0 - 1];
    const int T = static_cast<int>(t_grid.size());
    const int B = n_batches;

    CalibrationResult res;
    res.ts = t_grid;
    res.target = lambda * lambda - 2.0 * mu;

    // One scalar Brownian path per sample: ||u_t||^2 = exp(2 lambda W_t
    // - (lambda^2 + 2 mu) t), sampled exactly at the output times.
    std::vector<std::vector<double>> batch_logs(B, std::vector<double>(T));
    const int base = n_paths / B, rem = n_paths % B;
    std::uint64_t path = 0;
    Eigen::VectorXd xi(T);
    for (int b = 0; b < B; ++b) {
        const int Pb = base + (b < rem ? 1 : 0);
        std::vector<double> m(T, kNegInf), s(T, 0.0);
        std::vector<std::vector<double>> logs(T, std::vector<double>(Pb));
        for (int c = 0; c < Pb; ++c, ++path) {
            RngStream rng(master_seed, path, 0);
            rng.fill_normal(xi);
            double w = 0.0, t_prev = 0.0;
            for (int i = 0; i < T; ++i) {
                w += std::sqrt(t_grid[i] - t_prev) * xi[i];
                t_prev = t_grid[i];
                logs[i][c] = 2.0 * lambda * w - (lambda * lambda + 2.0 * mu) * t_grid[i];
                m[i] = std::max(m[i], logs[i][c]);
            }
        }
        for (int i = 0; i < T; ++i) {
            double acc = 0.0;
            for (int c = 0; c < Pb; ++c) acc += std::exp(logs[i][c] - m[i]);
            batch_logs[b][i] = m[i] + std::log(acc) - std::log(static_cast<double>(Pb));
        }
    }

    res.mc.resize(T);
    res.stderr_.resize(T);
    std::vector<double> logs_b(B);
    for (int i = 0; i < T; ++i) {
        for (int b = 0; b < B; ++b) logs_b[b] = batch_logs[b][i];
        combine_batches(logs_b, res.mc[i], res.stderr_[i]);
    }
    res.analytic.resize(T);
    for (int i = 0; i < T; ++i) res.analytic[i] = std::exp(res.target * t_grid[i]);

    res.fit = lyapunov_fit(t_grid, res.mc);
    std::vector<double> slopes(B);
    for (int b = 0; b < B; ++b) slopes[b] = fit_line(t_grid, batch_logs[b]).slope;
    double sm = 0.0;
    for (double v : slopes) sm += v;
    sm /= B;
    double sv = 0.0;
    for (double v : slopes) sv += (v - sm) * (v - sm);
    res.rate_se = (B > 1) ? std::sqrt(sv / (B - 1) / B) : 0.0;
    return res;
}

} // namespace fsheat
