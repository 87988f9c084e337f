#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fsheat/errors.hpp"
#include "fsheat/heatkernel.hpp"
#include "fsheat/moments.hpp"
#include "fsheat/noise.hpp"
#include "fsheat/report.hpp"
#include "fsheat/secondmoment.hpp"
#include "fsheat/solver.hpp"
#include "fsheat/spectral.hpp"

namespace {

using namespace fsheat;
using nlohmann::json;

struct ExperimentConfig {
    double alpha = 2.0;
    int n_cells = 64;
    int n_modes = 0; // 0 = one mode per cell
    std::string noise = "white";
    std::string sigma = "linear";
    std::string u0 = "const:1";
    std::vector<double> lambdas = {1.0};
    std::vector<double> ts = {0.1, 0.25, 0.5};
    std::vector<int> ps = {2};
    int n_paths = 2000;
    int n_batches = 20;
    std::uint64_t seed = 1;
    double eps = 0.25;
    double delta = 0.1;
    double dt = 2e-3;
    std::string out = "out";
    std::string task = "all";

    int modes_effective() const { return n_modes > 0 ? std::min(n_modes, n_cells) : n_cells; }

    json to_json() const {
        json j;
        j["alpha"] = alpha;
        j["cells"] = n_cells;
        j["modes"] = n_modes;
        j["noise"] = noise;
        j["sigma"] = sigma;
        j["u0"] = u0;
        j["lambda"] = lambdas;
        j["t"] = ts;
        j["p"] = ps;
        j["paths"] = n_paths;
        j["batches"] = n_batches;
        j["seed"] = seed;
        j["eps"] = eps;
        j["delta"] = delta;
        j["dt"] = dt;
        j["out"] = out;
        j["task"] = task;
        return j;
    }

    static ExperimentConfig from_json(const json& j) {
        static const std::set<std::string> known = {
            "alpha", "cells", "modes", "noise", "sigma", "u0",    "lambda", "t",
            "p",     "paths", "batches", "seed", "eps",   "delta", "dt",    "out", "task"};
        for (const auto& [key, _] : j.items())
            if (!known.count(key)) throw ConfigError("config: unknown key '" + key + "'");
        ExperimentConfig c;
        c.alpha = j.value("alpha", c.alpha);
        c.n_cells = j.value("cells", c.n_cells);
        c.n_modes = j.value("modes", c.n_modes);
        c.noise = j.value("noise", c.noise);
        c.sigma = j.value("sigma", c.sigma);
        c.u0 = j.value("u0", c.u0);
        c.lambdas = j.value("lambda", c.lambdas);
        c.ts = j.value("t", c.ts);
        c.ps = j.value("p", c.ps);
        c.n_paths = j.value("paths", c.n_paths);
        c.n_batches = j.value("batches", c.n_batches);
        c.seed = j.value("seed", c.seed);
        c.eps = j.value("eps", c.eps);
        c.delta = j.value("delta", c.delta);
        c.dt = j.value("dt", c.dt);
        c.out = j.value("out", c.out);
        c.task = j.value("task", c.task);
        return c;
    }

    void validate() const {
        require(alpha > 1.0 && alpha <= 2.0, "config: alpha must lie in (1, 2]");
        require(n_cells >= 8, "config: cells must be >= 8");
        require(n_modes >= 0 && n_modes <= n_cells, "config: modes must lie in [0, cells]");
        require(!lambdas.empty(), "config: need at least one lambda");
        require(!ts.empty() && ts.front() > 0.0, "config: times must be positive");
        for (size_t i = 1; i < ts.size(); ++i)
            require(ts[i] > ts[i - 1], "config: times must be strictly increasing");
        require(!ps.empty(), "config: need at least one moment order");
        for (int p : ps) require(p >= 2, "config: moment orders must be >= 2");
        require(n_paths >= 100, "config: paths must be >= 100");
        require(n_batches >= 2 && n_batches <= n_paths, "config: batches must lie in [2, paths]");
        require(eps > 0.0 && eps < 0.5, "config: eps must lie in (0, 1/2)");
        require(delta > 0.0 && delta < 2.0, "config: delta must lie in (0, 2)");
        require(dt > 0.0, "config: dt must be positive");
        require(!out.empty(), "config: output directory must be set");
        const CovarianceModel m = CovarianceModel::parse(noise);
        require(dalang_condition(m, alpha, 1),
                "config: Dalang condition fails for noise '" + noise + "' at alpha = " +
                    std::to_string(alpha));
        SigmaSpec::parse(sigma);
        InitialCondition::parse(u0);
    }
};

// One bound variable per flag plus its option handle, so a config file can be
// loaded first and explicitly passed flags applied on top.
struct FlagSet {
    ExperimentConfig v;
    std::string config_path;
    std::map<std::string, CLI::Option*> opt;

    void add_to(CLI::App* sub) {
        opt["config"] = sub->add_option("--config", config_path, "JSON config file; flags override its values");
        opt["alpha"] = sub->add_option("--alpha", v.alpha, "fractional order in (1, 2]");
        opt["noise"] = sub->add_option("--noise", v.noise, "noise spec: white | riesz:beta");
        opt["sigma"] = sub->add_option("--sigma", v.sigma, "sigma spec: linear | pinched:l,L | const:c");
        opt["u0"] = sub->add_option("--u0", v.u0, "initial data: const:c | eigen1 | bump:eps,level");
        opt["lambda"] = sub->add_option("--lambda", v.lambdas, "coupling list")->delimiter(',');
        opt["t"] = sub->add_option("--t", v.ts, "output times")->delimiter(',');
        opt["p"] = sub->add_option("--p", v.ps, "moment orders")->delimiter(',');
        opt["paths"] = sub->add_option("--paths", v.n_paths, "Monte Carlo paths");
        opt["batches"] = sub->add_option("--batches", v.n_batches, "batches for error bars");
        opt["seed"] = sub->add_option("--seed", v.seed, "master seed");
        opt["eps"] = sub->add_option("--eps", v.eps, "interior margin in (0, 1/2)");
        opt["delta"] = sub->add_option("--delta", v.delta, "correlation-bound rate slack in (0, 2)");
        opt["cells"] = sub->add_option("--cells", v.n_cells, "grid cells");
        opt["modes"] = sub->add_option("--modes", v.n_modes, "spectral modes (0 = cells)");
        opt["dt"] = sub->add_option("--dt", v.dt, "time-step target");
        opt["out"] = sub->add_option("--out", v.out, "run directory");
        opt["task"] = sub->add_option("--task", v.task,
                                      "oracle task: all | second_moment | chaos | gronwall | "
                                      "simplex | excitation | calibration");
    }

    ExperimentConfig resolve() const {
        ExperimentConfig cfg;
        if (opt.at("config")->count() > 0) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("config: cannot open " + config_path);
            json j;
            try {
                in >> j;
            } catch (const json::exception& e) {
                throw ConfigError(std::string("config: invalid JSON: ") + e.what());
            }
            cfg = ExperimentConfig::from_json(j);
        }
        auto passed = [&](const char* name) { return opt.at(name)->count() > 0; };
        if (passed("alpha")) cfg.alpha = v.alpha;
        if (passed("noise")) cfg.noise = v.noise;
        if (passed("sigma")) cfg.sigma = v.sigma;
        if (passed("u0")) cfg.u0 = v.u0;
        if (passed("lambda")) cfg.lambdas = v.lambdas;
        if (passed("t")) cfg.ts = v.ts;
        if (passed("p")) cfg.ps = v.ps;
        if (passed("paths")) cfg.n_paths = v.n_paths;
        if (passed("batches")) cfg.n_batches = v.n_batches;
        if (passed("seed")) cfg.seed = v.seed;
        if (passed("eps")) cfg.eps = v.eps;
        if (passed("delta")) cfg.delta = v.delta;
        if (passed("cells")) cfg.n_cells = v.n_cells;
        if (passed("modes")) cfg.n_modes = v.n_modes;
        if (passed("dt")) cfg.dt = v.dt;
        if (passed("out")) cfg.out = v.out;
        if (passed("task")) cfg.task = v.task;
        cfg.validate();
        return cfg;
    }
};

SpectralBasis make_basis(const ExperimentConfig& cfg) {
    const Grid1D grid = Grid1D::make(cfg.n_cells);
    if (cfg.alpha == 2.0) return exact_basis_interval(grid, cfg.modes_effective());
    return numeric_basis(cfg.alpha, grid, cfg.modes_effective());
}

std::vector<int> probe_nodes(const Grid1D& grid) {
    std::vector<int> nodes;
    for (double x : {-0.5, 0.0, 0.5}) {
        const int j = grid.nearest_node(x);
        if (std::find(nodes.begin(), nodes.end(), j) == nodes.end()) nodes.push_back(j);
    }
    return nodes;
}

struct RunContext {
    ExperimentConfig cfg;
    RunRecord rec;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    explicit RunContext(ExperimentConfig c, const std::string& command) : cfg(std::move(c)) {
        std::filesystem::create_directories(cfg.out);
        rec.command = command;
        rec.seed = cfg.seed;
        rec.config = cfg.to_json();
        std::ofstream out(cfg.out + "/config.json", std::ios::binary);
        if (!out) throw ConfigError("cannot write " + cfg.out + "/config.json");
        out << rec.config.dump(2) << '\n';
        out.close();
        rec.add_artifact(cfg.out, "config.json");
    }

    void finish() {
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rec.write(cfg.out);
        std::cout << "run record: " << cfg.out << "/run.json (" << rec.manifest.size()
                  << " artifacts, " << CsvWriter::num(rec.wall_seconds) << " s)\n";
    }
};

double clamped_dt(const ExperimentConfig& cfg, const SpectralBasis& basis,
                  const SpatialCovariance& cov, double lambda, double slope) {
    return std::min(cfg.dt, 0.9 * dt_max(basis, cov, lambda, slope));
}

int cmd_simulate(const ExperimentConfig& cfg) {
    RunContext ctx(cfg, "simulate");
    const SpectralBasis basis = make_basis(cfg);
    const SpatialCovariance cov = build_covariance(CovarianceModel::parse(cfg.noise), basis.grid);
    const SigmaSpec sigma = SigmaSpec::parse(cfg.sigma);
    const Eigen::VectorXd u0 = InitialCondition::parse(cfg.u0).values(basis);
    const std::vector<int> probes = probe_nodes(basis.grid);
    const int j0 = basis.grid.nearest_node(0.0);

    CsvWriter csv({"t", "x", "p", "lambda", "estimate", "stderr", "n_paths", "aggregate"});
    json fits = json::array();
    std::vector<SvgSeries> curves;
    for (double lambda : cfg.lambdas) {
        MomentRequest req;
        req.t_out = cfg.ts;
        req.orders = cfg.ps;
        req.probe_nodes = probes;
        req.eps = cfg.eps;
        req.n_paths = cfg.n_paths;
        req.n_batches = cfg.n_batches;
        req.dt_target = clamped_dt(cfg, basis, cov, lambda, sigma.slope_high());
        req.master_seed = cfg.seed;
        const MomentTable table = estimate_moments(basis, cov, sigma, u0, lambda, req);
        ctx.rec.n_blowups += table.n_blowups;
        ctx.rec.constants["dt_effective.lambda=" + CsvWriter::num(lambda)] = req.dt_target;
        for (const MomentRow& r : table.rows)
            csv.add_row({CsvWriter::num(r.t), CsvWriter::num(r.x), std::to_string(r.p),
                         CsvWriter::num(r.lambda), CsvWriter::num(r.estimate),
                         CsvWriter::num(r.stderr_), CsvWriter::num(r.n_paths), r.aggregate});
        for (int p : cfg.ps) {
            for (const std::string& agg : {std::string("sup_D"), std::string("node")}) {
                std::vector<double> vals;
                bool usable = true;
                for (double t : cfg.ts) {
                    const MomentRow* r = table.find(t, p, agg, basis.grid.x[j0]);
                    usable = usable && r && std::isfinite(r->estimate) && r->estimate > 0.0;
                    if (r) vals.push_back(r->estimate);
                }
                json f;
                f["lambda"] = lambda;
                f["p"] = p;
                f["aggregate"] = agg;
                f["defined"] = usable && vals.size() >= 2;
                if (f["defined"].get<bool>()) {
                    const ExponentFit fit = lyapunov_fit(cfg.ts, vals);
                    f["rate"] = fit.rate;
                    f["intercept"] = fit.intercept;
                    f["r2"] = fit.r2;
                    f["window"] = {fit.t_lo, fit.t_hi};
                    f["n_used"] = fit.n_used;
                    if (agg == "sup_D")
                        ctx.rec.constants["rate.sup_D.p=" + std::to_string(p) +
                                          ".lambda=" + CsvWriter::num(lambda)] = fit.rate;
                }
                fits.push_back(f);
                if (agg == "sup_D" && p == cfg.ps.front()) {
                    SvgSeries s;
                    s.label = "lambda=" + CsvWriter::num(lambda);
                    for (size_t i = 0; i < vals.size(); ++i) {
                        s.x.push_back(cfg.ts[i]);
                        s.y.push_back(vals[i] > 0.0 ? std::log(vals[i])
                                                    : std::numeric_limits<double>::quiet_NaN());
                    }
                    curves.push_back(std::move(s));
                }
            }
        }
    }
    csv.write(cfg.out + "/moments.csv");
    ctx.rec.add_artifact(cfg.out, "moments.csv");
    std::ofstream fj(cfg.out + "/fits.json", std::ios::binary);
    fj << fits.dump(2) << '\n';
    fj.close();
    ctx.rec.add_artifact(cfg.out, "fits.json");
    write_svg_lines(cfg.out + "/moments.svg",
                    "sup-norm moment growth (p = " + std::to_string(cfg.ps.front()) + ")", "t",
                    "log E sup |u|^p", curves);
    ctx.rec.add_artifact(cfg.out, "moments.svg");
    if (ctx.rec.n_blowups > 0)
        std::cout << "blow-ups: " << ctx.rec.n_blowups << " of " << cfg.n_paths << " paths\n";
    ctx.finish();
    return 0;
}

void oracle_second_moment(RunContext& ctx, const SpectralBasis& basis,
                          const SpatialCovariance& cov) {
    const ExperimentConfig& cfg = ctx.cfg;
    const SigmaSpec sigma = SigmaSpec::parse(cfg.sigma);
    require(sigma.kind == SigmaSpec::Kind::linear,
            "oracle: the deterministic second-moment solvers need sigma = linear");
    const Eigen::VectorXd u0 = InitialCondition::parse(cfg.u0).values(basis);
    const double lambda = cfg.lambdas.front();
    const bool pairs = cov.model.kind != CovarianceModel::Kind::white && cfg.n_cells <= 128;
    const SecondMomentField field =
        solve_second_moment(basis, cov, lambda, 1.0, u0, cfg.ts, cfg.dt, pairs);
    const std::vector<int> probes = probe_nodes(basis.grid);

    CsvWriter csv({"t", "x", "w", "second_moment"});
    for (size_t i = 0; i < field.times.size(); ++i)
        for (int jx : probes) {
            if (pairs) {
                for (int jw : probes)
                    csv.add_row({CsvWriter::num(field.times[i]), CsvWriter::num(basis.grid.x[jx]),
                                 CsvWriter::num(basis.grid.x[jw]),
                                 CsvWriter::num(field.pair_values[i](jx, jw))});
            } else {
                csv.add_row({CsvWriter::num(field.times[i]), CsvWriter::num(basis.grid.x[jx]),
                             CsvWriter::num(basis.grid.x[jx]),
                             CsvWriter::num(field.second_moment(i, jx))});
            }
        }
    csv.write(cfg.out + "/second_moment.csv");
    ctx.rec.add_artifact(cfg.out, "second_moment.csv");
}

void oracle_chaos(RunContext& ctx, const SpectralBasis& basis, const SpatialCovariance& cov) {
    const ExperimentConfig& cfg = ctx.cfg;
    const Eigen::VectorXd u0 = InitialCondition::parse(cfg.u0).values(basis);
    const double lambda = cfg.lambdas.front();
    const auto terms = picard_chaos_terms(basis, cov, lambda, 1.0, u0, cfg.ts, cfg.dt, 6);
    const std::vector<int> probes = probe_nodes(basis.grid);
    CsvWriter csv({"order", "t", "x", "second_moment"});
    for (const ChaosTerm& term : terms)
        for (size_t i = 0; i < term.times.size(); ++i)
            for (int jx : probes)
                csv.add_row({std::to_string(term.order), CsvWriter::num(term.times[i]),
                             CsvWriter::num(basis.grid.x[jx]),
                             CsvWriter::num(term.second_moment(i, jx))});
    csv.write(cfg.out + "/chaos.csv");
    ctx.rec.add_artifact(cfg.out, "chaos.csv");
}

void oracle_gronwall(RunContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    std::vector<double> grid;
    for (int i = 1; i <= 100; ++i) grid.push_back(0.05 * i);
    json reports = json::array();
    for (double rho : {0.5, 2.0 / 3.0, 1.0}) {
        for (BoundDirection dir : {BoundDirection::lower, BoundDirection::upper}) {
            const GronwallReport r = gronwall_verify(rho, 1.0, 1.0, grid, dir);
            json j;
            j["rho"] = r.rho;
            j["k"] = r.k;
            j["c1"] = r.c1;
            j["direction"] = (dir == BoundDirection::lower) ? "lower" : "upper";
            j["max_residual"] = r.max_residual;
            j["rate_fit"] = r.rate_fit;
            j["c2_fit"] = r.c2_fit;
            j["c3_fit"] = r.c3_fit;
            j["threshold"] = r.threshold;
            j["window_ok"] = r.window_ok;
            reports.push_back(j);
        }
    }
    std::ofstream out(cfg.out + "/gronwall.json", std::ios::binary);
    out << reports.dump(2) << '\n';
    out.close();
    ctx.rec.add_artifact(cfg.out, "gronwall.json");
}

void oracle_simplex(RunContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    CsvWriter csv({"n", "a", "b", "t", "value"});
    const double cases[][4] = {
        {1, 0.0, 0.5, 1.0}, {1, 0.5, 0.5, 1.0},  {2, 0.0, 0.5, 1.0},  {2, 0.25, 0.5, 2.0},
        {3, 0.5, 0.25, 1.0}, {4, 0.25, 0.25, 1.5}, {4, 0.5, 0.5, 1.0},
    };
    for (const auto& c : cases) {
        const int n = static_cast<int>(c[0]);
        csv.add_row({std::to_string(n), CsvWriter::num(c[1]), CsvWriter::num(c[2]),
                     CsvWriter::num(c[3]), CsvWriter::num(simplex_integral(n, c[1], c[2], c[3]))});
    }
    csv.write(cfg.out + "/simplex.csv");
    ctx.rec.add_artifact(cfg.out, "simplex.csv");
}

void oracle_excitation(RunContext& ctx) {
    const ExperimentConfig& cfg = ctx.cfg;
    std::vector<double> lams = {8, 16, 32, 64};
    if (cfg.lambdas.size() >= 4 &&
        std::all_of(cfg.lambdas.begin(), cfg.lambdas.end(), [](double l) { return l > 1.0; }))
        lams = cfg.lambdas;
    const int k_steps = 2048;

    CsvWriter csv({"kernel", "lambda", "rate", "normalized"});
    std::vector<SvgSeries> curves;
    auto emit = [&](const char* name, const ExcitationProbe& probe) {
        const ExcitationFit fit = excitation_index(probe);
        SvgSeries s;
        s.label = name;
        for (size_t i = 0; i < probe.lambdas.size(); ++i) {
            csv.add_row({name, CsvWriter::num(probe.lambdas[i]), CsvWriter::num(probe.rates[i]),
                         CsvWriter::num(0.5 * (probe.rates[i] + 2.0 * probe.mu1))});
            s.x.push_back(fit.log_lambda[i]);
            s.y.push_back(fit.log_rate[i]);
        }
        curves.push_back(std::move(s));
        ctx.rec.constants[std::string("excitation_index.") + name] = fit.index;
    };
    emit("white", excitation_probe_white(lams, k_steps));
    const CovarianceModel m = CovarianceModel::parse(cfg.noise);
    if (m.kind == CovarianceModel::Kind::riesz) {
        const double mu1 = 0.25 * 3.14159265358979323846 * 3.14159265358979323846;
        emit("riesz", excitation_probe_free(2.0, m.beta, lams, k_steps, mu1));
    }
    csv.write(cfg.out + "/excitation.csv");
    ctx.rec.add_artifact(cfg.out, "excitation.csv");
    write_svg_lines(cfg.out + "/excitation.svg", "renewal growth rate vs coupling", "log lambda",
                    "log normalized rate", curves);
    ctx.rec.add_artifact(cfg.out, "excitation.svg");
}

void oracle_calibration(RunContext& ctx, const SpectralBasis& basis) {
    const ExperimentConfig& cfg = ctx.cfg;
    const CalibrationResult cal = space_independent_calibration(
        basis, 1, cfg.lambdas.front(), cfg.ts, cfg.n_paths, cfg.n_batches, cfg.seed);
    CsvWriter csv({"t", "mc", "stderr", "analytic"});
    for (size_t i = 0; i < cal.ts.size(); ++i)
        csv.add_row({CsvWriter::num(cal.ts[i]), CsvWriter::num(cal.mc[i]),
                     CsvWriter::num(cal.stderr_[i]), CsvWriter::num(cal.analytic[i])});
    csv.write(cfg.out + "/calibration.csv");
    ctx.rec.add_artifact(cfg.out, "calibration.csv");
    ctx.rec.constants["calibration.rate"] = cal.fit.rate;
    ctx.rec.constants["calibration.rate_se"] = cal.rate_se;
    ctx.rec.constants["calibration.target"] = cal.target;
}

int cmd_oracle(const ExperimentConfig& cfg) {
    static const std::set<std::string> tasks = {"all",     "second_moment", "chaos",      "gronwall",
                                                "simplex", "excitation",    "calibration"};
    require(tasks.count(cfg.task) > 0, "oracle: unknown task '" + cfg.task + "'");
    RunContext ctx(cfg, "oracle");
    const SpectralBasis basis = make_basis(cfg);
    const SpatialCovariance cov = build_covariance(CovarianceModel::parse(cfg.noise), basis.grid);
    auto want = [&](const char* t) { return cfg.task == "all" || cfg.task == t; };
    if (want("second_moment")) oracle_second_moment(ctx, basis, cov);
    if (want("chaos")) oracle_chaos(ctx, basis, cov);
    if (want("gronwall")) oracle_gronwall(ctx);
    if (want("simplex")) oracle_simplex(ctx);
    if (want("excitation")) oracle_excitation(ctx);
    if (want("calibration")) oracle_calibration(ctx, basis);
    ctx.finish();
    return 0;
}

int cmd_certify(const ExperimentConfig& cfg) {
    RunContext ctx(cfg, "certify");
    const Grid1D grid = Grid1D::make(cfg.n_cells);
    const SpectralBasis basis = numeric_basis(cfg.alpha, grid, cfg.modes_effective());
    const SpatialCovariance cov = build_covariance(CovarianceModel::parse(cfg.noise), grid);
    const KernelEvaluator kernel(basis, basis.n_modes());

    const std::vector<double> t_lattice = default_t_lattice();
    const std::vector<int> nodes = default_node_set(grid, cfg.eps);
    const BoundConstants bc = (cfg.alpha == 2.0) ? fit_gaussian_bound(kernel, t_lattice, nodes)
                                                 : fit_stable_bound(kernel, t_lattice, nodes);
    const CertificationReport rep =
        certify_propositions(kernel, cov, cfg.eps, cfg.delta, t_lattice, nodes);
    const GrowthFit growth = check_eigenvalue_growth(basis);
    const double c_phi = check_first_eigenfunction_bound(basis);

    CsvWriter csv({"quantity", "t", "x", "w", "value", "normalized", "fitted_constant"});
    for (const CertRow& r : rep.rows) {
        const bool lower = r.quantity.find("lower") != std::string::npos;
        const double fitted = rep.constants.at(r.quantity + (lower ? ".min" : ".max"));
        csv.add_row({r.quantity, CsvWriter::num(r.t), CsvWriter::num(r.x), CsvWriter::num(r.w),
                     CsvWriter::num(r.value), CsvWriter::num(r.normalized), CsvWriter::num(fitted)});
    }
    csv.write(cfg.out + "/certification.csv");
    ctx.rec.add_artifact(cfg.out, "certification.csv");

    ctx.rec.constants = rep.constants;
    ctx.rec.constants["sandwich.C"] = bc.C;
    ctx.rec.constants["sandwich.c1"] = bc.c1;
    ctx.rec.constants["sandwich.c2"] = bc.c2;
    ctx.rec.constants["growth.exponent"] = growth.exponent;
    ctx.rec.constants["growth.c_low"] = growth.c_low;
    ctx.rec.constants["growth.c_high"] = growth.c_high;
    ctx.rec.constants["first_eigenfunction.c"] = c_phi;
    ctx.rec.constants["mu1"] = basis.mu1();
    std::cout << "sandwich C = " << CsvWriter::num(bc.C)
              << ", growth exponent = " << CsvWriter::num(growth.exponent)
              << ", phi1 comparison c = " << CsvWriter::num(c_phi) << "\n";
    ctx.finish();
    return 0;
}

int cmd_basis(const ExperimentConfig& cfg) {
    RunContext ctx(cfg, "basis");
    const Grid1D grid = Grid1D::make(cfg.n_cells);
    const SpectralBasis basis = numeric_basis(cfg.alpha, grid, cfg.modes_effective());

    std::vector<std::string> header = {"n", "mu"};
    for (int j = 0; j < grid.n_cells; ++j) header.push_back("phi_at_node_" + std::to_string(j));
    CsvWriter csv(header);
    for (int m = 0; m < basis.n_modes(); ++m) {
        std::vector<std::string> row = {std::to_string(m + 1), CsvWriter::num(basis.mu[m])};
        for (int j = 0; j < grid.n_cells; ++j) row.push_back(CsvWriter::num(basis.phi(m, j)));
        csv.add_row(row);
    }
    csv.write(cfg.out + "/basis.csv");
    ctx.rec.add_artifact(cfg.out, "basis.csv");

    std::vector<SvgSeries> curves;
    for (int m = 0; m < std::min(3, basis.n_modes()); ++m) {
        SvgSeries s;
        s.label = "phi_" + std::to_string(m + 1);
        for (int j = 0; j < grid.n_cells; ++j) {
            s.x.push_back(grid.x[j]);
            s.y.push_back(basis.phi(m, j));
        }
        curves.push_back(std::move(s));
    }
    write_svg_lines(cfg.out + "/eigenfunctions.svg", "leading eigenfunctions", "x", "phi_n(x)",
                    curves);
    ctx.rec.add_artifact(cfg.out, "eigenfunctions.svg");
    ctx.rec.constants["mu1"] = basis.mu1();
    ctx.finish();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fractional stochastic heat equation laboratory"};
    app.require_subcommand(1);
    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo moment estimation");
    CLI::App* ora = app.add_subcommand("oracle", "deterministic second-moment and series oracles");
    CLI::App* cer = app.add_subcommand("certify", "heat-kernel and spectral certification sweeps");
    CLI::App* bas = app.add_subcommand("basis", "export the discretized spectral basis");
    FlagSet f_sim, f_ora, f_cer, f_bas;
    f_sim.add_to(sim);
    f_ora.add_to(ora);
    f_cer.add_to(cer);
    f_bas.add_to(bas);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(f_sim.resolve());
        if (ora->parsed()) return cmd_oracle(f_ora.resolve());
        if (cer->parsed()) return cmd_certify(f_cer.resolve());
        if (bas->parsed()) return cmd_basis(f_bas.resolve());
    } catch (const fsheat::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const fsheat::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const fsheat::PropertyError& e) {
        std::cerr << "property violation: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
