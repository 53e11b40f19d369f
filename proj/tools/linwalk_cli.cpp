// SPDX-License-Identifier: Apache-2.0
//
// Config-driven experiment runner. Every estimator and checker is a
// subcommand; all randomness is pinned by the mandatory seed, and the worker
// count changes wall time only. Outputs: CSV tables plus one JSON summary
// per run.
#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "linwalk/config.hpp"
#include "linwalk/exact_oracle.hpp"
#include "linwalk/harmonic.hpp"
#include "linwalk/perturbed.hpp"
#include "linwalk/suite.hpp"
#include "linwalk/target_measure.hpp"

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using namespace linwalk;

namespace {

constexpr int kSchemaVersion = 1;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "runs";
    std::int64_t seed = -1;
    std::int64_t paths = -1;
    std::int64_t steps = -1;
    std::int64_t dim = -1;
    unsigned workers = 0;
};

struct RunContext {
    KeyValueConfig cfg;
    std::uint64_t seed = 0;
    std::int64_t paths = 10000;
    std::int64_t steps = 10;
    unsigned workers = 1;
    fs::path out = {};
    std::vector<std::string> warnings = {};
};

void add_common(CLI::App* cmd, CommonArgs& args)
{
    cmd->add_option("--config", args.config_path, "key = value experiment config");
    cmd->add_option("--seed", args.seed, "master seed (mandatory here or in the config)");
    cmd->add_option("--paths", args.paths, "Monte Carlo sample count");
    cmd->add_option("--steps", args.steps, "walk horizon n");
    cmd->add_option("--dim", args.dim, "ambient dimension override");
    cmd->add_option("--workers", args.workers, "worker threads (wall time only)");
    cmd->add_option("--out", args.out_dir, "output directory");
}

/// Precedence: flag > config > default.
RunContext make_context(const CommonArgs& args)
{
    RunContext ctx{args.config_path.empty() ? KeyValueConfig::from_string("")
                                            : KeyValueConfig::from_file(args.config_path)};
    if (args.seed >= 0) {
        ctx.cfg.set("seed", std::to_string(args.seed));
    }
    if (args.paths > 0) {
        ctx.cfg.set("walk.paths", std::to_string(args.paths));
    }
    if (args.steps > 0) {
        ctx.cfg.set("walk.n", std::to_string(args.steps));
    }
    if (args.dim > 0) {
        ctx.cfg.set("ensemble.dim", std::to_string(args.dim));
    }
    if (args.workers > 0) {
        ctx.cfg.set("workers", std::to_string(args.workers));
    }
    if (!ctx.cfg.has("seed")) {
        throw_error(ErrorKind::ConfigError, "seed is mandatory (flag --seed or config key 'seed')");
    }
    ctx.seed = static_cast<std::uint64_t>(ctx.cfg.get_int("seed"));
    ctx.paths = ctx.cfg.get_int_or("walk.paths", 10000);
    ctx.steps = ctx.cfg.get_int_or("walk.n", 10);
    ctx.workers = static_cast<unsigned>(ctx.cfg.get_int_or("workers", 1));
    ctx.out = args.out_dir;
    fs::create_directories(ctx.out);
    return ctx;
}

Ensemble load_ensemble(RunContext& ctx, bool allow_center = true)
{
    Ensemble e = Ensemble::build(parse_ensemble_spec(ctx.cfg));
    if (allow_center && ctx.cfg.get_int_or("ensemble.center", 0) != 0) {
        e = center(e, ctx.cfg.get_double_or("ensemble.center_tolerance", 1e-3), ctx.seed ^ 0xCE,
                   ctx.cfg.get_int_or("ensemble.center_steps", 4000),
                   ctx.cfg.get_int_or("ensemble.center_replicas", 64), ctx.workers);
    }
    // Proximality and strong irreducibility have no finite certificate; a
    // runtime diagnostic (top-two singular gap of medium-length products)
    // flags laws where the limit theory's assumptions look violated.
    if (e.dim() >= 2 && ctx.cfg.get_int_or("ensemble.check_proximality", 1) != 0) {
        const double gap = singular_gap_statistic(e, 30, 64, ctx.seed ^ 0xA11);
        if (!(gap > 0.5)) {
            ctx.warnings.push_back(
                "ProximalityDiagnostic: mean top-two singular gap after 30 steps is " +
                std::to_string(gap) + "; the conditioned limit theory assumes a proximal, "
                "strongly irreducible law");
        }
    }
    return e;
}

ProjPoint start_point(const RunContext& ctx, int dim)
{
    if (ctx.cfg.has("walk.x0")) {
        const std::vector<double> v = ctx.cfg.get_vector("walk.x0");
        return ProjPoint(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    return ProjPoint::axis(dim, 0);
}

void write_csv(const fs::path& path, const std::string& header,
               const std::vector<std::vector<double>>& rows)
{
    std::ofstream out(path);
    out << header << '\n';
    out.precision(12);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << row[i];
        }
        out << '\n';
    }
}

class Summary {
  public:
    Summary(RunContext& ctx, const std::string& estimator, const std::string& statement)
        : ctx_(ctx), start_(std::chrono::steady_clock::now())
    {
        data_["schema_version"] = kSchemaVersion;
        data_["estimator"] = estimator;
        data_["statement"] = statement;
        data_["seed"] = ctx.seed;
        name_ = estimator;
    }

    json& inputs() { return data_["inputs"]; }
    json& values() { return data_["results"]; }

    void set_estimate(const WeightedEstimate& est)
    {
        data_["value"] = est.value;
        data_["stderr"] = est.stderr_;
        data_["n_samples"] = est.n_samples;
    }

    void warn(const std::string& message) { ctx_.warnings.push_back(message); }

    int finish(const std::string& status = "ok")
    {
        data_["status"] = status;
        data_["warnings"] = ctx_.warnings;
        data_["wall_time_s"] = std::chrono::duration_cast<std::chrono::duration<double>>(
                                   std::chrono::steady_clock::now() - start_)
                                   .count();
        const fs::path path = ctx_.out / (name_ + ".json");
        std::ofstream out(path);
        out << data_.dump(2) << '\n';
        std::cout << data_.dump(2) << '\n';
        return ctx_.warnings.empty() ? 0 : 2;
    }

    const fs::path& out_dir() const { return ctx_.out; }

  private:
    RunContext& ctx_;
    json data_;
    std::string name_;
    std::chrono::steady_clock::time_point start_;
};

Direction parse_direction(const RunContext& ctx)
{
    const std::string d = ctx.cfg.get_string_or("walk.direction", "plus");
    if (d == "plus") {
        return Direction::Plus;
    }
    if (d == "minus") {
        return Direction::Minus;
    }
    throw_error(ErrorKind::ConfigError, "walk.direction must be plus or minus");
}

std::vector<std::int64_t> int_list(const RunContext& ctx, const std::string& key,
                                   std::vector<std::int64_t> dflt)
{
    if (!ctx.cfg.has(key)) {
        return dflt;
    }
    std::vector<std::int64_t> out;
    for (double v : ctx.cfg.get_vector(key)) {
        out.push_back(static_cast<std::int64_t>(v));
    }
    return out;
}

// ---- subcommand bodies ----

int cmd_lyapunov(const CommonArgs& args)
{
    RunContext ctx = make_context(args);
    const Ensemble e = load_ensemble(ctx, false);
    Summary s(ctx, "lyapunov", "renormalized norm growth converges to the top exponent");
    const std::int64_t replicas = ctx.cfg.get_int_or("lyapunov.replicas", 64);
    const LyapunovEstimate est = estimate_lyapunov(e, ctx.steps, replicas, ctx.seed, ctx.workers);
    s.inputs() = {{"steps", ctx.steps}, {"replicas", replicas}, {"ensemble", e.spec().name}};
    s.set_estimate({est.lambda_hat, est.stderr_, est.replicas, ctx.seed});
    return s.finish();
}

int cmd_center(const CommonArgs& args)
{
    RunContext ctx = make_context(args);
    const Ensemble e = load_ensemble(ctx, false);
    Summary s(ctx, "center", "scalar rescaling shifts the cocycle by a constant");
    const double tol = ctx.cfg.get_double_or("center.tolerance", 1e-3);
    const Ensemble centered = center(e, tol, ctx.seed, ctx.cfg.get_int_or("center.steps", 4000),
                                     ctx.cfg.get_int_or("center.replicas", 64), ctx.workers);
    const LyapunovEstimate post =
        estimate_lyapunov(centered, ctx.cfg.get_int_or("center.steps", 4000), 64, ctx.seed ^ 1,
                          ctx.workers);
    s.inputs() = {{"tolerance", tol}, {"ensemble", e.spec().name}};
    s.values() = {{"scale", centered.scale()}, {"lambda_after", post.lambda_hat},
                  {"lambda_stderr", post.stderr_}};
    s.set_estimate({post.lambda_hat, post.stderr_, post.replicas, ctx.seed});
    return s.finish();
}

int cmd_harmonic(const CommonArgs& args)
{
    RunContext ctx = make_context(args);
    const Ensemble e = load_ensemble(ctx);
    Summary s(ctx, "harmonic", "killed means converge to the harmonic function");
    const ProjPoint x = start_point(ctx, e.dim());
    const double t = ctx.cfg.get_double_or("walk.t", 0.0);
    const WeightedEstimate est = estimate_V(e, x, t, ctx.steps, ctx.paths, parse_direction(ctx),
                                            ctx.seed, ctx.workers);
    s.inputs() = {{"t", t}, {"n", ctx.steps}, {"paths", ctx.paths}, {"ensemble", e.spec().name}};
    // Optional start-direction sweep: the limit depends on the start, so the
    // per-x profile is part of the report.
    const std::int64_t sweep_count = ctx.cfg.get_int_or("harmonic.sweep", 0);
    if (sweep_count >= 2) {
        const UniformitySweep sweep = v_uniformity_sweep(e, t, ctx.steps, ctx.paths, sweep_count,
                                                         parse_direction(ctx), ctx.seed ^ 0x5EED,
                                                         ctx.workers);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < sweep.estimates.size(); ++i) {
            rows.push_back({static_cast<double>(i), sweep.estimates[i].value,
                            sweep.estimates[i].stderr_});
        }
        write_csv(s.out_dir() / "harmonic_sweep.csv", "x_index,value,stderr", rows);
        s.values() = {{"sweep_table", "harmonic_sweep.csv"}, {"sweep_spread", sweep.max_spread},
                      {"sweep_spread_z", sweep.max_spread_z}};
    }
    s.set_estimate(est);
    return s.finish();
}

int cmd_variance(const CommonArgs& args)
{
    RunContext ctx = make_context(args);
    const Ensemble e = load_ensemble(ctx);
    Summary s(ctx, "variance", "normalized squared sums converge to the asymptotic variance");
    const ProjPoint x = start_point(ctx, e.dim());
    const VarianceEstimate est = estimate_variance(e, x, ctx.steps, ctx.paths, ctx.seed, ctx.workers);
    s.inputs() = {{"n", ctx.steps}, {"paths", ctx.paths}, {"ensemble", e.spec().name}};
    s.set_estimate({est.upsilon_sq, est.stderr_, est.n_used, ctx.seed});
    if (est.degenerate) {
        s.warn("DegenerateVariance: estimate below 1e-8; the limit theory needs upsilon > 0");
    }
    return s.finish();
}

int cmd_survival(const CommonArgs& args)
{
    RunContext ctx = make_context(args);
    const Ensemble e = load_ensemble(ctx);
    Summary s(ctx, "survival", "exit-time survival decays polynomially");
    const ProjPoint x = start_point(ctx, e.dim());
    const double t = ctx.cfg.get_double_or("walk.t", 0.0);
    const std::vector<std::int64_t> ns = int_list(ctx, "survival.n_list", {16, 32, 64, 128, 256});
    const SurvivalCurve curve = survival_curve(e, x, t, ns, ctx.paths, ctx.seed, ctx.workers);
    std::vector<std::vector<double>> rows;
    for (const auto& row : curve.rows) {
        rows.push_back({static_cast<double>(row.n), row.survival, row.stderr_});
    }
    write_csv(s.out_dir() / "survival.csv", "n,survival,stderr", rows);
    s.inputs() = {{"t", t}, {"paths", ctx.paths}, {"ensemble", e.spec().name}};
    s.values() = {{"loglog_slope", curve.loglog_slope}, {"slope_stderr", curve.slope_stderr},
                  {"table", "survival.csv"}};
    s.set_estimate({curve.loglog_slope, curve.slope_stderr, ctx.paths, ctx.seed});
    return s.finish();
}

int cmd_rho(const CommonArgs& args)
{
    RunContext ctx = make_context(args);
    const Ensemble e = load_ensemble(ctx);
    Summary s(ctx, "rho", "t-weighted killed distributions converge to the target measure");
    const ProjPoint x = start_point(ctx, e.dim());
    const TestFunction h = parse_test_function(ctx.cfg);
    const WeightedEstimate est = estimate_rho_action(e, x, ctx.steps, ctx.paths, h,
                                                     parse_direction(ctx), ctx.seed, ctx.workers);
    s.inputs() = {{"n", ctx.steps}, {"paths", ctx.paths}, {"phi", h.phi.describe()},
                  {"ensemble", e.spec().name}};
    s.set_estimate(est);
    return s.finish();
}

int cmd_density(const CommonArgs& args)
{
    RunContext ctx = make_context(args);
    const Ensemble e = load_ensemble(ctx);
    Summary s(ctx, "density", "target-measure marginal has a non-decreasing density");
    const ProjPoint x = start_point(ctx, e.dim());
    std::vector<double> grid;
    if (ctx.cfg.has("density.u_grid")) {
        grid = ctx.cfg.get_vector("density.u_grid");
    } else {
        for (int i = 0; i <= 200; ++i) {
            grid.push_back(-20.0 + 0.4 * i);
        }
    }
    const auto rows = density_W(e, x, ctx.steps, ctx.paths, grid, parse_direction(ctx), ctx.seed,
                                ctx.workers);
    std::vector<std::vector<double>> csv;
    for (const auto& row : rows) {
        csv.push_back({row.u, row.w, row.stderr_});
    }
    write_csv(s.out_dir() / "density.csv", "u,w,stderr", csv);
    s.inputs() = {{"n", ctx.steps}, {"paths", ctx.paths}, {"ensemble", e.spec().name}};
    s.values() = {{"table", "density.csv"}, {"grid_points", grid.size()}};
    s.set_estimate({rows.back().w, rows.back().stderr_, ctx.paths, ctx.seed});
    return s.finish();
}

int cmd_harmonicity(const CommonArgs& args)
{
    RunContext ctx = make_context(args);
    const Ensemble e = load_ensemble(ctx);
    Summary s(ctx, "harmonicity", "the target measure is harmonic for the killed transition");
    const ProjPoint x = start_point(ctx, e.dim());
    const TestFunction h = parse_test_function(ctx.cfg);
    const std::int64_t inner = ctx.cfg.get_int_or("harmonicity.inner_draws", 16);
    const WeightedEstimate est = harmonicity_residual(e, x, ctx.steps, ctx.paths, h, inner,
                                                      parse_direction(ctx), ctx.seed, ctx.workers);
    s.inputs() = {{"n", ctx.steps}, {"paths", ctx.paths}, {"inner_draws", inner},
                  {"ensemble", e.spec().name}};
    s.set_estimate(est);
    if (std::abs(est.value) > 3.0 * est.stderr_) {
        s.warn("harmonicity residual beyond 3 stderr");
    }
    return s.finish();
}

int cmd_reversal(const CommonArgs& args)
{
    RunContext ctx = make_context(args);
    const Ensemble e = load_ensemble(ctx);
    Summary s(ctx, "reversal", "killed action equals the reversed-walk integral");
    const ProjPoint x = start_point(ctx, e.dim());
    const TestFunction h = parse_test_function(ctx.cfg);
    const std::int64_t n_y = ctx.cfg.get_int_or("reversal.n_y", 8);
    const ReversalReport rep = reversal_residual(e, x, ctx.steps, ctx.paths, n_y, h, ctx.seed,
                                                 kDefaultStationaryDepth, ctx.workers);
    std::vector<std::vector<double>> csv;
    for (std::size_t j = 0; j < rep.per_y.size(); ++j) {
        csv.push_back({static_cast<double>(j), rep.per_y[j].value, rep.per_y[j].stderr_});
    }
    write_csv(s.out_dir() / "reversal_per_y.csv", "y_index,residual,stderr", csv);
    s.inputs() = {{"n", ctx.steps}, {"paths", ctx.paths}, {"n_y", n_y},
                  {"ensemble", e.spec().name}};
    s.values() = {{"lhs_mean", rep.lhs_mean}, {"rhs_mean", rep.rhs_mean},
                  {"rejected_y", rep.rejected_y}, {"table", "reversal_per_y.csv"}};
    s.set_estimate(rep.pooled);
    return s.finish();
}

int cmd_translation(const CommonArgs& args)
{
    RunContext ctx = make_context(args);
    const Ensemble e = load_ensemble(ctx);
    Summary s(ctx, "translation", "far translates approach the stationary product law");
    const ProjPoint x = start_point(ctx, e.dim());
    const TestFunction h = parse_test_function(ctx.cfg);
    std::vector<double> shifts = ctx.cfg.has("translation.shifts")
                                     ? ctx.cfg.get_vector("translation.shifts")
                                     : std::vector<double>{10.0, 20.0, 50.0};
    const auto rows = translation_profile(e, x, ctx.steps, ctx.paths, h, shifts, ctx.seed,
                                          ctx.cfg.get_int_or("translation.prediction_samples", 20000),
                                          kDefaultStationaryDepth, ctx.workers);
    std::vector<std::vector<double>> csv;
    for (const auto& row : rows) {
        csv.push_back({row.shift, row.ratio, row.stderr_, row.prediction, row.prediction_stderr,
                       row.relative_deviation});
    }
    write_csv(s.out_dir() / "translation.csv",
              "shift,ratio,stderr,prediction,prediction_stderr,relative_deviation", csv);
    s.inputs() = {{"n", ctx.steps}, {"paths", ctx.paths}, {"ensemble", e.spec().name}};
    s.values() = {{"table", "translation.csv"}};
    s.set_estimate({rows.back().ratio, rows.back().stderr_, ctx.paths, ctx.seed});
    return s.finish();
}

int cmd_tail(const CommonArgs& args)
{
    RunContext ctx = make_context(args);
    const Ensemble e = load_ensemble(ctx);
    Summary s(ctx, "tail", "negative-tail mass is finite with exponentially small density");
    const ProjPoint x = start_point(ctx, e.dim());
    const NegativeTailReport rep =
        negative_tail_report(e, x, ctx.steps, ctx.paths, parse_direction(ctx), ctx.seed,
                             ctx.cfg.get_double_or("tail.fit_span", 20.0), ctx.workers);
    s.inputs() = {{"n", ctx.steps}, {"paths", ctx.paths}, {"ensemble", e.spec().name}};
    s.values() = {{"mass", rep.mass}, {"mass_stderr", rep.mass_stderr},
                  {"fit_rate", rep.fit_rate}, {"fit_rate_stderr", rep.fit_rate_stderr},
                  {"fit_points", rep.fit_points}};
    s.set_estimate({rep.mass, rep.mass_stderr, ctx.paths, ctx.seed});
    return s.finish();
}

int cmd_cllt(const CommonArgs& args)
{
    RunContext ctx = make_context(args);
    const Ensemble e = load_ensemble(ctx);
    Summary s(ctx, "cllt", "n^{3/2}-scaled killed expectations approach the limit product");
    const ProjPoint x = start_point(ctx, e.dim());
    const TestFunction h = parse_test_function(ctx.cfg);
    const double t = ctx.cfg.get_double_or("walk.t", 0.0);

    const VarianceEstimate var =
        estimate_variance(e, x, ctx.cfg.get_int_or("cllt.variance_n", 256), ctx.paths,
                          ctx.seed ^ 2, ctx.workers);
    if (var.degenerate) {
        s.warn("DegenerateVariance: cllt ratio undefined for a degenerate walk");
        s.inputs() = {{"t", t}, {"ensemble", e.spec().name}};
        return s.finish("degenerate");
    }
    ClltReferences refs;
    refs.upsilon_sq = var.upsilon_sq;
    const std::int64_t ref_n = ctx.cfg.get_int_or("cllt.reference_n", 512);
    refs.v_hat = estimate_V(e, x, t, ref_n, ctx.paths, Direction::Plus, ctx.seed ^ 3, ctx.workers).value;
    refs.rho_h = estimate_rho_action(e, x, ref_n, ctx.paths, h, Direction::Plus, ctx.seed ^ 4,
                                     ctx.workers).value;
    const std::vector<std::int64_t> ns = int_list(ctx, "cllt.n_list", {100, 200, 400, 800});
    const ClltReport rep = cllt_ratio(e, x, t, ns, ctx.paths, h, refs, ctx.seed, ctx.workers);
    std::vector<std::vector<double>> csv;
    for (const auto& row : rep.rows) {
        csv.push_back({static_cast<double>(row.n), row.ratio, row.stderr_});
    }
    write_csv(s.out_dir() / "cllt.csv", "n,ratio,stderr", csv);
    s.inputs() = {{"t", t}, {"paths", ctx.paths}, {"ensemble", e.spec().name}};
    s.values() = {{"upsilon_sq", refs.upsilon_sq}, {"v_hat", refs.v_hat}, {"rho_h", refs.rho_h},
                  {"trend_slope", rep.trend_slope}, {"table", "cllt.csv"}};
    s.set_estimate({rep.rows.back().ratio, rep.rows.back().stderr_, ctx.paths, ctx.seed});
    return s.finish();
}

template <typename Space>
Perturbation<Space> parse_perturbation(const RunContext& ctx, const Ensemble& e);

template <>
Perturbation<DualSpace> parse_perturbation<DualSpace>(const RunContext& ctx, const Ensemble& e)
{
    const std::string kind = ctx.cfg.get_string_or("perturbed.f", "zero");
    if (kind == "zero") {
        return Perturbation<DualSpace>::zero();
    }
    const ProjPoint x0 = ProjPoint::axis(e.dim(), 0);
    if (kind == "ideal") {
        return ideal_delta_perturbation(ctx.cfg.get_int_or("perturbed.depth", 30), x0);
    }
    if (kind == "finite-range") {
        return finite_range_delta_perturbation(ctx.cfg.get_int_or("perturbed.range", 16), x0);
    }
    throw_error(ErrorKind::ConfigError, "perturbed.f must be zero|ideal|finite-range for the dual space");
}

template <>
Perturbation<PrimalSpace> parse_perturbation<PrimalSpace>(const RunContext& ctx, const Ensemble&)
{
    const std::string kind = ctx.cfg.get_string_or("perturbed.f", "zero");
    if (kind == "zero") {
        return Perturbation<PrimalSpace>::zero();
    }
    if (kind == "prefix-cocycle") {
        const double w = ctx.cfg.get_double_or("perturbed.weight", 0.4);
        Perturbation<PrimalSpace> f;
        f.horizon = 1;
        f.tag = "prefix-cocycle";
        f.eval = [w](std::int64_t, std::span<const GroupElement> future, const ProjPoint& x,
                     RngStream&) { return w * cocycle(future[0], x); };
        return f;
    }
    throw_error(ErrorKind::ConfigError, "perturbed.f must be zero|prefix-cocycle for the primal space");
}

template <typename Space>
int run_perturbed(RunContext& ctx, const Ensemble& e, Summary& s)
{
    const Space space;
    const Perturbation<Space> f = parse_perturbation<Space>(ctx, e);
    const double t = ctx.cfg.get_double_or("walk.t", 0.0);
    UOptions<Space> opts;
    opts.workers = ctx.workers;
    const UEstimate est = estimate_U(space, e, f, TwistFunction::one(), t, ctx.steps, ctx.paths,
                                     ctx.seed, opts);
    s.inputs() = {{"t", t}, {"n", ctx.steps}, {"paths", ctx.paths}, {"f", f.tag},
                  {"ensemble", e.spec().name}};
    s.values() = {{"rejected", est.rejected}};
    s.set_estimate(est.estimate);
    return s.finish();
}

int cmd_perturbed(const CommonArgs& args)
{
    RunContext ctx = make_context(args);
    const Ensemble e = load_ensemble(ctx);
    Summary s(ctx, "perturbed", "twisted killed expectations of the perturbed walk stabilize");
    if (ctx.cfg.get_string_or("perturbed.space", "dual") == "dual") {
        return run_perturbed<DualSpace>(ctx, e, s);
    }
    return run_perturbed<PrimalSpace>(ctx, e, s);
}

int cmd_chain(const CommonArgs& args)
{
    RunContext ctx = make_context(args);
    const Ensemble e = load_ensemble(ctx);
    Summary s(ctx, "chain", "window-chain functionals disintegrate the perturbed walk");
    const PrimalSpace space;
    const std::int64_t p = ctx.cfg.get_int_or("chain.window", 1);
    const std::string task = ctx.cfg.get_string_or("chain.task", "w");
    if (task == "martingale") {
        const auto rows = martingale_residual(space, e, p, ctx.cfg.get_int_or("chain.k_max", 20),
                                              ctx.paths, ctx.seed, kDefaultStationaryDepth,
                                              ctx.workers);
        std::vector<std::vector<double>> csv;
        double worst_z = 0.0;
        for (const auto& row : rows) {
            csv.push_back({static_cast<double>(row.k), row.mean, row.stderr_});
            if (row.stderr_ > 0) {
                worst_z = std::max(worst_z, std::abs(row.mean) / row.stderr_);
            }
        }
        write_csv(s.out_dir() / "martingale.csv", "k,mean,stderr", csv);
        s.inputs() = {{"window", p}, {"paths", ctx.paths}, {"ensemble", e.spec().name}};
        s.values() = {{"worst_abs_z", worst_z}, {"table", "martingale.csv"}};
        s.set_estimate({worst_z, 0.0, ctx.paths, ctx.seed});
        return s.finish();
    }
    if (task == "disintegration") {
        const Perturbation<PrimalSpace> f = parse_perturbation<PrimalSpace>(ctx, e);
        const DisintegrationCheck dc =
            disintegration_check(space, e, f, p, ctx.cfg.get_double_or("walk.t", 0.0), ctx.steps,
                                 ctx.paths, ctx.seed, {}, kDefaultStationaryDepth, ctx.workers);
        s.inputs() = {{"window", p}, {"n", ctx.steps}, {"paths", ctx.paths}, {"f", f.tag},
                      {"ensemble", e.spec().name}};
        s.values() = {{"direct", dc.direct.value}, {"chain", dc.chain.value},
                      {"difference", dc.difference}, {"combined_stderr", dc.combined_stderr}};
        s.set_estimate({dc.difference, dc.combined_stderr, ctx.paths, ctx.seed});
        if (std::abs(dc.difference) > 3.0 * dc.combined_stderr) {
            s.warn("disintegration gap beyond 3 combined stderr");
        }
        return s.finish();
    }
    const Perturbation<PrimalSpace> f = parse_perturbation<PrimalSpace>(ctx, e);
    ChainOptions<PrimalSpace> opts;
    opts.workers = ctx.workers;
    const WeightedEstimate w = estimate_W_chain(space, e, f, p, ctx.cfg.get_double_or("walk.t", 0.0),
                                                ctx.steps, ctx.paths, ctx.seed, opts);
    s.inputs() = {{"window", p}, {"n", ctx.steps}, {"paths", ctx.paths}, {"f", f.tag},
                  {"ensemble", e.spec().name}};
    s.set_estimate(w);
    return s.finish();
}

int cmd_scan(const CommonArgs& args)
{
    RunContext ctx = make_context(args);
    const Ensemble e = load_ensemble(ctx);
    Summary s(ctx, "scan", "two-sided quasi-monotonicity with fitted constants");
    std::vector<double> t_grid = ctx.cfg.has("scan.t_grid") ? ctx.cfg.get_vector("scan.t_grid")
                                                            : std::vector<double>{0.0, 1.0, 5.0};
    const std::vector<std::int64_t> n_grid = int_list(ctx, "scan.n_grid", {16, 32, 64, 128});
    const double gamma = ctx.cfg.get_double_or("scan.gamma", 0.25);
    const double b = ctx.cfg.get_double_or("scan.b", 0.25);

    ScanReport rep;
    if (ctx.cfg.get_string_or("perturbed.space", "primal") == "dual") {
        const DualSpace space;
        UOptions<DualSpace> opts;
        opts.workers = ctx.workers;
        rep = quasi_monotonicity_scan(space, e, parse_perturbation<DualSpace>(ctx, e),
                                      TwistFunction::one(), t_grid, n_grid, ctx.paths, ctx.seed,
                                      gamma, b, opts);
    } else {
        const PrimalSpace space;
        UOptions<PrimalSpace> opts;
        opts.workers = ctx.workers;
        rep = quasi_monotonicity_scan(space, e, parse_perturbation<PrimalSpace>(ctx, e),
                                      TwistFunction::one(), t_grid, n_grid, ctx.paths, ctx.seed,
                                      gamma, b, opts);
    }
    json cells = json::array();
    for (const auto& cell : rep.fitted_cells) {
        cells.push_back({{"n", cell.n}, {"m", cell.m}, {"t", cell.t}, {"lhs", cell.lhs},
                         {"rhs", cell.rhs}, {"stderr", cell.stderr_}, {"pass", cell.pass}});
    }
    s.inputs() = {{"paths", ctx.paths}, {"gamma", gamma}, {"b", b}, {"ensemble", e.spec().name}};
    s.values() = {{"zero_shift_violations", rep.zero_shift_violations},
                  {"fitted_A", rep.fitted_A}, {"fitted_pass", rep.fitted_pass}, {"cells", cells}};
    s.set_estimate({rep.fitted_A, 0.0, ctx.paths, ctx.seed});
    return s.finish();
}

int cmd_oracle(const CommonArgs& args)
{
    RunContext ctx = make_context(args);
    const Ensemble e = load_ensemble(ctx, false);
    Summary s(ctx, "oracle", "exact enumeration ground truth");
    const ProjPoint x = start_point(ctx, e.dim());
    const TestFunction h = parse_test_function(ctx.cfg);
    const double t = ctx.cfg.get_double_or("walk.t", 0.0);
    const double v = exact_V(e, x, t, ctx.steps);
    const double rho = exact_rho_action(e, x, ctx.steps, h);
    const double harm = exact_harmonicity_residual(e, x, std::min<std::int64_t>(ctx.steps, 4), h);
    RngStream rng(ctx.seed, 0);
    const DualProjPoint y = e.dim() == 1 ? DualProjPoint::axis(1, 0)
                                         : sample_stationary_dual(e, 60, rng);
    const auto [lhs, rhs] = exact_duality_sides(e, x, y, ctx.steps, h);
    s.inputs() = {{"t", t}, {"n", ctx.steps}, {"ensemble", e.spec().name}};
    s.values() = {{"exact_V", v}, {"exact_rho", rho}, {"harmonicity_residual", harm},
                  {"duality_lhs", lhs}, {"duality_rhs", rhs}, {"duality_gap", lhs - rhs}};
    s.set_estimate({v, 0.0, 0, ctx.seed});
    return s.finish();
}

int cmd_suite(const CommonArgs& args, int criterion)
{
    RunContext ctx = make_context(args);
    std::vector<suite::CriterionResult> results;
    if (criterion > 0) {
        results.push_back(suite::run_criterion(criterion, ctx.seed, ctx.workers));
    } else {
        results = suite::run_all(ctx.seed, ctx.workers);
    }
    bool all = true;
    for (const auto& r : results) {
        std::cout << suite::format_line(r) << '\n';
        for (const auto& d : r.details) {
            std::cout << "       " << d << '\n';
        }
        json j;
        j["schema_version"] = kSchemaVersion;
        j["estimator"] = "suite/" + r.name;
        j["statement"] = r.statement;
        j["criterion"] = r.id;
        j["status"] = r.pass ? "pass" : "fail";
        j["diagnostic"] = r.diagnostic;
        j["wall_time_s"] = r.runtime_seconds;
        j["seed"] = ctx.seed;
        j["details"] = r.details;
        std::ofstream out(ctx.out / ("suite_" + std::to_string(r.id) + ".json"));
        out << j.dump(2) << '\n';
        all = all && r.pass;
    }
    return all ? 0 : 1;
}

int cmd_report(const std::string& dir)
{
    if (!fs::is_directory(dir)) {
        throw_error(ErrorKind::MissingRun, "no run directory " + dir);
    }
    std::vector<json> runs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") {
            std::ifstream in(entry.path());
            json j;
            in >> j;
            if (j.contains("schema_version") && j["schema_version"].get<int>() > kSchemaVersion) {
                throw_error(ErrorKind::ConfigError, "unknown schema major version in " +
                                                        entry.path().string());
            }
            j["__file"] = entry.path().filename().string();
            runs.push_back(std::move(j));
        }
    }
    if (runs.empty()) {
        throw_error(ErrorKind::MissingRun, "no JSON summaries under " + dir);
    }
    std::sort(runs.begin(), runs.end(),
              [](const json& a, const json& b) { return a["__file"] < b["__file"]; });
    std::cout << "statement | check | status | numbers\n";
    std::cout << "--------- | ----- | ------ | -------\n";
    for (const auto& j : runs) {
        const std::string statement =
            j.contains("statement") ? j["statement"].get<std::string>() : "estimate";
        const std::string name = j["estimator"].get<std::string>();
        const std::string status = j.contains("status") ? j["status"].get<std::string>() : "?";
        std::string numbers;
        if (j.contains("value")) {
            numbers = "value=" + std::to_string(j["value"].get<double>());
            if (j.contains("stderr")) {
                numbers += " stderr=" + std::to_string(j["stderr"].get<double>());
            }
        } else if (j.contains("criterion")) {
            numbers = "criterion=" + std::to_string(j["criterion"].get<int>());
        }
        std::cout << statement << " | " << name << " | " << status << " | " << numbers << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"simulation and verification laboratory for killed random walks on linear groups"};
    app.require_subcommand(1);

    CommonArgs args;
    int suite_criterion = 0;
    std::string report_dir;

    struct Sub {
        const char* name;
        const char* blurb;
        int (*fn)(const CommonArgs&);
    };
    const std::vector<Sub> subs = {
        {"lyapunov", "estimate the top Lyapunov exponent", cmd_lyapunov},
        {"center", "rescale the ensemble so the exponent vanishes", cmd_center},
        {"harmonic", "killed-mean estimate of the harmonic function V_n", cmd_harmonic},
        {"variance", "asymptotic variance of the walk", cmd_variance},
        {"survival", "survival curve of the exit time", cmd_survival},
        {"rho", "action of the n-step target measure on a test function", cmd_rho},
        {"density", "marginal density of the target measure", cmd_density},
        {"harmonicity", "residual of the killed-transition harmonicity", cmd_harmonicity},
        {"reversal", "both sides of the reversal identity", cmd_reversal},
        {"translation", "translation asymptotics toward the product law", cmd_translation},
        {"tail", "negative-tail mass and exponential fit", cmd_tail},
        {"cllt", "local-limit ratio diagnostic", cmd_cllt},
        {"perturbed", "twisted killed expectation of the perturbed walk", cmd_perturbed},
        {"chain", "window-chain functionals, martingale, disintegration", cmd_chain},
        {"scan", "two-sided quasi-monotonicity scan", cmd_scan},
        {"oracle", "exact enumeration values for finite-support laws", cmd_oracle},
    };
    std::map<std::string, int (*)(const CommonArgs&)> dispatch;
    for (const auto& sub : subs) {
        CLI::App* cmd = app.add_subcommand(sub.name, sub.blurb);
        add_common(cmd, args);
        dispatch[sub.name] = sub.fn;
    }
    CLI::App* suite_cmd = app.add_subcommand("suite", "run the acceptance criteria");
    add_common(suite_cmd, args);
    suite_cmd->add_option("--criterion", suite_criterion, "run a single criterion (1-based)");
    CLI::App* report_cmd = app.add_subcommand("report", "summarize a run directory as a table");
    report_cmd->add_option("dir", report_dir, "run directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        for (const auto& [name, fn] : dispatch) {
            if (app.got_subcommand(name)) {
                return fn(args);
            }
        }
        if (app.got_subcommand("suite")) {
            return cmd_suite(args, suite_criterion);
        }
        if (app.got_subcommand("report")) {
            return cmd_report(report_dir);
        }
    } catch (const Error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
    return 1;
}
