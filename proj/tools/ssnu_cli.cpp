// Scenario runner tying the library modules together.
//
// Exit codes: 0 pass, 2 check failure, 3 configuration / input error,
// 4 numerical divergence.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ssnu/factory.hpp"
#include "ssnu/frozen_constants.hpp"
#include "ssnu/io.hpp"
#include "ssnu/verify.hpp"

namespace fs = std::filesystem;
using namespace ssnu;

namespace {

constexpr int exit_pass = 0;
constexpr int exit_check_failure = 2;
constexpr int exit_config_error = 3;
constexpr int exit_divergence = 4;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    int threads = 0;
    long long seed_override = -1;
    bool force = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
    auto* c = cmd->add_option("--config", opts.config_path, "scenario config file");
    if (config_required) c->required();
    cmd->add_option("--out", opts.out_dir, "output directory (overrides config out_dir)");
    cmd->add_option("--threads", opts.threads,
                    "worker thread count (default: SSNU_THREADS env var, else 1)");
    cmd->add_option("--seed-override", opts.seed_override,
                    "replaces every seed key in the config");
    cmd->add_flag("--force", opts.force, "overwrite an existing output directory");
}

int resolve_threads(const CommonOpts& opts) {
    if (opts.threads > 0) return opts.threads;
    if (const char* env = std::getenv("SSNU_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

/// Loads the config, applies the seed override to every *.seed / seed key,
/// resolves the output directory, and enforces the overwrite contract.
io::Config prepare(const CommonOpts& opts, std::string& out_dir, bool needs_out = true) {
    io::Config cfg = opts.config_path.empty() ? io::Config::parse("", "<none>")
                                              : io::Config::load(opts.config_path);
    if (opts.seed_override >= 0) {
        for (const auto& [key, value] : cfg.entries()) {
            (void)value;
            if (key == "seed" ||
                (key.size() > 5 && key.compare(key.size() - 5, 5, ".seed") == 0))
                cfg.set(key, std::to_string(opts.seed_override));
        }
    }
    out_dir = !opts.out_dir.empty() ? opts.out_dir : cfg.get_string("out_dir", "");
    if (needs_out) {
        if (out_dir.empty())
            throw ConfigError("no output directory: pass --out or set out_dir in the config");
        if (fs::exists(fs::path(out_dir) / "manifest.json") && !opts.force)
            throw ConfigError(out_dir + " already holds a completed run; pass --force to overwrite");
        fs::create_directories(out_dir);
    }
    return cfg;
}

Grid load_grid(io::Config& cfg) {
    const int dim = static_cast<int>(cfg.get_int("grid.dim", 2));
    const int n = static_cast<int>(cfg.get_int("grid.n", 32));
    const Real box = cfg.get_real("grid.box", 10.0);
    return Grid(dim, n, box);
}

BackgroundProfile load_profile(io::Config& cfg, const Grid& g) {
    BackgroundProfile prof;
    if (cfg.has("profile.file")) {
        const std::string path = cfg.get_string("profile.file");
        prof.U = io::read_field(path);
        prof.provenance = "file:" + path;
    } else {
        const std::string builtin = cfg.get_string("profile.builtin", "ring_vortex");
        const Real amplitude = cfg.get_real("profile.amplitude", 20.0);
        if (builtin == "ring_vortex") {
            const Real sigma = cfg.get_real("profile.sigma", 1.5);
            const Real sigma_axis = cfg.get_real("profile.sigma_axis", 0.0);
            const int p = static_cast<int>(cfg.get_int("profile.p", 1));
            prof.U = ring_vortex(g, amplitude, sigma, p, sigma_axis);
            prof.provenance = "ring_vortex A=" + io::format_real(amplitude) +
                              " sigma=" + io::format_real(sigma) + " p=" + std::to_string(p) +
                              (sigma_axis > 0 ? " sigma_axis=" + io::format_real(sigma_axis)
                                              : std::string());
        } else if (builtin == "bump_vortex") {
            const Real radius = cfg.get_real("profile.radius", 2.5);
            prof.U = bump_vortex(g, amplitude, radius);
            prof.provenance = "bump_vortex A=" + io::format_real(amplitude) +
                              " r=" + io::format_real(radius);
        } else {
            throw ConfigError("unknown profile.builtin '" + builtin + "'");
        }
    }
    prof.margin_min = cfg.get_real("profile.margin_min", prof.margin_min);
    prof.validate();
    return prof;
}

Eigenpair load_eigenpair(io::Config& cfg, const LinearizedOperator& op) {
    if (cfg.has("eig.file")) return io::read_eigenpair(cfg.get_string("eig.file"));
    const std::string method = cfg.get_string("eig.method", "arnoldi");
    if (method == "planar_lift") {
        return lift_planar_eigenpair(op, cfg.get_real("eig.lift_sig_h", 2.0),
                                     cfg.get_real("eig.lift_tol", 1e-7),
                                     static_cast<int>(cfg.get_int("eig.lift_rounds", 30)));
    }
    if (method != "arnoldi")
        throw ConfigError("eig.method must be arnoldi or planar_lift, got '" + method + "'");
    const Real tau_probe = cfg.get_real("eig.tau_probe", 0.5);
    const int krylov = static_cast<int>(cfg.get_int("eig.krylov", 32));
    const Real tol = cfg.get_real("eig.tol", 1e-3);
    const int restarts = static_cast<int>(cfg.get_int("eig.restarts", 2));
    const unsigned seed = static_cast<unsigned>(cfg.get_uint("eig.seed", 1));
    const int steps_refine = static_cast<int>(cfg.get_int("eig.steps_refine", 2));
    const int refine_krylov = static_cast<int>(cfg.get_int("eig.refine_krylov", 30));
    Eigenpair e = leading_eigenpair(op, tau_probe, krylov, tol, restarts, seed, steps_refine);
    if (refine_krylov > 0) e = refine_eigenpair(op, e, refine_krylov);
    return e;
}

SolverConfig load_solver(io::Config& cfg) {
    SolverConfig s;
    s.N = static_cast<int>(cfg.get_int("solver.N", s.N));
    s.eps = cfg.get_real("solver.eps", s.eps);
    s.delta = cfg.get_real("solver.delta", s.delta);
    s.tau0 = cfg.get_real("solver.tau0", s.tau0);
    s.tau_min = cfg.get_real("solver.tau_min", s.tau_min);
    s.dtau = cfg.get_real("solver.dtau", s.dtau);
    s.tol = cfg.get_real("solver.tol", s.tol);
    s.tail_tol = cfg.get_real("solver.tail_tol", s.tail_tol);
    s.max_iter = static_cast<int>(cfg.get_int("solver.max_iter", s.max_iter));
    const std::string space = cfg.get_string("solver.space", "besov");
    if (space == "besov")
        s.space = XSpace::besov;
    else if (space == "sobolev")
        s.space = XSpace::sobolev;
    else
        throw ConfigError("solver.space must be besov or sobolev, got '" + space + "'");
    s.eig_amplitude = cfg.get_real("solver.eig_amplitude", s.eig_amplitude);
    s.a = cfg.get_real("solver.a", s.a);
    s.validate();
    return s;
}

Pipeline load_pipeline(io::Config& cfg) {
    const std::string p = cfg.get_string("pipeline", "stochastic");
    if (p == "stochastic") return Pipeline::stochastic;
    if (p == "deterministic") return Pipeline::deterministic;
    throw ConfigError("pipeline must be stochastic or deterministic, got '" + p + "'");
}

void finish_manifest(const std::string& subcommand, const CommonOpts& opts,
                     const io::Config& cfg, const std::string& out_dir,
                     std::chrono::steady_clock::time_point t0) {
    io::RunManifest m;
    m.subcommand = subcommand;
    m.config_path = opts.config_path;
    m.config_echo = cfg.entries();
    m.config_echo["resolved.threads"] = std::to_string(resolve_threads(opts));
    m.wall_seconds =
        std::chrono::duration<Real>(std::chrono::steady_clock::now() - t0).count();
    m.finalize(out_dir);
}

int report_exit(const VerificationReport& rep, const std::string& what) {
    std::cout << what << ": " << (rep.pass ? "PASS" : "FAIL") << " (" << rep.rows.size()
              << " checks, worst margin " << rep.worst << ")\n";
    return rep.pass ? exit_pass : exit_check_failure;
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

int cmd_spectrum(const CommonOpts& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string out_dir;
    io::Config cfg = prepare(opts, out_dir);
    const Grid g = load_grid(cfg);
    BackgroundProfile prof = load_profile(cfg, g);
    LinearizedOperator op(g, prof.U);
    const Real accept_residual = cfg.get_real("eig.accept_residual", 1e-6);
    Eigenpair e = load_eigenpair(cfg, op);
    cfg.require_consumed();

    io::write_eigenpair(out_dir, e, prof.provenance);
    VerificationReport rep;
    rep.add({"eig_residual", 0, e.residual, accept_residual, e.residual / accept_residual,
             1.0, e.residual <= accept_residual});
    rep.add({"eta_mass_margin", 0, e.eta_mass_margin, 0.9, 0.9 / e.eta_mass_margin, 1.0,
             e.eta_mass_margin >= 0.9});
    io::write_report((fs::path(out_dir) / "report.csv").string(), rep);
    std::cout << "lambda = " << e.lambda.real() << " + " << e.lambda.imag()
              << "i  residual = " << e.residual << "\n";
    finish_manifest("spectrum", opts, cfg, out_dir, t0);
    return report_exit(rep, "spectrum");
}

int cmd_semigroup_check(const CommonOpts& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string out_dir;
    io::Config cfg = prepare(opts, out_dir);
    const Grid g = load_grid(cfg);
    BackgroundProfile prof = load_profile(cfg, g);
    LinearizedOperator op(g, prof.U);

    const int n_seeds = static_cast<int>(cfg.get_int("check.seeds", 5));
    const unsigned seed0 = static_cast<unsigned>(cfg.get_uint("check.seed0", 21));
    const Real a = cfg.get_real("check.a", fixtures::decay_a);
    const Real delta = cfg.get_real("check.delta", fixtures::decay_delta);
    const Real C01 = cfg.get_real("check.C01", fixtures::decay_C_01);
    const Real C02 = cfg.get_real("check.C02", fixtures::decay_C_02);
    const Real C12 = cfg.get_real("check.C12", fixtures::decay_C_12);
    const int blkN = static_cast<int>(cfg.get_int("check.block_N", fixtures::block_N));
    const Real blk_c = cfg.get_real("check.block_c", fixtures::block_c);
    const Real blk_C1 = cfg.get_real("check.block_C1", fixtures::block_C1);
    const Real blk_C2 = cfg.get_real("check.block_C2", fixtures::block_C2);
    cfg.require_consumed();

    const std::vector<Real> taus = {0.05, 0.1, 0.2, 0.5, 1.0, 1.5, 1.9};
    // (sigma1, sigma2, C): ||e^{tauL}||_{H^s1 -> H^s2} <= C tau^{-(s2-s1)/2} e^{(a+delta)tau}
    const std::vector<std::array<Real, 3>> norms = {{0, 1, C01}, {0, 2, C02}, {1, 2, C12}};
    VerificationReport rep;
    for (int s = 0; s < n_seeds; ++s) {
        const Field U0 = random_divfree_field(g, seed0 + static_cast<unsigned>(s));
        Field cur = U0;
        Real tau_prev = 0;
        for (Real tau : taus) {
            cur = op.semigroup(cur, tau - tau_prev);
            tau_prev = tau;
            for (const auto& [s1, s2, C] : norms) {
                const Real lhs = sobolev_norm(cur, s2);
                const Real rhs = C * std::pow(tau, -(s2 - s1) / 2) *
                                 std::exp((a + delta) * tau) * sobolev_norm(U0, s1);
                rep.add({"decay_H" + io::format_real(s1) + "_H" + io::format_real(s2), tau,
                         lhs, rhs, lhs / rhs, 1.0, lhs <= rhs});
            }
        }
        const Field V0 = random_divfree_field(g, seed0 + 1000 + static_cast<unsigned>(s));
        for (int j = 0; j < g.shell_count(); ++j)
            for (Real tau : {0.1, 0.5, 1.0, 1.9}) {
                const BlockCheckRow row =
                    block_semigroup_check(op, V0, j, tau, blkN, blk_c, blk_C1, blk_C2);
                rep.add({"block_j" + std::to_string(j), tau, row.lhs, row.rhs1 + row.rhs2,
                         row.margin, 1.0, row.margin <= 1.0});
            }
    }
    io::write_report((fs::path(out_dir) / "report.csv").string(), rep);
    finish_manifest("semigroup-check", opts, cfg, out_dir, t0);
    return report_exit(rep, "semigroup-check");
}

int cmd_perturbation(const CommonOpts& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string out_dir;
    io::Config cfg = prepare(opts, out_dir);
    const Grid g = load_grid(cfg);
    BackgroundProfile prof = load_profile(cfg, g);
    LinearizedOperator op(g, prof.U);
    Eigenpair e = load_eigenpair(cfg, op);
    SolverConfig solver = load_solver(cfg);
    const Pipeline pipe = load_pipeline(cfg);

    PerturbationSolution sol;
    if (pipe == Pipeline::stochastic) {
        const unsigned long long seed = cfg.get_uint("path.seed", 1);
        const Real dt = cfg.get_real("path.dt", 1e-3);
        const Real t_end = cfg.get_real("path.t_end", 4.0);
        const Real R = cfg.get_real("path.R", 5.0);
        const bool zero_noise = cfg.get_bool("path.zero_noise", false);
        cfg.require_consumed();
        const BrownianPath path = zero_noise ? BrownianPath::zero(dt, t_end)
                                             : BrownianPath::sample(seed, dt, t_end);
        const TimeChange tc(path);
        const StoppingTimes st = stopping_times(tc, R, solver.tau0);
        sol = solve_perturbation(op, e, solver, pipe, &tc, &st);
        io::write_path((fs::path(out_dir) / "path.csv").string(), path);
    } else {
        cfg.require_consumed();
        sol = solve_perturbation(op, e, solver, pipe);
    }
    io::write_trajectory((fs::path(out_dir) / "uper").string(), sol.uper);
    io::write_certificate((fs::path(out_dir) / "certificate.json").string(), sol.cert);
    io::write_eigenpair((fs::path(out_dir) / "eigenpair").string(), e, prof.provenance);
    std::cout << "picard: " << sol.cert.iterations << " iterations, contraction "
              << sol.cert.contraction << ", bound margin " << sol.cert.bound_margin
              << (sol.cert.accepted ? " -- accepted\n" : " -- NOT accepted\n");
    finish_manifest("perturbation", opts, cfg, out_dir, t0);
    return sol.cert.accepted ? exit_pass : exit_check_failure;
}

/// Shared by nonuniqueness-demo and verify: the verify.* config keys.
PairVerifyOptions load_verify_options(io::Config& cfg, Real default_weak_tol = 1e-5) {
    PairVerifyOptions pv;
    pv.weak_tol = cfg.get_real("verify.weak_tol", default_weak_tol);
    pv.energy_slack = cfg.get_real("verify.energy_slack", 1e-6);
    pv.refine = static_cast<int>(cfg.get_int("verify.refine", 2));
    pv.bank_count = static_cast<int>(cfg.get_int("verify.bank_count", 20));
    pv.bank_seed = static_cast<unsigned>(cfg.get_uint("verify.bank_seed", 2026));
    pv.dense_only = cfg.get_bool("verify.dense_only", true);
    return pv;
}

int cmd_nonuniqueness_demo(const CommonOpts& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string out_dir;
    io::Config cfg = prepare(opts, out_dir);
    const Grid g = load_grid(cfg);
    BackgroundProfile prof = load_profile(cfg, g);
    LinearizedOperator op(g, prof.U);
    Eigenpair e = load_eigenpair(cfg, op);
    SolverConfig solver = load_solver(cfg);
    const Pipeline pipe = load_pipeline(cfg);

    const std::size_t stride = static_cast<std::size_t>(cfg.get_int("store.stride", 4));
    const Real dense_window = cfg.get_real("store.dense_window", 0.0);
    const Real dense_dtau = cfg.get_real("store.dense_dtau", 0.005);
    PairVerifyOptions pv = load_verify_options(cfg);
    pv.a = e.growth_rate;
    SolutionPair pair;
    if (pipe == Pipeline::stochastic) {
        StochasticScenario sc;
        sc.profile = std::move(prof);
        sc.eig = std::move(e);
        sc.solver = solver;
        sc.seed = cfg.get_uint("path.seed", 1);
        sc.zero_noise = cfg.get_bool("path.zero_noise", false);
        sc.path_dt = cfg.get_real("path.dt", 1e-3);
        sc.path_t_end = cfg.get_real("path.t_end", 4.0);
        sc.R = cfg.get_real("path.R", 5.0);
        sc.store_stride = stride;
        sc.dense_window = dense_window;
        sc.dense_dtau = dense_dtau;
        cfg.require_consumed();
        pair = assemble_stochastic_pair(sc);
    } else {
        DeterministicScenario sc;
        sc.profile = std::move(prof);
        sc.eig = std::move(e);
        sc.solver = solver;
        sc.store_stride = stride;
        sc.dense_window = dense_window;
        sc.dense_dtau = dense_dtau;
        cfg.require_consumed();
        pair = assemble_deterministic_pair(sc);
    }
    io::write_pair(out_dir, pair);
    VerificationReport rep = verify_pair(pair, pv);
    io::write_report((fs::path(out_dir) / "verification.csv").string(), rep);
    finish_manifest("nonuniqueness-demo", opts, cfg, out_dir, t0);
    const int code = report_exit(rep, "nonuniqueness-demo");
    return pair.cert.accepted ? code : exit_check_failure;
}

int cmd_stochastic_clock(const CommonOpts& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string out_dir;
    io::Config cfg = prepare(opts, out_dir);
    const unsigned long long seed = cfg.get_uint("path.seed", 1);
    const Real dt = cfg.get_real("path.dt", 1e-3);
    const Real t_end = cfg.get_real("path.t_end", 4.0);
    const bool zero_noise = cfg.get_bool("path.zero_noise", false);
    const Real R = cfg.get_real("path.R", 5.0);
    const Real tau0 = cfg.get_real("tau0", -4.0);
    const int causality_pairs = static_cast<int>(cfg.get_int("check.causality_pairs", 8));
    cfg.require_consumed();

    const BrownianPath path =
        zero_noise ? BrownianPath::zero(dt, t_end) : BrownianPath::sample(seed, dt, t_end);
    const TimeChange tc(path);
    const StoppingTimes st = stopping_times(tc, R, tau0);
    const ViscosityDeviationReport vdr = viscosity_deviation_check(tc, st);

    io::write_path((fs::path(out_dir) / "path.csv").string(), path);
    std::vector<Real> ts(path.w.size()), th(path.w.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        ts[i] = path.time(i);
        th[i] = tc.theta(ts[i]);
    }
    io::write_series((fs::path(out_dir) / "theta.csv").string(), "t,theta", ts, th);

    VerificationReport rep;
    // theta o theta^{-1} round trip at interior clock values.
    Real worst_rt = 0;
    for (int i = 1; i < 20; ++i) {
        const Real s = tc.theta_end() * i / 20.0;
        worst_rt = std::max(worst_rt, std::abs(tc.theta(tc.theta_inverse(s)) - s));
    }
    const Real rt_tol = 10 * dt * tc.theta_end();
    rep.add({"clock_round_trip", 0, worst_rt, rt_tol, worst_rt / rt_tol, 1.0, worst_rt <= rt_tol});
    rep.add({"viscosity_deviation_finite", st.tau_r, vdr.max_ratio, 1e6,
             vdr.max_ratio / 1e6, 1.0, std::isfinite(vdr.max_ratio)});
    const PathFunctional fn = [tau0](const BrownianPath& p) {
        const TimeChange local(p);
        std::vector<Real> out(p.w.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = local.theta(p.time(i));
        return out;
    };
    const CausalityReport cr = causality_check(fn, t_end / 2, causality_pairs, dt, t_end, seed);
    rep.add({"clock_causality", cr.t_split, cr.max_disagreement, 1e-10,
             cr.max_disagreement / 1e-10, 1.0, cr.pass});
    if (zero_noise) {
        const Real oracle = 2.0 * (1.0 - std::exp(-0.5));
        const Real got = tc.theta(1.0);
        const Real err = std::abs(got - oracle);
        rep.add({"zero_noise_theta1", 1.0, got, oracle, err / 1e-6, 1.0, err <= 1e-6});
    }
    io::write_report((fs::path(out_dir) / "report.csv").string(), rep);
    finish_manifest("stochastic-clock", opts, cfg, out_dir, t0);
    return report_exit(rep, "stochastic-clock");
}

int cmd_steer(const CommonOpts& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string out_dir;
    io::Config cfg = prepare(opts, out_dir);
    const Grid g = load_grid(cfg);
    const unsigned seed = static_cast<unsigned>(cfg.get_uint("steer.seed", 11));
    const Real amp = cfg.get_real("steer.amplitude", 1.0);
    const Real t_run = cfg.get_real("steer.t_run", 0.1);
    const Real t_star = cfg.get_real("steer.t_star", 1.0);
    const int n_nodes = static_cast<int>(cfg.get_int("steer.nodes", 33));
    const Real weak_tol = cfg.get_real("verify.weak_tol", 1e-8);
    const int bank_count = static_cast<int>(cfg.get_int("verify.bank_count", 20));
    const unsigned bank_seed = static_cast<unsigned>(cfg.get_uint("verify.bank_seed", 2026));
    cfg.require_consumed();

    const Field u0 = amp * random_divfree_field(g, seed);
    const Field u_star = ns_smooth_run(u0, t_run);
    const SteerResult res = steer_to_zero(u_star, t_star, n_nodes);

    for (std::size_t i = 0; i < res.times.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "u_%06zu.ssnu", i);
        io::write_field((fs::path(out_dir) / name).string(), res.u[i]);
        std::snprintf(name, sizeof name, "f_%06zu.ssnu", i);
        io::write_field((fs::path(out_dir) / name).string(), res.force[i]);
    }
    std::vector<Real> norms(res.times.size());
    for (std::size_t i = 0; i < res.times.size(); ++i) norms[i] = res.u[i].l2_norm();
    io::write_series((fs::path(out_dir) / "index.csv").string(), "t,l2_norm", res.times, norms);

    const TestFunctionBank bank = TestFunctionBank::make(g.dim(), g.box(), bank_count, bank_seed);
    VerificationReport rep = weak_residual(res.times, res.u, res.force, bank,
                                           WeakMode::deterministic, nullptr, weak_tol);
    const Real terminal = res.u.back().l2_norm();
    rep.add({"terminal_exact_zero", res.times.back(), terminal, 0, terminal, 0.0,
             terminal == 0.0});
    io::write_report((fs::path(out_dir) / "report.csv").string(), rep);
    finish_manifest("steer", opts, cfg, out_dir, t0);
    return report_exit(rep, "steer");
}

int cmd_mollify(const CommonOpts& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string out_dir;
    io::Config cfg = prepare(opts, out_dir);
    const Grid g = load_grid(cfg);
    BackgroundProfile prof = load_profile(cfg, g);
    const Real t_lo = cfg.get_real("mollify.t_lo", 0.02);
    const Real t_hi = cfg.get_real("mollify.t_hi", 1.0);
    const int n_t = static_cast<int>(cfg.get_int("mollify.nodes", 160));
    Real eps_target = cfg.get_real("mollify.eps_target", 1e-2);
    // eps_frac overrides eps_target with a fraction of the input trajectory's
    // L1((t_lo,t_hi); L2) norm, so configs stay valid when the profile changes
    const Real eps_frac = cfg.get_real("mollify.eps_frac", 0.0);
    const Real width0 = cfg.get_real("mollify.width0", 0.1);
    const Real cutoff0 = cfg.get_real("mollify.cutoff0", 0.2);
    const int max_halvings = static_cast<int>(cfg.get_int("mollify.max_halvings", 10));
    cfg.require_consumed();

    ForceTrajectory f;
    for (int i = 0; i < n_t; ++i) {
        const Real t = t_lo * std::pow(t_hi / t_lo, static_cast<Real>(i) / (n_t - 1));
        f.times.push_back(t);
        f.fields.push_back(force_g(nullptr, prof.U, t));
    }
    if (eps_frac > 0) {
        Real n0 = 0;
        for (std::size_t i = 0; i + 1 < f.times.size(); ++i)
            n0 += (f.times[i + 1] - f.times[i]) / 2 *
                  (f.fields[i].l2_norm() + f.fields[i + 1].l2_norm());
        eps_target = eps_frac * n0;
    }
    ForceTrajectory mollified;
    const MollifyReport rep = mollify_force(f, eps_target, width0, cutoff0, &mollified,
                                            max_halvings);
    std::vector<Real> step(rep.sweep_distances.size());
    for (std::size_t i = 0; i < step.size(); ++i) step[i] = static_cast<Real>(i);
    io::write_series((fs::path(out_dir) / "sweep.csv").string(), "halving,distance", step,
                     rep.sweep_distances);
    VerificationReport vrep;
    vrep.add({"mollify_target", 0, rep.achieved, eps_target, rep.achieved / eps_target, 1.0,
              rep.met});
    bool monotone = true;
    for (std::size_t i = 1; i < rep.sweep_distances.size(); ++i)
        monotone = monotone && rep.sweep_distances[i] <= rep.sweep_distances[i - 1] * (1 + 1e-12);
    vrep.add({"mollify_sweep_monotone", 0, monotone ? 0.0 : 1.0, 0.5,
              monotone ? 0.0 : 2.0, 1.0, monotone});
    io::write_report((fs::path(out_dir) / "report.csv").string(), vrep);
    std::cout << "mollify: distance " << rep.achieved << " at width " << rep.width
              << ", cutoff " << rep.cutoff << "\n";
    finish_manifest("mollify", opts, cfg, out_dir, t0);
    return report_exit(vrep, "mollify");
}

int cmd_verify(const CommonOpts& opts, const std::string& pair_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string out_dir;
    io::Config cfg = prepare(opts, out_dir, /*needs_out=*/false);
    PairVerifyOptions pv = load_verify_options(cfg);
    pv.a = cfg.get_real("verify.a", 0.0);  // 0 skips the separation certificate
    cfg.require_consumed();

    const SolutionPair pair = io::read_pair(pair_dir);
    VerificationReport rep = verify_pair(pair, pv);
    const std::string report_path =
        out_dir.empty() ? (fs::path(pair_dir) / "verification.csv").string()
                        : (fs::path(out_dir) / "verification.csv").string();
    if (!out_dir.empty()) fs::create_directories(out_dir);
    io::write_report(report_path, rep);
    if (!out_dir.empty()) finish_manifest("verify", opts, cfg, out_dir, t0);
    return report_exit(rep, "verify");
}

int cmd_selftest() {
    int failures = 0;
    auto check = [&failures](const std::string& name, bool ok) {
        std::cout << "selftest: " << name << (ok ? " ... ok" : " ... FAIL") << "\n";
        if (!ok) ++failures;
    };
    {
        const Grid g(2, 32, 10);
        const Field f = random_field(g, 5, 1);
        const Field h = random_field(g, 6, 1);
        const Paraproduct pp = paraproduct(f, h);
        const Field fg = multiply(f, h);
        const Field recon = pp.lo + pp.resonant + pp.hi;
        check("bony_reconstruction", (recon - fg).l2_norm() <= 1e-10 * fg.l2_norm());
        Field sum(g, 1);
        for (int j = -1; j <= g.shell_count(); ++j) sum += lp_block(f, j);
        check("lp_partition_of_unity", (sum - f).l2_norm() <= 1e-10 * f.l2_norm());
        const Field v = random_field(g, 7, 2);
        const Field pv = leray_project(v);
        check("leray_idempotent", (leray_project(pv) - pv).l2_norm() <= 1e-10 * pv.l2_norm());
        check("leray_divfree", divergence_l2(pv) <= 1e-10 * pv.l2_norm());
    }
    {
        const TimeChange tc(BrownianPath::zero(1e-4, 2.0));
        check("zero_noise_clock",
              std::abs(tc.theta(1.0) - 2.0 * (1.0 - std::exp(-0.5))) <= 1e-6);
    }
    {
        std::vector<Real> t, v;
        for (int i = 0; i < 40; ++i) {
            t.push_back(0.1 * (i + 1));
            v.push_back(std::pow(t.back(), 0.25));
        }
        const DecayFit fit = decay_fit(t, v);
        check("decay_fit_exact", std::abs(fit.slope - 0.25) <= 1e-10);
    }
    {
        const Grid g(2, 16, 5);
        const Field f = random_divfree_field(g, 9);
        const std::string tmp =
            (fs::temp_directory_path() / "ssnu_selftest_field.ssnu").string();
        io::write_field(tmp, f, "selftest");
        const Field back = io::read_field(tmp);
        check("snapshot_round_trip", (back - f).l2_norm() <= 1e-12 * f.l2_norm());
        fs::remove(tmp);
    }
    std::cout << "selftest: " << (failures == 0 ? "PASS" : "FAIL") << "\n";
    return failures == 0 ? exit_pass : exit_check_failure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"similarity-variable Navier-Stokes laboratory"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string verify_dir;

    CLI::App* spectrum = app.add_subcommand("spectrum", "leading eigenpair of L_ss");
    add_common(spectrum, opts);
    CLI::App* semigroup = app.add_subcommand("semigroup-check", "semigroup decay bounds");
    add_common(semigroup, opts);
    CLI::App* perturbation = app.add_subcommand("perturbation", "Picard perturbation solve");
    add_common(perturbation, opts);
    CLI::App* demo =
        app.add_subcommand("nonuniqueness-demo", "two trajectories, one force");
    add_common(demo, opts);
    CLI::App* clock_cmd = app.add_subcommand("stochastic-clock", "random clock diagnostics");
    add_common(clock_cmd, opts);
    CLI::App* steer = app.add_subcommand("steer", "steer a smooth state to zero");
    add_common(steer, opts);
    CLI::App* mollify = app.add_subcommand("mollify", "temporal force mollification");
    add_common(mollify, opts);
    CLI::App* verify = app.add_subcommand("verify", "re-verify a solution-pair directory");
    verify->add_option("dir", verify_dir, "SolutionPair directory")->required();
    add_common(verify, opts, /*config_required=*/false);
    CLI::App* selftest = app.add_subcommand("selftest", "quick built-in identity suite");
    (void)selftest;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config_error;
    }

    try {
        if (spectrum->parsed()) return cmd_spectrum(opts);
        if (semigroup->parsed()) return cmd_semigroup_check(opts);
        if (perturbation->parsed()) return cmd_perturbation(opts);
        if (demo->parsed()) return cmd_nonuniqueness_demo(opts);
        if (clock_cmd->parsed()) return cmd_stochastic_clock(opts);
        if (steer->parsed()) return cmd_steer(opts);
        if (mollify->parsed()) return cmd_mollify(opts);
        if (verify->parsed()) return cmd_verify(opts, verify_dir);
        return cmd_selftest();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config_error;
    } catch (const IOError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return exit_config_error;
    } catch (const ConvergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return exit_divergence;
    } catch (const StabilityError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return exit_divergence;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_config_error;
    }
}
