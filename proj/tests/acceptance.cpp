// Acceptance harness: 12 property-based criteria, one pass/fail line each.
// Run with no arguments for the full battery, or pass criterion numbers to
// run a subset (e.g. "./acceptance 1 5 11"). Exit code 0 iff every executed
// criterion passes. All tolerances are pinned here; fitted lemma constants
// come frozen from ssnu/frozen_constants.hpp (calibration x 1.3).
#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "ssnu/factory.hpp"
#include "ssnu/frozen_constants.hpp"
#include "ssnu/io.hpp"
#include "ssnu/verify.hpp"

using namespace ssnu;

namespace {

struct Harness {
    int failures = 0;
    int current = 0;
    std::vector<std::string> notes;

    void fail(const std::string& why) { notes.push_back(why); }
    void check(bool ok, const std::string& why) {
        if (!ok) fail(why);
    }
    void check_le(Real lhs, Real rhs, const std::string& what) {
        if (!(lhs <= rhs))
            fail(what + ": " + io::format_real(lhs) + " > " + io::format_real(rhs));
    }
    void check_close(Real got, Real want, Real tol, const std::string& what) {
        if (!(std::abs(got - want) <= tol))
            fail(what + ": got " + io::format_real(got) + ", want " + io::format_real(want) +
                 " +- " + io::format_real(tol));
    }

    void run(int id, const std::string& name, const std::function<void(Harness&)>& body) {
        current = id;
        notes.clear();
        const auto t0 = std::chrono::steady_clock::now();
        try {
            body(*this);
        } catch (const std::exception& e) {
            fail(std::string("exception: ") + e.what());
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool ok = notes.empty();
        std::printf("[%2d] %s  %-34s (%.1f s)\n", id, ok ? "PASS" : "FAIL", name.c_str(), secs);
        for (const auto& n : notes) std::printf("       - %s\n", n.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
};

Real rel_diff(const Field& a, const Field& b) {
    Field d = a;
    d -= b;
    const Real nb = b.l2_norm();
    return nb > 0 ? d.l2_norm() / nb : d.l2_norm();
}

Real loglog_slope(const std::vector<Real>& t, const std::vector<Real>& v) {
    Real sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(v[i] > 0)) continue;
        const Real x = std::log(t[i]), y = std::log(v[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// -- shared fixtures (computed once, reused across criteria) ------------------

const Grid& grid2() {
    static Grid g(2, 32, 10.0);
    return g;
}

Field ring2() { return ring_vortex(grid2(), 20.0, 1.5); }

const LinearizedOperator& op2() {
    static LinearizedOperator op(grid2(), ring2());
    return op;
}

const Eigenpair& eig2() {
    static Eigenpair e =
        refine_eigenpair(op2(), leading_eigenpair(op2(), 0.5, 32, 1e-3, 2, 1, 2), 30);
    return e;
}

// n = 64 variants: the eigenmode of the frozen profile is only marginally
// resolved at n = 32 (its eigenvalue still moves by ~8% between n = 32 and
// n = 64), which floors the physical-variables weak residual of the perturbed
// member near 4e-4; the demo criterion therefore runs at n = 64.
const Grid& grid2f() {
    static Grid g(2, 64, 10.0);
    return g;
}

Field ring2f() { return ring_vortex(grid2f(), 20.0, 1.5); }

const LinearizedOperator& op2f() {
    static LinearizedOperator op(grid2f(), ring2f());
    return op;
}

const Eigenpair& eig2f() {
    static Eigenpair e =
        refine_eigenpair(op2f(), leading_eigenpair(op2f(), 0.5, 32, 1e-3, 2, 1, 2), 30);
    return e;
}

// ============================================================================
// 1. Spectral identities
// ============================================================================
void criterion_spectral(Harness& H) {
    const Real tol = 1e-10;
    for (const Grid& g : {Grid(2, 64, 10.0), Grid(3, 32, 10.0)}) {
        Real worst_bony = 0, worst_lp = 0, worst_idem = 0, worst_div = 0;
        for (unsigned seed = 1; seed <= 100; ++seed) {
            Field f = random_field(g, seed, 1);
            Field h = random_field(g, seed + 900001, 1);

            // Bony decomposition reconstructs the dealiased product
            Paraproduct pp = paraproduct(f, h);
            Field sum = pp.lo;
            sum += pp.resonant;
            sum += pp.hi;
            worst_bony = std::max(worst_bony, rel_diff(sum, multiply(f, h)));

            // Littlewood-Paley partition of unity
            Field rec = lp_block(f, -1);
            for (int j = 0; j < g.shell_count(); ++j) rec += lp_block(f, j);
            worst_lp = std::max(worst_lp, rel_diff(rec, f));

            // Leray: idempotence and divergence kill
            Field v = random_field(g, seed + 1800002, g.dim());
            Field Pv = leray_project(v);
            worst_idem = std::max(worst_idem, rel_diff(leray_project(Pv), Pv));
            const Real nv = Pv.l2_norm();
            if (nv > 0) worst_div = std::max(worst_div, divergence_l2(Pv) / nv);
        }
        const std::string tag = " (d=" + std::to_string(g.dim()) + ")";
        H.check_le(worst_bony, tol, "Bony reconstruction" + tag);
        H.check_le(worst_lp, tol, "LP partition of unity" + tag);
        H.check_le(worst_idem, tol, "Leray idempotence" + tag);
        H.check_le(worst_div, tol, "Leray divergence kill" + tag);
    }
}

// ============================================================================
// 2. Paraproduct estimates with frozen constants
// ============================================================================
std::array<Real, 3> paraproduct_ratios(const Grid& g, unsigned seed) {
    const Real inf = std::numeric_limits<Real>::infinity();
    const Real alpha = fixtures::para_alpha, beta = fixtures::para_beta;
    Field f = random_field(g, seed, 1);
    Field h = random_field(g, seed + 77777, 1);
    Paraproduct pp = paraproduct(f, h);
    const Real gb = besov_norm(h, {beta, 2, inf});
    const Real fa = besov_norm(f, {alpha, inf, inf});
    return {besov_norm(pp.lo, {beta, 2, inf}) / (lp_norm(f, inf) * gb),
            besov_norm(pp.lo, {alpha + beta, 2, inf}) / (fa * gb),
            besov_norm(pp.resonant, {alpha + beta, 2, inf}) / (fa * gb)};
}

void criterion_paraproduct(Harness& H) {
    Grid g(2, 64, 10.0);
    const Real C[3] = {fixtures::para_C_lo_linf, fixtures::para_C_lo_besov,
                       fixtures::para_C_resonant};
    const char* names[3] = {"lo vs Linf x Besov", "lo vs Besov x Besov", "resonant"};
    Real worst[3] = {0, 0, 0};
    // 100 fresh pairs (disjoint from the 500..549 calibration seeds)
    for (unsigned seed = 1; seed <= 100; ++seed) {
        auto r = paraproduct_ratios(g, seed);
        for (int i = 0; i < 3; ++i) worst[i] = std::max(worst[i], r[i] / C[i]);
    }
    for (int i = 0; i < 3; ++i)
        H.check_le(worst[i], 1.0, std::string("paraproduct margin: ") + names[i]);

    // refitted maxima stable under grid doubling (< 10% growth)
    Grid gb(2, 128, 10.0);
    Real fit64[3] = {0, 0, 0}, fit128[3] = {0, 0, 0};
    for (unsigned seed = 500; seed < 550; ++seed) {
        auto ra = paraproduct_ratios(g, seed);
        auto rb = paraproduct_ratios(gb, seed);
        for (int i = 0; i < 3; ++i) {
            fit64[i] = std::max(fit64[i], ra[i]);
            fit128[i] = std::max(fit128[i], rb[i]);
        }
    }
    for (int i = 0; i < 3; ++i)
        H.check_le(fit128[i], 1.10 * fit64[i], std::string("n-doubling stability: ") + names[i]);
}

// ============================================================================
// 3. Semigroup decay with frozen constants + heat-flow oracle
// ============================================================================
void criterion_semigroup(Harness& H) {
    const LinearizedOperator& op = op2();
    const Real a = fixtures::decay_a, delta = fixtures::decay_delta;
    const Real C[3] = {fixtures::decay_C_01, fixtures::decay_C_02, fixtures::decay_C_12};
    const Real s1[3] = {0, 0, 1}, s2[3] = {1, 2, 2};
    const std::vector<Real> taus = {0.05, 0.1, 0.2, 0.4, 0.7, 1.0, 1.4, 1.9};
    Real worst = 0;
    // fresh seeds (calibration used 1000..1009)
    for (unsigned seed = 3000; seed < 3020; ++seed) {
        Field U0 = random_divfree_field(grid2(), seed);
        const Real h0 = sobolev_norm(U0, 0), h1 = sobolev_norm(U0, 1);
        Field cur = U0;
        Real tprev = 0;
        for (Real tau : taus) {
            cur = op.semigroup(cur, tau - tprev);
            tprev = tau;
            for (int p = 0; p < 3; ++p) {
                const Real hin = s1[p] == 0 ? h0 : h1;
                const Real rhs = C[p] * std::pow(tau, -(s2[p] - s1[p]) / 2) *
                                 std::exp(tau * (a + delta)) * hin;
                worst = std::max(worst, sobolev_norm(cur, s2[p]) / rhs);
            }
        }
    }
    H.check_le(worst, 1.0, "decay margin over 20 seeds x 3 norm pairs x tau sweep");

    // Ubar = 0 oracle: the similarity semigroup is the heat flow conjugated by
    // the physical-variables map; the heat flow is evaluated exactly (Fourier
    // multiplier) on a wide auxiliary grid
    LinearizedOperator op0(grid2());
    auto swirl = [](const Grid& g) {
        Field psi = Field::scalar(g);
        psi.fill(0, [&](const std::vector<Real>& x) {
            return std::exp(-(x[0] * x[0] + x[1] * x[1]) / 4.5);
        });
        Field U = Field::vector(g);
        U.hat(0) = differentiate(psi, {0, 1, 0}).hat(0);
        Field mdx = differentiate(psi, {1, 0, 0});
        mdx *= -1.0;
        U.hat(1) = mdx.hat(0);
        zero_mean(U);
        return U;
    };
    Field U0 = swirl(grid2());
    Grid aux(2, 512, 90.0);
    Field ua = swirl(aux);
    for (Real tau : {0.5, 2.0}) {
        const Real t = std::exp(tau);
        Field heat = ua;
        for (int c = 0; c < 2; ++c) {
            auto& h = heat.hat(c);
            for_each_mode(aux, [&](std::size_t idx, const std::array<Real, 3>& k) {
                h[idx] *= std::exp(-(k[0] * k[0] + k[1] * k[1]) * (t - 1.0));
            });
        }
        Field oracle = evaluate_at_scaled_nodes(heat, grid2(), std::sqrt(t));
        oracle *= std::sqrt(t);
        oracle.set_tag(VarTag::similarity);
        H.check_le(rel_diff(op0.semigroup(U0, tau, 2000), oracle), 1e-6,
                   "heat-flow oracle at tau=" + io::format_real(tau));
    }
}

// ============================================================================
// 4. Block-semigroup lemma with frozen constants
// ============================================================================
void criterion_block(Harness& H) {
    const LinearizedOperator& op = op2();
    const int J = grid2().shell_count();
    H.check(J >= 3, "expected at least 3 dyadic shells");
    Real worst = 0;
    for (unsigned seed = 3100; seed < 3105; ++seed) {
        Field U0 = random_divfree_field(grid2(), seed);
        for (Real tau : {0.1, 0.5, 1.0, 1.9})
            for (int j = 0; j < J; ++j) {
                BlockCheckRow row =
                    block_semigroup_check(op, U0, j, tau, fixtures::block_N, fixtures::block_c,
                                          fixtures::block_C1, fixtures::block_C2);
                worst = std::max(worst, row.margin);
            }
    }
    H.check_le(worst, 1.0, "block margin over (j, tau) sweep, 5 fresh seeds");
}

// ============================================================================
// 5. Eigen machinery: dense oracle + U^lin slope
// ============================================================================
Field flatten_to_field(const Grid& g, const Eigen::VectorXd& v) {
    Field f(g, g.dim(), VarTag::similarity);
    const std::size_t m = g.node_count();
    for (int c = 0; c < g.dim(); ++c) {
        std::vector<Real> vals(m);
        for (std::size_t i = 0; i < m; ++i) vals[i] = v[c * m + i];
        f.set_physical(c, vals);
    }
    return f;
}

Eigen::VectorXd field_to_flat(const Field& f) {
    const std::size_t m = f.grid().node_count();
    Eigen::VectorXd v(f.ncomp() * m);
    for (int c = 0; c < f.ncomp(); ++c) {
        auto vals = f.physical(c);
        for (std::size_t i = 0; i < m; ++i) v[c * m + i] = vals[i];
    }
    return v;
}

void criterion_eigen(Harness& H) {
    // moderate amplitude keeps the eigenvalue condition number O(1); the
    // matrix-free / dense comparison is meaningful at 1e-6 there (the frozen
    // large-amplitude profile has kappa ~ 1e4)
    Grid g(2, 16, 5.0);
    Field Ub = ring_vortex(g, 2.0, 1.0);
    LinearizedOperator op(g, Ub);

    const std::size_t m = g.node_count();
    const std::size_t dim = 2 * m;
    Eigen::MatrixXd M(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
        e[i] = 1.0;
        M.col(i) = field_to_flat(op.apply(leray_project(flatten_to_field(g, e))));
    }

    Field U = random_divfree_field(g, 13);
    Eigen::VectorXd got = M * field_to_flat(U);
    Eigen::VectorXd want = field_to_flat(op.apply(U));
    H.check_le((got - want).norm(), 1e-10 * want.norm(), "dense-oracle agreement of apply");

    Eigen::EigenSolver<Eigen::MatrixXd> es(M);
    std::vector<std::complex<double>> ev(es.eigenvalues().data(), es.eigenvalues().data() + dim);
    Eigenpair er = refine_eigenpair(op, leading_eigenpair(op, 0.5, 32, 1e-3, 2, 1, 2), 30);
    H.check_le(er.residual, 1e-7, "refined eigenpair residual");
    Real dmin = 1e9;
    for (auto z : ev) dmin = std::min(dmin, std::abs(std::complex<double>(er.lambda) - z));
    H.check_le(dmin, 1e-6, "leading eigenvalue vs dense spectrum");
    Real max_re = -1e9;
    for (auto z : ev)
        if (std::abs(z) > 1e-8) max_re = std::max(max_re, z.real());
    H.check_le(max_re, er.lambda.real() + 1e-6, "no dense eigenvalue beats the leading one");

    // U^lin envelope: ||Re(e^{lambda tau} eta)||^2 + ||Im(...)||^2 grows as
    // e^{2 a tau} exactly, so the fitted log-slope recovers a; sampling whole
    // oscillation periods also keeps the Re-only fit clean
    const Eigenpair& e2 = eig2();
    const Real period = 2 * pi / e2.lambda.imag();
    std::vector<Real> ts, vs;
    for (int i = 0; i <= 160; ++i) {
        const Real tau = 2 * period * i / 160;
        ts.push_back(std::exp(tau));
        vs.push_back(ulin(e2, tau).l2_norm());
    }
    H.check_close(loglog_slope(ts, vs), e2.growth_rate, 0.01 * e2.growth_rate,
                  "U^lin log-slope vs a");
}

// ============================================================================
// 6. Stochastic clock
// ============================================================================
void criterion_clock(Harness& H) {
    // zero-noise closed form
    TimeChange tc0(BrownianPath::zero(1e-4, 2.0));
    H.check_le(std::abs(tc0.theta(1.0) - 2.0 * (1.0 - std::exp(-0.5))), 1e-6,
               "zero-noise theta(1)");

    // theta o theta^{-1} within one grid step
    {
        BrownianPath p = BrownianPath::sample(7, 1e-3, 4.0);
        TimeChange tc(p);
        Real worst = 0;
        for (std::size_t i = 1; i + 1 < p.w.size(); i += 7) {
            const Real t = p.time(i);
            worst = std::max(worst, std::abs(tc.theta_inverse(tc.theta(t)) - t));
        }
        H.check_le(worst, p.dt, "clock round trip");
    }

    // martingale mean over 1e4 seeds
    {
        Real sum = 0, sumsq = 0;
        const int n = 10000;
        for (int s = 1; s <= n; ++s) {
            BrownianPath p = BrownianPath::sample(777000 + s, 1e-2, 1.0);
            const Real m = std::exp(p.w.back() - 0.5);
            sum += m;
            sumsq += m * m;
        }
        const Real mean = sum / n;
        const Real se = std::sqrt((sumsq / n - mean * mean) / n);
        H.check_le(std::abs(mean - 1.0), 3.0 * se,
                   "martingale mean (got " + io::format_real(mean) + ", 3se=" +
                       io::format_real(3.0 * se) + ")");
    }

    // causality: theta, tau_R, T0, and the force magnitude are adapted; a
    // probe that reads the path's future value is not
    {
        const Real tau0 = -2.0, R = 5.0;
        Field Ub = ring2();
        Field Fb = background_force(Ub);
        Field LUb = laplacian(Ub);
        const Real f2 = Fb.l2_norm() * Fb.l2_norm();
        const Real cross = Fb.inner(LUb);
        const Real l2 = LUb.l2_norm() * LUb.l2_norm();

        auto theta_fn = [](const BrownianPath& p) {
            TimeChange tc(p);
            std::vector<Real> out(p.w.size());
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = tc.theta(p.time(i));
            return out;
        };
        auto taur_fn = [=](const BrownianPath& p) {
            TimeChange tc(p);
            StoppingTimes st = stopping_times(tc, R, tau0);
            std::vector<Real> out(p.w.size());
            for (std::size_t i = 0; i < out.size(); ++i)
                out[i] = tc.theta(p.time(i)) >= st.tau_r ? 1.0 : 0.0;
            return out;
        };
        auto t0_fn = [=](const BrownianPath& p) {
            TimeChange tc(p);
            StoppingTimes st = stopping_times(tc, R, tau0);
            std::vector<Real> out(p.w.size());
            for (std::size_t i = 0; i < out.size(); ++i)
                out[i] = p.time(i) >= st.t0 ? 1.0 : 0.0;
            return out;
        };
        auto force_fn = [=](const BrownianPath& p) {
            // ||f(t)||_{L2} via the scalar closed form (h and theta only)
            TimeChange tc(p);
            std::vector<Real> out(p.w.size(), 0.0);
            for (std::size_t i = 1; i < out.size(); ++i) {
                const Real t = p.time(i);
                const Real h = h_factor(p, t);
                const Real s = tc.theta(t);
                const Real hb = std::sqrt(std::max<Real>(
                    0.0, f2 + 2 * (1 - h) * cross + (1 - h) * (1 - h) * l2));
                // ||f(t)||_{L2} = h^{-2} s^{d/4 - 3/2} ||H_bar||, d = 2
                out[i] = std::pow(s, -1.0) * hb / (h * h);
            }
            return out;
        };
        auto anticipating = [](const BrownianPath& p) {
            return std::vector<Real>(p.w.size(), p.w.back());
        };
        H.check(causality_check(theta_fn, 1.0, 8, 1e-3, 2.0).pass, "theta is causal");
        H.check(causality_check(taur_fn, 1.0, 8, 1e-3, 2.0).pass, "tau_R is causal");
        H.check(causality_check(t0_fn, 1.0, 8, 1e-3, 2.0).pass, "T0 is causal");
        H.check(causality_check(force_fn, 1.0, 8, 1e-3, 2.0).pass, "force norm is causal");
        H.check(!causality_check(anticipating, 1.0, 8, 1e-3, 2.0).pass,
                "anticipating probe must fail");
    }

    // viscosity deviation finite over 100 seeds at R=5
    {
        Real worst = 0;
        for (int s = 1; s <= 100; ++s) {
            TimeChange tc(BrownianPath::sample(880000 + s, 1e-3, 4.0));
            StoppingTimes st = stopping_times(tc, 5.0, -2.0);
            const auto vdr = viscosity_deviation_check(tc, st);
            if (!std::isfinite(vdr.max_ratio)) H.fail("viscosity deviation not finite");
            worst = std::max(worst, vdr.max_ratio);
        }
        H.check(std::isfinite(worst) && worst > 0, "viscosity deviation ratio bounded");
    }
}

}  // namespace

// criteria 7-12 live in a second block below main for readability
namespace {
void criterion_picard(Harness& H);
void criterion_forced(Harness& H);
void criterion_demo(Harness& H);
void criterion_integrability(Harness& H);
void criterion_steer(Harness& H);
void criterion_mollify(Harness& H);
}  // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    auto want = [&](int id) { return wanted.empty() || wanted.count(id) > 0; };

    Harness H;
    if (want(1)) H.run(1, "spectral identities", criterion_spectral);
    if (want(2)) H.run(2, "paraproduct estimates", criterion_paraproduct);
    if (want(3)) H.run(3, "semigroup decay", criterion_semigroup);
    if (want(4)) H.run(4, "block-semigroup lemma", criterion_block);
    if (want(5)) H.run(5, "eigen machinery", criterion_eigen);
    if (want(6)) H.run(6, "stochastic clock", criterion_clock);
    if (want(7)) H.run(7, "Picard solvers", criterion_picard);
    if (want(8)) H.run(8, "forced solver decay", criterion_forced);
    if (want(9)) H.run(9, "non-uniqueness demo", criterion_demo);
    if (want(10)) H.run(10, "force integrability", criterion_integrability);
    if (want(11)) H.run(11, "controllability", criterion_steer);
    if (want(12)) H.run(12, "mollified-force corollaries", criterion_mollify);

    std::printf("%s: %d criterion(s) failed\n", H.failures == 0 ? "PASS" : "FAIL", H.failures);
    return H.failures == 0 ? 0 : 1;
}

namespace {

// ============================================================================
// 7. Picard solvers
// ============================================================================
void criterion_picard(Harness& H) {
    // main certificate at 2D n=64 with the frozen unstable profile
    const LinearizedOperator& op = op2f();
    const Eigenpair& e = eig2f();
    H.check_le(e.residual, 1e-6, "n=64 eigenpair residual");

    SolverConfig cfg;
    cfg.tau0 = -1.0;
    cfg.tau_min = -17.0;  // n=64 tail estimate needs <= -16.2
    cfg.dtau = 0.02;
    cfg.tol = 1e-9;
    PerturbationSolution sol = solve_perturbation(op, e, cfg, Pipeline::deterministic);
    H.check(sol.cert.accepted, "certificate accepted");
    H.check_le(sol.cert.contraction, 0.5, "empirical contraction factor");
    H.check_le(sol.cert.fixed_point_residual, 10.0 * cfg.tol, "fixed-point residual");
    H.check_le(sol.cert.bound_margin, 1.0, "||U^per||_{H^N} <= e^{(a+eps)tau}");

    // pipeline coincidence at h* == 1, U == 0: a drift path W(t) = t/2 makes
    // the exponential martingale identically 1 and the clock the identity, so
    // the stochastic right-hand side degenerates to the deterministic one
    {
        const Grid& gs = grid2();
        LinearizedOperator ops(gs, ring2());
        const Eigenpair& es = eig2();
        SolverConfig c2;
        c2.tau0 = -1.0;
        c2.tau_min = -18.5;  // n=32 growth rate 0.421: tail certificate needs <= -17.7
        c2.dtau = 0.02;
        c2.tol = 1e-10;
        BrownianPath drift = BrownianPath::zero(1e-3, 4.0);
        for (std::size_t i = 0; i < drift.w.size(); ++i) drift.w[i] = 0.5 * drift.time(i);
        drift.zero_noise = false;
        TimeChange tc(drift);
        StoppingTimes st = stopping_times(tc, 5.0, c2.tau0);
        PerturbationSolution ssol =
            solve_perturbation(ops, es, c2, Pipeline::stochastic, &tc, &st);
        PerturbationSolution dsol = solve_perturbation(ops, es, c2, Pipeline::deterministic);
        H.check(ssol.uper.size() == dsol.uper.size(), "coincidence: same window");
        Real worst = 0, scale = 0;
        for (std::size_t i = 0; i < std::min(ssol.uper.size(), dsol.uper.size()); ++i) {
            Field d = ssol.uper.nodes[i];
            d -= dsol.uper.nodes[i];
            worst = std::max(worst, d.l2_norm());
            scale = std::max(scale, dsol.uper.nodes[i].l2_norm());
        }
        H.check_le(worst, 1e-8 * std::max<Real>(scale, 1e-30), "pipeline coincidence");
    }
}

// ============================================================================
// 8. Forced solver decay exponents
// ============================================================================
void criterion_forced(Harness& H) {
    // steady force F_bar of a small-amplitude 3D profile: the forced solution
    // relaxes to the profile, so the physical-variables Lp decay exponents
    // approach the self-similar rates
    Grid g(3, 32, 10.0);
    Field Ub = ring_vortex(g, 2.0, 1.5);
    LinearizedOperator op(g);  // zero background: the full nonlinear equation
    Field Fb = background_force(Ub);

    SolverConfig cfg;
    cfg.tau0 = 0.0;
    cfg.tau_min = -15.0;
    cfg.dtau = 0.02;
    cfg.tol = 1e-9;
    cfg.a = 0;
    WindowedTrajectory F;
    F.tau_min = cfg.tau_min;
    F.dtau = cfg.dtau;
    const std::size_t nn = static_cast<std::size_t>((cfg.tau0 - cfg.tau_min) / cfg.dtau) + 1;
    F.nodes.assign(nn, Fb);
    ForcedSolution fs = solve_forced(op, F, cfg);
    H.check(fs.cert.accepted, "forced certificate accepted");

    // fit over the terminal stretch where the transient has relaxed
    std::vector<Real> ts;
    std::vector<std::array<Real, 6>> rows;  // (p,k) in {2,4,6} x {0,1}
    for (Real tau = -1.0; tau <= 0.0 + 1e-9; tau += 0.1) {
        const std::size_t i =
            static_cast<std::size_t>(std::lround((tau - F.tau_min) / F.dtau));
        const Real t = std::exp(F.tau(i));
        Field u = to_physical(fs.u.nodes[i], t, FieldKind::velocity);
        // |grad u| as a scalar field, assembled from the component gradients
        Field gm = Field::scalar(u.grid());
        {
            std::vector<Real> acc(u.grid().node_count(), 0.0);
            for (int c = 0; c < u.ncomp(); ++c)
                for (int ax = 0; ax < 3; ++ax) {
                    std::array<int, 3> mi{0, 0, 0};
                    mi[ax] = 1;
                    auto vals = differentiate(u, mi).physical(c);
                    for (std::size_t q = 0; q < acc.size(); ++q) acc[q] += vals[q] * vals[q];
                }
            for (auto& v : acc) v = std::sqrt(v);
            gm.set_physical(0, acc);
        }
        std::array<Real, 6> row{};
        int col = 0;
        for (Real p : {2.0, 4.0, 6.0}) {
            row[col++] = lp_norm(u, p);
            row[col++] = std::sqrt(t) * lp_norm(gm, p);
        }
        ts.push_back(t);
        rows.push_back(row);
    }
    int col = 0;
    for (Real p : {2.0, 4.0, 6.0}) {
        for (int k = 0; k < 2; ++k) {
            std::vector<Real> vs;
            for (auto& r : rows) vs.push_back(r[col]);
            ++col;
            const Real slope = loglog_slope(ts, vs);
            const Real target = 0.5 * (3.0 / p - 1.0);
            H.check_close(slope, target, 0.05,
                          "t^{k/2}||grad^k u||_{Lp} slope, p=" + io::format_real(p) +
                              " k=" + std::to_string(k));
        }
    }
}

// ============================================================================
// 9. Non-uniqueness demo (2D stochastic zero-noise + 3D deterministic)
// ============================================================================
ForceTrajectory demo3d_force;  // stored by criterion 9 for criterion 10

void pair_checks(Harness& H, const SolutionPair& pair, Real a, int dim, Real weak_tol,
                 const std::string& tag) {
    PairVerifyOptions pv;
    pv.weak_tol = weak_tol;
    pv.a = a;
    VerificationReport rep = verify_pair(pair, pv);
    int weak_fail = 0, energy_fail = 0, sep_fail = 0;
    for (const auto& row : rep.rows) {
        if (!row.pass) {
            if (row.name.rfind("weak", 0) == 0) ++weak_fail;
            else if (row.name.rfind("energy", 0) == 0) ++energy_fail;
            else ++sep_fail;
        }
    }
    H.check(weak_fail == 0, tag + ": weak residual <= " + io::format_real(weak_tol) + " (" +
                                std::to_string(weak_fail) + " rows failed, worst " +
                                io::format_real(rep.worst) + ")");
    H.check(energy_fail == 0, tag + ": energy inequality");
    H.check(sep_fail == 0, tag + ": separation certificate");

    const Real max_sep = *std::max_element(pair.separation.begin(), pair.separation.end());
    H.check_le(1e3 * weak_tol, max_sep, tag + ": separation >= 1e3 x residual tol");

    // decay-rate difference of the pair recovers a
    const Real n1_slope = loglog_slope(pair.fit_times, pair.norm1);
    H.check_close(pair.separation_slope - n1_slope, a, 0.1 * a, tag + ": rate difference vs a");

    // physical-variables norm slopes from the stored snapshots; the gradient
    // norm is the pure first-derivative L2 norm (the full H^1 norm would mix
    // the two anchor exponents)
    std::vector<Real> g1, g2;
    for (std::size_t i = 0; i < pair.times.size(); ++i) {
        g1.push_back(grad_pow(pair.u1[i], 1.0).l2_norm());
        g2.push_back(grad_pow(pair.u2[i], 1.0).l2_norm());
    }
    const Real su = (dim - 2) / 4.0, sg = (dim - 4) / 4.0;
    const Real tol_u = std::max<Real>(0.1 * std::abs(su), 0.03);
    const Real tol_g = std::max<Real>(0.1 * std::abs(sg), 0.03);
    std::vector<Real> n1s, n2s;
    for (std::size_t i = 0; i < pair.times.size(); ++i) {
        n1s.push_back(pair.u1[i].l2_norm());
        n2s.push_back(pair.u2[i].l2_norm());
    }
    H.check_close(loglog_slope(pair.times, n1s), su, tol_u, tag + ": ||u1|| slope");
    H.check_close(loglog_slope(pair.times, n2s), su, tol_u, tag + ": ||u2|| slope");
    H.check_close(loglog_slope(pair.times, g1), sg, tol_g, tag + ": ||grad u1|| slope");
    H.check_close(loglog_slope(pair.times, g2), sg, tol_g, tag + ": ||grad u2|| slope");
}

void criterion_demo(Harness& H) {
    // 2D member pair through the stochastic pipeline on the zero-noise path
    // (the closed-form oracle configuration; noisy paths bound the weak check
    // by the path regularity, see the separate clock criteria)
    {
        StochasticScenario sc;
        sc.profile = {ring2f(), "builtin ring"};
        sc.eig = eig2f();
        sc.solver.tau0 = -1.0;
        sc.solver.tau_min = -16.0;
        sc.solver.dtau = 0.02;
        sc.solver.tol = 1e-9;
        sc.zero_noise = true;
        sc.store_stride = 40;
        sc.dense_window = 0.6;
        sc.dense_dtau = 0.0025;
        SolutionPair pair = assemble_stochastic_pair(sc);
        pair_checks(H, pair, sc.eig.growth_rate, 2, 1e-5, "2D stochastic");
    }

    // 3D pair through the deterministic pipeline (U = 0 branch) with the
    // elongated-column unstable profile. The column's Gaussian tail wraps
    // the box (profile mass margin 0.871), hence the explicit margin gate;
    // the weak-residual rows below are what certify the wrap-around is
    // harmless. The leading mode comes from the planar-lift eigensolver,
    // validated once against the 3D propagator Arnoldi (same lambda to
    // 6 digits from a random Krylov seed).
    {
        Grid g(3, 32, 10.0);
        DeterministicScenario sc;
        sc.profile = {ring_vortex(g, fixtures::ring3d_amplitude, fixtures::ring3d_sigma, 1,
                                  fixtures::ring3d_sigma_axis),
                      "builtin ring, elongated column"};
        sc.profile.margin_min = fixtures::ring3d_margin_min;
        LinearizedOperator op(g, sc.profile.U);
        sc.eig = lift_planar_eigenpair(op);
        H.check_le(std::abs(sc.eig.growth_rate - fixtures::ring3d_a),
                   0.05 * fixtures::ring3d_a, "3D frozen growth rate");
        sc.solver.tau0 = -1.0;
        // tail certificate: ||G|| ~ e^{2a tau} with a = 1.048 needs
        // tau_min <= -7.3; -8 leaves margin
        sc.solver.tau_min = -8.0;
        sc.solver.dtau = 0.01;
        sc.solver.tol = 1e-9;
        sc.store_stride = 40;
        sc.dense_window = 0.6;
        sc.dense_dtau = 0.0025;
        SolutionPair pair = assemble_deterministic_pair(sc);
        pair_checks(H, pair, sc.eig.growth_rate, 3, 1e-5, "3D deterministic");
        demo3d_force = ForceTrajectory{pair.times, pair.force};
    }
}

// ============================================================================
// 10. Force integrability across p = 3
// ============================================================================
void criterion_integrability(Harness& H) {
    ForceTrajectory f = demo3d_force;
    if (f.times.empty()) {
        // criterion 9 did not run (subset mode): rebuild the closed-form 3D
        // force trajectory directly
        Grid g(3, 32, 10.0);
        Field Ub = ring_vortex(g, fixtures::ring3d_amplitude, fixtures::ring3d_sigma, 1,
                               fixtures::ring3d_sigma_axis);
        for (Real tau = -8.0; tau <= -1.0 + 1e-9; tau += 0.25) {
            const Real t = std::exp(tau);
            f.times.push_back(t);
            f.fields.push_back(force_g(nullptr, Ub, t));
        }
    }
    auto rows = force_integrability_scan(f, {2.9, 3.0, 3.5});
    H.check(rows.size() == 3, "scan rows");
    H.check(rows[0].exponent > -1.0,
            "||f||_{L^{2.9}} locally integrable (exponent " +
                io::format_real(rows[0].exponent) + ")");
    H.check(rows[2].exponent < -1.0,
            "||f||_{L^{3.5}} local exponent below -1 (exponent " +
                io::format_real(rows[2].exponent) + ")");
}

// ============================================================================
// 11. Controllability (steer to zero)
// ============================================================================
void criterion_steer(Harness& H) {
    const Grid& g = grid2();
    Field u0 = random_divfree_field(g, 17);
    u0 *= 0.5;
    Field u_star = ns_smooth_run(u0, 0.05);
    SteerResult sr = steer_to_zero(u_star, 1.0, 33);

    H.check(sr.u.back().l2_norm() == 0.0, "terminal field exactly zero");
    Field mid = sr.u[sr.u.size() / 2];
    Field half = u_star;
    half *= 0.5;
    H.check_le(rel_diff(mid, half), 1e-12, "midpoint = u_star / 2");

    TestFunctionBank bank = TestFunctionBank::make(2, g.box(), 20, 2026);
    auto rep = weak_residual(sr.times, sr.u, sr.force, bank, WeakMode::deterministic, nullptr,
                             1e-8, 2);
    H.check(rep.pass, "weak residual <= 1e-8 (worst " + io::format_real(rep.worst) + ")");
}

// ============================================================================
// 12. Mollified-force corollaries
// ============================================================================
void criterion_mollify(Harness& H) {
    // the corollaries replace the force of the 3D demo by a mollified,
    // cut-off one; in 3D ||f(t)||_{L^2} ~ t^{-3/4} is time-integrable, so the
    // cutoff contribution to the L^1((0,1); L^2) distance vanishes with the
    // cutoff and any epsilon is eventually met
    Grid g(3, 32, 10.0);
    Field Ub = ring_vortex(g, fixtures::ring3d_amplitude, fixtures::ring3d_sigma, 1,
                           fixtures::ring3d_sigma_axis);
    ForceTrajectory f;
    for (Real tau = -8.0; tau <= -1.0 + 1e-9; tau += 0.25) {
        const Real t = std::exp(tau);
        f.times.push_back(t);
        f.fields.push_back(force_g(nullptr, Ub, t));
    }
    Real n0 = 0;  // L1((0,1); L2) size of the input force
    for (std::size_t i = 0; i + 1 < f.times.size(); ++i)
        n0 += (f.times[i + 1] - f.times[i]) / 2 *
              (f.fields[i].l2_norm() + f.fields[i + 1].l2_norm());
    const Real eps = 0.1 * n0;
    ForceTrajectory out;
    MollifyReport rep = mollify_force(f, eps, 0.1, 0.2, &out, 12);
    H.check(rep.met, "target epsilon met (achieved " + io::format_real(rep.achieved) +
                         " target " + io::format_real(eps) + ")");
    for (std::size_t i = 1; i < rep.sweep_distances.size(); ++i)
        H.check_le(rep.sweep_distances[i], rep.sweep_distances[i - 1] * (1 + 1e-12),
                   "sweep monotone at halving " + std::to_string(i));
}

}  // namespace
