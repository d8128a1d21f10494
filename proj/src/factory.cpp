#include "ssnu/factory.hpp"

#include <algorithm>
#include <cmath>

#include "ssnu/verify.hpp"

namespace ssnu {

namespace {

Real smooth01(Real u) {
    // C-infinity step: 0 for u <= 0, 1 for u >= 1
    if (u <= 0) return 0;
    if (u >= 1) return 1;
    const Real a = std::exp(-1.0 / u);
    const Real b = std::exp(-1.0 / (1.0 - u));
    return a / (a + b);
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
    if (n < 2) return 0;
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

Field force_g(const TimeChange* tc, const Field& Ubar, Real t) {
    if (!(t > 0)) throw Error("force_g: time must be positive");
    const Real h = tc ? h_factor(tc->path(), tc->theta_inverse(t)) : 1.0;
    Field H = stochastic_background_force(Ubar, h);
    return to_physical(H, t, FieldKind::force);
}

Field force_f(const TimeChange& tc, const Field& Ubar, Real t) {
    if (!(t > 0)) throw Error("force_f: time must be positive");
    const Real h = h_factor(tc.path(), t);
    Field g = force_g(&tc, Ubar, tc.theta(t));
    g *= 1.0 / (h * h);
    return g;
}

namespace {

void finish_pair(SolutionPair& pair) {
    pair.separation_slope = loglog_slope(pair.fit_times, pair.separation);
    if (!pair.times.empty()) {
        pair.t_lo = pair.times.front();
        pair.t_hi = pair.times.back();
    }
}

/// tau values at which field snapshots are stored: every stride-th solver
/// node outside the dense tail, then the tail itself at spacing dense_dtau
/// ending exactly at the window cap.
std::vector<Real> stored_taus(const WindowedTrajectory& T, std::size_t stride, Real dense_window,
                              Real dense_dtau) {
    std::vector<Real> taus;
    const Real cap = T.cap();
    const Real dense_start = dense_window > 0 ? cap - dense_window : cap + 1;
    if (stride == 0) stride = 1;
    for (std::size_t i = 0; i < T.size(); i += stride) {
        const Real tau = T.tau(i);
        if (tau < dense_start - 1e-12) taus.push_back(tau);
    }
    if (dense_window > 0) {
        if (!(dense_dtau > 0)) throw Error("stored_taus: dense_dtau must be positive");
        const Real len = std::min(dense_window, cap - T.tau_min);
        const auto md = static_cast<std::size_t>(std::llround(len / dense_dtau));
        for (std::size_t j = 0; j <= md; ++j)
            taus.push_back(cap - static_cast<Real>(md - j) * dense_dtau);
    } else if (taus.empty() || taus.back() < cap - 1e-12) {
        taus.push_back(cap);
    }
    return taus;
}

/// Catmull-Rom cubic in tau through the trajectory nodes (clamped at the
/// ends); exact node values are returned directly.
Field traj_sample(const WindowedTrajectory& T, Real tau) {
    if (T.size() < 2) throw Error("traj_sample: need at least two nodes");
    const auto m = static_cast<std::ptrdiff_t>(T.size());
    const Real x = (tau - T.tau_min) / T.dtau;
    auto i1 = static_cast<std::ptrdiff_t>(std::floor(x));
    i1 = std::clamp(i1, std::ptrdiff_t{0}, m - 2);
    const Real u = x - static_cast<Real>(i1);
    if (std::abs(u) < 1e-9) return T.nodes[static_cast<std::size_t>(i1)];
    if (std::abs(u - 1) < 1e-9) return T.nodes[static_cast<std::size_t>(i1 + 1)];
    auto node = [&](std::ptrdiff_t j) -> const Field& {
        return T.nodes[static_cast<std::size_t>(std::clamp(j, std::ptrdiff_t{0}, m - 1))];
    };
    const Real u2 = u * u, u3 = u2 * u;
    const Real w0 = 0.5 * (-u3 + 2 * u2 - u);
    const Real w1 = 0.5 * (3 * u3 - 5 * u2 + 2);
    const Real w2 = 0.5 * (-3 * u3 + 4 * u2 + u);
    const Real w3 = 0.5 * (u3 - u2);
    Field out = node(i1 - 1);
    out *= w0;
    Field t1 = node(i1);
    t1 *= w1;
    out += t1;
    Field t2 = node(i1 + 1);
    t2 *= w2;
    out += t2;
    Field t3 = node(i1 + 2);
    t3 *= w3;
    out += t3;
    return out;
}

/// ||to_physical(U, s)||_{L2} = s^{(d-2)/4} ||U||_{L2}; the node map is a
/// bijection, so the relation is exact discretely.
Real physical_l2_scale(int dim, Real s) { return std::pow(s, (dim - 2) / 4.0); }

}  // namespace

SolutionPair assemble_stochastic_pair(const StochasticScenario& sc) {
    sc.profile.validate();
    BrownianPath path = sc.zero_noise ? BrownianPath::zero(sc.path_dt, sc.path_t_end)
                                      : BrownianPath::sample(sc.seed, sc.path_dt, sc.path_t_end);
    TimeChange tc(path);
    StoppingTimes st = stopping_times(tc, sc.R, sc.solver.tau0);

    LinearizedOperator op(sc.profile.U.grid(), sc.profile.U);
    PerturbationSolution sol =
        solve_perturbation(op, sc.eig, sc.solver, Pipeline::stochastic, &tc, &st);
    if (!sol.cert.accepted) throw ConvergenceError("stochastic pair: certificate rejected", 0);

    SolutionPair pair;
    pair.cert = sol.cert;
    pair.provenance = "stochastic seed=" + std::to_string(sc.seed) +
                      (sc.zero_noise ? " zero-noise" : "") + " R=" + std::to_string(sc.R);

    const int dim = sc.profile.U.grid().dim();
    const Real nU = sc.profile.U.l2_norm();
    for (std::size_t i = 0; i < sol.uper.size(); ++i) {
        const Real tau = sol.uper.tau(i);
        const Real s = std::exp(tau);
        const Real t = tc.theta_inverse(s);
        if (!(t > 0)) continue;  // clock not resolvable this early
        const Real scale = physical_l2_scale(dim, s) / h_factor(path, t);

        Field diff = ulin(sc.eig, tau);
        diff *= sc.solver.eig_amplitude;
        diff += sol.uper.nodes[i];
        Field V2 = diff;
        V2 += sc.profile.U;

        pair.fit_times.push_back(t);
        pair.norm1.push_back(scale * nU);
        pair.norm2.push_back(scale * V2.l2_norm());
        pair.separation.push_back(scale * diff.l2_norm());
    }

    for (Real tau : stored_taus(sol.uper, sc.store_stride, sc.dense_window, sc.dense_dtau)) {
        const Real s = std::exp(tau);
        const Real t = tc.theta_inverse(s);
        if (!(t > 0)) continue;  // clock not resolvable this early
        const Real h = h_factor(path, t);

        Field U2 = ulin(sc.eig, tau);
        U2 *= sc.solver.eig_amplitude;
        U2 += traj_sample(sol.uper, tau);
        U2 += sc.profile.U;

        Field v1 = to_physical(sc.profile.U, s, FieldKind::velocity);
        Field v2 = to_physical(U2, s, FieldKind::velocity);
        Field g = force_g(&tc, sc.profile.U, s);
        Field u1 = v1;
        u1 *= 1.0 / h;
        Field u2 = v2;
        u2 *= 1.0 / h;
        Field f = g;
        f *= 1.0 / (h * h);

        pair.times.push_back(t);
        pair.u1.push_back(std::move(u1));
        pair.u2.push_back(std::move(u2));
        pair.force.push_back(std::move(f));

        // The verifiable classical PDE lives on the clock axis; h is both the
        // change-of-variables factor and the viscosity seen by v at time s.
        pair.times_v.push_back(s);
        pair.v1.push_back(std::move(v1));
        pair.v2.push_back(std::move(v2));
        pair.vforce.push_back(std::move(g));
        pair.visc.push_back(h);
    }
    finish_pair(pair);
    return pair;
}

SolutionPair assemble_deterministic_pair(const DeterministicScenario& sc) {
    sc.profile.validate();
    LinearizedOperator op(sc.profile.U.grid(), sc.profile.U);

    WindowedTrajectory Utraj;
    bool have_u = false;
    if (sc.f_extra) {
        // the extra force must have a finite weighted Y norm
        std::vector<Real> times;
        std::vector<Field> fphys;
        for (std::size_t i = 0; i < sc.f_extra->size(); i += 8) {
            const Real t = std::exp(sc.f_extra->tau(i));
            times.push_back(t);
            fphys.push_back(to_physical(sc.f_extra->nodes[i], t, FieldKind::force));
        }
        const Real yn = y_norm(times, fphys, sc.solver.N, sc.eig.growth_rate, sc.solver.eps);
        if (!std::isfinite(yn)) throw Error("deterministic pair: extra force has infinite Y norm");
        Utraj = solve_forced(op, *sc.f_extra, sc.solver).u;
        have_u = true;
    }

    PerturbationSolution sol = solve_perturbation(op, sc.eig, sc.solver, Pipeline::deterministic,
                                                  nullptr, nullptr, have_u ? &Utraj : nullptr);
    if (!sol.cert.accepted) throw ConvergenceError("deterministic pair: certificate rejected", 0);

    Field Fbar = background_force(sc.profile.U);

    SolutionPair pair;
    pair.cert = sol.cert;
    pair.provenance = std::string("deterministic") + (have_u ? " forced" : "");

    const int dim = sc.profile.U.grid().dim();
    for (std::size_t i = 0; i < sol.uper.size(); ++i) {
        const Real tau = sol.uper.tau(i);
        const Real scale = physical_l2_scale(dim, std::exp(tau));

        Field diff = ulin(sc.eig, tau);
        diff *= sc.solver.eig_amplitude;
        diff += sol.uper.nodes[i];

        Field U1 = sc.profile.U;
        if (have_u) U1 += Utraj.nodes[i];
        Field U2 = U1;
        U2 += diff;

        pair.fit_times.push_back(std::exp(tau));
        pair.norm1.push_back(scale * U1.l2_norm());
        pair.norm2.push_back(scale * U2.l2_norm());
        pair.separation.push_back(scale * diff.l2_norm());
    }

    for (Real tau : stored_taus(sol.uper, sc.store_stride, sc.dense_window, sc.dense_dtau)) {
        const Real t = std::exp(tau);

        Field lin = ulin(sc.eig, tau);
        lin *= sc.solver.eig_amplitude;

        Field U1 = sc.profile.U;
        if (have_u) U1 += traj_sample(Utraj, tau);
        Field U2 = U1;
        U2 += lin;
        U2 += traj_sample(sol.uper, tau);

        Field Fshared = Fbar;
        if (sc.f_extra) Fshared += traj_sample(*sc.f_extra, tau);

        pair.times.push_back(t);
        pair.u1.push_back(to_physical(U1, t, FieldKind::velocity));
        pair.u2.push_back(to_physical(U2, t, FieldKind::velocity));
        pair.force.push_back(to_physical(Fshared, t, FieldKind::force));
    }
    finish_pair(pair);
    return pair;
}

std::size_t dense_suffix_start(const std::vector<Real>& times) {
    const std::size_t n = times.size();
    if (n < 3) return 0;
    // Walk back from the end while the log-spacing stays comparable to the
    // final gap; a coarse-to-dense transition shows up as a jump.
    const Real gap_end = std::log(times[n - 1] / times[n - 2]);
    if (!(gap_end > 0)) return 0;
    std::size_t start = n - 2;
    while (start > 0 && std::log(times[start] / times[start - 1]) <= 1.5 * gap_end) --start;
    if (n - start < 9) return 0;  // too short to be a usable quadrature window
    return start;
}

VerificationReport verify_pair(const SolutionPair& pair, const PairVerifyOptions& opt) {
    const bool stochastic = !pair.times_v.empty();
    const std::vector<Real>& times = stochastic ? pair.times_v : pair.times;
    const std::vector<Field>& a1 = stochastic ? pair.v1 : pair.u1;
    const std::vector<Field>& a2 = stochastic ? pair.v2 : pair.u2;
    const std::vector<Field>& ff = stochastic ? pair.vforce : pair.force;
    if (times.size() < 3) throw Error("verify_pair: need at least 3 stored snapshots");

    const std::size_t lo = opt.dense_only ? dense_suffix_start(times) : 0;
    std::vector<Real> ts(times.begin() + lo, times.end());
    std::vector<Field> u1(a1.begin() + lo, a1.end());
    std::vector<Field> u2(a2.begin() + lo, a2.end());
    std::vector<Field> f(ff.begin() + lo, ff.end());
    std::vector<Real> visc;
    const std::vector<Real>* viscp = nullptr;
    if (stochastic) {
        visc.assign(pair.visc.begin() + lo, pair.visc.end());
        viscp = &visc;
    }
    const WeakMode mode = stochastic ? WeakMode::random_pde : WeakMode::deterministic;

    // All snapshots of one member share a box ratio: boxes scale with sqrt(t),
    // and the bank must fit the smallest (earliest) box in the window.
    const Grid& g0 = u1.front().grid();
    TestFunctionBank bank = TestFunctionBank::make(g0.dim(), g0.box(), opt.bank_count, opt.bank_seed);

    VerificationReport rep;
    auto merge = [&rep](const std::string& prefix, VerificationReport part) {
        for (CheckRow& row : part.rows) {
            row.name = prefix + "." + row.name;
            rep.add(std::move(row));
        }
    };
    merge("weak_1", weak_residual(ts, u1, f, bank, mode, viscp, opt.weak_tol, opt.refine));
    merge("weak_2", weak_residual(ts, u2, f, bank, mode, viscp, opt.weak_tol, opt.refine));
    merge("energy_1", energy_check(ts, u1, f, viscp, opt.energy_slack));
    merge("energy_2", energy_check(ts, u2, f, viscp, opt.energy_slack));
    if (opt.a > 0)
        merge("separation",
              separation_certificate(pair.fit_times, pair.norm1, pair.separation, opt.a));
    return rep;
}

MollifyReport mollify_force(const ForceTrajectory& f, Real eps_target, Real width0, Real cutoff0,
                            ForceTrajectory* out, int max_halvings) {
    if (f.times.size() != f.fields.size() || f.times.size() < 3)
        throw Error("mollify_force: need a sampled trajectory");
    if (!(width0 > 0 && cutoff0 > 0)) throw Error("mollify_force: width and cutoff must be positive");

    MollifyReport rep;
    Real w = width0, c = cutoff0;
    ForceTrajectory best;
    for (int lev = 0; lev <= max_halvings; ++lev) {
        ForceTrajectory smooth;
        smooth.times = f.times;
        smooth.fields.clear();
        smooth.fields.reserve(f.times.size());
        for (std::size_t i = 0; i < f.times.size(); ++i) {
            const Real ti = f.times[i];
            const Grid& gi = f.fields[i].grid();
            Field acc(gi, f.fields[i].ncomp(), VarTag::physical);
            Real wsum = 0;
            for (std::size_t j = 0; j < f.times.size(); ++j) {
                const Real d = (f.times[j] - ti) / w;
                if (std::abs(d) > 4) continue;
                const Real dt = (f.times[std::min(j + 1, f.times.size() - 1)] -
                                 f.times[j == 0 ? 0 : j - 1]) /
                                2;
                const Real kw = std::exp(-0.5 * d * d) * std::max(dt, Real(0));
                if (kw <= 0) continue;
                Field term = (j == i || f.fields[j].grid() == gi)
                                 ? f.fields[j]
                                 : evaluate_at_scaled_nodes(f.fields[j], gi, 1.0);
                term *= kw;
                acc += term;
                wsum += kw;
            }
            if (wsum > 0) acc *= 1.0 / wsum;
            acc *= smooth01((ti - c) / c);  // vanishes for t <= cutoff
            smooth.fields.push_back(std::move(acc));
        }
        // L1((0,1); L2) distance to the input
        Real dist = 0;
        for (std::size_t i = 0; i + 1 < f.times.size(); ++i) {
            if (f.times[i] > 1) break;
            Field d0 = smooth.fields[i];
            d0 -= f.fields[i];
            Field d1 = smooth.fields[i + 1];
            d1 -= f.fields[i + 1];
            dist += (f.times[i + 1] - f.times[i]) / 2 * (d0.l2_norm() + d1.l2_norm());
        }
        rep.sweep_distances.push_back(dist);
        if (rep.sweep_distances.size() == 1 || dist < rep.achieved) {
            rep.achieved = dist;
            rep.width = w;
            rep.cutoff = c;
            best = std::move(smooth);
        }
        if (rep.achieved <= eps_target) {
            rep.met = true;
            break;
        }
        w /= 2;
        c /= 2;
    }
    if (out) *out = std::move(best);
    return rep;
}

SteerResult steer_to_zero(const Field& u_star, Real t_star, int n_nodes) {
    if (!(t_star > 0)) throw Error("steer_to_zero: horizon must be positive");
    if (n_nodes < 2) throw Error("steer_to_zero: need at least two nodes");
    u_star.check_finite("steer_to_zero input");

    Field dudt = u_star;
    dudt *= -1.0 / t_star;  // exact time derivative of the ramp
    Field lap = laplacian(u_star);
    // The quadratic term is formed alias-free on a doubled grid and restricted
    // back: the pointwise product on the original grid would alias high modes
    // into the retained band and the force would no longer balance the weak
    // form of the equation to spectral accuracy.
    const Grid& g = u_star.grid();
    Grid gfine(g.dim(), 2 * g.n(), g.box(), g.dealias_frac());
    Field ufine = evaluate_at_scaled_nodes(u_star, gfine, 1.0);
    Field advfine = leray_project(advect(ufine, ufine));
    const Real kcut = g.k0() * (g.n() / 2) * (1.0 - 1e-12);
    for (int c = 0; c < advfine.ncomp(); ++c) {
        auto& hat = advfine.hat(c);
        for_each_mode(gfine, [&](std::size_t idx, const std::array<Real, 3>& k) {
            if (std::abs(k[0]) >= kcut || std::abs(k[1]) >= kcut || std::abs(k[2]) >= kcut)
                hat[idx] = Complex{0, 0};
        });
    }
    Field adv = evaluate_at_scaled_nodes(advfine, g, 1.0);

    SteerResult res;
    for (int i = 0; i < n_nodes; ++i) {
        const Real t = t_star + t_star * static_cast<Real>(i) / (n_nodes - 1);
        const Real s = (2 * t_star - t) / t_star;
        Field u = u_star;
        u *= s;
        Field force = dudt;
        Field lt = lap;
        lt *= -s;
        force += lt;
        Field at = adv;
        at *= s * s;
        force += at;
        res.times.push_back(t);
        res.u.push_back(std::move(u));
        res.force.push_back(std::move(force));
    }
    // terminal state is identically zero by construction
    res.u.back() *= 0.0;
    return res;
}

namespace {

void heat_multiplier(Field& f, Real h, int which) {
    // which: 0 -> exp, 1 -> phi1, 2 -> phi2
    for (int c = 0; c < f.ncomp(); ++c) {
        auto& hat = f.hat(c);
        for_each_mode(f.grid(), [&](std::size_t idx, const std::array<Real, 3>& k) {
            const Real z = -(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * h;
            Real m;
            if (which == 0)
                m = std::exp(z);
            else if (which == 1)
                m = std::abs(z) < 1e-5 ? 1.0 + z / 2 + z * z / 6 : std::expm1(z) / z;
            else
                m = std::abs(z) < 1e-4 ? 0.5 + z / 6 + z * z / 24 : (std::expm1(z) - z) / (z * z);
            hat[idx] *= m;
        });
    }
}

Field ns_rhs(const Field& u) {
    Field b = leray_project(advect(u, u));
    b *= -1.0;
    zero_mean(b);
    return b;
}

}  // namespace

Field ns_smooth_run(const Field& u0, Real t, int steps) {
    if (!(t > 0)) throw Error("ns_smooth_run: time must be positive");
    const Grid& g = u0.grid();
    const Real kmax = g.k0() * (g.n() / 2);
    const Real umax = lp_norm(u0, std::numeric_limits<Real>::infinity());
    const Real hmax = 0.25 / (std::max(umax, Real(1e-10)) * kmax);
    if (steps == 0) steps = static_cast<int>(std::ceil(t / hmax)) * 2;
    const Real h = t / steps;
    Field u = leray_project(u0);
    zero_mean(u);
    for (int s = 0; s < steps; ++s) {
        Field b = ns_rhs(u);
        Field a = u;
        heat_multiplier(a, h, 0);
        Field b1 = b;
        heat_multiplier(b1, h, 1);
        b1 *= h;
        a += b1;
        Field b2 = ns_rhs(a);
        b2 -= b;
        heat_multiplier(b2, h, 2);
        b2 *= h;
        a += b2;
        u = std::move(a);
        u.check_finite("ns_smooth_run");
    }
    return u;
}

std::vector<IntegrabilityRow> force_integrability_scan(const ForceTrajectory& f,
                                                       const std::vector<Real>& ps) {
    if (f.times.size() != f.fields.size() || f.times.size() < 4)
        throw Error("force_integrability_scan: need a sampled trajectory");
    std::vector<IntegrabilityRow> table;
    for (Real p : ps) {
        IntegrabilityRow row;
        row.p = p;
        std::vector<Real> norms(f.times.size());
        for (std::size_t i = 0; i < f.times.size(); ++i) norms[i] = lp_norm(f.fields[i], p);
        for (std::size_t i = 0; i + 1 < f.times.size(); ++i)
            row.integral += (f.times[i + 1] - f.times[i]) / 2 * (norms[i] + norms[i + 1]);
        // local exponent near the lower end: fit over the first decade in t
        std::vector<Real> ts, vs;
        for (std::size_t i = 0; i < f.times.size(); ++i)
            if (f.times[i] <= 10 * f.times.front() || ts.size() < 5) {
                ts.push_back(f.times[i]);
                vs.push_back(norms[i]);
            }
        row.exponent = loglog_slope(ts, vs);
        table.push_back(row);
    }
    return table;
}

MomentEstimate force_moment_estimate(const Field& Ubar, Real q, int n_seeds, Real path_dt,
                                     Real path_t_end, Real R, Real tau0,
                                     unsigned long long seed0, bool zero_noise) {
    if (q < 1) throw Error("force_moment_estimate: need q >= 1");
    if (n_seeds < 2) throw Error("force_moment_estimate: need at least 2 seeds");
    const int d = Ubar.grid().dim();
    Field Fbar = background_force(Ubar);
    Field lap = laplacian(Ubar);
    const Real nF2 = Fbar.inner(Fbar);
    const Real nL2 = lap.inner(lap);
    const Real cross = Fbar.inner(lap);

    double s1 = 0, s2 = 0;
    for (int k = 0; k < n_seeds; ++k) {
        BrownianPath path =
            zero_noise ? BrownianPath::zero(path_dt, path_t_end)
                       : BrownianPath::sample(seed0 + static_cast<unsigned long long>(k),
                                              path_dt, path_t_end);
        TimeChange tc(path);
        StoppingTimes st = stopping_times(tc, R, tau0);
        const Real t_hi = st.t0;
        const Real t_lo = 1e-6 * t_hi;
        const int m = 400;  // geometric quadrature grid in t
        Real integral = 0, prev_t = 0, prev_v = 0;
        for (int i = 0; i <= m; ++i) {
            const Real t = t_lo * std::pow(t_hi / t_lo, static_cast<Real>(i) / m);
            const Real h = h_factor(path, t);
            const Real s = tc.theta(t);
            const Real c = 1.0 - h;
            const Real hb = std::sqrt(std::max(nF2 + 2 * c * cross + c * c * nL2, Real(0)));
            const Real v = std::pow(h, -2.0) * std::pow(s, -1.5 + 0.25 * d) * hb;
            if (i > 0) integral += (t - prev_t) / 2 * (v + prev_v);
            prev_t = t;
            prev_v = v;
        }
        const double x = std::pow(integral, 2 * q);
        s1 += x;
        s2 += x * x;
    }
    MomentEstimate est;
    est.n_seeds = n_seeds;
    est.mean = s1 / n_seeds;
    est.stderr_ = std::sqrt(std::max(s2 / n_seeds - est.mean * est.mean, 0.0) / n_seeds);
    return est;
}

}  // namespace ssnu
