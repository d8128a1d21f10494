#include "ssnu/clock.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ssnu {

namespace {

std::size_t grid_steps(Real dt, Real t_end) {
    if (dt <= 0) throw Error("brownian path: dt must be positive");
    if (t_end < dt) throw Error("brownian path: horizon shorter than one step");
    return static_cast<std::size_t>(std::llround(t_end / dt));
}

// One standard normal per call with the distribution cache cleared, so a
// generator switch mid-path cannot leak state across the splice point.
Real draw_normal(std::mt19937_64& gen) {
    std::normal_distribution<Real> dist;
    return dist(gen);
}

}  // namespace

BrownianPath BrownianPath::sample(unsigned long long seed, Real dt, Real t_end) {
    const std::size_t m = grid_steps(dt, t_end);
    BrownianPath p;
    p.seed = seed;
    p.dt = dt;
    p.t_end = static_cast<Real>(m) * dt;
    p.w.resize(m + 1);
    p.w[0] = 0;
    std::mt19937_64 gen(seed);
    const Real scale = std::sqrt(dt);
    for (std::size_t i = 0; i < m; ++i) p.w[i + 1] = p.w[i] + scale * draw_normal(gen);
    return p;
}

BrownianPath BrownianPath::zero(Real dt, Real t_end) {
    const std::size_t m = grid_steps(dt, t_end);
    BrownianPath p;
    p.dt = dt;
    p.t_end = static_cast<Real>(m) * dt;
    p.zero_noise = true;
    p.w.assign(m + 1, 0.0);
    return p;
}

BrownianPath BrownianPath::spliced(unsigned long long shared_seed, unsigned long long tail_seed,
                                   Real t_split, Real dt, Real t_end) {
    const std::size_t m = grid_steps(dt, t_end);
    BrownianPath p;
    p.seed = shared_seed;
    p.dt = dt;
    p.t_end = static_cast<Real>(m) * dt;
    p.w.resize(m + 1);
    p.w[0] = 0;
    std::mt19937_64 gen_shared(shared_seed), gen_tail(tail_seed);
    const Real scale = std::sqrt(dt);
    for (std::size_t i = 0; i < m; ++i) {
        const bool shared = (static_cast<Real>(i + 1) * dt) <= t_split + 1e-12;
        p.w[i + 1] = p.w[i] + scale * draw_normal(shared ? gen_shared : gen_tail);
    }
    return p;
}

Real BrownianPath::value(Real t) const {
    if (t < -1e-12 || t > t_end + 1e-12) throw Error("brownian path: time out of range");
    t = std::clamp(t, Real(0), t_end);
    const Real x = t / dt;
    const std::size_t i = std::min(static_cast<std::size_t>(x), steps() - 1);
    const Real frac = x - static_cast<Real>(i);
    return w[i] + frac * (w[i + 1] - w[i]);
}

Real h_factor(const BrownianPath& path, Real t) {
    return std::exp(-path.value(t) + t / 2);
}

TimeChange::TimeChange(BrownianPath path) : path_(std::move(path)) {
    const std::size_t m = path_.steps();
    th_.resize(m + 1);
    th_[0] = 0;
    Real prev = 1.0;  // integrand e^{W(s)-s/2} at s=0
    for (std::size_t i = 1; i <= m; ++i) {
        const Real cur = std::exp(path_.w[i] - path_.time(i) / 2);
        th_[i] = th_[i - 1] + path_.dt / 2 * (prev + cur);
        prev = cur;
    }
}

Real TimeChange::theta(Real t) const {
    if (t < -1e-12 || t > path_.t_end + 1e-12) throw Error("theta: time out of range");
    t = std::clamp(t, Real(0), path_.t_end);
    const Real x = t / path_.dt;
    const std::size_t i = std::min(static_cast<std::size_t>(x), path_.steps() - 1);
    const Real frac = x - static_cast<Real>(i);
    return th_[i] + frac * (th_[i + 1] - th_[i]);
}

Real TimeChange::theta_inverse(Real s) const {
    if (s < -1e-12 || s > th_.back() + 1e-12) throw Error("theta_inverse: value out of range");
    s = std::clamp(s, Real(0), th_.back());
    // th_ is strictly increasing; find the bracketing cell.
    const auto it = std::upper_bound(th_.begin(), th_.end(), s);
    if (it == th_.begin()) return 0;
    const std::size_t i = static_cast<std::size_t>(it - th_.begin()) - 1;
    if (i >= path_.steps()) return path_.t_end;
    const Real span = th_[i + 1] - th_[i];
    const Real frac = span > 0 ? (s - th_[i]) / span : 0;
    return path_.time(i) + frac * path_.dt;
}

Real holder_seminorm(const std::vector<Real>& times, const std::vector<Real>& values,
                     Real gamma, Real min_sep) {
    if (times.size() != values.size()) throw Error("holder_seminorm: size mismatch");
    if (times.size() < 2) throw Error("holder_seminorm: need at least 2 samples");
    if (min_sep <= 0) min_sep = times[1] - times[0];
    Real best = 0;
    for (std::size_t i = 0; i < times.size(); ++i)
        for (std::size_t j = i + 1; j < times.size(); ++j) {
            const Real sep = times[j] - times[i];
            if (sep < min_sep - 1e-12) continue;
            best = std::max(best, std::abs(values[j] - values[i]) / std::pow(sep, gamma));
        }
    return best;
}

StoppingTimes stopping_times(const TimeChange& tc, Real R, Real tau0) {
    if (R <= 1) throw Error("stopping_times: need R > 1");
    const Real inf = std::numeric_limits<Real>::infinity();
    StoppingTimes st;
    st.R = R;
    st.tau0 = tau0;
    st.tau_r1 = inf;
    st.tau_r2 = inf;

    // Clock-axis grid with a path-independent spacing, so that crossing
    // detection below theta(t) depends only on the path up to t.
    const Real ds = tc.path().dt;
    const std::size_t m = static_cast<std::size_t>(tc.theta_end() / ds);
    std::vector<Real> sg(m + 1), wg(m + 1), tg(m + 1);
    for (std::size_t k = 0; k <= m; ++k) {
        sg[k] = static_cast<Real>(k) * ds;
        tg[k] = tc.theta_inverse(sg[k]);
        wg[k] = tc.path().value(tg[k]);
    }
    // Running C^{1/4} seminorm of W o theta^{-1}; pairs closer than one grid
    // step are excluded.
    Real running = 0;
    for (std::size_t k = 1; k <= m; ++k) {
        if (std::isinf(st.tau_r1)) {
            for (std::size_t i = 0; i < k; ++i) {
                const Real sep = sg[k] - sg[i];
                if (sep < ds - 1e-15) continue;
                running = std::max(running, std::abs(wg[k] - wg[i]) / std::pow(sep, 0.25));
            }
        }
        if (std::isinf(st.tau_r1) && running >= R) st.tau_r1 = sg[k];
        if (std::isinf(st.tau_r2) && std::abs(tg[k]) >= R) st.tau_r2 = sg[k];
        if (!std::isinf(st.tau_r1) && !std::isinf(st.tau_r2)) break;
    }
    st.tau_r = std::min(st.tau_r1, st.tau_r2);
    st.cap = std::min(tau0, std::log(st.tau_r));
    const Real target = std::min(std::exp(tau0), st.tau_r);
    if (target > tc.theta_end() + 1e-12)
        throw Error("stopping_times: e^{tau0} ^ tau_R beyond the clock range");
    st.t0 = tc.theta_inverse(target);
    return st;
}

ViscosityDeviationReport viscosity_deviation_check(const TimeChange& tc, const StoppingTimes& st) {
    ViscosityDeviationReport rep;
    const Real ds = tc.path().dt;
    const std::size_t m = static_cast<std::size_t>(tc.theta_end() / ds);
    for (std::size_t k = 1; k <= m; ++k) {
        const Real sigma = static_cast<Real>(k) * ds;  // e^s
        if (sigma > st.tau_r) break;
        const Real t = tc.theta_inverse(sigma);
        const Real ratio = std::abs(h_factor(tc.path(), t) - 1.0) / std::pow(sigma, 0.25);
        ++rep.n_points;
        if (ratio > rep.max_ratio) {
            rep.max_ratio = ratio;
            rep.argmax_s = std::log(sigma);
        }
    }
    return rep;
}

CausalityReport causality_check(const PathFunctional& fn, Real t_split, int n_pairs,
                                Real dt, Real t_end, unsigned long long seed) {
    if (n_pairs < 1) throw Error("causality_check: need at least one pair");
    if (!(t_split > 0 && t_split < t_end)) throw Error("causality_check: t_split out of range");
    CausalityReport rep;
    rep.n_pairs = n_pairs;
    rep.t_split = t_split;
    rep.pass = true;
    for (int p = 0; p < n_pairs; ++p) {
        const unsigned long long shared = seed + 3ull * p;
        BrownianPath a = BrownianPath::spliced(shared, seed + 3ull * p + 1, t_split, dt, t_end);
        BrownianPath b = BrownianPath::spliced(shared, seed + 3ull * p + 2, t_split, dt, t_end);
        const std::vector<Real> fa = fn(a), fb = fn(b);
        if (fa.size() != fb.size()) {
            rep.pass = false;
            rep.max_disagreement = std::numeric_limits<Real>::infinity();
            return rep;
        }
        for (std::size_t i = 0; i < fa.size(); ++i) {
            if (static_cast<Real>(i) * dt > t_split + 1e-12) break;
            rep.max_disagreement = std::max(rep.max_disagreement, std::abs(fa[i] - fb[i]));
        }
    }
    rep.pass = rep.max_disagreement <= 1e-10;
    return rep;
}

}  // namespace ssnu
