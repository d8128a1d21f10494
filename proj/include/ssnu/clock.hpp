#pragma once

#include <functional>
#include <vector>

#include "ssnu/common.hpp"

namespace ssnu {

/// Sampled Brownian path on the uniform grid t_i = i*dt, W(0) = 0.
/// A path is deterministic given (seed, dt, t_end); the zero-noise mode
/// (W identically 0) is a first-class configuration with closed-form
/// oracles downstream.
struct BrownianPath {
    unsigned long long seed = 0;
    Real dt = 0;
    Real t_end = 0;
    bool zero_noise = false;
    std::vector<Real> w;

    static BrownianPath sample(unsigned long long seed, Real dt, Real t_end);
    static BrownianPath zero(Real dt, Real t_end);
    /// Pair-generation helper for causality tests: increments on [0, t_split]
    /// come from the shared stream, increments after from the tail stream.
    /// spliced(s, s2, ...) agrees with sample(s, ...) on [0, t_split].
    static BrownianPath spliced(unsigned long long shared_seed, unsigned long long tail_seed,
                                Real t_split, Real dt, Real t_end);

    std::size_t steps() const { return w.empty() ? 0 : w.size() - 1; }
    Real time(std::size_t i) const { return static_cast<Real>(i) * dt; }
    /// Linear interpolation; throws outside [0, t_end].
    Real value(Real t) const;
};

/// h(t) = e^{-W(t)+t/2}, the inverse exponential martingale.
Real h_factor(const BrownianPath& path, Real t);

/// The random clock theta(t) = int_0^t e^{W(s)-s/2} ds (trapezoidal on the
/// path grid) together with its inverse.
class TimeChange {
  public:
    explicit TimeChange(BrownianPath path);

    const BrownianPath& path() const { return path_; }
    Real theta(Real t) const;
    Real theta_end() const { return th_.back(); }
    /// Monotone bisection on the grid values + linear interpolation.
    /// Throws for s outside [0, theta_end()].
    Real theta_inverse(Real s) const;

  private:
    BrownianPath path_;
    std::vector<Real> th_;
};

/// Discrete Hoelder seminorm: max over sample pairs of
/// |v(t1)-v(t2)| / |t1-t2|^gamma, restricted to |t1-t2| >= min_sep
/// (min_sep <= 0 picks the first grid spacing).
Real holder_seminorm(const std::vector<Real>& times, const std::vector<Real>& values,
                     Real gamma, Real min_sep = 0);

/// Stopping data of a path. Times tau_r* live on the clock (theta) axis;
/// no-crossing resolves to +infinity.
struct StoppingTimes {
    Real R = 0;
    Real tau0 = 0;
    Real tau_r1 = 0;  // first s with ||W o theta^{-1}||_{C^{1/4}([0,s])} >= R
    Real tau_r2 = 0;  // first s with |theta^{-1}(s)| >= R
    Real tau_r = 0;   // min of the two
    Real cap = 0;     // T = tau0 ^ log tau_r
    Real t0 = 0;      // T0 = theta^{-1}(e^{tau0} ^ tau_r)
};

StoppingTimes stopping_times(const TimeChange& tc, Real R, Real tau0);

struct ViscosityDeviationReport {
    Real max_ratio = 0;  // max over the s grid of |h(theta^{-1}(e^s)) - 1| / e^{s/4}
    Real argmax_s = 0;
    int n_points = 0;
};

/// Sweeps e^s over the clock grid up to tau_r and reports the worst ratio.
ViscosityDeviationReport viscosity_deviation_check(const TimeChange& tc, const StoppingTimes& st);

/// A path functional returns a series sampled on the path grid (one value
/// per grid time). Adaptedness surrogates: stopping times enter as their
/// indicator series t -> 1{tau <= t}.
using PathFunctional = std::function<std::vector<Real>(const BrownianPath&)>;

struct CausalityReport {
    bool pass = false;
    Real max_disagreement = 0;
    int n_pairs = 0;
    Real t_split = 0;
};

/// Generates path pairs that agree on [0, t_split] and are independent
/// after, and checks the functional outputs agree on [0, t_split] to 1e-10.
CausalityReport causality_check(const PathFunctional& fn, Real t_split, int n_pairs,
                                Real dt, Real t_end, unsigned long long seed = 1);

}  // namespace ssnu
