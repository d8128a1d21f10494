#pragma once

#include "ssnu/mild.hpp"
#include "ssnu/similarity.hpp"
#include "ssnu/verify.hpp"

namespace ssnu {

/// A time-indexed physical-variables field series; each entry lives on the
/// physical grid of its own time.
struct ForceTrajectory {
    std::vector<Real> times;
    std::vector<Field> fields;
};

/// g(t, x) = t^{-3/2} H_bar(log t, x/sqrt(t)) with
/// H_bar(tau) = F_bar + (1 - h(theta^{-1}(e^tau))) Lap Ubar.
/// tc == nullptr selects the deterministic pipeline (h identically 1, so
/// H_bar reduces to F_bar).
Field force_g(const TimeChange* tc, const Field& Ubar, Real t);

/// f(t) = h(t)^{-2} g(theta(t)); throws for t outside (0, path horizon].
/// At t = 0 the force is deterministic but unbounded in L2; callers sample
/// strictly positive times only.
Field force_f(const TimeChange& tc, const Field& Ubar, Real t);

struct SolutionPair {
    /// Scalar diagnostics at every solver node (full tau resolution), using
    /// the exact L2 scaling of the physical-variables map, so they cost no
    /// physical-grid construction and extend past the largest physical box
    /// the grid can represent.
    std::vector<Real> fit_times;   // strictly increasing
    std::vector<Real> norm1, norm2;  // ||u1||_{L2}, ||u2||_{L2}
    std::vector<Real> separation;    // ||u1 - u2||_{L2}
    Real separation_slope = 0;       // log-log fit over fit_times

    /// Stored field snapshots: every store_stride-th solver node plus the
    /// densely sampled tail subwindow (see dense_window in the scenarios).
    std::vector<Real> times;    // strictly increasing, in [t_lo, t_hi]
    std::vector<Field> u1, u2;  // physical variables, per-time grids
    std::vector<Field> force;   // the shared body force at the same times
    Real t_lo = 0, t_hi = 0;

    /// Stochastic pipeline only (empty otherwise): the transformed
    /// trajectories v_i on the clock axis s = theta(t), the shared
    /// transformed force g, and the per-node random viscosity
    /// h(theta^{-1}(s)). Weak-form and energy checks run HERE -- at the u
    /// level the equation carries an Ito noise term, while the v system is a
    /// classical PDE with a random viscosity coefficient; the u-level
    /// statement follows from the exact change of variables, which is tested
    /// separately (similarity and clock round trips).
    std::vector<Real> times_v;
    std::vector<Field> v1, v2, vforce;
    std::vector<Real> visc;

    PicardCertificate cert;
    std::string provenance;
};

struct StochasticScenario {
    BackgroundProfile profile;
    Eigenpair eig;
    SolverConfig solver;  // tau0 taken from here
    unsigned long long seed = 1;
    bool zero_noise = false;
    Real path_dt = 1e-3;
    Real path_t_end = 4.0;
    Real R = 5.0;
    std::size_t store_stride = 4;  // keep every k-th tau node in the output
    /// Dense tail: the last dense_window tau-units before the window cap are
    /// stored at spacing dense_dtau (the perturbation is cubically
    /// interpolated between solver nodes; everything else is closed-form).
    /// Weak-form checks are trapezoid-limited in time, so they need a finer
    /// sampling than the solver needs. 0 disables the tail.
    Real dense_window = 0;
    Real dense_dtau = 0.005;
};

/// u1(t) = h(t)^{-1} v1(theta(t)), u2 likewise, with v1 = physical(Ubar) and
/// v2 = physical(Ubar + U^lin + U^per); the shared force is force_f.
SolutionPair assemble_stochastic_pair(const StochasticScenario& sc);

struct DeterministicScenario {
    BackgroundProfile profile;
    Eigenpair eig;
    SolverConfig solver;
    /// Extra forcing for the forced component U, in similarity variables on
    /// the solver window; null means the U = 0 branch.
    const WindowedTrajectory* f_extra = nullptr;
    std::size_t store_stride = 4;
    Real dense_window = 0;  // as in StochasticScenario
    Real dense_dtau = 0.005;
};

/// Pair (u + ubar, utilde) driven by the shared force fbar + f_extra, where
/// utilde comes from Utilde = Ubar + U + U^lin + U^per.
SolutionPair assemble_deterministic_pair(const DeterministicScenario& sc);

/// Index of the first node of the densely sampled terminal subwindow of a
/// stored time grid (0 when the spacing is uniform). Time-integral checks
/// are trapezoid-limited, so they run on this suffix.
std::size_t dense_suffix_start(const std::vector<Real>& times);

struct PairVerifyOptions {
    Real weak_tol = 1e-5;
    Real energy_slack = 1e-6;
    int refine = 2;
    int bank_count = 20;
    unsigned bank_seed = 2026;
    Real a = 0;              // > 0 adds the separation-rate certificate
    bool dense_only = true;  // restrict the PDE checks to the dense suffix
};

/// Full independent verification of a pair: weak residual and energy
/// inequality for both members against the shared force (on the v level for
/// stochastic pairs, see SolutionPair), plus the separation certificate on
/// the full-resolution fit series when a growth rate is supplied.
VerificationReport verify_pair(const SolutionPair& pair, const PairVerifyOptions& opt = {});

struct MollifyReport {
    Real achieved = 0;  // L1((0,1); L2) distance to the input force
    Real width = 0;
    Real cutoff = 0;
    bool met = false;
    std::vector<Real> sweep_distances;  // one entry per (width, cutoff) halving
};

/// Temporal mollification (discrete Gaussian kernel of the given width) plus
/// a smooth cutoff of the interval (0, cutoff); halves both until the
/// distance target is met or max_halvings is exhausted.
MollifyReport mollify_force(const ForceTrajectory& f, Real eps_target, Real width0, Real cutoff0,
                            ForceTrajectory* out, int max_halvings = 10);

struct SteerResult {
    std::vector<Real> times;
    std::vector<Field> u;      // linear ramp from u_star to exactly 0
    std::vector<Field> force;  // f = du/dt - Lap u + P(u.grad u), spectral assembly
};

/// Ramp u(t) = ((2 T_star - t)/T_star) u_star on [T_star, 2 T_star].
SteerResult steer_to_zero(const Field& u_star, Real t_star, int n_nodes = 33);

/// A short smooth pseudospectral Navier-Stokes run (unit viscosity, ETD
/// integrator) supplying an H^2 state for the steering pipeline.
Field ns_smooth_run(const Field& u0, Real t, int steps = 0);

struct IntegrabilityRow {
    Real p = 0;
    Real integral = 0;   // int ||f(t)||_{L^p} dt over the stored window
    Real exponent = 0;   // fitted local power of ||f(t)||_{L^p} as t -> t_lo
};

std::vector<IntegrabilityRow> force_integrability_scan(const ForceTrajectory& f,
                                                       const std::vector<Real>& ps);

struct MomentEstimate {
    Real mean = 0;
    Real stderr_ = 0;
    int n_seeds = 0;
};

/// Monte Carlo E[ ||f||_{L1_t L2}^{2q} ] using the scalar closed form
/// ||f(t)||_{L2} = h(t)^{-2} theta(t)^{-3/2+d/4} ||H_bar(log theta(t))||_{L2}.
MomentEstimate force_moment_estimate(const Field& Ubar, Real q, int n_seeds, Real path_dt,
                                     Real path_t_end, Real R, Real tau0,
                                     unsigned long long seed0 = 1, bool zero_noise = false);

}  // namespace ssnu
