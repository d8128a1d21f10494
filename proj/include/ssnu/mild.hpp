#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ssnu/clock.hpp"
#include "ssnu/operator.hpp"

namespace ssnu {

/// Uniformly sampled trajectory on [tau_min, cap].
struct WindowedTrajectory {
    Real tau_min = 0;
    Real dtau = 0;
    std::vector<Field> nodes;  // node i lives at tau_min + i*dtau

    Real tau(std::size_t i) const { return tau_min + static_cast<Real>(i) * dtau; }
    Real cap() const { return tau(nodes.empty() ? 0 : nodes.size() - 1); }
    std::size_t size() const { return nodes.size(); }

    static WindowedTrajectory zeros(const Grid& g, int ncomp, Real tau_min, Real cap, Real dtau);
};

enum class XSpace { besov, sobolev };
enum class Pipeline { stochastic, deterministic };

struct SolverConfig {
    int N = 3;            // regularity index, smallest integer above 5/2
    Real eps = 0.2;       // weight exponent offset, in (0, 1/4)
    Real delta = 0.05;    // refusal threshold on the measured growth rate, in (0, eps)
    Real tau0 = -4.0;     // deterministic horizon (negative)
    Real tau_min = 0;     // window cutoff; 0 means tau0 - 15
    Real dtau = 0.02;
    Real tol = 1e-8;      // Picard update tolerance in the X norm
    Real tail_tol = 1e-6; // relative tolerance for the neglected Duhamel tail
    int max_iter = 40;
    XSpace space = XSpace::besov;
    Real eig_amplitude = 1.0;  // scale of the linear mode seeding the iteration
    Real a = 0;                // measured growth rate for the X weights (forced solver;
                               // the perturbation solver takes it from the eigenpair)

    void validate() const;
    Real window_lo() const { return tau_min != 0 ? tau_min : tau0 - 15.0; }
};

/// sup over nodes of e^{-(a+eps)tau} * (Besov B^N_{2,inf} or Sobolev H^N) norm.
Real x_norm(const WindowedTrajectory& traj, Real a, Real eps, int N, XSpace space);

/// sup over t of sum_{k<=N} t^{3/4 - a - eps + k/2} ||grad^k f(t)||_{L2}.
Real y_norm(const std::vector<Real>& times, const std::vector<Field>& f, int N, Real a, Real eps);

struct DuhamelResult {
    WindowedTrajectory traj;
    Real tail_estimate = 0;   // L2 envelope integral of the forcing below tau_min
    Real envelope_rate = 0;   // fitted exponential rate of ||G|| near tau_min
};

/// U(tau) = int_{tau_min}^{tau} e^{(tau-s)L} G(s) ds, composite trapezoid
/// fused with the semigroup recursion (one short propagator apply per node).
/// The neglected tail below tau_min is estimated from the fitted e^{beta s}
/// envelope of ||G(s)||_{L2}; a tail above tail_tol * max||G|| is refused
/// with a suggested tau_min.  Pass certify_tail = false when the window is
/// an initial-value problem with explicit data at tau_min (nothing is
/// neglected); the forcing then need not decay.
DuhamelResult duhamel(const LinearizedOperator& op, const WindowedTrajectory& G,
                      Real tail_tol = 1e-6, int steps_refine = 1, bool certify_tail = true);

/// Right-hand side of the perturbation equation at one node.
/// stochastic: -P(ulin.grad uper + uper.grad ulin + ulin.grad ulin + uper.grad uper)
///             + (hstar - 1) Lap(uper + ulin)
/// deterministic: the same quadratic bracket extended by the cross terms with
/// the forced component ubig, and no viscosity term.
Field perturbation_terms(Pipeline pipe, const Field& uper, const Field& ulin,
                         const Field* ubig = nullptr,
                         std::optional<Real> hstar = std::nullopt);

struct PicardCertificate {
    std::string pipeline;
    Real tau0 = 0;
    Real cap = 0;             // effective horizon T
    int iterations = 0;
    Real final_update = 0;    // X norm of the last Picard update
    Real contraction = 0;     // worst ratio of successive update norms
    Real bound_margin = 0;    // max_tau ||U^per(tau)||_{H^N} / e^{(a+eps)tau}
    Real tail_estimate = 0;
    Real fixed_point_residual = 0;  // X norm of U^per - duhamel(terms(U^per))
    bool accepted = false;
};

struct PerturbationSolution {
    WindowedTrajectory uper;
    PicardCertificate cert;
};

/// Picard iteration from 0 for the perturbation around amplitude * U^lin.
/// Stochastic pipeline: horizon and per-node viscosity h(theta^{-1}(e^tau))
/// come from (tc, st); deterministic: horizon is cfg.tau0 and ubig supplies
/// the forced component (may be null for the pure perturbation equation).
/// Refuses when the measured growth rate is <= cfg.delta, and reports
/// divergence (with a suggestion to lower tau0) when the contraction
/// factor reaches 1.
PerturbationSolution solve_perturbation(const LinearizedOperator& op, const Eigenpair& eig,
                                        const SolverConfig& cfg, Pipeline pipe,
                                        const TimeChange* tc = nullptr,
                                        const StoppingTimes* st = nullptr,
                                        const WindowedTrajectory* ubig = nullptr);

struct ForcedSolution {
    WindowedTrajectory u;
    PicardCertificate cert;
    Real xnorm_ratio = 0;  // x_norm(U) / x_norm(F)
};

/// Picard on U = int e^{(tau-s)L} P(F - U.grad U) ds with U(tau_min) = 0.
ForcedSolution solve_forced(const LinearizedOperator& op, const WindowedTrajectory& F,
                            const SolverConfig& cfg);

}  // namespace ssnu
