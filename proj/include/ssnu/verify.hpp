#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "ssnu/spectral.hpp"

namespace ssnu {

/// One divergence-free compactly supported test function, defined through a
/// closed-form radial potential chi centered at `center` with the given
/// radius; the vector field is the perpendicular gradient of chi (2D) or the
/// curl of chi * axis (3D), taken spectrally on whatever grid it is sampled
/// on -- so every sample is exactly discretely divergence-free.
/// The potential is a Gaussian-windowed bump, exp(-s^2/(2 window^2)) bump(s)
/// with s = |x - center| / radius: still C-infinity with compact support,
/// but with a far faster Fourier tail than the bare bump, which sets the
/// achievable weak-residual floor at finite resolution.
struct TestFunction {
    int dim = 2;
    std::array<Real, 3> center{};
    Real radius = 1;
    Real window = 0.25;
    std::array<Real, 3> axis{0, 0, 1};

    /// Potential sample (scalar bump, support |x - center| < radius).
    Field sample_potential(const Grid& g) const;
    /// Divergence-free vector field, physical tag.
    Field sample(const Grid& g) const;
    /// Nonnegative scalar cutoff (the squared bump) for local energy tests.
    Field sample_bump_squared(const Grid& g) const;
};

/// A seeded, reproducible set of test functions with randomized centers and
/// radii, all supported in the inner half-box of the given reference box.
struct TestFunctionBank {
    std::vector<TestFunction> psi;
    unsigned seed = 0;

    static TestFunctionBank make(int dim, Real box, int count = 24, unsigned seed = 2026);
};

struct CheckRow {
    std::string name;
    Real t = 0;
    Real lhs = 0;
    Real rhs = 0;
    Real margin = 0;     // normalized; the pass criterion is margin <= tolerance
    Real tolerance = 0;
    bool pass = false;
};

struct VerificationReport {
    std::vector<CheckRow> rows;
    bool pass = true;
    Real worst = 0;  // largest margin seen

    void add(CheckRow row);
};

enum class WeakMode { deterministic, random_pde };

/// Weak-formulation residual against every bank member:
///   <u(t),psi> - <u(t0),psi> = int_{t0}^{t} [ h <u,Lap psi>
///                                             + <u (x) u, grad psi>
///                                             + <f,psi> ] ds
/// with h == 1 in deterministic mode and h = visc[i] per node in random-pde
/// mode (the spatially constant random viscosity of the transformed
/// equation). Composite trapezoid on the given time grid; the quadrature
/// error is Richardson-estimated and the check refuses when it exceeds the
/// tolerance. Margins are normalized by the accumulated size of the
/// right-hand-side terms.
/// `refine` zero-pads each snapshot onto a refine-times finer grid of the
/// same box and samples the test functions there, which controls the
/// spectral-tail error of the pairings without touching the data.
VerificationReport weak_residual(const std::vector<Real>& times, const std::vector<Field>& u,
                                 const std::vector<Field>& f, const TestFunctionBank& bank,
                                 WeakMode mode, const std::vector<Real>* visc = nullptr,
                                 Real tol = 1e-6, int refine = 2);

/// Energy inequality along one trajectory:
///   ||u(t)||^2 + 2 int h ||grad u||^2 <= ||u(t0)||^2 + 2 int <f,u> + slack.
/// One row per time node; margin = (LHS - RHS) / scale.
VerificationReport energy_check(const std::vector<Real>& times, const std::vector<Field>& u,
                                const std::vector<Field>& f,
                                const std::vector<Real>* visc = nullptr, Real slack = 1e-6);

/// Monte Carlo surrogate for the expectation form of the energy inequality:
/// the mean of per-seed worst margins must not exceed 3 standard errors plus
/// the slack. A statistical test, not a certification.
CheckRow mc_energy_margin(const std::vector<Real>& per_seed_margins, Real slack = 1e-6);

/// p = (-Lap)^{-1} [ div div (u (x) u) - div f ], zero mode set to 0.
Field pressure_recover(const Field& u, const Field& f);

/// Local energy inequality tested against the nonnegative squared bumps of
/// the bank, with the time term integrated by parts onto the window
/// endpoints:
///   [int 1/2|u|^2 phi]_{t0}^{t1} + intint ( |grad u|^2 phi - 1/2|u|^2 Lap phi
///       - (1/2|u|^2 + p) u . grad phi - (f.u) phi ) <= slack * scale.
/// Deterministic pipeline only; requesting the random-pde mode is an error.
VerificationReport local_energy_check(const std::vector<Real>& times, const std::vector<Field>& u,
                                      const std::vector<Field>& f, const TestFunctionBank& bank,
                                      Real slack = 1e-6,
                                      WeakMode mode = WeakMode::deterministic);

struct DecayFit {
    Real slope = 0;
    Real stderr_ = 0;
    int n = 0;
};

/// Least-squares log-log fit of value against t over [t_lo, t_hi].
/// Throws on nonpositive values or fewer than 8 points.
DecayFit decay_fit(const std::vector<Real>& t, const std::vector<Real>& v, Real t_lo = 0,
                   Real t_hi = std::numeric_limits<Real>::infinity());

/// Compares the fitted decay rate of ||u1|| with the growth rate of the
/// separation ||u1 - u2|| and asserts their difference is at least 0.9 a.
VerificationReport separation_certificate(const std::vector<Real>& times,
                                          const std::vector<Real>& norm1,
                                          const std::vector<Real>& separation, Real a);

}  // namespace ssnu
