#pragma once

// Frozen fitted constants for the "bounded up to a constant" lemma checks.
// Protocol: each constant is the maximum observed ratio over the stated
// calibration seeds, multiplied by 1.3 headroom, and is then asserted with
// margin <= 1 on fresh seeds that were never used for fitting. Refit (and
// say so in the ledger of the change) only if the discretization, the
// builtin profile, or the random-field generator changes.

namespace ssnu::fixtures {

// --- paraproduct inequalities -----------------------------------------------
// d=2, box 10, scalar random fields (kfrac 0.25), beta = 1, alpha = -0.5,
// calibration seeds 500..549 at n=64 (fitted maxima 0.1112 / 0.1394 /
// 0.3877). Fitted maxima at n=128 are smaller (0.0974 / 0.1189 / 0.3501),
// so the constants are stable under grid doubling.
inline constexpr double para_beta = 1.0;
inline constexpr double para_alpha = -0.5;
inline constexpr double para_C_lo_linf = 0.145;   // ||f<g||_{B^b} <= C ||f||_inf ||g||_{B^b}
inline constexpr double para_C_lo_besov = 0.182;  // ||f<g||_{B^{a+b}} <= C ||f||_{B^a} ||g||_{B^b}
inline constexpr double para_C_resonant = 0.505;  // ||f o g||_{B^{a+b}} <= C ||f||_{B^a} ||g||_{B^b}

// --- semigroup decay around the builtin unstable 2D profile -----------------
// annular vortex amplitude 20, sigma 1.5, n=32 box 10; growth rate
// a = 0.421428 (leading eigenvalue at this resolution), delta = 0.05,
// tau in [0.05, 1.9], calibration seeds 1000..1009 (fitted maxima
// 2.011 / 5.339 / 2.621 for (sigma1,sigma2) = (0,1) / (0,2) / (1,2)).
inline constexpr double decay_a = 0.421428;
inline constexpr double decay_delta = 0.05;
inline constexpr double decay_C_01 = 2.62;
inline constexpr double decay_C_02 = 6.95;
inline constexpr double decay_C_12 = 3.41;

// --- block-semigroup bound (same profile, N = 3) ----------------------------
// c is fixed, not fitted. C1 is fitted on the transient subset
// 2^{2j} tau <= 1 and C2 on the remainder given C1, calibration seeds
// 1000..1009; fresh-seed worst margin 0.63.
inline constexpr int block_N = 3;
inline constexpr double block_c = 0.5;
inline constexpr double block_C1 = 31.0;
inline constexpr double block_C2 = 45.3;

// --- builtin unstable 3D profile --------------------------------------------
// Elongated vortex column: planar annular ring (amplitude 40, sigma 1.5)
// extended along the axis with a sigma_axis = 5 Gaussian, n=32 box 10. The
// axial confinement penalty on the planar growth rate is measured to be
// 7.25 / sigma_axis at this amplitude (envelope model: sqrt(E/2)/sigma_axis
// with extraction scale E ~ 105), so weaker columns are neutrally stable:
// the amplitude-20 ring of the 2D fixtures never clears the penalty in 3D.
// The column's Gaussian tail wraps the box, which caps the profile mass
// margin at 0.871; scenarios using this profile lower margin_min and rely
// on the weak-residual verification to certify the wrap-around is harmless.
inline constexpr double ring3d_amplitude = 40.0;
inline constexpr double ring3d_sigma = 1.5;
inline constexpr double ring3d_sigma_axis = 5.0;
inline constexpr double ring3d_margin_min = 0.85;
// leading growth rate at n=32 box 10 (lift_planar_eigenpair residual 5e-8,
// matching the 3D propagator Arnoldi); lambda = 1.047599 + 3.390360i
inline constexpr double ring3d_a = 1.047599;

}  // namespace ssnu::fixtures
