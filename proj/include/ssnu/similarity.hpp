#pragma once

#include "ssnu/spectral.hpp"

namespace ssnu {

enum class FieldKind { velocity, force };

/// Grid on which a physical-variables field at time t lives: same node count,
/// half-width sqrt(t) times the similarity half-width.
Grid physical_grid(const Grid& sim_grid, Real t);

/// Map a similarity-variables field at tau = log t to physical variables at
/// time t. Velocity scales by t^{-1/2}, force by t^{-3/2}; node-exact because
/// the physical box contracts with sqrt(t).
Field to_physical(const Field& U, Real t, FieldKind kind);

/// Inverse map. If the physical field does not live on physical_grid(sim, t)
/// the values are obtained by trigonometric resampling at dilated nodes; the
/// caller must keep the support inside the box (mass_margin check).
Field to_similarity(const Field& u, Real t, FieldKind kind, const Grid& sim_grid,
                    Real margin_min = 0.99);

/// ubar(t, x) = t^{-1/2} Ubar(x/sqrt(t)).
Field background_velocity(const Field& Ubar, Real t);

/// Relative L2 round-trip error of dilating by scale and back; measures the
/// interpolation quality for cross-grid resampling.
Real resample_roundtrip_error(const Field& f, Real scale);

}  // namespace ssnu
