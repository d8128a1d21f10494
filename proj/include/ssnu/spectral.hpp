#pragma once

#include <array>

#include "ssnu/field.hpp"

namespace ssnu {

struct BesovParams {
    Real alpha = 0;
    Real p = 2;   // integrability exponent, >= 1 (infinity = std::numeric_limits infinity)
    Real q = 2;   // summation exponent over shells
};

// -- dyadic partition of unity ------------------------------------------------

/// Low-frequency cutoff chi: 1 for |q| <= 3/4, 0 for |q| >= 4/3, C^inf in between.
Real lp_chi(Real q);
/// Annulus bump phi(q) = chi(q/2) - chi(q), supported in 3/4 <= |q| <= 8/3.
Real lp_phi(Real q);

/// Littlewood-Paley block Delta_j f (j = -1 is the chi block). Throws if
/// j exceeds the grid's retained shell count.
Field lp_block(const Field& f, int j);

// -- calculus -----------------------------------------------------------------

Field differentiate(const Field& f, const std::array<int, 3>& multi_index);
Field laplacian(const Field& f);
/// |k|^m Fourier multiplier; the L2 norm of the m-th derivative tensor.
Field grad_pow(const Field& f, Real m);
Field leray_project(const Field& f);
/// (u . grad) v, dealiased pseudospectral product.
Field advect(const Field& u, const Field& v);
/// Component-wise dealiased pointwise product of a scalar (1-component) or
/// matching vector field with g.
Field multiply(const Field& f, const Field& g);
/// Multiply component-wise by the physical coordinate of the given axis.
Field coordinate_multiply(const Field& f, int axis);
/// Zero all modes with |freq| > dealias_frac * n/2 on any axis.
void dealias(Field& f);
/// Remove the spatial mean of every component.
void zero_mean(Field& f);

Real divergence_l2(const Field& f);
Real sobolev_norm(const Field& f, Real s);
Real lp_norm(const Field& f, Real p);
Real besov_norm(const Field& f, const BesovParams& prm);

/// Bony decomposition: lo = f<g, resonant = f o g, hi = f>g.
struct Paraproduct {
    Field lo, resonant, hi;
};
Paraproduct paraproduct(const Field& f, const Field& g);

// -- resampling ---------------------------------------------------------------

/// Trigonometric interpolation of f at the dilated nodes scale*x, i.e. the
/// returned field's value at node x is f(scale * x).
Field resample_dilate(const Field& f, Real scale);

/// Cross-grid variant: the returned field lives on `target` and its value at
/// target node x is f(scale * x). Points outside f's box wrap periodically.
Field evaluate_at_scaled_nodes(const Field& f, const Grid& target, Real scale);

// -- helpers ------------------------------------------------------------------

/// Seeded random band-limited divergence-free mean-zero field with modes up
/// to |freq| <= kfrac * n/2 per axis, normalized to unit L2 norm.
Field random_divfree_field(const Grid& g, unsigned seed, Real kfrac = 0.25);
/// Same without the divergence-free projection.
Field random_field(const Grid& g, unsigned seed, int ncomp, Real kfrac = 0.25);

}  // namespace ssnu
