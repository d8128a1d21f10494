#include "ssnu/similarity.hpp"

#include <cmath>

namespace ssnu {

Grid physical_grid(const Grid& sim_grid, Real t) {
    if (t <= 0) throw Error("physical_grid: t must be positive");
    return Grid(sim_grid.dim(), sim_grid.n(), sim_grid.box() * std::sqrt(t),
                sim_grid.dealias_frac());
}

Field to_physical(const Field& U, Real t, FieldKind kind) {
    if (t <= 0) throw Error("to_physical: t must be positive");
    if (U.tag() != VarTag::similarity) throw FieldError("to_physical: expects a similarity field");
    const Real scale = (kind == FieldKind::velocity) ? 1.0 / std::sqrt(t)
                                                     : std::pow(t, -1.5);
    Field out(physical_grid(U.grid(), t), U.ncomp(), VarTag::physical);
    for (int c = 0; c < U.ncomp(); ++c) {
        out.hat(c) = U.hat(c);
        for (auto& z : out.hat(c)) z *= scale;
    }
    return out;
}

Field to_similarity(const Field& u, Real t, FieldKind kind, const Grid& sim_grid,
                    Real margin_min) {
    if (t <= 0) throw Error("to_similarity: t must be positive");
    if (u.tag() != VarTag::physical) throw FieldError("to_similarity: expects a physical field");
    if (u.grid().n() != sim_grid.n() || u.grid().dim() != sim_grid.dim())
        throw GridMismatch("to_similarity: node layout mismatch");
    const Real scale = (kind == FieldKind::velocity) ? std::sqrt(t) : std::pow(t, 1.5);

    const Real box_ratio = sim_grid.box() * std::sqrt(t) / u.grid().box();
    Field out(sim_grid, u.ncomp(), VarTag::similarity);
    if (std::abs(box_ratio - 1.0) < 1e-12) {
        for (int c = 0; c < u.ncomp(); ++c) {
            out.hat(c) = u.hat(c);
            for (auto& z : out.hat(c)) z *= scale;
        }
        return out;
    }
    // Cross-grid path: evaluate u at the dilated similarity nodes.
    if (box_ratio > 1.0 && u.mass_margin() < margin_min)
        throw StabilityError("to_similarity: support too wide for dilation (mass_margin)");
    Field res = resample_dilate(u, box_ratio);
    for (int c = 0; c < u.ncomp(); ++c) {
        out.hat(c) = res.hat(c);
        for (auto& z : out.hat(c)) z *= scale;
    }
    if (out.mass_margin() < margin_min)
        throw StabilityError("to_similarity: resampled support violates mass_margin");
    return out;
}

Field background_velocity(const Field& Ubar, Real t) {
    return to_physical(Ubar, t, FieldKind::velocity);
}

Real resample_roundtrip_error(const Field& f, Real scale) {
    Field fwd = resample_dilate(f, scale);
    Field back = resample_dilate(fwd, 1.0 / scale);
    const Real nrm = f.l2_norm();
    return nrm > 0 ? (back - f).l2_norm() / nrm : 0.0;
}

}  // namespace ssnu
