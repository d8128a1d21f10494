#include "ssnu/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ssnu {

namespace {

Real smooth_step(Real s) {
    // 1 for s <= 0, 0 for s >= 1, C^inf transition.
    if (s <= 0) return 1.0;
    if (s >= 1) return 0.0;
    const Real a = std::exp(-1.0 / s);
    const Real b = std::exp(-1.0 / (1.0 - s));
    return b / (a + b);
}

}  // namespace

Real lp_chi(Real q) {
    q = std::abs(q);
    return smooth_step((q - 0.75) / (4.0 / 3.0 - 0.75));
}

Real lp_phi(Real q) { return lp_chi(q / 2) - lp_chi(q); }

Field lp_block(const Field& f, int j) {
    const Grid& g = f.grid();
    if (j < -1 || j > g.shell_count())
        throw Error("lp_block: shell index out of range for this grid");
    Field out = f;
    const Real scale = std::pow(2.0, j);
    for (int c = 0; c < f.ncomp(); ++c) {
        auto& hat = out.hat(c);
        for_each_mode(g, [&](std::size_t idx, const std::array<Real, 3>& k) {
            const Real kn = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
            const Real m = (j == -1) ? lp_chi(kn) : lp_phi(kn / scale);
            hat[idx] *= m;
        });
    }
    return out;
}

Field differentiate(const Field& f, const std::array<int, 3>& mi) {
    Field out = f;
    const Grid& g = f.grid();
    for (int c = 0; c < f.ncomp(); ++c) {
        auto& hat = out.hat(c);
        for_each_mode(g, [&](std::size_t idx, const std::array<Real, 3>& k) {
            Complex m{1, 0};
            for (int a = 0; a < 3; ++a)
                for (int r = 0; r < mi[a]; ++r) m *= Complex(0, k[a]);
            hat[idx] *= m;
        });
        // Nyquist modes carry an ambiguous sign; drop them from derivatives.
        const int nyq = g.n() / 2;
        for_each_mode(g, [&](std::size_t idx, const std::array<Real, 3>& k) {
            for (int a = 0; a < g.dim(); ++a)
                if (std::abs(k[a]) >= g.k0() * nyq - 1e-12 && (mi[0] + mi[1] + mi[2]) > 0) {
                    hat[idx] = 0;
                    return;
                }
        });
    }
    return out;
}

Field laplacian(const Field& f) {
    Field out = f;
    for (int c = 0; c < f.ncomp(); ++c) {
        auto& hat = out.hat(c);
        for_each_mode(f.grid(), [&](std::size_t idx, const std::array<Real, 3>& k) {
            hat[idx] *= -(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
        });
    }
    return out;
}

Field grad_pow(const Field& f, Real m) {
    Field out = f;
    for (int c = 0; c < f.ncomp(); ++c) {
        auto& hat = out.hat(c);
        for_each_mode(f.grid(), [&](std::size_t idx, const std::array<Real, 3>& k) {
            hat[idx] *= std::pow(k[0] * k[0] + k[1] * k[1] + k[2] * k[2], m / 2);
        });
    }
    return out;
}

Field leray_project(const Field& f) {
    f.check_finite("leray_project");
    const Grid& g = f.grid();
    if (f.ncomp() != g.dim()) throw FieldError("leray_project: needs a vector field");
    Field out = f;
    for_each_mode(g, [&](std::size_t idx, const std::array<Real, 3>& k) {
        const Real k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if (k2 == 0) return;  // zero mode passes through
        Complex kdot{0, 0};
        for (int c = 0; c < g.dim(); ++c) kdot += k[c] * out.hat(c)[idx];
        for (int c = 0; c < g.dim(); ++c) out.hat(c)[idx] -= k[c] * kdot / k2;
    });
    return out;
}

void dealias(Field& f) {
    const Grid& g = f.grid();
    const int cutoff = static_cast<int>(std::floor(g.dealias_frac() * (g.n() / 2)));
    const Real kcut = g.k0() * cutoff;
    for (int c = 0; c < f.ncomp(); ++c) {
        auto& hat = f.hat(c);
        for_each_mode(g, [&](std::size_t idx, const std::array<Real, 3>& k) {
            for (int a = 0; a < g.dim(); ++a)
                if (std::abs(k[a]) > kcut + 1e-12) {
                    hat[idx] = 0;
                    return;
                }
        });
    }
}

void zero_mean(Field& f) {
    for (int c = 0; c < f.ncomp(); ++c) f.hat(c)[0] = 0;
}

Field multiply(const Field& f, const Field& g) {
    if (f.grid() != g.grid()) throw GridMismatch("multiply: grid mismatch");
    if (f.ncomp() != 1 && f.ncomp() != g.ncomp())
        throw FieldError("multiply: component mismatch");
    Field out(g.grid(), g.ncomp(), g.tag());
    for (int c = 0; c < g.ncomp(); ++c) {
        auto a = f.physical(f.ncomp() == 1 ? 0 : c);
        auto b = g.physical(c);
        for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
        out.set_physical(c, a);
    }
    dealias(out);
    return out;
}

Field advect(const Field& u, const Field& v) {
    if (u.grid() != v.grid()) throw GridMismatch("advect: grid mismatch");
    const Grid& g = u.grid();
    Field out(g, v.ncomp(), v.tag());
    std::vector<std::vector<Real>> uphys(g.dim());
    for (int a = 0; a < g.dim(); ++a) uphys[a] = u.physical(a);
    for (int c = 0; c < v.ncomp(); ++c) {
        std::vector<Real> acc(g.node_count(), 0.0);
        for (int a = 0; a < g.dim(); ++a) {
            std::array<int, 3> mi{0, 0, 0};
            mi[a] = 1;
            auto dv = differentiate(v, mi).physical(c);
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += uphys[a][i] * dv[i];
        }
        out.set_physical(c, acc);
    }
    dealias(out);
    return out;
}

Field coordinate_multiply(const Field& f, int axis) {
    const Grid& g = f.grid();
    Field out(g, f.ncomp(), f.tag());
    const int n = g.n();
    for (int c = 0; c < f.ncomp(); ++c) {
        auto vals = f.physical(c);
        std::size_t idx = 0;
        if (g.dim() == 2) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j, ++idx)
                    vals[idx] *= g.coord(axis == 0 ? i : j);
        } else {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int l = 0; l < n; ++l, ++idx)
                        vals[idx] *= g.coord(axis == 0 ? i : (axis == 1 ? j : l));
        }
        out.set_physical(c, vals);
    }
    return out;
}

Real divergence_l2(const Field& f) {
    const Grid& g = f.grid();
    Field div = Field::scalar(g, f.tag());
    auto& dhat = div.hat(0);
    for_each_mode(g, [&](std::size_t idx, const std::array<Real, 3>& k) {
        Complex acc{0, 0};
        for (int c = 0; c < g.dim(); ++c) acc += Complex(0, k[c]) * f.hat(c)[idx];
        dhat[idx] = acc;
    });
    return div.l2_norm();
}

Real sobolev_norm(const Field& f, Real s) {
    const Real vol = std::pow(2.0 * f.grid().box(), f.grid().dim());
    Real acc = 0;
    for (int c = 0; c < f.ncomp(); ++c) {
        const auto& hat = f.hat(c);
        for_each_mode(f.grid(), [&](std::size_t idx, const std::array<Real, 3>& k) {
            const Real k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            acc += std::pow(1.0 + k2, s) * std::norm(hat[idx]);
        });
    }
    return std::sqrt(vol * acc);
}

Real lp_norm(const Field& f, Real p) {
    const Grid& g = f.grid();
    if (std::isinf(p)) {
        Real m = 0;
        for (int c = 0; c < f.ncomp(); ++c) {
            // sup of the pointwise Euclidean magnitude, approximated on nodes
            auto vals = f.physical(c);
            for (auto v : vals) m = std::max(m, std::abs(v));
        }
        return m;
    }
    std::vector<Real> mag2(g.node_count(), 0.0);
    for (int c = 0; c < f.ncomp(); ++c) {
        auto vals = f.physical(c);
        for (std::size_t i = 0; i < vals.size(); ++i) mag2[i] += vals[i] * vals[i];
    }
    Real acc = 0;
    for (auto m2 : mag2) acc += std::pow(m2, p / 2);
    return std::pow(acc * g.cell_volume(), 1.0 / p);
}

Real besov_norm(const Field& f, const BesovParams& prm) {
    f.check_finite("besov_norm");
    if (prm.p < 1 || prm.q < 1) throw Error("besov_norm: exponents must be >= 1");
    const int J = f.grid().shell_count();
    Real acc = 0, sup = 0;
    for (int j = -1; j <= J; ++j) {
        Field blk = lp_block(f, j);
        const Real bn = (prm.p == 2) ? blk.l2_norm() : lp_norm(blk, prm.p);
        const Real w = std::pow(2.0, j * prm.alpha) * bn;
        if (std::isinf(prm.q))
            sup = std::max(sup, w);
        else
            acc += std::pow(w, prm.q);
    }
    return std::isinf(prm.q) ? sup : std::pow(acc, 1.0 / prm.q);
}

Paraproduct paraproduct(const Field& f, const Field& g) {
    if (f.grid() != g.grid()) throw GridMismatch("paraproduct: grid mismatch");
    const Grid& grid = f.grid();
    const int J = grid.shell_count();

    std::vector<Field> bf, bg;
    bf.reserve(J + 2);
    bg.reserve(J + 2);
    for (int j = -1; j <= J; ++j) {
        bf.push_back(lp_block(f, j));
        bg.push_back(lp_block(g, j));
    }
    auto idx = [](int j) { return j + 1; };

    Paraproduct out{Field(grid, g.ncomp(), g.tag()), Field(grid, g.ncomp(), g.tag()),
                    Field(grid, g.ncomp(), g.tag())};

    // lo: sum_j S_{j-2} f * Delta_j g with S_{j-2} f = sum_{i < j-1} Delta_i f
    Field partial(grid, f.ncomp(), f.tag());
    for (int j = -1; j <= J; ++j) {
        // partial holds sum_{i <= j-2} Delta_i f
        if (j - 2 >= -1) partial += bf[idx(j - 2)];
        if (j >= 1) out.lo += multiply(partial, bg[idx(j)]);
    }
    // hi: f > g = sum over i of Delta_i f * S_{i-2} g
    Field partial_g(grid, g.ncomp(), g.tag());
    for (int i = -1; i <= J; ++i) {
        if (i - 2 >= -1) partial_g += bg[idx(i - 2)];
        if (i >= 1) out.hi += multiply(bf[idx(i)], partial_g);
    }
    // resonant: |i-j| <= 1
    for (int i = -1; i <= J; ++i)
        for (int j = std::max(-1, i - 1); j <= std::min(J, i + 1); ++j)
            out.resonant += multiply(bf[idx(i)], bg[idx(j)]);
    return out;
}

Field resample_dilate(const Field& f, Real scale) {
    return evaluate_at_scaled_nodes(f, f.grid(), scale);
}

Field evaluate_at_scaled_nodes(const Field& f, const Grid& target, Real scale) {
    const Grid& g = f.grid();
    if (target.dim() != g.dim()) throw GridMismatch("evaluate_at_scaled_nodes: dim mismatch");
    const int d = g.dim();
    const int nf = g.n(), nt = target.n();
    // Per-axis evaluation matrix E[m][i] = exp(i k_m (scale*x_i + box_f)).
    std::vector<Complex> E(static_cast<std::size_t>(nf) * nt);
    for (int m = 0; m < nf; ++m) {
        const Real km = g.k0() * g.freq(m);
        for (int i = 0; i < nt; ++i) {
            const Real phase = km * (scale * target.coord(i) + g.box());
            E[static_cast<std::size_t>(m) * nt + i] = std::polar(1.0, phase);
        }
    }
    Field out(target, f.ncomp(), f.tag());
    for (int c = 0; c < f.ncomp(); ++c) {
        // Contract one axis at a time (axis 0 slowest in the row-major layout):
        // the mode index of that axis is replaced by the target point index.
        std::vector<Complex> cur = f.hat(c);
        std::vector<int> shape(d, nf);
        for (int axis = d - 1; axis >= 0; --axis) {
            std::size_t stride = 1;
            for (int a = axis + 1; a < d; ++a) stride *= shape[a];
            std::size_t outer = 1;
            for (int a = 0; a < axis; ++a) outer *= shape[a];
            std::vector<Complex> next(outer * nt * stride, Complex{0, 0});
            for (std::size_t o = 0; o < outer; ++o)
                for (std::size_t s = 0; s < stride; ++s)
                    for (int i = 0; i < nt; ++i) {
                        Complex acc{0, 0};
                        const std::size_t in_base = (o * shape[axis]) * stride + s;
                        for (int m = 0; m < nf; ++m)
                            acc += E[static_cast<std::size_t>(m) * nt + i] * cur[in_base + m * stride];
                        next[(o * nt + i) * stride + s] = acc;
                    }
            shape[axis] = nt;
            cur = std::move(next);
        }
        std::vector<Real> vals(cur.size());
        for (std::size_t i = 0; i < cur.size(); ++i) vals[i] = cur[i].real();
        out.set_physical(c, vals);
    }
    return out;
}

Field random_field(const Grid& g, unsigned seed, int ncomp, Real kfrac) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<Real> gauss(0.0, 1.0);
    const int cutoff = std::max(1, static_cast<int>(kfrac * (g.n() / 2)));
    Field out(g, ncomp, VarTag::similarity);
    const int n = g.n();
    auto wrap = [n](int m) { return static_cast<std::size_t>((m + n) % n); };
    auto flat = [&](int mx, int my, int mz) {
        std::size_t idx = wrap(mx) * n + wrap(my);
        if (g.dim() == 3) idx = idx * n + wrap(mz);
        return idx;
    };
    for (int c = 0; c < ncomp; ++c) {
        auto& hat = out.hat(c);
        // Deterministic sweep over low modes; Hermitian pairs keep the field real.
        for (int mx = -cutoff; mx <= cutoff; ++mx)
            for (int my = -cutoff; my <= cutoff; ++my) {
                const int mz_lo = g.dim() == 3 ? -cutoff : 0;
                const int mz_hi = g.dim() == 3 ? cutoff : 0;
                for (int mz = mz_lo; mz <= mz_hi; ++mz) {
                    const Real amp = gauss(rng), ph = gauss(rng);
                    if (mx == 0 && my == 0 && mz == 0) continue;
                    const Complex z = 0.5 * amp * std::polar(1.0, ph);
                    hat[flat(mx, my, mz)] += z;
                    hat[flat(-mx, -my, -mz)] += std::conj(z);
                }
            }
    }
    zero_mean(out);
    const Real nrm = out.l2_norm();
    if (nrm > 0) out *= 1.0 / nrm;
    return out;
}

Field random_divfree_field(const Grid& g, unsigned seed, Real kfrac) {
    Field f = leray_project(random_field(g, seed, g.dim(), kfrac));
    zero_mean(f);
    const Real nrm = f.l2_norm();
    if (nrm > 0) f *= 1.0 / nrm;
    return f;
}

}  // namespace ssnu
