#include "ssnu/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ssnu/operator.hpp"

namespace ssnu {

namespace {

// real-space integral of the pointwise product of two physical sample arrays
Real grid_integral(const Grid& g, const std::vector<Real>& a, const std::vector<Real>& b) {
    Real s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    Real dv = 1;
    for (int d = 0; d < g.dim(); ++d) dv *= 2 * g.box() / g.n();
    return s * dv;
}

// zero-pad a field's spectrum onto a refine-times finer grid of the same box
Field spectral_embed(const Field& f, int refine) {
    if (refine <= 1) return f;
    const Grid& g = f.grid();
    Grid gf(g.dim(), g.n() * refine, g.box(), g.dealias_frac());
    Field out(gf, f.ncomp(), f.tag());
    const int d = g.dim(), n = g.n(), nf = gf.n();
    for (int c = 0; c < f.ncomp(); ++c) {
        const auto& src = f.hat(c);
        auto& dst = out.hat(c);
        for (std::size_t idx = 0; idx < src.size(); ++idx) {
            // per-axis targets; the Nyquist mode n/2 is its own conjugate
            // partner at size n and must be split across +-n/2 at size nf
            std::vector<std::pair<std::size_t, Real>> targets{{0, 1.0}};
            std::size_t rem = idx;
            std::size_t stride_in = src.size();
            for (int a = 0; a < d; ++a) {
                stride_in /= n;
                const int ia = static_cast<int>(rem / stride_in);
                rem %= stride_in;
                const int fr = g.freq(ia);
                std::vector<std::pair<int, Real>> axis_t;
                if (fr == n / 2)
                    axis_t = {{n / 2, 0.5}, {nf - n / 2, 0.5}};
                else
                    axis_t = {{fr >= 0 ? fr : fr + nf, 1.0}};
                std::vector<std::pair<std::size_t, Real>> next;
                for (const auto& [t, w] : targets)
                    for (const auto& [it, aw] : axis_t)
                        next.emplace_back(t * nf + static_cast<std::size_t>(it), w * aw);
                targets = std::move(next);
            }
            for (const auto& [t, w] : targets) dst[t] += w * src[idx];
        }
    }
    return out;
}

}  // namespace

Field TestFunction::sample_potential(const Grid& g) const {
    if (g.dim() != dim) throw GridMismatch("test function: dimension mismatch");
    Field chi = Field::scalar(g, VarTag::physical);
    chi.fill(0, [&](const std::vector<Real>& x) {
        Real r2 = 0;
        for (int d = 0; d < dim; ++d) {
            const Real dx = x[d] - center[d];
            r2 += dx * dx;
        }
        const Real s = std::sqrt(r2) / radius;
        return std::exp(-0.5 * s * s / (window * window)) * bump(s);
    });
    return chi;
}

Field TestFunction::sample(const Grid& g) const {
    Field chi = sample_potential(g);
    Field psi = Field::vector(g, VarTag::physical);
    if (dim == 2) {
        // perpendicular gradient of the potential
        Field dx = differentiate(chi, {1, 0, 0});
        Field dy = differentiate(chi, {0, 1, 0});
        psi.hat(0) = dy.hat(0);
        dx *= -1.0;
        psi.hat(1) = dx.hat(0);
    } else {
        // curl of chi * axis
        Field dx = differentiate(chi, {1, 0, 0});
        Field dy = differentiate(chi, {0, 1, 0});
        Field dz = differentiate(chi, {0, 0, 1});
        auto set = [&](int c, const Field& p, Real cp, const Field& q, Real cq) {
            auto& out = psi.hat(c);
            const auto& hp = p.hat(0);
            const auto& hq = q.hat(0);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = cp * hp[i] + cq * hq[i];
        };
        set(0, dy, axis[2], dz, -axis[1]);
        set(1, dz, axis[0], dx, -axis[2]);
        set(2, dx, axis[1], dy, -axis[0]);
    }
    return psi;
}

Field TestFunction::sample_bump_squared(const Grid& g) const {
    Field chi = sample_potential(g);
    Field sq = multiply(chi, chi);
    sq.set_tag(VarTag::physical);
    return sq;
}

TestFunctionBank TestFunctionBank::make(int dim, Real box, int count, unsigned seed) {
    if (count < 1) throw Error("test bank: need at least one member");
    TestFunctionBank bank;
    bank.seed = seed;
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<Real> unif(0.0, 1.0);
    for (int i = 0; i < count; ++i) {
        TestFunction tf;
        tf.dim = dim;
        // radius in [box/5, box/3], support inside |x|_inf <= box/2
        tf.radius = box * (0.2 + 0.1333 * unif(gen));
        const Real cmax = box / 2 - tf.radius;
        for (int d = 0; d < dim; ++d) tf.center[d] = cmax * (2 * unif(gen) - 1);
        if (dim == 3) {
            Real n2 = 0;
            for (int d = 0; d < 3; ++d) {
                tf.axis[d] = 2 * unif(gen) - 1;
                n2 += tf.axis[d] * tf.axis[d];
            }
            const Real n = std::sqrt(n2);
            for (int d = 0; d < 3; ++d) tf.axis[d] /= n > 0 ? n : 1;
        }
        bank.psi.push_back(tf);
    }
    return bank;
}

void VerificationReport::add(CheckRow row) {
    row.pass = row.margin <= row.tolerance;
    pass = pass && row.pass;
    worst = std::max(worst, row.margin);
    rows.push_back(std::move(row));
}

namespace {

// composite trapezoid prefix integrals of a sampled series
std::vector<Real> trapezoid_prefix(const std::vector<Real>& t, const std::vector<Real>& v) {
    std::vector<Real> out(t.size(), 0.0);
    for (std::size_t i = 1; i < t.size(); ++i)
        out[i] = out[i - 1] + (t[i] - t[i - 1]) / 2 * (v[i] + v[i - 1]);
    return out;
}

// trapezoid on every other node; Richardson estimate of the quadrature error
Real quadrature_error_estimate(const std::vector<Real>& t, const std::vector<Real>& v) {
    Real full = 0, half = 0;
    for (std::size_t i = 1; i < t.size(); ++i)
        full += (t[i] - t[i - 1]) / 2 * (v[i] + v[i - 1]);
    std::size_t prev = 0;
    for (std::size_t i = 2; i < t.size(); i += 2) {
        half += (t[i] - t[prev]) / 2 * (v[i] + v[prev]);
        prev = i;
    }
    if (prev != t.size() - 1)
        half += (t.back() - t[prev]) / 2 * (v.back() + v[prev]);
    return std::abs(full - half) / 3;
}

void check_traj(const std::vector<Real>& times, const std::vector<Field>& u,
                const std::vector<Field>& f, const char* who) {
    if (times.size() != u.size() || times.size() != f.size())
        throw Error(std::string(who) + ": trajectory sizes differ");
    if (times.size() < 3) throw Error(std::string(who) + ": too few time nodes");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw Error(std::string(who) + ": times not increasing");
}

}  // namespace

VerificationReport weak_residual(const std::vector<Real>& times, const std::vector<Field>& u,
                                 const std::vector<Field>& f, const TestFunctionBank& bank,
                                 WeakMode mode, const std::vector<Real>* visc, Real tol,
                                 int refine) {
    check_traj(times, u, f, "weak_residual");
    if (mode == WeakMode::random_pde && (!visc || visc->size() != times.size()))
        throw Error("weak_residual: random-pde mode needs a per-node viscosity series");
    if (mode == WeakMode::deterministic && visc)
        throw Error("weak_residual: viscosity series given in deterministic mode");
    if (refine < 1) throw Error("weak_residual: refine must be >= 1");

    const std::size_t m = times.size();
    const std::size_t nb = bank.psi.size();
    std::vector<std::vector<Real>> pairing(nb, std::vector<Real>(m)),
        integrand(nb, std::vector<Real>(m)), absint(nb, std::vector<Real>(m));
    for (std::size_t i = 0; i < m; ++i) {
        const Real h = visc ? (*visc)[i] : 1.0;
        const Field uf = spectral_embed(u[i], refine);
        const Field ff = spectral_embed(f[i], refine);
        for (std::size_t k = 0; k < nb; ++k) {
            Field psi = bank.psi[k].sample(uf.grid());
            pairing[k][i] = uf.inner(psi);
            const Real diff = h * uf.inner(laplacian(psi));
            // <u (x) u, grad psi> = <u, (u.grad) psi>
            const Real adv = uf.inner(advect(uf, psi));
            const Real forc = ff.inner(psi);
            integrand[k][i] = diff + adv + forc;
            absint[k][i] = std::abs(diff) + std::abs(adv) + std::abs(forc);
        }
    }
    VerificationReport rep;
    for (std::size_t k = 0; k < nb; ++k) {
        const std::vector<Real> I = trapezoid_prefix(times, integrand[k]);
        const std::vector<Real> A = trapezoid_prefix(times, absint[k]);
        const Real scale = std::max(A.back(), std::abs(pairing[k][0])) + 1e-300;
        const Real quad_err = quadrature_error_estimate(times, integrand[k]);
        if (quad_err > tol * scale)
            throw StabilityError("weak_residual: time grid too coarse for the tolerance");
        Real worst = 0, worst_t = times[0];
        for (std::size_t i = 1; i < m; ++i) {
            const Real r = std::abs(pairing[k][i] - pairing[k][0] - I[i]);
            if (r > worst) {
                worst = r;
                worst_t = times[i];
            }
        }
        CheckRow row;
        row.name = "weak[psi" + std::to_string(k) + "]";
        row.t = worst_t;
        row.lhs = worst;
        row.rhs = scale;
        row.margin = worst / scale;
        row.tolerance = tol;
        rep.add(std::move(row));
    }
    return rep;
}

VerificationReport energy_check(const std::vector<Real>& times, const std::vector<Field>& u,
                                const std::vector<Field>& f, const std::vector<Real>* visc,
                                Real slack) {
    check_traj(times, u, f, "energy_check");
    if (visc && visc->size() != times.size())
        throw Error("energy_check: viscosity series size mismatch");

    const std::size_t m = times.size();
    std::vector<Real> energy(m), dissip(m), work(m);
    for (std::size_t i = 0; i < m; ++i) {
        const Real h = visc ? (*visc)[i] : 1.0;
        const Real e = u[i].inner(u[i]);
        const Real g = grad_pow(u[i], 1.0).inner(grad_pow(u[i], 1.0));
        energy[i] = e;
        dissip[i] = 2 * h * g;
        work[i] = 2 * f[i].inner(u[i]);
    }
    const std::vector<Real> D = trapezoid_prefix(times, dissip);
    const std::vector<Real> W = trapezoid_prefix(times, work);
    const Real scale =
        *std::max_element(energy.begin(), energy.end()) + std::abs(W.back()) + D.back() + 1e-300;

    VerificationReport rep;
    for (std::size_t i = 0; i < m; ++i) {
        CheckRow row;
        row.name = "energy";
        row.t = times[i];
        row.lhs = energy[i] + D[i];
        row.rhs = energy[0] + W[i];
        row.margin = (row.lhs - row.rhs) / scale;
        row.tolerance = slack;
        rep.add(std::move(row));
    }
    return rep;
}

CheckRow mc_energy_margin(const std::vector<Real>& per_seed_margins, Real slack) {
    if (per_seed_margins.size() < 2) throw Error("mc_energy_margin: need at least 2 seeds");
    const Real n = static_cast<Real>(per_seed_margins.size());
    Real s1 = 0, s2 = 0;
    for (Real x : per_seed_margins) {
        s1 += x;
        s2 += x * x;
    }
    const Real mean = s1 / n;
    const Real var = std::max(s2 / n - mean * mean, Real(0));
    const Real se = std::sqrt(var / n);
    CheckRow row;
    row.name = "energy-mc (statistical, 3 sigma)";
    row.lhs = mean;
    row.rhs = 3 * se + slack;
    row.margin = mean - 3 * se;
    row.tolerance = slack;
    row.pass = row.margin <= row.tolerance;
    return row;
}

Field pressure_recover(const Field& u, const Field& f) {
    const Grid& g = u.grid();
    if (f.ncomp() != u.ncomp() || u.ncomp() != g.dim())
        throw GridMismatch("pressure_recover: component mismatch");
    const int d = g.dim();

    // T_ij = u_i u_j, products formed pointwise and dealiased by multiply()
    std::vector<Field> comp(d);
    for (int c = 0; c < d; ++c) {
        comp[c] = Field(g, 1, u.tag());
        comp[c].hat(0) = u.hat(c);
    }
    Field p = Field::scalar(g, u.tag());
    auto& ph = p.hat(0);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            Field T = multiply(comp[i], comp[j]);
            const auto& th = T.hat(0);
            const Real w = (i == j) ? 1.0 : 2.0;
            for_each_mode(g, [&](std::size_t idx, const std::array<Real, 3>& k) {
                ph[idx] += w * k[i] * k[j] * th[idx];
            });
        }
    for_each_mode(g, [&](std::size_t idx, const std::array<Real, 3>& k) {
        Complex divf{0, 0};
        for (int c = 0; c < d; ++c) divf += Complex{0, 1} * k[c] * f.hat(c)[idx];
        const Real k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        ph[idx] = k2 > 0 ? -(ph[idx] + divf) / k2 : Complex{0, 0};
    });
    return p;
}

VerificationReport local_energy_check(const std::vector<Real>& times, const std::vector<Field>& u,
                                      const std::vector<Field>& f, const TestFunctionBank& bank,
                                      Real slack, WeakMode mode) {
    if (mode != WeakMode::deterministic)
        throw Error("local_energy_check: only the deterministic pipeline is supported");
    check_traj(times, u, f, "local_energy_check");
    const std::size_t m = times.size();
    const std::size_t nb = bank.psi.size();

    // per (node, bank member): boundary and integrand terms
    std::vector<std::vector<Real>> bnd(nb, std::vector<Real>(m)),
        integ(nb, std::vector<Real>(m)), absint(nb, std::vector<Real>(m));
    for (std::size_t i = 0; i < m; ++i) {
        const Grid& g = u[i].grid();
        const int d = g.dim();
        std::vector<std::vector<Real>> uv(d);
        for (int c = 0; c < d; ++c) uv[c] = u[i].physical(c);
        const std::size_t npts = uv[0].size();

        std::vector<Real> e(npts, 0.0);  // 1/2 |u|^2
        for (int c = 0; c < d; ++c)
            for (std::size_t q = 0; q < npts; ++q) e[q] += 0.5 * uv[c][q] * uv[c][q];

        std::vector<Real> gsq(npts, 0.0);  // |grad u|^2
        for (int c = 0; c < d; ++c)
            for (int a = 0; a < d; ++a) {
                std::array<int, 3> mi{0, 0, 0};
                mi[a] = 1;
                Field du = Field(g, 1, u[i].tag());
                du.hat(0) = u[i].hat(c);
                du = differentiate(du, mi);
                auto dv = du.physical(0);
                for (std::size_t q = 0; q < npts; ++q) gsq[q] += dv[q] * dv[q];
            }

        Field p = pressure_recover(u[i], f[i]);
        auto pv = p.physical(0);

        std::vector<Real> fu(npts, 0.0);  // f . u
        for (int c = 0; c < d; ++c) {
            auto fv = f[i].physical(c);
            for (std::size_t q = 0; q < npts; ++q) fu[q] += fv[q] * uv[c][q];
        }

        for (std::size_t k = 0; k < nb; ++k) {
            Field phi = bank.psi[k].sample_bump_squared(g);
            auto phv = phi.physical(0);
            Field lap = laplacian(phi);
            auto lv = lap.physical(0);

            bnd[k][i] = grid_integral(g, e, phv);

            Real flux = 0;  // (1/2|u|^2 + p) u . grad phi
            for (int a = 0; a < d; ++a) {
                std::array<int, 3> mi{0, 0, 0};
                mi[a] = 1;
                Field dphi = differentiate(phi, mi);
                auto dv = dphi.physical(0);
                std::vector<Real> ep(npts);
                for (std::size_t q = 0; q < npts; ++q) ep[q] = (e[q] + pv[q]) * uv[a][q];
                flux += grid_integral(g, ep, dv);
            }

            const Real t_diss = grid_integral(g, gsq, phv);
            const Real t_lap = grid_integral(g, e, lv);
            const Real t_work = grid_integral(g, fu, phv);
            integ[k][i] = t_diss - t_lap - flux - t_work;
            absint[k][i] =
                std::abs(t_diss) + std::abs(t_lap) + std::abs(flux) + std::abs(t_work);
        }
    }

    VerificationReport rep;
    for (std::size_t k = 0; k < nb; ++k) {
        Real I = 0, A = 0;
        for (std::size_t i = 1; i < m; ++i) {
            I += (times[i] - times[i - 1]) / 2 * (integ[k][i] + integ[k][i - 1]);
            A += (times[i] - times[i - 1]) / 2 * (absint[k][i] + absint[k][i - 1]);
        }
        CheckRow row;
        row.name = "local-energy[phi" + std::to_string(k) + "]";
        row.t = times.back();
        row.lhs = bnd[k].back() - bnd[k].front() + I;
        row.rhs = 0;
        const Real scale = A + std::abs(bnd[k].front()) + 1e-300;
        row.margin = row.lhs / scale;
        row.tolerance = slack;
        rep.add(std::move(row));
    }
    return rep;
}

DecayFit decay_fit(const std::vector<Real>& t, const std::vector<Real>& v, Real t_lo, Real t_hi) {
    if (t.size() != v.size()) throw Error("decay_fit: size mismatch");
    std::vector<Real> x, y;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi) continue;
        if (!(v[i] > 0)) throw Error("decay_fit: nonpositive value in series");
        x.push_back(std::log(t[i]));
        y.push_back(std::log(v[i]));
    }
    if (x.size() < 8) throw Error("decay_fit: need at least 8 points in the window");
    const Real n = static_cast<Real>(x.size());
    Real sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const Real mx = sx / n, my = sy / n;
    Real sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    DecayFit fit;
    fit.n = static_cast<int>(x.size());
    fit.slope = sxy / sxx;
    Real ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Real r = y[i] - my - fit.slope * (x[i] - mx);
        ss += r * r;
    }
    fit.stderr_ = x.size() > 2 ? std::sqrt(ss / (n - 2) / sxx) : 0.0;
    return fit;
}

VerificationReport separation_certificate(const std::vector<Real>& times,
                                          const std::vector<Real>& norm1,
                                          const std::vector<Real>& separation, Real a) {
    DecayFit r1 = decay_fit(times, norm1);
    DecayFit rs = decay_fit(times, separation);
    VerificationReport rep;
    CheckRow row;
    row.name = "separation-rate";
    row.t = times.back();
    row.lhs = rs.slope - r1.slope;  // measured excess growth of the separation
    row.rhs = 0.9 * a;
    row.margin = row.rhs - row.lhs;  // pass when the excess is at least 0.9 a
    row.tolerance = 0;
    rep.add(std::move(row));
    return rep;
}

}  // namespace ssnu
