#include "ssnu/operator.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

namespace ssnu {

Real bump(Real s) {
    s = std::abs(s);
    if (s >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

namespace {

// perp gradient (2D) or curl of psi * e3 (3D) of a scalar potential
Field potential_curl(const Grid& g, const Field& psi) {
    Field U = Field::vector(g);
    if (g.dim() == 2) {
        // perp gradient of the stream function
        U.hat(0) = differentiate(psi, {0, 1, 0}).hat(0);
        for (auto& z : U.hat(0)) z = -z;
        U.hat(1) = differentiate(psi, {1, 0, 0}).hat(0);
    } else {
        // curl of -psi * e3: a columnar swirl with compact support, oriented
        // to agree with the 2D perp-gradient convention so planar sections of
        // 3D profiles match their 2D counterparts
        U.hat(0) = differentiate(psi, {0, 1, 0}).hat(0);
        for (auto& z : U.hat(0)) z = -z;
        U.hat(1) = differentiate(psi, {1, 0, 0}).hat(0);
        // third component zero
    }
    zero_mean(U);
    return U;
}

}  // namespace

Field bump_vortex(const Grid& g, Real amplitude, Real radius) {
    Field psi = Field::scalar(g);
    psi.fill(0, [&](const std::vector<Real>& x) {
        Real r2 = 0;
        for (auto xi : x) r2 += xi * xi;
        return amplitude * bump(std::sqrt(r2) / radius);
    });
    return potential_curl(g, psi);
}

Field ring_vortex(const Grid& g, Real amplitude, Real sigma, int p, Real sigma_axis) {
    if (sigma_axis == 0) sigma_axis = sigma;
    if (!(sigma > 0) || p < 1 || !(sigma_axis > 0))
        throw Error("ring_vortex: need sigma > 0, sigma_axis > 0, and p >= 1");
    Field psi = Field::scalar(g);
    psi.fill(0, [&](const std::vector<Real>& x) {
        // swirl-plane distance for the ring factor and envelope; the axis
        // direction (3D only) gets its own, typically wider, Gaussian width,
        // which interpolates toward the columnar 2D flow and its instability.
        const Real rho2 = (x[0] * x[0] + x[1] * x[1]) / (sigma * sigma);
        Real arg = rho2;
        if (x.size() > 2) arg += x[2] * x[2] / (sigma_axis * sigma_axis);
        Real poly = 1;
        for (int i = 0; i < p; ++i) poly *= rho2;
        return amplitude * poly * std::exp(-arg / 2);
    });
    return potential_curl(g, psi);
}

void BackgroundProfile::validate() const { validate(margin_min); }

void BackgroundProfile::validate(Real margin_min_override) const {
    const Real margin_min = margin_min_override;
    U.check_finite("background profile");
    if (divergence_l2(U) > 1e-10 * (sobolev_norm(U, 1) + 1e-300))
        throw FieldError("background profile: not divergence-free");
    if (U.mass_margin() < margin_min)
        throw StabilityError("background profile: mass_margin below threshold");
}

LinearizedOperator::LinearizedOperator(const Grid& g, Field Ubar)
    : grid_(g), Ubar_(std::move(Ubar)), zero_background_(false) {
    if (Ubar_.grid() != g) throw GridMismatch("LinearizedOperator: background grid mismatch");
    max_speed_ = lp_norm(Ubar_, std::numeric_limits<Real>::infinity());
    if (max_speed_ == 0) zero_background_ = true;
}

LinearizedOperator::LinearizedOperator(const Grid& g)
    : grid_(g), Ubar_(Field::vector(g)), zero_background_(true) {}

Field LinearizedOperator::apply_stiffless(const Field& U) const {
    if (U.grid() != grid_) throw GridMismatch("apply_Lss: grid mismatch");
    // 1/2 (1 + xi.grad) U
    Field out = U;
    out *= 0.5;
    for (int a = 0; a < grid_.dim(); ++a) {
        std::array<int, 3> mi{0, 0, 0};
        mi[a] = 1;
        Field dU = differentiate(U, mi);
        Field xi_dU = coordinate_multiply(dU, a);
        xi_dU *= 0.5;
        out += xi_dU;
    }
    if (!zero_background_) {
        out -= advect(Ubar_, U);
        out -= advect(U, Ubar_);
    }
    out = leray_project(out);
    zero_mean(out);
    return out;
}

Field LinearizedOperator::apply(const Field& U) const {
    Field out = apply_stiffless(U);
    out += laplacian(U);
    return out;
}

Real LinearizedOperator::cfl_step() const {
    const Real kmax = grid_.k0() * (grid_.n() / 2);
    return 0.25 / (max_speed_ * kmax + 0.5 * (1.0 + grid_.box() * kmax));
}

namespace {

Real phi1(Real z) {
    if (std::abs(z) < 1e-5) return 1.0 + z / 2 + z * z / 6;
    return std::expm1(z) / z;
}

Real phi2(Real z) {
    if (std::abs(z) < 1e-4) return 0.5 + z / 6 + z * z / 24;
    return (std::expm1(z) - z) / (z * z);
}

void apply_multiplier(Field& f, const Grid& g, Real h, Real (*fn)(Real)) {
    for (int c = 0; c < f.ncomp(); ++c) {
        auto& hat = f.hat(c);
        for_each_mode(g, [&](std::size_t idx, const std::array<Real, 3>& k) {
            const Real z = -(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * h;
            hat[idx] *= fn(z);
        });
    }
}

}  // namespace

Field LinearizedOperator::semigroup(const Field& U0, Real tau, int steps) const {
    if (tau < 0) throw Error("semigroup: tau must be nonnegative");
    if (tau == 0) return U0;
    const Real hmax = cfl_step();
    if (steps == 0) steps = static_cast<int>(std::ceil(tau / hmax));
    const Real h = tau / steps;
    if (h > hmax * (1.0 + 1e-12)) {
        throw StabilityError("semigroup: CFL violation, need at least " +
                             std::to_string(static_cast<int>(std::ceil(tau / hmax))) + " steps");
    }
    Field U = U0;
    for (int s = 0; s < steps; ++s) {
        Field BU = apply_stiffless(U);
        // predictor: exact heat flow + phi1-weighted explicit part
        Field a = U;
        apply_multiplier(a, grid_, h, [](Real z) { return std::exp(z); });
        Field b = BU;
        apply_multiplier(b, grid_, h, phi1);
        b *= h;
        a += b;
        // corrector
        Field Ba = apply_stiffless(a);
        Ba -= BU;
        apply_multiplier(Ba, grid_, h, phi2);
        Ba *= h;
        a += Ba;
        U = std::move(a);
    }
    return U;
}

Field background_force(const Field& Ubar) {
    const Grid& g = Ubar.grid();
    Field F = Ubar;
    F *= -0.5;
    for (int a = 0; a < g.dim(); ++a) {
        std::array<int, 3> mi{0, 0, 0};
        mi[a] = 1;
        Field xi_dU = coordinate_multiply(differentiate(Ubar, mi), a);
        xi_dU *= -0.5;
        F += xi_dU;
    }
    F -= laplacian(Ubar);
    F += advect(Ubar, Ubar);
    return F;
}

Field stochastic_background_force(const Field& Ubar, Real h) {
    if (h <= 0) throw Error("stochastic_background_force: viscosity must be positive");
    Field H = background_force(Ubar);
    Field lap = laplacian(Ubar);
    lap *= (1.0 - h);
    H += lap;
    return H;
}

namespace {

Real complex_field_norm(const Field& re, const Field& im) {
    return std::sqrt(re.inner(re) + im.inner(im));
}

}  // namespace

Eigenpair leading_eigenpair(const LinearizedOperator& op, Real tau_probe, int krylov_dim,
                            Real tol, int max_restarts, unsigned seed, int steps_refine) {
    if (tau_probe <= 0) throw Error("leading_eigenpair: tau_probe must be positive");
    if (krylov_dim < 20) throw Error("leading_eigenpair: krylov_dim must be >= 20");
    if (steps_refine < 1) throw Error("leading_eigenpair: steps_refine must be >= 1");
    const int prop_steps =
        steps_refine * static_cast<int>(std::ceil(tau_probe / op.cfl_step()));

    Field start = random_divfree_field(op.grid(), seed, 0.25);
    Real best_residual = std::numeric_limits<Real>::infinity();
    Eigenpair best;

    for (int restart = 0; restart <= max_restarts; ++restart) {
        // Arnoldi on the propagator
        std::vector<Field> V;
        V.reserve(krylov_dim + 1);
        Field v0 = start;
        v0 *= 1.0 / v0.l2_norm();
        V.push_back(v0);
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(krylov_dim + 1, krylov_dim);
        int m = krylov_dim;
        for (int jcol = 0; jcol < krylov_dim; ++jcol) {
            Field w = op.semigroup(V[jcol], tau_probe, prop_steps);
            for (int i = 0; i <= jcol; ++i) {
                const Real hij = V[i].inner(w);
                H(i, jcol) = hij;
                Field tmp = V[i];
                tmp *= hij;
                w -= tmp;
            }
            const Real hnext = w.l2_norm();
            H(jcol + 1, jcol) = hnext;
            if (hnext < 1e-12) {
                m = jcol + 1;
                break;
            }
            w *= 1.0 / hnext;
            V.push_back(w);
        }

        Eigen::MatrixXd Hm = H.topLeftCorner(m, m);
        Eigen::EigenSolver<Eigen::MatrixXd> es(Hm);
        int dom = 0;
        for (int i = 1; i < m; ++i)
            if (std::abs(es.eigenvalues()(i)) > std::abs(es.eigenvalues()(dom))) dom = i;
        const Complex mu = es.eigenvalues()(dom);
        Complex lambda = std::log(mu) / tau_probe;

        Field eta_re(op.grid(), op.grid().dim());
        Field eta_im(op.grid(), op.grid().dim());
        for (int i = 0; i < m; ++i) {
            const Complex yi = es.eigenvectors()(i, dom);
            Field t1 = V[i];
            t1 *= yi.real();
            eta_re += t1;
            Field t2 = V[i];
            t2 *= yi.imag();
            eta_im += t2;
        }
        // conjugate-pair convention: Im lambda >= 0
        if (lambda.imag() < 0) {
            lambda = std::conj(lambda);
            eta_im *= -1.0;
        }
        const Real nrm = complex_field_norm(eta_re, eta_im);
        eta_re *= 1.0 / nrm;
        eta_im *= 1.0 / nrm;

        // residual of the eigenpair under L_ss itself
        Field Lre = op.apply(eta_re);
        Field Lim = op.apply(eta_im);
        Field r_re = Lre;
        {
            Field t = eta_re;
            t *= lambda.real();
            r_re -= t;
            Field t2 = eta_im;
            t2 *= -lambda.imag();
            r_re -= t2;
        }
        Field r_im = Lim;
        {
            Field t = eta_im;
            t *= lambda.real();
            r_im -= t;
            Field t2 = eta_re;
            t2 *= lambda.imag();
            r_im -= t2;
        }
        const Real res = complex_field_norm(r_re, r_im);

        if (res < best_residual) {
            best_residual = res;
            best.lambda = lambda;
            best.eta_re = eta_re;
            best.eta_im = eta_im;
            best.growth_rate = lambda.real();
            best.residual = res;
            // mass distribution of the complex mode: |re|^2 + |im|^2 stacked
            Field stack(op.grid(), 2 * op.grid().dim());
            for (int c = 0; c < op.grid().dim(); ++c) {
                stack.hat(c) = eta_re.hat(c);
                stack.hat(op.grid().dim() + c) = eta_im.hat(c);
            }
            best.eta_mass_margin = stack.mass_margin();
        }
        if (best_residual <= tol) return best;
        start = best.eta_re + best.eta_im;  // restart toward the dominant mode
    }
    throw ConvergenceError("leading_eigenpair: residual " + std::to_string(best_residual) +
                               " above tolerance after restarts",
                           best_residual);
}

Eigenpair refine_eigenpair(const LinearizedOperator& op, const Eigenpair& e, int krylov_dim) {
    if (krylov_dim < 5) throw Error("refine_eigenpair: krylov_dim must be >= 5");
    // complex Arnoldi on L_ss, basis stored as (re, im) field pairs
    std::vector<Field> Vre, Vim;
    {
        Field vr = e.eta_re, vi = e.eta_im;
        const Real nrm = complex_field_norm(vr, vi);
        if (nrm <= 0) throw Error("refine_eigenpair: zero starting vector");
        vr *= 1.0 / nrm;
        vi *= 1.0 / nrm;
        Vre.push_back(std::move(vr));
        Vim.push_back(std::move(vi));
    }
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(krylov_dim + 1, krylov_dim);
    int m = krylov_dim;
    for (int jcol = 0; jcol < krylov_dim; ++jcol) {
        Field wr = op.apply(Vre[jcol]);
        Field wi = op.apply(Vim[jcol]);
        for (int i = 0; i <= jcol; ++i) {
            const Complex hij(Vre[i].inner(wr) + Vim[i].inner(wi),
                              Vre[i].inner(wi) - Vim[i].inner(wr));
            H(i, jcol) = hij;
            Field tr = Vre[i];
            tr *= hij.real();
            Field ti = Vim[i];
            ti *= -hij.imag();
            tr += ti;
            wr -= tr;
            Field ur = Vre[i];
            ur *= hij.imag();
            Field ui = Vim[i];
            ui *= hij.real();
            ur += ui;
            wi -= ur;
        }
        const Real hnext = complex_field_norm(wr, wi);
        H(jcol + 1, jcol) = hnext;
        if (hnext < 1e-12) {
            m = jcol + 1;
            break;
        }
        wr *= 1.0 / hnext;
        wi *= 1.0 / hnext;
        Vre.push_back(std::move(wr));
        Vim.push_back(std::move(wi));
    }

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(H.topLeftCorner(m, m));
    int pick = 0;
    for (int i = 1; i < m; ++i)
        if (std::abs(es.eigenvalues()(i) - e.lambda) < std::abs(es.eigenvalues()(pick) - e.lambda))
            pick = i;
    Complex lambda = es.eigenvalues()(pick);

    Field eta_re(op.grid(), op.grid().dim());
    Field eta_im(op.grid(), op.grid().dim());
    for (int i = 0; i < m; ++i) {
        const Complex yi = es.eigenvectors()(i, pick);
        Field tr = Vre[i];
        tr *= yi.real();
        Field ti = Vim[i];
        ti *= -yi.imag();
        tr += ti;
        eta_re += tr;
        Field ur = Vre[i];
        ur *= yi.imag();
        Field ui = Vim[i];
        ui *= yi.real();
        ur += ui;
        eta_im += ur;
    }
    if (lambda.imag() < 0) {
        lambda = std::conj(lambda);
        eta_im *= -1.0;
    }
    const Real nrm = complex_field_norm(eta_re, eta_im);
    eta_re *= 1.0 / nrm;
    eta_im *= 1.0 / nrm;

    Eigenpair out;
    out.lambda = lambda;
    out.growth_rate = lambda.real();
    // residual of the refined pair under exact applies
    Field r_re = op.apply(eta_re);
    {
        Field t = eta_re;
        t *= lambda.real();
        r_re -= t;
        Field t2 = eta_im;
        t2 *= -lambda.imag();
        r_re -= t2;
    }
    Field r_im = op.apply(eta_im);
    {
        Field t = eta_im;
        t *= lambda.real();
        r_im -= t;
        Field t2 = eta_re;
        t2 *= lambda.imag();
        r_im -= t2;
    }
    out.residual = complex_field_norm(r_re, r_im);
    Field stack(op.grid(), 2 * op.grid().dim());
    for (int c = 0; c < op.grid().dim(); ++c) {
        stack.hat(c) = eta_re.hat(c);
        stack.hat(op.grid().dim() + c) = eta_im.hat(c);
    }
    out.eta_mass_margin = stack.mass_margin();
    out.eta_re = std::move(eta_re);
    out.eta_im = std::move(eta_im);
    return out;
}

Field ulin(const Eigenpair& eig, Real tau) {
    const Real a = eig.lambda.real(), b = eig.lambda.imag();
    const Real ea = std::exp(a * tau);
    Field out = eig.eta_re;
    out *= ea * std::cos(b * tau);
    Field t = eig.eta_im;
    t *= -ea * std::sin(b * tau);
    out += t;
    return out;
}

Eigenpair lift_planar_eigenpair(const LinearizedOperator& op3, Real sig_h, Real tol,
                                int max_rounds) {
    const Grid& g3 = op3.grid();
    if (g3.dim() != 3) throw Error("lift_planar_eigenpair: need a 3D operator");
    if (!(sig_h > 0)) throw Error("lift_planar_eigenpair: need sig_h > 0");
    const int n = g3.n();

    // planar eigenproblem on the z = 0 slice of the background
    Grid g2(2, n, g3.box(), g3.dealias_frac());
    Field Ub2 = Field::vector(g2);
    {
        const Field& Ub3 = op3.background();
        const int l0 = n / 2;  // coord(n/2) = 0
        for (int c = 0; c < 2; ++c) {
            auto v3 = Ub3.physical(c);
            std::vector<Real> v2(g2.node_count());
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    v2[static_cast<std::size_t>(i) * n + j] =
                        v3[(static_cast<std::size_t>(i) * n + j) * n + l0];
            Ub2.set_physical(c, v2);
        }
    }
    LinearizedOperator op2(g2, Ub2);
    Eigenpair e2 = refine_eigenpair(op2, leading_eigenpair(op2, 0.5, 32, 1e-3, 2, 1, 2), 30);

    // columnar extension with a Gaussian z-envelope, re-projected because the
    // slice sampling need not be exactly solenoidal on the 3D grid
    auto extend = [&](const Field& w2) {
        Field w3 = Field::vector(g3);
        for (int c = 0; c < 2; ++c) {
            auto v2 = w2.physical(c);
            std::vector<Real> v3(g3.node_count(), 0.0);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const Real base = v2[static_cast<std::size_t>(i) * n + j];
                    for (int l = 0; l < n; ++l) {
                        const Real z = g3.coord(l);
                        v3[(static_cast<std::size_t>(i) * n + j) * n + l] =
                            base * std::exp(-z * z / (2 * sig_h * sig_h));
                    }
                }
            w3.set_physical(c, v3);
        }
        Field out = leray_project(w3);
        zero_mean(out);
        return out;
    };
    Eigenpair seed;
    seed.eta_re = extend(e2.eta_re);
    seed.eta_im = extend(e2.eta_im);
    const Real nrm = std::sqrt(seed.eta_re.inner(seed.eta_re) + seed.eta_im.inner(seed.eta_im));
    if (!(nrm > 0)) throw Error("lift_planar_eigenpair: degenerate seed");
    seed.eta_re *= 1 / nrm;
    seed.eta_im *= 1 / nrm;
    seed.lambda = e2.lambda;

    Eigenpair best = seed;
    best.residual = std::numeric_limits<Real>::infinity();
    for (int round = 0; round < max_rounds; ++round) {
        best = refine_eigenpair(op3, best, 40);
        if (best.residual <= tol) {
            best.growth_rate = best.lambda.real();
            return best;
        }
    }
    throw ConvergenceError("lift_planar_eigenpair: 3D residual did not reach tolerance",
                           best.residual);
}

BlockCheckRow block_semigroup_check(const LinearizedOperator& op, const Field& U0, int j,
                                    Real tau, int N, Real c, Real C1, Real C2) {
    if (!(tau > 0 && tau < 2)) throw Error("block_semigroup_check: need 0 < tau < 2");
    if (j < 0) throw Error("block_semigroup_check: need j >= 0");
    BlockCheckRow row;
    row.j = j;
    row.tau = tau;
    Field U = op.semigroup(U0, tau);
    row.lhs = grad_pow(lp_block(U, j), N + 2).l2_norm();
    const Real inf = std::numeric_limits<Real>::infinity();
    const Real pow2j = std::pow(2.0, 2 * j);
    row.rhs1 = C1 * pow2j * std::exp(-c * pow2j * tau) * besov_norm(U0, {Real(N), 2, inf});
    row.rhs2 = C2 * U0.l2_norm();
    row.margin = row.lhs / (row.rhs1 + row.rhs2);
    return row;
}

}  // namespace ssnu
