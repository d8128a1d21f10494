// throwaway experiments
#include <chrono>
#include <cstdio>

#include "ssnu/operator.hpp"
#include "ssnu/similarity.hpp"

using namespace ssnu;

int main(int argc, char** argv) {
    const int mode = argc > 1 ? std::atoi(argv[1]) : 0;

    if (mode == 0) {
        // heat-flow oracle for Ubar=0:
        // U(tau) = e^{tau L} U0 vs u solving heat eq: u(t)=e^{tDelta}u0, t=e^tau-1,
        // U(tau,xi) = e^{tau/2} u(e^tau-1, xi e^{tau/2}).
        // The oracle lives on a large auxiliary box so the dilated evaluation
        // never wraps periodic copies.
        const Real sigma = 1.4;
        auto u0x = [&](const std::vector<Real>& x) {
            return x[1] / (sigma * sigma) * std::exp(-(x[0] * x[0] + x[1] * x[1]) / (2 * sigma * sigma));
        };
        auto u0y = [&](const std::vector<Real>& x) {
            return -x[0] / (sigma * sigma) * std::exp(-(x[0] * x[0] + x[1] * x[1]) / (2 * sigma * sigma));
        };
        Grid g(2, 32, 10.0);
        Field U0 = Field::vector(g);
        U0.fill(0, u0x);
        U0.fill(1, u0y);
        zero_mean(U0);
        Grid gaux(2, 256, 90.0);
        Field u0aux = Field::vector(gaux);
        u0aux.fill(0, u0x);
        u0aux.fill(1, u0y);
        LinearizedOperator op(g);
        for (Real tau : {0.25, 0.5, 1.0}) {
            Real t = std::exp(tau) - 1.0;
            Field u = u0aux;
            for (int c = 0; c < u.ncomp(); ++c) {
                auto& hat = u.hat(c);
                for_each_mode(gaux, [&](std::size_t idx, const std::array<Real, 3>& k) {
                    hat[idx] *= std::exp(-(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * t);
                });
            }
            Field Uo = evaluate_at_scaled_nodes(u, g, std::exp(tau / 2));
            Uo *= std::exp(tau / 2);
            zero_mean(Uo);
            int base = (int)std::ceil(tau / op.cfl_step());
            for (int mult : {1, 4, 16, 32}) {
                Field U = op.semigroup(U0, tau, mult * base);
                printf("tau=%g steps=%d rel_err=%g\n", tau, mult * base,
                       (U - Uo).l2_norm() / Uo.l2_norm());
            }
        }
    }

    if (mode == 1) {
        // amplitude sweep for the 2D bump vortex
        const int n = argc > 2 ? std::atoi(argv[2]) : 32;
        const Real r = argc > 3 ? std::atof(argv[3]) : 2.5;
        Grid g(2, n, 10.0);
        for (Real A : {12.0, 16.0, 20.0, 24.0}) {
            Field Ub = bump_vortex(g, A, r);
            LinearizedOperator op(g, Ub);
            auto t0 = std::chrono::steady_clock::now();
            try {
                Eigenpair e = leading_eigenpair(op, 0.5, 48, 5e-4, 2, 1);
                auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                printf("A=%5.1f maxU=%.3f lambda=%.5f%+.5fi res=%.2e margin=%.4f [%.1fs]\n", A,
                       op.background_max_speed(), e.lambda.real(), e.lambda.imag(), e.residual,
                       e.eta_mass_margin, dt);
            } catch (const ConvergenceError& ex) {
                printf("A=%5.1f no convergence best=%g\n", A, ex.best_residual);
            }
        }
    }
    if (mode == 2) {
        // amplitude sweep for the 3D localized vortex
        const int n = argc > 2 ? std::atoi(argv[2]) : 32;
        const Real r = argc > 3 ? std::atof(argv[3]) : 2.5;
        Grid g(3, n, 10.0);
        for (Real A : {24.0, 32.0, 48.0}) {
            Field Ub = bump_vortex(g, A, r);
            LinearizedOperator op(g, Ub);
            auto t0 = std::chrono::steady_clock::now();
            try {
                Eigenpair e = leading_eigenpair(op, 0.5, 36, 3e-3, 1, 1, 2);
                auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                printf("A=%5.1f maxU=%.3f lambda=%.5f%+.5fi res=%.2e margin=%.4f [%.1fs]\n", A,
                       op.background_max_speed(), e.lambda.real(), e.lambda.imag(), e.residual,
                       e.eta_mass_margin, dt);
                fflush(stdout);
            } catch (const ConvergenceError& ex) {
                printf("A=%5.1f no convergence best=%g\n", A, ex.best_residual);
                fflush(stdout);
            }
        }
    }
    return 0;
}
