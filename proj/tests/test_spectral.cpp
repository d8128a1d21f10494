#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ssnu/spectral.hpp"

using namespace ssnu;

namespace {
const Grid g2(2, 32, pi);
const Grid g3(3, 16, pi);

Field single_mode_3d() {
    // u(x) = (sin x2, 0, 0), divergence-free single mode with k = (0,1,0)
    Field u = Field::vector(g3);
    u.fill(0, [](const std::vector<Real>& x) { return std::sin(x[1]); });
    return u;
}
}  // namespace

TEST_CASE("leray: gradient fields are annihilated") {
    Field phi = Field::scalar(g2);
    phi.fill(0, [](const std::vector<Real>& x) {
        return std::cos(x[0]) * std::sin(2 * x[1]) + std::sin(3 * x[0]);
    });
    Field grad(g2, 2);
    grad.hat(0) = differentiate(phi, {1, 0, 0}).hat(0);
    grad.hat(1) = differentiate(phi, {0, 1, 0}).hat(0);
    Field p = leray_project(grad);
    CHECK(p.l2_norm() <= 1e-12 * grad.l2_norm());
}

TEST_CASE("leray: idempotent and divergence-killing on random fields") {
    for (unsigned seed = 1; seed <= 5; ++seed) {
        Field f = random_field(g2, seed, 2, 0.5);
        Field p = leray_project(f);
        CHECK(divergence_l2(p) <= 1e-10 * sobolev_norm(p, 1));
        Field pp = leray_project(p);
        CHECK((pp - p).l2_norm() <= 1e-10 * p.l2_norm());
    }
}

TEST_CASE("leray: shear mode unchanged") {
    // I - kk^T/|k|^2 acts as identity on (1,0,0) when k=(0,1,0)
    Field u = single_mode_3d();
    Field p = leray_project(u);
    CHECK((p - u).l2_norm() <= 1e-12 * u.l2_norm());
}

TEST_CASE("lp blocks: shell locality of a single mode") {
    // |k| = 4 = 2^2 lies in the annulus support of shells near j0 = 2 only
    Field f = Field::scalar(g2);
    f.fill(0, [](const std::vector<Real>& x) { return std::cos(4 * x[0]); });
    Field sum = Field::scalar(g2);
    for (int j = -1; j <= g2.shell_count(); ++j) {
        Field b = lp_block(f, j);
        if (std::abs(j - 2) >= 2) CHECK(b.l2_norm() <= 1e-12 * f.l2_norm());
        sum += b;
    }
    CHECK((sum - f).l2_norm() <= 1e-12 * f.l2_norm());
}

TEST_CASE("lp blocks: partition of unity on random band-limited fields") {
    for (unsigned seed = 10; seed < 14; ++seed) {
        Field f = random_field(g2, seed, 1, 0.6);
        Field sum = Field::scalar(g2);
        for (int j = -1; j <= g2.shell_count(); ++j) sum += lp_block(f, j);
        CHECK((sum - f).l2_norm() <= 1e-12 * f.l2_norm());
    }
}

TEST_CASE("lp blocks: constant field lands in the low block") {
    Field f = Field::scalar(g2);
    f.fill(0, [](const std::vector<Real>&) { return 3.5; });
    Field b = lp_block(f, -1);
    CHECK((b - f).l2_norm() <= 1e-12 * f.l2_norm());
    CHECK(lp_block(f, 0).l2_norm() <= 1e-14);
    CHECK_THROWS_AS(lp_block(f, g2.shell_count() + 1), Error);
}

TEST_CASE("sobolev norm: zero, single mode, Parseval") {
    Field z = Field::scalar(g2);
    CHECK(sobolev_norm(z, 1.5) == 0.0);

    Field f = Field::scalar(g2);
    f.fill(0, [](const std::vector<Real>& x) { return std::sin(x[0]); });
    f *= 1.0 / f.l2_norm();
    CHECK(sobolev_norm(f, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    Field r = random_field(g2, 77, 2, 0.5);
    CHECK(sobolev_norm(r, 0) == doctest::Approx(r.l2_norm()).epsilon(1e-12));
}

TEST_CASE("besov norm: zero field and single-shell collapse") {
    Field z = Field::scalar(g2);
    CHECK(besov_norm(z, {1.0, 2, 2}) == 0.0);

    // mode |k| = 4 sits in shell j0 = 2; for q = infinity the sum collapses
    Field f = Field::scalar(g2);
    f.fill(0, [](const std::vector<Real>& x) { return std::cos(4 * x[0]); });
    f *= 1.0 / f.l2_norm();
    const Real alpha = 1.3;
    Real expected = 0;
    for (int j = -1; j <= g2.shell_count(); ++j)
        expected = std::max(expected, std::pow(2.0, j * alpha) * lp_block(f, j).l2_norm());
    const Real inf = std::numeric_limits<Real>::infinity();
    CHECK(besov_norm(f, {alpha, 2, inf}) == doctest::Approx(expected).epsilon(1e-12));
    // the shell-2 term dominates
    CHECK(besov_norm(f, {alpha, 2, inf}) ==
          doctest::Approx(std::pow(2.0, 2 * alpha) * lp_block(f, 2).l2_norm()).epsilon(1e-6));
}

TEST_CASE("besov/sobolev equivalence bracket is field-independent") {
    const Real s = 1.0;
    Real lo = 1e100, hi = 0;
    for (unsigned seed = 100; seed < 130; ++seed) {
        Field f = random_field(g2, seed, 1, 0.6);
        const Real ratio = besov_norm(f, {s, 2, 2}) / sobolev_norm(f, s);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    // equivalent norms: bracket stays within a modest fixed range
    CHECK(lo > 0.2);
    CHECK(hi < 5.0);
    CHECK(hi / lo < 10.0);
}

TEST_CASE("paraproduct: Bony identity reconstructs the dealiased product") {
    for (unsigned seed = 40; seed < 45; ++seed) {
        Field f = random_field(g2, seed, 1, 0.5);
        Field h = random_field(g2, seed + 1000, 1, 0.5);
        auto pp = paraproduct(f, h);
        Field total = pp.lo + pp.resonant + pp.hi;
        Field direct = multiply(f, h);
        CHECK((total - direct).l2_norm() <= 1e-10 * (direct.l2_norm() + 1e-30));
    }
}

TEST_CASE("paraproduct: constant times g sums to c*g") {
    Field c = Field::scalar(g2);
    c.fill(0, [](const std::vector<Real>&) { return 2.0; });
    Field h = random_field(g2, 7, 1, 0.5);
    auto pp = paraproduct(c, h);
    Field total = pp.lo + pp.resonant + pp.hi;
    Field expected = h;
    expected *= 2.0;
    dealias(expected);
    CHECK((total - expected).l2_norm() <= 1e-10 * expected.l2_norm());
}

TEST_CASE("paraproduct: single shared mode is resonant") {
    Field f = Field::scalar(g2);
    f.fill(0, [](const std::vector<Real>& x) { return std::cos(4 * x[0]); });
    auto pp = paraproduct(f, f);
    CHECK(pp.lo.l2_norm() <= 1e-12);
    CHECK(pp.hi.l2_norm() <= 1e-12);
    Field direct = multiply(f, f);
    CHECK((pp.resonant - direct).l2_norm() <= 1e-12);
}

TEST_CASE("paraproduct estimate: lo bounded by Linf times Besov") {
    // || f < g ||_{B^b_{2,inf}} <= C ||f||_{Linf} ||g||_{B^b_{2,inf}}
    const Real inf = std::numeric_limits<Real>::infinity();
    const Real beta = 1.0;
    Real worst = 0;
    for (unsigned seed = 200; seed < 220; ++seed) {
        Field f = random_field(g2, seed, 1, 0.5);
        Field h = random_field(g2, seed + 500, 1, 0.5);
        auto pp = paraproduct(f, h);
        const Real lhs = besov_norm(pp.lo, {beta, 2, inf});
        const Real rhs = lp_norm(f, inf) * besov_norm(h, {beta, 2, inf});
        worst = std::max(worst, lhs / rhs);
    }
    CHECK(worst < 10.0);  // bounded ratio; the frozen constant lives in the fixtures
}

TEST_CASE("derivatives: band-limited exactness") {
    Field f = Field::scalar(g2);
    f.fill(0, [](const std::vector<Real>& x) { return std::sin(x[0]); });
    Field df = differentiate(f, {1, 0, 0});
    Field expected = Field::scalar(g2);
    expected.fill(0, [](const std::vector<Real>& x) { return std::cos(x[0]); });
    CHECK((df - expected).l2_norm() <= 1e-12 * expected.l2_norm());

    Field lf = laplacian(f);
    Field el = f;
    el *= -1.0;
    CHECK((lf - el).l2_norm() <= 1e-12 * f.l2_norm());
}

TEST_CASE("advect: shear self-advection vanishes") {
    Field u = single_mode_3d();
    Field a = advect(u, u);
    CHECK(a.l2_norm() <= 1e-12 * u.l2_norm());
}

TEST_CASE("invalid input raises") {
    Field f(g2, 2);
    f.hat(0)[3] = Complex(std::nan(""), 0);
    CHECK_THROWS_AS(leray_project(f), FieldError);
}

#include <limits>

#include "ssnu/frozen_constants.hpp"

namespace {

// the three paraproduct inequality ratios for one scalar field pair
std::array<Real, 3> paraproduct_ratios(const Grid& g, unsigned seed) {
    const Real inf = std::numeric_limits<Real>::infinity();
    const Real alpha = fixtures::para_alpha, beta = fixtures::para_beta;
    Field f = random_field(g, seed, 1);
    Field h = random_field(g, seed + 77777, 1);
    Paraproduct pp = paraproduct(f, h);
    const Real gb = besov_norm(h, {beta, 2, inf});
    const Real fa = besov_norm(f, {alpha, inf, inf});
    return {besov_norm(pp.lo, {beta, 2, inf}) / (lp_norm(f, inf) * gb),
            besov_norm(pp.lo, {alpha + beta, 2, inf}) / (fa * gb),
            besov_norm(pp.resonant, {alpha + beta, 2, inf}) / (fa * gb)};
}

}  // namespace

TEST_CASE("paraproduct inequalities hold with frozen constants on fresh pairs") {
    Grid g(2, 64, 10.0);
    const Real C[3] = {fixtures::para_C_lo_linf, fixtures::para_C_lo_besov,
                       fixtures::para_C_resonant};
    Real worst[3] = {0, 0, 0};
    for (unsigned seed = 1; seed <= 100; ++seed) {
        auto r = paraproduct_ratios(g, seed);
        for (int i = 0; i < 3; ++i) worst[i] = std::max(worst[i], r[i] / C[i]);
    }
    for (int i = 0; i < 3; ++i) CHECK(worst[i] <= 1.0);
}

TEST_CASE("paraproduct constants are stable under grid doubling") {
    // refit the maxima on the calibration seeds at n and 2n: the refitted
    // constant must not grow by more than 10%
    Real fit64[3] = {0, 0, 0}, fit128[3] = {0, 0, 0};
    Grid ga(2, 64, 10.0), gb(2, 128, 10.0);
    for (unsigned seed = 500; seed < 550; ++seed) {
        auto ra = paraproduct_ratios(ga, seed);
        auto rb = paraproduct_ratios(gb, seed);
        for (int i = 0; i < 3; ++i) {
            fit64[i] = std::max(fit64[i], ra[i]);
            fit128[i] = std::max(fit128[i], rb[i]);
        }
    }
    for (int i = 0; i < 3; ++i) CHECK(fit128[i] <= 1.10 * fit64[i]);
}
