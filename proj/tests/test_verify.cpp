#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ssnu/operator.hpp"
#include "ssnu/similarity.hpp"
#include "ssnu/verify.hpp"

using namespace ssnu;

namespace {

std::vector<Real> linspace(Real a, Real b, int m) {
    std::vector<Real> t(m);
    for (int i = 0; i < m; ++i) t[i] = a + (b - a) * i / (m - 1);
    return t;
}

/// Steady manufactured solution: any divergence-free u solves the equations
/// with body force f = P(u.grad u) - h Lap u (the pressure gradient is
/// invisible to divergence-free test functions).
Field steady_force(const Field& u, Real h = 1.0) {
    Field f = advect(u, u);
    Field lap = laplacian(u);
    lap *= -h;
    f += lap;
    return f;
}

/// u(t) = cos(omega t) v with div v = 0 solves the equations with
/// f = -omega sin(omega t) v + cos^2(omega t) P(v.grad v) - cos(omega t) Lap v.
struct OscillatingSolution {
    Field v, adv, lap;
    Real omega;

    OscillatingSolution(const Field& v_, Real omega_)
        : v(v_), adv(advect(v_, v_)), lap(laplacian(v_)), omega(omega_) {}

    Field u(Real t) const {
        Field out = v;
        out *= std::cos(omega * t);
        return out;
    }
    Field f(Real t) const {
        const Real c = std::cos(omega * t);
        Field out = v;
        out *= -omega * std::sin(omega * t);
        Field a = adv;
        a *= c * c;
        out += a;
        Field l = lap;
        l *= -c;
        out += l;
        return out;
    }
};

}  // namespace

TEST_CASE("test function bank: size, support, reproducibility") {
    const Real box = 10.0;
    TestFunctionBank bank = TestFunctionBank::make(2, box);
    REQUIRE(bank.psi.size() >= 20);
    for (const TestFunction& tf : bank.psi) {
        Real c = 0;
        for (Real ci : tf.center) c = std::max(c, std::abs(ci));
        // supported in the inner half-box
        CHECK(c + tf.radius <= box / 2 + 1e-12);
        CHECK(tf.radius > 0);
    }
    // the potential vanishes identically outside its support ball: the count
    // of exact zeros matches the count of grid nodes outside the ball
    // (ordering-independent; the potential is strictly positive inside)
    Grid g(2, 32, box);
    const TestFunction& tf = bank.psi[0];
    Field chi = tf.sample_potential(g);
    auto vals = chi.physical(0);
    Real max_all = 0, max_outside = 0;
    for (Real v : vals) max_all = std::max(max_all, std::abs(v));
    std::size_t i = 0, outside = 0;
    for (int i0 = 0; i0 < g.n(); ++i0)
        for (int i1 = 0; i1 < g.n(); ++i1, ++i) {
            const Real x = g.coord(i0) - tf.center[0];
            const Real y = g.coord(i1) - tf.center[1];
            if (std::sqrt(x * x + y * y) >= 1.05 * tf.radius) {
                max_outside = std::max(max_outside, std::abs(vals[i]));
                ++outside;
            }
        }
    CHECK(outside > g.node_count() / 2);
    CHECK(max_all > 0);
    // only spectral round-trip noise survives outside the support ball
    CHECK(max_outside <= 1e-12 * max_all);

    TestFunctionBank again = TestFunctionBank::make(2, box);
    REQUIRE(again.psi.size() == bank.psi.size());
    for (std::size_t k = 0; k < bank.psi.size(); ++k) {
        CHECK(again.psi[k].center == bank.psi[k].center);
        CHECK(again.psi[k].radius == bank.psi[k].radius);
    }
    TestFunctionBank other = TestFunctionBank::make(2, box, 24, 7);
    bool differs = false;
    for (std::size_t k = 0; k < other.psi.size(); ++k)
        if (other.psi[k].center != bank.psi[k].center) differs = true;
    CHECK(differs);
}

TEST_CASE("test functions are exactly discretely divergence-free") {
    for (int dim : {2, 3}) {
        const int n = dim == 2 ? 64 : 32;
        Grid g(dim, n, 10.0);
        TestFunctionBank bank = TestFunctionBank::make(dim, 10.0);
        for (std::size_t k = 0; k < bank.psi.size(); k += 5) {
            Field psi = bank.psi[k].sample(g);
            const Real nn = psi.l2_norm();
            REQUIRE(nn > 0);
            CHECK(divergence_l2(psi) <= 1e-12 * nn);
        }
    }
}

TEST_CASE("weak residual: steady manufactured solution, exact to roundoff") {
    Grid g(2, 32, 10.0);
    Field u0 = random_divfree_field(g, 11);
    Field f0 = steady_force(u0);
    auto ts = linspace(0.2, 0.6, 41);
    std::vector<Field> u(ts.size(), u0), f(ts.size(), f0);
    TestFunctionBank bank = TestFunctionBank::make(2, 10.0);

    auto rep = weak_residual(ts, u, f, bank, WeakMode::deterministic, nullptr, 1e-8);
    CHECK(rep.pass);
    CHECK(rep.worst <= 1e-8);
    REQUIRE(rep.rows.size() == bank.psi.size());

    // a 1% force corruption must be seen at >= 10x the tolerance
    Field fbad = f0;
    fbad *= 1.01;
    std::vector<Field> fb(ts.size(), fbad);
    auto bad = weak_residual(ts, u, fb, bank, WeakMode::deterministic, nullptr, 1e-8);
    CHECK_FALSE(bad.pass);
    CHECK(bad.worst >= 10 * 1e-8);
}

TEST_CASE("weak residual: trapezoid order verified by time-step halving") {
    Grid g(2, 32, 10.0);
    Field v = random_divfree_field(g, 5);
    OscillatingSolution osc(v, 4.0);
    Real worst[2];
    for (int lev = 0; lev < 2; ++lev) {
        const int m = lev == 0 ? 33 : 65;
        auto ts = linspace(0.0, 1.0, m);
        std::vector<Field> u, f;
        for (Real t : ts) {
            u.push_back(osc.u(t));
            f.push_back(osc.f(t));
        }
        TestFunctionBank bank = TestFunctionBank::make(2, 10.0, 8);
        auto rep = weak_residual(ts, u, f, bank, WeakMode::deterministic, nullptr, 1.0);
        worst[lev] = rep.worst;
    }
    CHECK(worst[0] > 0);
    const Real ratio = worst[0] / worst[1];
    CHECK(ratio >= 3.0);
    CHECK(ratio <= 5.5);
}

TEST_CASE("weak residual refuses a time grid too coarse for the tolerance") {
    Grid g(2, 32, 10.0);
    Field v = random_divfree_field(g, 5);
    OscillatingSolution osc(v, 6.0);
    auto ts = linspace(0.0, 1.0, 5);
    std::vector<Field> u, f;
    for (Real t : ts) {
        u.push_back(osc.u(t));
        f.push_back(osc.f(t));
    }
    TestFunctionBank bank = TestFunctionBank::make(2, 10.0, 4);
    CHECK_THROWS_AS(weak_residual(ts, u, f, bank, WeakMode::deterministic, nullptr, 1e-8),
                    StabilityError);
}

TEST_CASE("weak residual: random-pde mode uses the per-node viscosity") {
    Grid g(2, 32, 10.0);
    Field u0 = random_divfree_field(g, 3);
    const Real h = 0.7;
    Field f0 = steady_force(u0, h);
    auto ts = linspace(0.1, 0.5, 21);
    std::vector<Field> u(ts.size(), u0), f(ts.size(), f0);
    std::vector<Real> visc(ts.size(), h);
    TestFunctionBank bank = TestFunctionBank::make(2, 10.0, 8);

    auto rep = weak_residual(ts, u, f, bank, WeakMode::random_pde, &visc, 1e-8);
    CHECK(rep.pass);
    CHECK(rep.worst <= 1e-8);
    // with unit viscosity the same data must fail
    auto wrong = weak_residual(ts, u, f, bank, WeakMode::deterministic, nullptr, 1e-8);
    CHECK_FALSE(wrong.pass);

    // mode / viscosity argument mismatches are hard errors
    CHECK_THROWS_AS(weak_residual(ts, u, f, bank, WeakMode::deterministic, &visc, 1e-8), Error);
    CHECK_THROWS_AS(weak_residual(ts, u, f, bank, WeakMode::random_pde, nullptr, 1e-8), Error);
    std::vector<Real> short_visc(ts.size() - 1, h);
    CHECK_THROWS_AS(weak_residual(ts, u, f, bank, WeakMode::random_pde, &short_visc, 1e-8), Error);
}

TEST_CASE("weak residual: exact self-similar pair of the ring profile") {
    Grid g(2, 32, 10.0);
    Field Ubar = ring_vortex(g, 20.0, 1.5);
    Field Fbar = background_force(Ubar);
    const Real t0 = 0.4, t1 = 1.0;
    const int m = 1025;
    std::vector<Real> ts;
    std::vector<Field> u, f;
    for (int i = 0; i < m; ++i) {
        const Real t = std::exp(std::log(t0) + (std::log(t1) - std::log(t0)) * i / (m - 1));
        ts.push_back(t);
        u.push_back(to_physical(Ubar, t, FieldKind::velocity));
        f.push_back(to_physical(Fbar, t, FieldKind::force));
    }
    TestFunctionBank bank = TestFunctionBank::make(2, 10.0 * std::sqrt(t0), 6);
    auto rep = weak_residual(ts, u, f, bank, WeakMode::deterministic, nullptr, 1e-6, 4);
    CHECK(rep.pass);
    CHECK(rep.worst <= 1e-6);
}

TEST_CASE("energy check: heat-flow equality and its time reversal") {
    Grid g(2, 64, 10.0);
    Field v = Field::vector(g, VarTag::physical);
    const Real k0 = pi / 10.0;
    v.fill(0, [&](const std::vector<Real>& x) { return std::sin(k0 * x[1]); });
    const Real rate = k0 * k0;  // |k|^2 of the single mode

    auto ts = linspace(0.0, 1.0, 201);
    std::vector<Field> u, zero;
    Field z = Field::vector(g, VarTag::physical);
    for (Real t : ts) {
        Field ut = v;
        ut *= std::exp(-rate * t);
        u.push_back(std::move(ut));
        zero.push_back(z);
    }
    auto rep = energy_check(ts, u, zero);
    CHECK(rep.pass);
    CHECK(rep.worst <= 1e-6);

    // reversed in time the same data gains energy without forcing
    std::vector<Field> rev(u.rbegin(), u.rend());
    auto bad = energy_check(ts, rev, zero);
    CHECK_FALSE(bad.pass);
    CHECK(bad.worst > 1e-2);
}

TEST_CASE("monte-carlo energy margin") {
    std::vector<Real> good = {-1e-3, -2e-3, -5e-4, -1.5e-3, -8e-4};
    CHECK(mc_energy_margin(good).pass);
    std::vector<Real> bad = {0.10, 0.11, 0.09, 0.105, 0.095};
    CHECK_FALSE(mc_energy_margin(bad).pass);
    CHECK_THROWS_AS(mc_energy_margin({0.0}), Error);
}

TEST_CASE("pressure recovery oracles") {
    Grid g(2, 64, 10.0);
    const Real k0 = pi / 10.0;
    Field zero_f = Field::vector(g, VarTag::physical);

    // a pure shear mode has no self-advection: p = 0
    Field shear = Field::vector(g, VarTag::physical);
    shear.fill(0, [&](const std::vector<Real>& x) { return std::sin(k0 * x[1]); });
    Field p0 = pressure_recover(shear, zero_f);
    CHECK(p0.l2_norm() <= 1e-12 * shear.l2_norm() * shear.l2_norm());

    // Taylor-Green: u = A (sin ax cos ay, -cos ax sin ay),
    // p = (A^2/4)(cos 2ax + cos 2ay)
    const Real A = 1.7, a = 2 * k0;
    Field tg = Field::vector(g, VarTag::physical);
    tg.fill(0, [&](const std::vector<Real>& x) {
        return A * std::sin(a * x[0]) * std::cos(a * x[1]);
    });
    tg.fill(1, [&](const std::vector<Real>& x) {
        return -A * std::cos(a * x[0]) * std::sin(a * x[1]);
    });
    Field p = pressure_recover(tg, zero_f);
    Field p_exact = Field::scalar(g, VarTag::physical);
    p_exact.fill(0, [&](const std::vector<Real>& x) {
        return A * A / 4 * (std::cos(2 * a * x[0]) + std::cos(2 * a * x[1]));
    });
    Field diff = p;
    diff -= p_exact;
    CHECK(diff.l2_norm() <= 1e-10 * p_exact.l2_norm());

    // a pure gradient force with u = 0 recovers its potential
    Field phi = Field::scalar(g, VarTag::physical);
    phi.fill(0, [&](const std::vector<Real>& x) {
        return std::exp(-(x[0] * x[0] + x[1] * x[1]) / 2.0);
    });
    zero_mean(phi);
    Field gradphi = Field::vector(g, VarTag::physical);
    gradphi.hat(0) = differentiate(phi, {1, 0, 0}).hat(0);
    gradphi.hat(1) = differentiate(phi, {0, 1, 0}).hat(0);
    Field u0 = Field::vector(g, VarTag::physical);
    Field pg = pressure_recover(u0, gradphi);
    Field dg = pg;
    dg -= phi;
    CHECK(dg.l2_norm() <= 1e-10 * phi.l2_norm());
}

TEST_CASE("local energy: steady manufactured solution sits on the equality") {
    Grid g(2, 32, 10.0);
    Field u0 = random_divfree_field(g, 9);
    Field f0 = steady_force(u0);
    auto ts = linspace(0.2, 0.6, 21);
    std::vector<Field> u(ts.size(), u0), f(ts.size(), f0);
    TestFunctionBank bank = TestFunctionBank::make(2, 10.0, 8);

    auto rep = local_energy_check(ts, u, f, bank, 1e-10);
    CHECK(rep.pass);
    for (const CheckRow& row : rep.rows) CHECK(std::abs(row.margin) <= 1e-10);

    // removing the dissipation's forcing compensation breaks the inequality
    Field fbad = f0;
    fbad *= 0.0;
    std::vector<Field> fb(ts.size(), fbad);
    auto bad = local_energy_check(ts, u, fb, bank, 1e-10);
    CHECK_FALSE(bad.pass);

    CHECK_THROWS_AS(local_energy_check(ts, u, f, bank, 1e-10, WeakMode::random_pde), Error);
}

TEST_CASE("decay fit oracles") {
    auto ts = linspace(0.5, 4.0, 64);
    std::vector<Real> exact, wobble;
    for (Real t : ts) {
        exact.push_back(std::pow(t, -0.25));
        wobble.push_back(std::pow(t, -0.25) * (1 + 0.01 * std::sin(std::log(t))));
    }
    DecayFit fe = decay_fit(ts, exact);
    CHECK(fe.slope == doctest::Approx(-0.25).epsilon(1e-10));
    CHECK(fe.stderr_ <= 1e-10);
    CHECK(fe.n == 64);

    DecayFit fw = decay_fit(ts, wobble);
    CHECK(std::abs(fw.slope - (-0.25)) <= 0.01);

    DecayFit fwin = decay_fit(ts, exact, 1.0, 2.0);
    CHECK(fwin.slope == doctest::Approx(-0.25).epsilon(1e-10));
    CHECK(fwin.n < 64);

    std::vector<Real> neg = exact;
    neg[10] = -1.0;
    CHECK_THROWS_AS(decay_fit(ts, neg), Error);
    CHECK_THROWS_AS(decay_fit({1, 2, 3}, {1, 1, 1}), Error);
}

TEST_CASE("separation certificate") {
    const Real a = 0.4;
    auto ts = linspace(0.05, 0.8, 48);
    std::vector<Real> n1, sep_good, sep_bad;
    for (Real t : ts) {
        n1.push_back(std::pow(t, -0.25));
        sep_good.push_back(std::pow(t, a - 0.25));
        sep_bad.push_back(std::pow(t, 0.5 * a - 0.25));
    }
    CHECK(separation_certificate(ts, n1, sep_good, a).pass);
    CHECK_FALSE(separation_certificate(ts, n1, sep_bad, a).pass);
}
