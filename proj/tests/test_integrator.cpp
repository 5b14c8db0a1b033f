#include <doctest.h>

#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>

#include "activelc/errors.hpp"
#include "activelc/integrator.hpp"
#include "activelc/physics.hpp"
#include "test_util.hpp"

using namespace activelc;
using namespace testutil;
using std::numbers::pi;

namespace {

State quiescent(const Grid& g, const PhysParams& p) {
    State s(g.layout());
    s.c.fill(p.c_star);
    s.rho.fill(1.0);
    fill_state_ghosts(s, g);
    return s;
}

double max_diff(const ScalarField& a, const ScalarField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

}  // namespace

TEST_CASE("cfl_dt formula") {
    PhysParams p;
    RegParams r;
    StepControl ctl;
    ctl.acoustic_bound = false;
    const Grid g(2, {10, 10, 1}, {1, 1, 1});
    State s = quiescent(g, p);
    CHECK(cfl_dt(s, g, p, r, ctl) == ctl.dt_max);
    s.m[0].fill(2.0);
    ctl.cfl = 0.5;
    ctl.dt_max = 1.0;
    CHECK(cfl_dt(s, g, p, r, ctl) == doctest::Approx(0.025));

    const Grid g3(3, {10, 10, 10}, {1, 1, 1});
    State s3 = quiescent(g3, p);
    ctl.cfl = 1.0;
    ctl.implicit_diffusion = false;
    p.mu = p.nu = p.Gamma = 0.1;
    CHECK(cfl_dt(s3, g3, p, r, ctl) == doctest::Approx(0.01 / 6.0));

    ctl.acoustic_bound = true;
    ctl.implicit_diffusion = true;
    // c_s^2 = gamma rho^(gamma-1) = 2 at rho = 1: limit = h / (3 sqrt 2).
    CHECK(cfl_dt(s3, g3, p, r, ctl) == doctest::Approx(0.1 / (3.0 * std::sqrt(2.0))));

    State empty;
    CHECK_THROWS_AS((void)cfl_dt(empty, g3, p, r, ctl), ShapeError);
    ctl.cfl = 1.5;
    CHECK_THROWS_AS(ctl.validate(), ConfigError);
}

TEST_CASE("concentration sub-step") {
    PhysParams p;
    StepControl ctl;
    const Grid g(2, {16, 16, 1}, {1, 1, 1});
    StepReport rep;
    SUBCASE("constant is a fixed point under any velocity") {
        State s = quiescent(g, p);
        s.c.fill(0.73);
        VectorField u(g.layout());
        randomize(u[0], g, 1);
        randomize(u[1], g, 2);
        fill_ghosts(u, g, FieldRole::Velocity);
        const ScalarField c = step_concentration(s, u, g, p, ctl, 0.01, rep);
        double err = 0.0;
        for (int j = 0; j < 16; ++j)
            for (int i = 0; i < 16; ++i) err = std::max(err, std::abs(c(i, j) - 0.73));
        CHECK(err <= 1e-14);
    }
    SUBCASE("Neumann cosine mode decays by the implicit Euler factor") {
        State s = quiescent(g, p);
        set_interior(s.c, g, [](double x, double, double) { return std::cos(pi * x); });
        const VectorField u(g.layout());
        const double dt = 0.01;
        ctl.cg.rtol = 1e-14;
        const ScalarField c = step_concentration(s, u, g, p, ctl, dt, rep);
        const double h = g.h(0);
        const double lam = 4.0 / (h * h) * std::pow(std::sin(pi * h / 2.0), 2);
        const double factor = 1.0 / (1.0 + dt * p.D0 * lam);
        CHECK(max_interior_error(c, g, [&](double x, double, double) { return factor * std::cos(pi * x); }) < 1e-12);
    }
    SUBCASE("upwind advection creates no new extrema") {
        State s = quiescent(g, p);
        set_interior(s.c, g, [](double x, double y, double) { return 1.0 + std::tanh(10 * (x - 0.5)) + 0.5 * y; });
        VectorField u(g.layout());
        set_interior(u[0], g, [](double x, double y, double) { return std::sin(pi * x) * std::cos(pi * y); });
        set_interior(u[1], g, [](double x, double y, double) { return -std::cos(pi * x) * std::sin(pi * y); });
        fill_ghosts(u, g, FieldRole::Velocity);
        const double lo = interior_min(s.c), hi = interior_max(s.c);
        for (int n = 0; n < 50; ++n) {
            s.c = step_concentration(s, u, g, p, ctl, 0.02, rep);
            CHECK(interior_min(s.c) >= lo - 1e-12);
            CHECK(interior_max(s.c) <= hi + 1e-12);
        }
    }
}

TEST_CASE("density sub-step") {
    StepControl ctl;
    RegParams r;
    StepReport rep;
    SUBCASE("constant density under a discretely solenoidal periodic flow") {
        const Grid g(2, {16, 16, 1}, {1, 1, 1}, {true, true, false});
        State s(g.layout());
        s.rho.fill(1.3);
        ScalarField psi(g.layout());
        set_interior(psi, g, [](double x, double y, double) { return std::sin(2 * pi * x) * std::cos(4 * pi * y) + std::cos(2 * pi * y); });
        fill_ghosts(psi, g, BoundaryKind::Periodic);
        VectorField u(g.layout());
        u[0] = partial(psi, g, 1);
        u[1] = partial(psi, g, 0);
        for (double& v : u[1].raw()) v = -v;
        fill_ghosts(u, g, FieldRole::Velocity);
        for (auto scheme : {AdvectionScheme::Upwind, AdvectionScheme::Centered}) {
            ctl.advection = scheme;
            const ScalarField rho = step_density(s, u, g, r, ctl, 0.01, rep);
            CHECK(max_interior_error(rho, g, [](double, double, double) { return 1.3; }) <= 1e-12);
        }
    }
    SUBCASE("mass is conserved with wall velocity for any epsilon") {
        const Grid g(2, {20, 16, 1}, {1, 1, 1});
        State s(g.layout());
        set_interior(s.rho, g, [](double x, double y, double) { return 1.0 + 0.4 * std::cos(pi * x) * std::cos(pi * y); });
        VectorField u(g.layout());
        randomize(u[0], g, 3, -0.5, 0.5);
        randomize(u[1], g, 4, -0.5, 0.5);
        fill_ghosts(u, g, FieldRole::Velocity);
        for (double eps : {0.0, 1e-2, 1.0}) {
            r.epsilon = eps;
            State t = s;
            const double m0 = integrate(t.rho, g);
            for (int n = 0; n < 20; ++n) t.rho = step_density(t, u, g, r, ctl, 0.005, rep);
            CHECK(std::abs(integrate(t.rho, g) - m0) / m0 <= 1e-13);
        }
    }
    SUBCASE("negative density is clamped and flagged") {
        const Grid g(2, {8, 8, 1}, {1, 1, 1});
        State s(g.layout());
        s.rho.fill(1.0);
        s.rho(3, 3) = -0.5;
        const VectorField u(g.layout());
        StepReport report;
        const ScalarField rho = step_density(s, u, g, r, ctl, 0.01, report);
        CHECK(report.density_clamped);
        CHECK(report.density_min_before_clamp == doctest::Approx(-0.5));
        CHECK_FALSE(report.flags.empty());
        CHECK(interior_min(rho) == 0.0);
    }
}

TEST_CASE("first momentum step responds to the pressure gradient") {
    PhysParams p;
    RegParams r;
    StepControl ctl;
    std::array<double, 2> err{};
    for (int k = 0; k < 2; ++k) {
        const int n = 32 << k;
        const Grid g(2, {n, 4, 1}, {1, 1, 1}, {true, true, false});
        State s(g.layout());
        set_interior(s.rho, g, [](double x, double, double) { return 1.0 + 0.1 * std::sin(2 * pi * x); });
        s.c.fill(p.c_star);
        fill_state_ghosts(s, g);
        const VectorField u = velocity(s, g, ctl.vacuum_floor);
        const double dt = 1e-7;
        StepReport rep;
        const VectorField m = step_momentum(s, u, s.rho, s.c, s.Q, g, p, r, ctl, dt, rep);
        err[static_cast<std::size_t>(k)] = max_interior_error(m[0], g, [&](double x, double, double) {
                                               const double rho = 1.0 + 0.1 * std::sin(2 * pi * x);
                                               return -dt * 2.0 * rho * 0.1 * 2 * pi * std::cos(2 * pi * x);
                                           }) / (dt * 0.4 * pi);
        CHECK(max_abs(m[1]) < 1e-20);
    }
    CHECK(err[0] < 1e-2);
    CHECK(std::log2(err[0] / err[1]) > 1.8);
}

TEST_CASE("Q sub-step") {
    PhysParams p;
    StepControl ctl;
    StepReport rep;
    const Grid g(2, {4, 4, 1}, {1, 1, 1});
    SUBCASE("isotropic state is a fixed point") {
        State s = quiescent(g, p);
        const VectorField u(g.layout());
        s.c.fill(0.3);
        const QField Q = step_q(s, s.c, u, g, p, ctl, 0.01, rep);
        for (int a = 0; a < 5; ++a) CHECK(max_abs(Q[a]) == 0.0);
    }
    SUBCASE("uniform relaxation matches an adaptive ODE solution") {
        p.b = 0.8;
        p.Gamma = 1.3;
        const QTensor q0{{0.15, -0.05, 0.08, 0.03, -0.02}};
        const double c = 0.6;
        State s = quiescent(g, p);
        s.c.fill(c);
        s.Q.fill(q0);
        const VectorField u(g.layout());
        const double dt = 1e-5;
        for (int n = 0; n < 10000; ++n) s.Q = step_q(s, s.c, u, g, p, ctl, dt, rep);

        using V = std::array<double, 5>;
        V y = q0.q;
        boost::numeric::odeint::integrate_adaptive(
            boost::numeric::odeint::make_controlled<boost::numeric::odeint::runge_kutta_dopri5<V>>(1e-13, 1e-13),
            [&](const V& x, V& dxdt, double) { dxdt = (p.Gamma * bulk_field(QTensor{x}, c, p)).q; }, y, 0.0, 0.1, 1e-4);
        const QTensor got = s.Q.at(1, 2, 0);
        for (std::size_t a = 0; a < 5; ++a) CHECK(std::abs(got.q[a] - y[a]) <= 1e-6);
    }
    SUBCASE("co-rotation preserves trQ^2 to second order in dt") {
        p.Gamma = 0.0;
        const QTensor q0{{0.3, -0.1, 0.2, 0.1, -0.15}};
        std::array<double, 2> drift{};
        for (int k = 0; k < 2; ++k) {
            State s = quiescent(g, p);
            s.Q.fill(q0);
            VectorField u(g.layout());
            set_everywhere(u[0], g, [](double, double y, double) { return -(y - 0.5); });
            set_everywhere(u[1], g, [](double x, double, double) { return x - 0.5; });
            const double dt = 1e-2 / (1 << k);
            const QField Q = step_q(s, s.c, u, g, p, ctl, dt, rep);
            drift[static_cast<std::size_t>(k)] = std::abs(norm2(Q.at(1, 1, 0)) - norm2(q0));
        }
        CHECK(drift[0] < 1e-3);
        CHECK(drift[0] / drift[1] == doctest::Approx(4.0).epsilon(0.05));
    }
}

TEST_CASE("full step") {
    PhysParams p;
    RegParams r;
    StepControl ctl;
    SUBCASE("quiescent state is a fixed point over 100 steps") {
        for (int dims : {2, 3}) {
            const Grid g(dims, {8, 8, 8}, {1, 1, 1});
            State s = quiescent(g, p);
            const State s0 = s;
            for (int n = 0; n < 100; ++n) step(s, g, p, r, ctl, cfl_dt(s, g, p, r, ctl));
            CHECK(max_diff(s.c, s0.c) <= 1e-12);
            CHECK(max_diff(s.rho, s0.rho) <= 1e-12);
            for (int a = 0; a < 3; ++a) CHECK(max_abs(s.m[a]) <= 1e-12);
            for (int a = 0; a < 5; ++a) CHECK(max_abs(s.Q[a]) <= 1e-12);
            CHECK(s.t > 0.0);
        }
    }
    SUBCASE("dt = 0 is the identity") {
        const Grid g(2, {8, 8, 1}, {1, 1, 1});
        State s = quiescent(g, p);
        randomize(s.m[0], g, 5);
        fill_state_ghosts(s, g);
        const State s0 = s;
        step(s, g, p, r, ctl, 0.0);
        CHECK(s == s0);
        CHECK_THROWS_AS(step(s, g, p, r, ctl, -1.0), NumericalError);
    }
    SUBCASE("dt above the stability limit is rejected with a CFL diagnostic") {
        const Grid g(2, {16, 16, 1}, {1, 1, 1});
        State s = quiescent(g, p);
        const double limit = advective_limit(s, g, p, r, ctl);
        try {
            step(s, g, p, r, ctl, 2.0 * limit);
            FAIL("expected a CFL violation");
        } catch (const NumericalError& e) {
            CHECK(std::string(e.what()).find("CFL") != std::string::npos);
        }
    }
}
