#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "activelc/errors.hpp"
#include "activelc/galerkin.hpp"
#include "activelc/physics.hpp"
#include "test_util.hpp"

using namespace activelc;
using namespace testutil;
using std::numbers::pi;

TEST_CASE("eigenbasis ordering and analytic eigenvalues") {
    const Grid g(2, {8, 8, 1}, {pi, pi, 1});
    const EigenBasis B = build_basis(6, g);
    CHECK(B.size() == 6);
    CHECK(B.unknowns() == 18);
    CHECK(B.lambda[0] == doctest::Approx(2.0));
    CHECK(B.k[1] == std::array<int, 3>{1, 2, 0});
    CHECK(B.lambda[1] == doctest::Approx(5.0));
    CHECK(B.k[2] == std::array<int, 3>{2, 1, 0});
    for (int i = 1; i < B.size(); ++i) CHECK(B.lambda[static_cast<std::size_t>(i)] >= B.lambda[static_cast<std::size_t>(i) - 1]);
    // Mode (1,1) is proportional to sin x sin y.
    const double ratio = B.psi(0, 0) / (std::sin(g.center(0, 0)) * std::sin(g.center(1, 0)));
    for (int j = 0; j < 8; ++j)
        for (int i = 0; i < 8; ++i)
            CHECK(B.psi(0, i + 8 * j) == doctest::Approx(ratio * std::sin(g.center(0, i)) * std::sin(g.center(1, j))));

    CHECK_THROWS_AS((void)build_basis(65, g), ConfigError);
    CHECK_THROWS_AS((void)build_basis(0, g), ConfigError);
    const Grid gp(2, {8, 8, 1}, {1, 1, 1}, {true, false, false});
    CHECK_THROWS_AS((void)build_basis(4, gp), ConfigError);
}

TEST_CASE("Gram matrix is the identity, including the Nyquist modes") {
    for (int dims : {2, 3}) {
        const Grid g(dims, {6, 5, 4}, {1.0, 1.5, 0.7});
        const int total = dims == 3 ? 120 : 30;
        const EigenBasis B = build_basis(total, g);
        const Eigen::MatrixXd G = B.cell_volume * B.psi * B.psi.transpose();
        CHECK((G - Eigen::MatrixXd::Identity(total, total)).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("sampled modes are discrete Laplacian eigenvectors with second-order eigenvalues") {
    std::array<double, 3> err{};
    for (int r = 0; r < 3; ++r) {
        const int n = 8 << r;
        const Grid g(2, {n, n, 1}, {1, 1, 1});
        const EigenBasis B = build_basis(5, g);
        Eigen::VectorXd a = Eigen::VectorXd::Zero(B.unknowns());
        a[4] = 1.0;
        VectorField v = reconstruct(a, B, g);
        const ScalarField lap = laplacian(v[0], g);
        const double lh = discrete_eigenvalue(B, g, 4);
        double e = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) e = std::max(e, std::abs(lap(i, j) + lh * v[0](i, j)));
        CHECK(e < 1e-9 * lh);
        err[static_cast<std::size_t>(r)] = std::abs(lh - B.lambda[4]);
    }
    CHECK(std::log2(err[0] / err[1]) > 1.9);
    CHECK(std::log2(err[1] / err[2]) > 1.9);
}

TEST_CASE("modal transform and reconstruction") {
    const Grid g(2, {12, 10, 1}, {1, 1, 1});
    const EigenBasis B = build_basis(20, g);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> d;
    Eigen::VectorXd a(B.unknowns());
    for (auto& x : a) x = d(rng);
    CHECK((modal_transform(reconstruct(a, B, g), B, g) - a).cwiseAbs().maxCoeff() <= 1e-10);

    Eigen::VectorXd unit = Eigen::VectorXd::Zero(B.unknowns());
    unit[0] = 1.0;
    CHECK((modal_transform(reconstruct(unit, B, g), B, g) - unit).norm() <= 1e-12);

    const EigenBasis full = build_basis(120, g);
    Eigen::VectorXd high = Eigen::VectorXd::Zero(full.unknowns());
    high[100] = 1.0;  // a mode outside the 20-mode subspace
    CHECK(modal_transform(reconstruct(high, full, g), B, g).cwiseAbs().maxCoeff() <= 1e-12);

    const VectorField zero = reconstruct(Eigen::VectorXd::Zero(B.unknowns()), B, g);
    CHECK(max_abs(zero[0]) == 0.0);

    // reconstruct . transform is an orthogonal projection: idempotent.
    VectorField v(g.layout());
    randomize(v[0], g, 1);
    randomize(v[1], g, 2);
    const VectorField pv = reconstruct(modal_transform(v, B, g), B, g);
    const VectorField ppv = reconstruct(modal_transform(pv, B, g), B, g);
    for (int c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < pv[c].size(); ++i) CHECK(std::abs(pv[c].data()[i] - ppv[c].data()[i]) < 1e-12);

    CHECK_THROWS_AS((void)reconstruct(Eigen::VectorXd::Zero(7), B, g), ShapeError);
    const Grid other(2, {12, 11, 1}, {1, 1, 1});
    CHECK_THROWS_AS((void)modal_transform(VectorField(other.layout()), B, other), ShapeError);
}

TEST_CASE("mass matrix") {
    const Grid g(2, {10, 10, 1}, {1, 1, 1});
    const EigenBasis B = build_basis(15, g);
    const int N = B.unknowns();
    ScalarField rho(g.layout(), 1.0);
    CHECK((assemble_mass(rho, B, g) - Eigen::MatrixXd::Identity(N, N)).cwiseAbs().maxCoeff() <= 1e-10);
    rho.fill(2.0);
    CHECK((assemble_mass(rho, B, g) - 2.0 * Eigen::MatrixXd::Identity(N, N)).cwiseAbs().maxCoeff() <= 1e-10);
    set_interior(rho, g, [](double x, double y, double) { return 1.0 + 0.5 * std::sin(3 * x) * std::cos(5 * y); });
    const Eigen::MatrixXd M = assemble_mass(rho, B, g);
    CHECK((M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(Eigen::LLT<Eigen::MatrixXd>(M).info() == Eigen::Success);
    CHECK(std::abs(M(0, 1)) > 1e-6);  // the profile does couple modes
    CHECK(M(0, B.size()) == 0.0);     // but never directions
}

TEST_CASE("stiffness is symmetric positive definite") {
    const Grid g(2, {8, 8, 1}, {1, 1, 1});
    PhysParams p;
    const EigenBasis B = build_basis(20, g);
    const Eigen::MatrixXd K = assemble_stiffness(B, g, p);
    CHECK((K - K.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * K.cwiseAbs().maxCoeff());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("Galerkin momentum step") {
    PhysParams p;
    const Grid g(2, {10, 10, 1}, {1, 1, 1});
    const EigenBasis B = build_basis(12, g);
    const Eigen::MatrixXd K = assemble_stiffness(B, g, p);
    ScalarField rho(g.layout(), 1.4);
    const VectorField zero(g.layout());
    std::mt19937_64 rng(9);
    std::normal_distribution<double> d;
    Eigen::VectorXd a(B.unknowns());
    for (auto& x : a) x = d(rng);

    SUBCASE("no forces and no viscosity leave a unchanged") {
        const Eigen::MatrixXd K0 = Eigen::MatrixXd::Zero(B.unknowns(), B.unknowns());
        const Eigen::VectorXd b = galerkin_momentum_step(rho, a, rho, zero, 0.1, B, K0, g);
        CHECK((b - a).cwiseAbs().maxCoeff() <= 1e-12);
    }
    SUBCASE("viscosity alone dissipates kinetic energy") {
        Eigen::VectorXd b = a;
        const Eigen::MatrixXd M = assemble_mass(rho, B, g);
        double e_prev = 0.5 * b.dot(M * b);
        for (int n = 0; n < 10; ++n) {
            b = galerkin_momentum_step(rho, b, rho, zero, 0.01, B, K, g);
            const double e = 0.5 * b.dot(M * b);
            CHECK(e <= e_prev);
            e_prev = e;
        }
    }
    SUBCASE("vacuum is rejected with guidance") {
        ScalarField vac(g.layout(), 0.0);
        const Eigen::MatrixXd K0 = Eigen::MatrixXd::Zero(B.unknowns(), B.unknowns());
        try {
            (void)galerkin_momentum_step(vac, a, vac, zero, 0.1, B, K0, g);
            FAIL("expected an error");
        } catch (const NumericalError& e) {
            CHECK(std::string(e.what()).find("rho >= eta") != std::string::npos);
        }
    }
}

TEST_CASE("pressure-only step matches the projected grid response") {
    PhysParams p;
    RegParams r;
    StepControl ctl;
    const int n = 16;
    const Grid g(2, {n, n, 1}, {1, 1, 1});
    State s(g.layout());
    set_interior(s.rho, g, [](double x, double, double) { return 1.0 + 0.1 * x; });
    s.c.fill(p.c_star);
    fill_state_ghosts(s, g);
    const VectorField u = velocity(s, g, ctl.vacuum_floor);
    const VectorField f = momentum_forcing(s, u, s.rho, s.c, s.Q, g, p, r, ctl);
    const double dt = 1e-6;
    const EigenBasis B = build_basis(40, g);
    const Eigen::MatrixXd K = assemble_stiffness(B, g, p);
    const Eigen::VectorXd a = galerkin_momentum_step(s.rho, modal_transform(u, B, g), s.rho, f, dt, B, K, g);
    // Oracle: projection of dt f / rho, with f = -grad(rho^2) here.
    VectorField target(g.layout());
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) target[0](i, j) = dt * f[0](i, j) / s.rho(i, j);
    const Eigen::VectorXd expect = modal_transform(target, B, g);
    CHECK((a - expect).norm() <= 1e-3 * expect.norm());
}

TEST_CASE("full-resolution Galerkin reproduces the grid momentum step") {
    PhysParams p;
    RegParams r;
    StepControl ctl;
    const Grid g(2, {8, 8, 1}, {1, 1, 1});
    State s(g.layout());
    set_interior(s.rho, g, [](double x, double y, double) { return 1.0 + 0.2 * std::cos(pi * x) * std::cos(pi * y); });
    set_interior(s.c, g, [](double x, double, double) { return 1.0 + 0.1 * std::cos(pi * x); });
    set_interior(s.m[0], g, [](double x, double y, double) { return 0.05 * std::sin(pi * x) * std::sin(2 * pi * y); });
    set_interior(s.m[1], g, [](double x, double y, double) { return -0.03 * std::sin(2 * pi * x) * std::sin(pi * y); });
    set_interior(s.Q[0], g, [](double x, double y, double) { return 0.1 * std::cos(pi * x) * std::cos(pi * y); });
    set_interior(s.Q[2], g, [](double x, double, double) { return 0.05 * std::cos(pi * x); });
    fill_state_ghosts(s, g);
    const GalerkinBackend backend(g, p, 64);
    State sg = s, sm = s;
    for (int n = 0; n < 3; ++n) {
        const double dt = cfl_dt(sg, g, p, r, ctl);
        step(sg, g, p, r, ctl, dt);
        StepOptions opts;
        opts.backend = &backend;
        step(sm, g, p, r, ctl, dt, opts);
    }
    for (int a = 0; a < 2; ++a) {
        double e = 0.0;
        for (std::size_t i = 0; i < sg.m[a].size(); ++i) e = std::max(e, std::abs(sg.m[a].data()[i] - sm.m[a].data()[i]));
        CHECK(e <= 1e-9);
    }
}

TEST_CASE("one-mode quiescent Galerkin run stays at rest") {
    PhysParams p;
    RegParams r;
    StepControl ctl;
    const Grid g(2, {8, 8, 1}, {1, 1, 1});
    State s(g.layout());
    s.rho.fill(1.0);
    s.c.fill(p.c_star);
    fill_state_ghosts(s, g);
    const GalerkinBackend backend(g, p, 1);
    StepOptions opts;
    opts.backend = &backend;
    for (int n = 0; n < 20; ++n) step(s, g, p, r, ctl, 0.01, opts);
    for (int a = 0; a < 3; ++a) CHECK(max_abs(s.m[a]) == 0.0);
}

TEST_CASE("Lipschitz probe") {
    const Grid g(2, {8, 8, 1}, {1, 2, 1});
    const EigenBasis B = build_basis(10, g);
    ScalarField r1(g.layout(), 1.0), r2(g.layout(), 2.0);
    CHECK(lipschitz_probe(r1, r1, B, g) == 0.0);
    CHECK(lipschitz_probe(r1, r2, B, g) == doctest::Approx(0.5 / g.volume()).epsilon(1e-10));

    const double eta = 0.5;
    const double bound = lipschitz_bound(B, eta);
    std::mt19937_64 rng(17);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        std::uniform_real_distribution<double> d(eta, 2.0);
        for (int j = 0; j < 8; ++j)
            for (int i = 0; i < 8; ++i) {
                r1(i, j) = d(rng);
                r2(i, j) = d(rng);
            }
        worst = std::max(worst, lipschitz_probe(r1, r2, B, g));
    }
    CHECK(std::isfinite(worst));
    CHECK(worst <= bound);
    ScalarField zero(g.layout(), 0.0);
    CHECK_THROWS_AS((void)lipschitz_probe(zero, r1, B, g), NumericalError);
}
