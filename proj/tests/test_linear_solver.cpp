#include <doctest.h>

#include <cmath>
#include <random>

#include "activelc/errors.hpp"
#include "activelc/linear_solver.hpp"

using namespace activelc;

namespace {

void randomize(ScalarField& f, const Grid& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const auto& n = g.cells();
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i) f(i, j, k) = d(rng);
}

}  // namespace

TEST_CASE("Helmholtz solve inverts the operator") {
    for (FieldRole role : {FieldRole::Scalar, FieldRole::Velocity}) {
        const Grid g(2, {24, 20, 1}, {1.0, 1.0, 1.0});
        ScalarField exact(g.layout()), rhs(g.layout());
        randomize(exact, g, 3);
        ScalarField tmp = exact;
        helmholtz_apply(tmp, g, role, 1.0, 0.01, rhs);
        ScalarField x = rhs;
        const auto res = solve_helmholtz(g, role, 1.0, 0.01, rhs, x);
        CHECK(res.residual <= 1e-10);
        ScalarField diff = x;
        for (std::size_t i = 0; i < diff.size(); ++i) diff.data()[i] -= exact.data()[i];
        CHECK(max_abs(diff) < 1e-8);
    }
}

TEST_CASE("constant states converge with zero iterations under Neumann") {
    const Grid g(3, {6, 6, 6}, {1.0, 1.0, 1.0});
    ScalarField rhs(g.layout(), 0.7);
    ScalarField x = rhs;
    const auto res = solve_helmholtz(g, FieldRole::Scalar, 1.0, 0.5, rhs, x);
    CHECK(res.iterations == 0);
    CHECK(x == rhs);
}

TEST_CASE("zero right-hand side gives zero") {
    const Grid g(2, {6, 6, 1}, {1.0, 1.0, 1.0});
    ScalarField rhs(g.layout()), x(g.layout(), 3.0);
    const auto res = solve_helmholtz(g, FieldRole::Scalar, 1.0, 0.5, rhs, x);
    CHECK(res.iterations == 0);
    CHECK(max_abs(x) == 0.0);
}

TEST_CASE("viscous operator is symmetric negative definite") {
    const Grid g(3, {6, 5, 4}, {1.0, 1.0, 1.0});
    PhysParams p;
    p.mu = 0.7;
    p.nu = 0.4;
    VectorField u(g.layout()), v(g.layout()), Lu(g.layout()), Lv(g.layout());
    for (int a = 0; a < 3; ++a) {
        randomize(u[a], g, 10u + static_cast<unsigned>(a));
        randomize(v[a], g, 20u + static_cast<unsigned>(a));
    }
    viscous_apply(u, g, p, Lu);
    viscous_apply(v, g, p, Lv);
    CHECK(inner(Lu, v, g) == doctest::Approx(inner(u, Lv, g)).epsilon(1e-12));
    CHECK(inner(Lu, u, g) < 0.0);
}

TEST_CASE("momentum solve reproduces a manufactured velocity") {
    const Grid g(2, {16, 12, 1}, {1.0, 1.0, 1.0});
    PhysParams p;
    ScalarField rho(g.layout());
    randomize(rho, g, 99);
    for (double& r : rho.raw()) r = 1.0 + 0.5 * r;
    VectorField exact(g.layout()), Lu(g.layout());
    randomize(exact[0], g, 1);
    randomize(exact[1], g, 2);
    const double dt = 0.01;
    viscous_apply(exact, g, p, Lu);
    VectorField rhs(g.layout());
    for (int a = 0; a < 3; ++a)
        for (std::size_t i = 0; i < rhs[a].size(); ++i)
            rhs[a].data()[i] = rho.data()[i] * exact[a].data()[i] - dt * Lu[a].data()[i];
    VectorField u = rhs;
    const auto res = solve_momentum(g, p, rho, dt, rhs, u);
    CHECK(res.residual <= 1e-10);
    for (int a = 0; a < 2; ++a) {
        ScalarField d = u[a];
        for (std::size_t i = 0; i < d.size(); ++i) d.data()[i] -= exact[a].data()[i];
        fill_ghosts(d, g, BoundaryKind::NeumannZero);
        CHECK(max_abs(d) < 1e-8);
    }
}

TEST_CASE("indefinite operator raises a numerical error") {
    const Grid g(2, {6, 6, 1}, {1.0, 1.0, 1.0});
    ScalarField rhs(g.layout());
    randomize(rhs, g, 4);
    ScalarField x = rhs;
    CHECK_THROWS_AS(solve_helmholtz(g, FieldRole::Scalar, -1.0, 0.0, rhs, x), NumericalError);
    CgOptions tight;
    ScalarField y = rhs;
    tight.max_iter = 0;
    CHECK_THROWS_AS(solve_helmholtz(g, FieldRole::Scalar, 1.0, 1.0, rhs, y, tight), NumericalError);
}
