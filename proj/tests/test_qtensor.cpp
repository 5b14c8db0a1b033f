#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "activelc/qtensor.hpp"

using namespace activelc;

namespace {

Eigen::Matrix3d full(const QTensor& q) {
    Eigen::Matrix3d m;
    m << q.q[0], q.q[2], q.q[3],  //
        q.q[2], q.q[1], q.q[4],   //
        q.q[3], q.q[4], q.q33();
    return m;
}

Eigen::Matrix3d full(const SkewTensor& w) {
    Eigen::Matrix3d m;
    m << 0.0, w.w[0], w.w[1],  //
        -w.w[0], 0.0, w.w[2],  //
        -w.w[1], -w.w[2], 0.0;
    return m;
}

QTensor random_q(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    QTensor q;
    for (double& v : q.q) v = d(rng);
    return q;
}

void check_matches(const QTensor& q, const Eigen::Matrix3d& m, double tol) {
    CHECK(q.q[0] == doctest::Approx(m(0, 0)).epsilon(tol));
    CHECK(q.q[1] == doctest::Approx(m(1, 1)).epsilon(tol));
    CHECK(q.q33() == doctest::Approx(m(2, 2)).epsilon(tol));
    CHECK(q.q[2] == doctest::Approx(m(0, 1)).epsilon(tol));
    CHECK(q.q[3] == doctest::Approx(m(0, 2)).epsilon(tol));
    CHECK(q.q[4] == doctest::Approx(m(1, 2)).epsilon(tol));
}

}  // namespace

TEST_CASE("frob equals trace of the matrix product") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 100; ++t) {
        const QTensor a = random_q(rng);
        const QTensor b = random_q(rng);
        CHECK(frob(a, b) == doctest::Approx((full(a) * full(b)).trace()).epsilon(1e-14));
        CHECK(norm2(a) == doctest::Approx(full(a).squaredNorm()).epsilon(1e-14));
    }
}

TEST_CASE("commutator matches the dense product and stays in S0(3)") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        const QTensor q = random_q(rng);
        const SkewTensor w{{d(rng), d(rng), d(rng)}};
        const Eigen::Matrix3d ref = full(q) * full(w) - full(w) * full(q);
        CHECK((ref - ref.transpose()).norm() < 1e-14);
        CHECK(std::abs(ref.trace()) < 1e-14);
        check_matches(commutator(q, w), ref, 1e-12);
        // [Q, W] : Q = 0 (the co-rotational term does no work on |Q|^2)
        CHECK(std::abs(frob(commutator(q, w), q)) < 1e-13);
    }
}

TEST_CASE("deviatoric square and bulk field match dense formulas") {
    std::mt19937_64 rng(3);
    PhysParams p;
    p.c_star = 0.7;
    p.b = 0.3;
    for (int t = 0; t < 50; ++t) {
        const QTensor q = random_q(rng);
        const double c = 0.4 + 0.01 * t;
        const Eigen::Matrix3d Q = full(q);
        const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
        const double tr2 = (Q * Q).trace();
        check_matches(deviatoric_square(q), Q * Q - tr2 / 3.0 * I, 1e-12);
        const Eigen::Matrix3d H = -(c - p.c_star) / 2.0 * Q + p.b * (Q * Q - tr2 / 3.0 * I) - p.c_star * Q * tr2;
        check_matches(bulk_field(q, c, p), H, 1e-12);

        const auto inv = scalar_invariants(q);
        CHECK(inv.trQ2 == doctest::Approx(tr2).epsilon(1e-13));
        CHECK(inv.trQ3 == doctest::Approx((Q * Q * Q).trace()).epsilon(1e-12));
        CHECK(inv.trQ2_sq == doctest::Approx(tr2 * tr2).epsilon(1e-13));
    }
}

TEST_CASE("project_s03 returns the symmetric traceless part") {
    Matrix3 m;
    for (int i = 0; i < 9; ++i) m.a[static_cast<std::size_t>(i)] = 1.0 + i * i;
    const QTensor q = project_s03(m);
    Eigen::Matrix3d e;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) e(i, j) = m(i, j);
    const Eigen::Matrix3d ref = 0.5 * (e + e.transpose()) - e.trace() / 3.0 * Eigen::Matrix3d::Identity();
    check_matches(q, ref, 1e-14);
    // Idempotent on S0(3).
    CHECK(project_s03(to_matrix(q)) == q);
}

TEST_CASE("to_matrix round trip and algebra helpers") {
    const QTensor q{{0.1, -0.3, 0.2, 0.05, -0.07}};
    const Matrix3 m = to_matrix(q);
    CHECK(m.trace() == doctest::Approx(0.0).epsilon(1e-16));
    CHECK(transpose(m).a == m.a);
    const SkewTensor w{{0.4, -0.2, 0.9}};
    const Matrix3 wm = to_matrix(w);
    CHECK(transpose(wm).a == (Matrix3{} - wm).a);
    const Matrix3 prod = m * wm;
    const Eigen::Matrix3d ref = full(q) * full(w);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(prod(i, j) == doctest::Approx(ref(i, j)).epsilon(1e-14));
    CHECK((QTensor::diag(1.0, 2.0)).q33() == -3.0);
    CHECK((2.0 * q - q) == q);
}
