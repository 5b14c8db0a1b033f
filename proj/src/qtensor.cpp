#include "activelc/qtensor.hpp"

namespace activelc {

Matrix3 operator*(const Matrix3& x, const Matrix3& y) {
    Matrix3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += x(i, k) * y(k, j);
            r(i, j) = s;
        }
    return r;
}

Matrix3 operator-(const Matrix3& x, const Matrix3& y) {
    Matrix3 r;
    for (int i = 0; i < 9; ++i) r.a[i] = x.a[i] - y.a[i];
    return r;
}

Matrix3 operator+(const Matrix3& x, const Matrix3& y) {
    Matrix3 r;
    for (int i = 0; i < 9; ++i) r.a[i] = x.a[i] + y.a[i];
    return r;
}

Matrix3 transpose(const Matrix3& x) {
    Matrix3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = x(j, i);
    return r;
}

Matrix3 to_matrix(const QTensor& Q) {
    const auto& q = Q.q;
    Matrix3 m;
    m(0, 0) = q[QTensor::k11];
    m(1, 1) = q[QTensor::k22];
    m(2, 2) = Q.q33();
    m(0, 1) = m(1, 0) = q[QTensor::k12];
    m(0, 2) = m(2, 0) = q[QTensor::k13];
    m(1, 2) = m(2, 1) = q[QTensor::k23];
    return m;
}

Matrix3 to_matrix(const SkewTensor& W) {
    Matrix3 m;
    m(0, 1) = W.w[0];
    m(1, 0) = -W.w[0];
    m(0, 2) = W.w[1];
    m(2, 0) = -W.w[1];
    m(1, 2) = W.w[2];
    m(2, 1) = -W.w[2];
    return m;
}

QTensor project_s03(const Matrix3& M) {
    const double third_trace = M.trace() / 3.0;
    QTensor r;
    r.q[QTensor::k11] = M(0, 0) - third_trace;
    r.q[QTensor::k22] = M(1, 1) - third_trace;
    r.q[QTensor::k12] = 0.5 * (M(0, 1) + M(1, 0));
    r.q[QTensor::k13] = 0.5 * (M(0, 2) + M(2, 0));
    r.q[QTensor::k23] = 0.5 * (M(1, 2) + M(2, 1));
    return r;
}

QTensor commutator(const QTensor& Q, const SkewTensor& W) {
    // Omega Q = -(Q Omega)^T, so Q Omega - Omega Q = P + P^T with P = Q Omega.
    const Matrix3 P = to_matrix(Q) * to_matrix(W);
    QTensor r;
    r.q[QTensor::k11] = 2.0 * P(0, 0);
    r.q[QTensor::k22] = 2.0 * P(1, 1);
    r.q[QTensor::k12] = P(0, 1) + P(1, 0);
    r.q[QTensor::k13] = P(0, 2) + P(2, 0);
    r.q[QTensor::k23] = P(1, 2) + P(2, 1);
    return r;
}

QTensor deviatoric_square(const QTensor& Q) {
    const Matrix3 m = to_matrix(Q);
    const Matrix3 sq = m * m;
    const double third = norm2(Q) / 3.0;
    QTensor r;
    r.q[QTensor::k11] = sq(0, 0) - third;
    r.q[QTensor::k22] = sq(1, 1) - third;
    r.q[QTensor::k12] = sq(0, 1);
    r.q[QTensor::k13] = sq(0, 2);
    r.q[QTensor::k23] = sq(1, 2);
    return r;
}

QTensor bulk_field(const QTensor& Q, double c, const PhysParams& p) {
    const double tr2 = norm2(Q);
    QTensor r = (-0.5 * (c - p.c_star) - p.c_star * tr2) * Q;
    if (p.b != 0.0) r += p.b * deviatoric_square(Q);
    return r;
}

ScalarInvariants scalar_invariants(const QTensor& Q) {
    const Matrix3 m = to_matrix(Q);
    const Matrix3 sq = m * m;
    ScalarInvariants s;
    s.trQ2 = norm2(Q);
    s.trQ3 = (sq * m).trace();
    s.trQ2_sq = s.trQ2 * s.trQ2;
    return s;
}

}  // namespace activelc
