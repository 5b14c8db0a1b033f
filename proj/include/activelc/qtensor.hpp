#pragma once

// Pointwise algebra of symmetric traceless 3x3 tensors.
//
// A QTensor stores the five independent entries (Q11, Q22, Q12, Q13, Q23);
// Q33 = -Q11 - Q22. Symmetry and zero trace therefore cannot drift.

#include <array>
#include <cmath>

#include "activelc/params.hpp"

namespace activelc {

struct Matrix3 {
    std::array<double, 9> a{};  // row-major

    constexpr double& operator()(int i, int j) { return a[3 * i + j]; }
    constexpr double operator()(int i, int j) const { return a[3 * i + j]; }

    [[nodiscard]] constexpr double trace() const { return a[0] + a[4] + a[8]; }
};

Matrix3 operator*(const Matrix3& x, const Matrix3& y);
Matrix3 operator-(const Matrix3& x, const Matrix3& y);
Matrix3 operator+(const Matrix3& x, const Matrix3& y);
Matrix3 transpose(const Matrix3& x);

struct QTensor {
    enum : int { k11 = 0, k22 = 1, k12 = 2, k13 = 3, k23 = 4 };
    std::array<double, 5> q{};

    [[nodiscard]] constexpr double q33() const { return -(q[k11] + q[k22]); }

    [[nodiscard]] static constexpr QTensor diag(double d1, double d2) {
        return QTensor{{d1, d2, 0.0, 0.0, 0.0}};
    }

    constexpr QTensor& operator+=(const QTensor& o) {
        for (int i = 0; i < 5; ++i) q[i] += o.q[i];
        return *this;
    }
    constexpr QTensor& operator-=(const QTensor& o) {
        for (int i = 0; i < 5; ++i) q[i] -= o.q[i];
        return *this;
    }
    constexpr QTensor& operator*=(double s) {
        for (double& v : q) v *= s;
        return *this;
    }
    friend constexpr QTensor operator+(QTensor a, const QTensor& b) { return a += b; }
    friend constexpr QTensor operator-(QTensor a, const QTensor& b) { return a -= b; }
    friend constexpr QTensor operator*(double s, QTensor a) { return a *= s; }
    friend constexpr bool operator==(const QTensor&, const QTensor&) = default;
};

/// Omega = (grad u - grad u^T)/2 with (grad u)_{ab} = d_b u_a, stored as
/// (W12, W13, W23).
struct SkewTensor {
    std::array<double, 3> w{};
};

[[nodiscard]] Matrix3 to_matrix(const QTensor& Q);
[[nodiscard]] Matrix3 to_matrix(const SkewTensor& W);

/// Frobenius contraction A:B of two Q-tensors (equals tr(AB)).
[[nodiscard]] constexpr double frob(const QTensor& a, const QTensor& b) {
    const auto& x = a.q;
    const auto& y = b.q;
    return x[0] * y[0] + x[1] * y[1] + (x[0] + x[1]) * (y[0] + y[1]) +
           2.0 * (x[2] * y[2] + x[3] * y[3] + x[4] * y[4]);
}

/// tr(Q^2) = |Q|^2.
[[nodiscard]] constexpr double norm2(const QTensor& a) { return frob(a, a); }

/// Symmetric part minus (tr/3) I.
[[nodiscard]] QTensor project_s03(const Matrix3& M);

/// Q Omega - Omega Q; symmetric and traceless for symmetric Q and skew Omega.
[[nodiscard]] QTensor commutator(const QTensor& Q, const SkewTensor& W);

/// Q^2 - tr(Q^2)/3 I, the deviatoric square used in the b-term.
[[nodiscard]] QTensor deviatoric_square(const QTensor& Q);

/// Non-gradient part of the molecular field:
/// -(c - c*)/2 Q + b (Q^2 - tr(Q^2)/3 I) - c* Q tr(Q^2).
[[nodiscard]] QTensor bulk_field(const QTensor& Q, double c, const PhysParams& p);

struct ScalarInvariants {
    double trQ2 = 0.0;
    double trQ3 = 0.0;
    double trQ2_sq = 0.0;
};

[[nodiscard]] ScalarInvariants scalar_invariants(const QTensor& Q);

}  // namespace activelc
