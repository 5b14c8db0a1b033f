#include "activelc/simd.hpp"

namespace activelc::simd {

namespace {

void laplacian_row(double* out, const double* x, std::size_t n, std::ptrdiff_t sy,
                   std::ptrdiff_t sz, double ix2, double iy2, double iz2) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* p = x + i;
        const double c2 = 2.0 * p[0];
        double t = ((p[-1] - c2) + p[1]) * ix2;
        t += ((p[-sy] - c2) + p[sy]) * iy2;
        if (sz != 0) t += ((p[-sz] - c2) + p[sz]) * iz2;
        out[i] = t;
    }
}

void helmholtz_row(double* out, const double* x, std::size_t n, std::ptrdiff_t sy,
                   std::ptrdiff_t sz, double ix2, double iy2, double iz2, double alpha,
                   double beta) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* p = x + i;
        const double c2 = 2.0 * p[0];
        double t = ((p[-1] - c2) + p[1]) * ix2;
        t += ((p[-sy] - c2) + p[sy]) * iy2;
        if (sz != 0) t += ((p[-sz] - c2) + p[sz]) * iz2;
        out[i] = alpha * p[0] - beta * t;
    }
}

void central_diff_row(double* out, const double* f, std::size_t n, std::ptrdiff_t s,
                      double inv2h) {
    for (std::size_t i = 0; i < n; ++i) out[i] = (f[i + s] - f[i - s]) * inv2h;
}

void upwind_advect_row(double* out, const double* f, const double* u, std::size_t n,
                       std::ptrdiff_t s, double invh) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* p = f + i;
        const double d = u[i] > 0.0 ? (p[0] - p[-s]) : (p[s] - p[0]);
        out[i] -= (u[i] * d) * invh;
    }
}

void centered_advect_row(double* out, const double* f, const double* u, std::size_t n,
                         std::ptrdiff_t s, double inv2h) {
    for (std::size_t i = 0; i < n; ++i) out[i] -= (u[i] * (f[i + s] - f[i - s])) * inv2h;
}

void axpy(double* y, double a, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void xpay(double* y, const double* x, double a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + a * y[i];
}

double dot(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

constexpr KernelTable kTable{Level::Scalar,    laplacian_row,       helmholtz_row,
                             central_diff_row, upwind_advect_row,   centered_advect_row,
                             axpy,             xpay,                dot};

}  // namespace

const KernelTable& scalar_kernels() { return kTable; }

}  // namespace activelc::simd
