// Compiled with -mavx2. Only reached after a runtime CPU check.
#include <immintrin.h>

#include "activelc/simd.hpp"

namespace activelc::simd {

namespace {

inline __m256d lap_term(const double* p, std::ptrdiff_t s, __m256d c2, __m256d inv) {
    const __m256d lo = _mm256_loadu_pd(p - s);
    const __m256d hi = _mm256_loadu_pd(p + s);
    return _mm256_mul_pd(_mm256_add_pd(_mm256_sub_pd(lo, c2), hi), inv);
}

inline double lap_scalar(const double* p, std::ptrdiff_t sy, std::ptrdiff_t sz, double ix2,
                         double iy2, double iz2) {
    const double c2 = 2.0 * p[0];
    double t = ((p[-1] - c2) + p[1]) * ix2;
    t += ((p[-sy] - c2) + p[sy]) * iy2;
    if (sz != 0) t += ((p[-sz] - c2) + p[sz]) * iz2;
    return t;
}

inline __m256d lap_vec(const double* p, std::ptrdiff_t sy, std::ptrdiff_t sz, __m256d vx,
                       __m256d vy, __m256d vz) {
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d c2 = _mm256_mul_pd(two, _mm256_loadu_pd(p));
    __m256d t = lap_term(p, 1, c2, vx);
    t = _mm256_add_pd(t, lap_term(p, sy, c2, vy));
    if (sz != 0) t = _mm256_add_pd(t, lap_term(p, sz, c2, vz));
    return t;
}

void laplacian_row(double* out, const double* x, std::size_t n, std::ptrdiff_t sy,
                   std::ptrdiff_t sz, double ix2, double iy2, double iz2) {
    const __m256d vx = _mm256_set1_pd(ix2), vy = _mm256_set1_pd(iy2), vz = _mm256_set1_pd(iz2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, lap_vec(x + i, sy, sz, vx, vy, vz));
    for (; i < n; ++i) out[i] = lap_scalar(x + i, sy, sz, ix2, iy2, iz2);
}

void helmholtz_row(double* out, const double* x, std::size_t n, std::ptrdiff_t sy,
                   std::ptrdiff_t sz, double ix2, double iy2, double iz2, double alpha,
                   double beta) {
    const __m256d vx = _mm256_set1_pd(ix2), vy = _mm256_set1_pd(iy2), vz = _mm256_set1_pd(iz2);
    const __m256d va = _mm256_set1_pd(alpha), vb = _mm256_set1_pd(beta);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d t = lap_vec(x + i, sy, sz, vx, vy, vz);
        const __m256d r =
            _mm256_sub_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x + i)), _mm256_mul_pd(vb, t));
        _mm256_storeu_pd(out + i, r);
    }
    for (; i < n; ++i) out[i] = alpha * x[i] - beta * lap_scalar(x + i, sy, sz, ix2, iy2, iz2);
}

void central_diff_row(double* out, const double* f, std::size_t n, std::ptrdiff_t s,
                      double inv2h) {
    const __m256d v = _mm256_set1_pd(inv2h);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(f + i + s), _mm256_loadu_pd(f + i - s));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(d, v));
    }
    for (; i < n; ++i) out[i] = (f[i + s] - f[i - s]) * inv2h;
}

void upwind_advect_row(double* out, const double* f, const double* u, std::size_t n,
                       std::ptrdiff_t s, double invh) {
    const __m256d v = _mm256_set1_pd(invh);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d c = _mm256_loadu_pd(f + i);
        const __m256d back = _mm256_sub_pd(c, _mm256_loadu_pd(f + i - s));
        const __m256d fwd = _mm256_sub_pd(_mm256_loadu_pd(f + i + s), c);
        const __m256d vel = _mm256_loadu_pd(u + i);
        const __m256d positive = _mm256_cmp_pd(vel, zero, _CMP_GT_OQ);
        const __m256d d = _mm256_blendv_pd(fwd, back, positive);
        const __m256d t = _mm256_mul_pd(_mm256_mul_pd(vel, d), v);
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(out + i), t));
    }
    for (; i < n; ++i) {
        const double* p = f + i;
        const double d = u[i] > 0.0 ? (p[0] - p[-s]) : (p[s] - p[0]);
        out[i] -= (u[i] * d) * invh;
    }
}

void centered_advect_row(double* out, const double* f, const double* u, std::size_t n,
                         std::ptrdiff_t s, double inv2h) {
    const __m256d v = _mm256_set1_pd(inv2h);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(f + i + s), _mm256_loadu_pd(f + i - s));
        const __m256d t = _mm256_mul_pd(_mm256_mul_pd(_mm256_loadu_pd(u + i), d), v);
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(out + i), t));
    }
    for (; i < n; ++i) out[i] -= (u[i] * (f[i + s] - f[i - s])) * inv2h;
}

void axpy(double* y, double a, const double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d r = _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, r);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void xpay(double* y, const double* x, double a, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d r = _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_mul_pd(va, _mm256_loadu_pd(y + i)));
        _mm256_storeu_pd(y + i, r);
    }
    for (; i < n; ++i) y[i] = x[i] + a * y[i];
}

double dot(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
    }
    acc0 = _mm256_add_pd(acc0, acc1);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc0);
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

constexpr KernelTable kTable{Level::Avx2,      laplacian_row,       helmholtz_row,
                             central_diff_row, upwind_advect_row,   centered_advect_row,
                             axpy,             xpay,                dot};

}  // namespace

const KernelTable* avx2_kernels() { return &kTable; }

}  // namespace activelc::simd
