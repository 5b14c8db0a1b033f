#pragma once

// Row kernels for the hot stencil and vector loops. Every kernel has a
// scalar reference implementation and, on x86-64, an AVX2 variant chosen at
// runtime. Elementwise kernels evaluate in the same operation order in both
// variants so their results are bit-identical; only dot() may differ in the
// last bits (lane-wise accumulation).

#include <cstddef>
#include <string_view>

namespace activelc::simd {

enum class Level { Scalar, Avx2 };

struct KernelTable {
    Level level;
    /// out[i] = discrete Laplacian of x at i. sz == 0 disables the z term.
    void (*laplacian_row)(double* out, const double* x, std::size_t n, std::ptrdiff_t sy,
                          std::ptrdiff_t sz, double ix2, double iy2, double iz2);
    /// out[i] = alpha * x[i] - beta * Lap(x)[i].
    void (*helmholtz_row)(double* out, const double* x, std::size_t n, std::ptrdiff_t sy,
                          std::ptrdiff_t sz, double ix2, double iy2, double iz2, double alpha,
                          double beta);
    /// out[i] = (f[i+s] - f[i-s]) * inv2h.
    void (*central_diff_row)(double* out, const double* f, std::size_t n, std::ptrdiff_t s,
                             double inv2h);
    /// out[i] -= u[i] * (one-sided difference of f upwind of u[i]) * invh.
    void (*upwind_advect_row)(double* out, const double* f, const double* u, std::size_t n,
                              std::ptrdiff_t s, double invh);
    /// out[i] -= u[i] * (f[i+s] - f[i-s]) * inv2h.
    void (*centered_advect_row)(double* out, const double* f, const double* u, std::size_t n,
                                std::ptrdiff_t s, double inv2h);
    /// y += a * x.
    void (*axpy)(double* y, double a, const double* x, std::size_t n);
    /// y = x + a * y.
    void (*xpay)(double* y, const double* x, double a, std::size_t n);
    double (*dot)(const double* x, const double* y, std::size_t n);
};

[[nodiscard]] const KernelTable& scalar_kernels();
/// nullptr when the AVX2 variant was not compiled in.
[[nodiscard]] const KernelTable* avx2_kernels();

[[nodiscard]] bool level_supported(Level level);

/// The process-wide active table. Selected on first use: AVX2 if the CPU
/// supports it, unless ACTIVELC_SIMD=scalar is set in the environment.
[[nodiscard]] const KernelTable& kernels();

/// Override the runtime choice. Throws std::invalid_argument if unsupported.
void set_level(Level level);
[[nodiscard]] Level active_level();
[[nodiscard]] std::string_view level_name(Level level);

}  // namespace activelc::simd
