#include <doctest.h>

#include <cstring>
#include <stdexcept>
#include <random>
#include <vector>

#include "activelc/simd.hpp"

using namespace activelc::simd;

namespace {

std::vector<double> random_vec(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("scalar table is always available and labelled") {
    CHECK(scalar_kernels().level == Level::Scalar);
    CHECK(level_supported(Level::Scalar));
    CHECK(level_name(Level::Scalar) == "scalar");
}

TEST_CASE("AVX2 kernels are bit-identical to scalar for elementwise ops") {
    const KernelTable* v = avx2_kernels();
    if (v == nullptr || !level_supported(Level::Avx2)) {
        MESSAGE("AVX2 not available; equivalence test skipped");
        return;
    }
    const KernelTable& s = scalar_kernels();
    // Padded 3D block: rows of length n with ghost neighbours on all sides.
    for (std::size_t n : {1u, 3u, 4u, 5u, 7u, 8u, 13u, 31u, 64u}) {
        const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(n) + 2;
        const std::ptrdiff_t sz = sy * 3;
        const std::size_t total = static_cast<std::size_t>(sz * 3);
        const auto x = random_vec(total, static_cast<unsigned>(n));
        const auto u = random_vec(total, static_cast<unsigned>(n) + 100);
        const std::ptrdiff_t o = sz + sy + 1;

        for (std::ptrdiff_t zs : {std::ptrdiff_t{0}, sz}) {
            std::vector<double> a(n), b(n);
            s.laplacian_row(a.data(), x.data() + o, n, sy, zs, 3.0, 5.0, 7.0);
            v->laplacian_row(b.data(), x.data() + o, n, sy, zs, 3.0, 5.0, 7.0);
            CHECK(bitwise_equal(a, b));
            s.helmholtz_row(a.data(), x.data() + o, n, sy, zs, 3.0, 5.0, 7.0, 1.5, 0.25);
            v->helmholtz_row(b.data(), x.data() + o, n, sy, zs, 3.0, 5.0, 7.0, 1.5, 0.25);
            CHECK(bitwise_equal(a, b));
        }
        for (std::ptrdiff_t st : {std::ptrdiff_t{1}, sy, sz}) {
            std::vector<double> a(n), b(n);
            s.central_diff_row(a.data(), x.data() + o, n, st, 0.7);
            v->central_diff_row(b.data(), x.data() + o, n, st, 0.7);
            CHECK(bitwise_equal(a, b));
            std::vector<double> c = random_vec(n, 9), d = c;
            s.upwind_advect_row(c.data(), x.data() + o, u.data() + o, n, st, 1.3);
            v->upwind_advect_row(d.data(), x.data() + o, u.data() + o, n, st, 1.3);
            CHECK(bitwise_equal(c, d));
            s.centered_advect_row(c.data(), x.data() + o, u.data() + o, n, st, 0.65);
            v->centered_advect_row(d.data(), x.data() + o, u.data() + o, n, st, 0.65);
            CHECK(bitwise_equal(c, d));
        }
        {
            auto y1 = random_vec(n, 21), y2 = y1;
            const auto xx = random_vec(n, 22);
            s.axpy(y1.data(), -0.37, xx.data(), n);
            v->axpy(y2.data(), -0.37, xx.data(), n);
            CHECK(bitwise_equal(y1, y2));
            s.xpay(y1.data(), xx.data(), 0.81, n);
            v->xpay(y2.data(), xx.data(), 0.81, n);
            CHECK(bitwise_equal(y1, y2));
        }
        {
            const auto p = random_vec(n, 31), q = random_vec(n, 32);
            const double ds = s.dot(p.data(), q.data(), n);
            const double dv = v->dot(p.data(), q.data(), n);
            CHECK(dv == doctest::Approx(ds).epsilon(1e-13));
        }
    }
}

TEST_CASE("upwind picks the side the velocity comes from") {
    const KernelTable& s = scalar_kernels();
    // f = i^2 at positions -1..3; u alternates sign.
    const std::vector<double> f{1.0, 0.0, 1.0, 4.0, 9.0};
    const std::vector<double> u{0.0, 1.0, -1.0, 1.0, 0.0};
    std::vector<double> out(3, 0.0);
    s.upwind_advect_row(out.data(), f.data() + 1, u.data() + 1, 3, 1, 1.0);
    CHECK(out[0] == -(1.0 * (0.0 - 1.0)));
    CHECK(out[1] == -(-1.0 * (4.0 - 1.0)));
    CHECK(out[2] == -(1.0 * (4.0 - 1.0)));
}

TEST_CASE("set_level switches the active table") {
    const Level before = active_level();
    set_level(Level::Scalar);
    CHECK(kernels().level == Level::Scalar);
    if (level_supported(Level::Avx2)) {
        set_level(Level::Avx2);
        CHECK(kernels().level == Level::Avx2);
    } else {
        CHECK_THROWS_AS(set_level(Level::Avx2), std::invalid_argument);
    }
    set_level(before);
}
