#include "activelc/linear_solver.hpp"

#include <cmath>
#include <fmt/format.h>

#include "activelc/errors.hpp"
#include "activelc/simd.hpp"
#include "activelc/spectral.hpp"

namespace activelc {

namespace {

void require_bundle(const FieldBundle& a, const FieldBundle& b, const char* what) {
    if (a.size() != b.size()) throw ShapeError(std::string("bundle size mismatch in ") + what);
    for (std::size_t c = 0; c < a.size(); ++c) require_same_layout(a[c].layout(), b[c].layout(), what);
}

/// Applies fn(c, row_offset, n) to every interior row of every component.
template <class Fn>
void for_bundle_rows(const FieldBundle& ref, Fn&& fn) {
    for (std::size_t c = 0; c < ref.size(); ++c) {
        const Layout& L = ref[c].layout();
        const auto n = static_cast<std::size_t>(L.n[0]);
        for_each_row(L, [&](std::ptrdiff_t o, int, int) { fn(c, o, n); });
    }
}

}  // namespace

double bundle_dot(const FieldBundle& a, const FieldBundle& b) {
    require_bundle(a, b, "bundle_dot");
    const auto& k = simd::kernels();
    double total = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        const Layout& L = a[c].layout();
        const auto n = static_cast<std::size_t>(L.n[0]);
        total += reduce_rows(L, [&](std::ptrdiff_t o) { return k.dot(a[c].data() + o, b[c].data() + o, n); });
    }
    return total;
}

CgResult pcg(const LinearOperator& A, const FieldBundle& diag, const FieldBundle& b, FieldBundle& x,
             const CgOptions& opt) {
    require_bundle(b, diag, "pcg");
    const Preconditioner jacobi = [&](const FieldBundle& r, FieldBundle& z) {
        for_bundle_rows(r, [&](std::size_t c, std::ptrdiff_t o, std::size_t n) {
            const double* rr = r[c].data() + o;
            const double* dd = diag[c].data() + o;
            double* zz = z[c].data() + o;
            for (std::size_t i = 0; i < n; ++i) zz[i] = rr[i] / dd[i];
        });
    };
    return pcg(A, jacobi, b, x, opt);
}

CgResult pcg(const LinearOperator& A, const Preconditioner& M, const FieldBundle& b, FieldBundle& x,
             const CgOptions& opt) {
    require_bundle(b, x, "pcg");
    const auto& k = simd::kernels();

    const double bnorm = std::sqrt(bundle_dot(b, b));
    if (bnorm == 0.0) {
        for (auto& f : x) f.fill(0.0);
        return {0, 0.0};
    }

    FieldBundle r = b;
    FieldBundle Ap = b;
    A(x, Ap);
    for_bundle_rows(b, [&](std::size_t c, std::ptrdiff_t o, std::size_t n) {
        k.axpy(r[c].data() + o, -1.0, Ap[c].data() + o, n);
    });
    double rnorm = std::sqrt(bundle_dot(r, r));
    if (!std::isfinite(rnorm))
        throw NumericalError("non-finite residual in conjugate gradient solve");
    if (rnorm <= opt.rtol * bnorm) return {0, rnorm / bnorm};

    FieldBundle z = r;
    M(r, z);
    FieldBundle p = z;
    double rz = bundle_dot(r, z);

    for (int it = 1; it <= opt.max_iter; ++it) {
        A(p, Ap);
        const double pAp = bundle_dot(p, Ap);
        if (!(pAp > 0.0))
            throw NumericalError(fmt::format(
                "conjugate gradient breakdown (p^T A p = {:.3e}); operator not positive definite", pAp));
        const double alpha = rz / pAp;
        for_bundle_rows(b, [&](std::size_t c, std::ptrdiff_t o, std::size_t n) {
            k.axpy(x[c].data() + o, alpha, p[c].data() + o, n);
            k.axpy(r[c].data() + o, -alpha, Ap[c].data() + o, n);
        });
        rnorm = std::sqrt(bundle_dot(r, r));
        if (!std::isfinite(rnorm))
            throw NumericalError("non-finite residual in conjugate gradient solve");
        if (rnorm <= opt.rtol * bnorm) return {it, rnorm / bnorm};
        M(r, z);
        const double rz_new = bundle_dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for_bundle_rows(b, [&](std::size_t c, std::ptrdiff_t o, std::size_t n) {
            k.xpay(p[c].data() + o, z[c].data() + o, beta, n);
        });
    }
    throw NumericalError(fmt::format(
        "conjugate gradient did not converge in {} iterations (relative residual {:.3e}, tolerance {:.1e})",
        opt.max_iter, rnorm / bnorm, opt.rtol));
}

void helmholtz_apply(ScalarField& x, const Grid& grid, FieldRole role, double alpha, double beta,
                     ScalarField& out) {
    fill_ghosts(x, grid, role);
    const Layout& L = grid.layout();
    if (out.layout() != L) out = ScalarField(L);
    const auto& k = simd::kernels();
    const double ix2 = 1.0 / (grid.h(0) * grid.h(0));
    const double iy2 = 1.0 / (grid.h(1) * grid.h(1));
    const double iz2 = 1.0 / (grid.h(2) * grid.h(2));
    const std::ptrdiff_t sz = grid.dims() == 3 ? L.stride[2] : 0;
    const auto n = static_cast<std::size_t>(L.n[0]);
    for_each_row(L, [&](std::ptrdiff_t o, int, int) {
        k.helmholtz_row(out.data() + o, x.data() + o, n, L.stride[1], sz, ix2, iy2, iz2, alpha, beta);
    });
}

namespace {

double stencil_diag(const Grid& grid) {
    double d = 0.0;
    for (int a = 0; a < grid.dims(); ++a) d += 2.0 / (grid.h(a) * grid.h(a));
    return d;
}

}  // namespace

CgResult solve_helmholtz(const Grid& grid, FieldRole role, double alpha, double beta,
                         const ScalarField& rhs, ScalarField& x, const CgOptions& opt) {
    const Layout& L = grid.layout();
    FieldBundle b{rhs};
    FieldBundle xs{x};
    const LinearOperator A = [&](FieldBundle& in, FieldBundle& out) {
        helmholtz_apply(in[0], grid, role, alpha, beta, out[0]);
    };
    CgResult res;
    if (alpha > 0.0 && beta >= 0.0) {
        const SpectralHelmholtz& inv = spectral_helmholtz(grid, role);
        res = pcg(A, [&](const FieldBundle& r, FieldBundle& z) { inv.solve(alpha, beta, r[0], z[0]); }, b, xs, opt);
    } else {
        res = pcg(A, FieldBundle{ScalarField(L, alpha + beta * stencil_diag(grid))}, b, xs, opt);
    }
    x = std::move(xs[0]);
    return res;
}

void viscous_apply(VectorField& u, const Grid& grid, const PhysParams& phys, VectorField& out) {
    fill_ghosts(u, grid, FieldRole::Velocity);
    ScalarField div = divergence(u, grid);
    fill_ghosts(div, grid, FieldRole::Scalar);
    const Layout& L = grid.layout();
    const auto& k = simd::kernels();
    const double ix2 = 1.0 / (grid.h(0) * grid.h(0));
    const double iy2 = 1.0 / (grid.h(1) * grid.h(1));
    const double iz2 = 1.0 / (grid.h(2) * grid.h(2));
    const std::ptrdiff_t sz = grid.dims() == 3 ? L.stride[2] : 0;
    const auto n = static_cast<std::size_t>(L.n[0]);
    const double lam = phys.nu + phys.mu;
    for (int a = 0; a < 3; ++a) {
        if (out[a].layout() != L) out[a] = ScalarField(L);
        const bool active = a < grid.dims();
        const std::ptrdiff_t s = L.stride[static_cast<std::size_t>(a)];
        const double inv2h = 0.5 / grid.h(a);
        for_each_row(L, [&](std::ptrdiff_t o, int, int) {
            double* dst = out[a].data() + o;
            k.laplacian_row(dst, u[a].data() + o, n, L.stride[1], sz, ix2, iy2, iz2);
            const double* dv = div.data() + o;
            for (std::size_t i = 0; i < n; ++i) {
                const double g = active ? (dv[i + s] - dv[i - s]) * inv2h : 0.0;
                dst[i] = phys.mu * dst[i] + lam * g;
            }
        });
    }
}

CgResult solve_momentum(const Grid& grid, const PhysParams& phys, const ScalarField& rho, double dt,
                        const VectorField& rhs, VectorField& u, const CgOptions& opt) {
    const Layout& L = grid.layout();
    require_same_layout(rho.layout(), L, "solve_momentum");
    FieldBundle b{rhs[0], rhs[1], rhs[2]};
    FieldBundle xs{u[0], u[1], u[2]};
    const double rho_sum = reduce_rows(L, [&](std::ptrdiff_t o) {
        double s = 0.0;
        for (std::ptrdiff_t i = 0; i < L.n[0]; ++i) s += rho.data()[o + i];
        return s;
    });
    const double rho_mean = rho_sum / static_cast<double>(grid.cell_count());
    if (!(rho_mean > 0.0)) throw NumericalError("momentum solve needs a positive mean density");
    const SpectralHelmholtz& inv = spectral_helmholtz(grid, FieldRole::Velocity);
    const Preconditioner M = [&](const FieldBundle& r, FieldBundle& z) {
        for (int a = 0; a < 3; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            const double gd = a < grid.dims() ? dt * (phys.nu + phys.mu) : 0.0;
            inv.solve(rho_mean, dt * phys.mu, a, gd, r[ua], z[ua]);
        }
    };
    VectorField tmp_in(L), tmp_out(L);
    const auto res = pcg(
        [&](FieldBundle& in, FieldBundle& out) {
            for (int a = 0; a < 3; ++a) std::swap(tmp_in[a], in[static_cast<std::size_t>(a)]);
            viscous_apply(tmp_in, grid, phys, tmp_out);
            for (int a = 0; a < 3; ++a) {
                std::swap(tmp_in[a], in[static_cast<std::size_t>(a)]);
                const auto ua = static_cast<std::size_t>(a);
                for_each_row(L, [&](std::ptrdiff_t o, int, int) {
                    const double* x = in[ua].data() + o;
                    const double* lu = tmp_out[a].data() + o;
                    const double* r = rho.data() + o;
                    double* y = out[ua].data() + o;
                    for (std::ptrdiff_t i = 0; i < L.n[0]; ++i) y[i] = r[i] * x[i] - dt * lu[i];
                });
            }
        },
        M, b, xs, opt);
    for (int a = 0; a < 3; ++a) u[a] = std::move(xs[static_cast<std::size_t>(a)]);
    return res;
}

}  // namespace activelc
