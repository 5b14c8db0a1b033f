#include "activelc/grid.hpp"

#include <cmath>
#include <mutex>
#include <new>
#include <string>
#include <unordered_map>

#include "activelc/errors.hpp"
#include "activelc/simd.hpp"

namespace activelc {

namespace detail {

namespace {

constexpr std::size_t kPooledMinBytes = std::size_t{64} << 10;
constexpr std::size_t kPoolCapBytes = std::size_t{512} << 20;

struct BlockPool {
    std::mutex mutex;
    std::unordered_map<std::size_t, std::vector<void*>> free;
    std::size_t cached = 0;
};

// Never destroyed, so fields with static storage can still release into it at exit.
BlockPool& pool() {
    static auto* p = new BlockPool;
    return *p;
}

}  // namespace

void* acquire_field_block(std::size_t bytes) {
    if (bytes >= kPooledMinBytes) {
        BlockPool& p = pool();
        std::lock_guard lock(p.mutex);
        auto it = p.free.find(bytes);
        if (it != p.free.end() && !it->second.empty()) {
            void* block = it->second.back();
            it->second.pop_back();
            p.cached -= bytes;
            return block;
        }
    }
    return ::operator new(bytes);
}

void release_field_block(void* block, std::size_t bytes) noexcept {
    if (block == nullptr) return;
    if (bytes >= kPooledMinBytes) {
        BlockPool& p = pool();
        std::lock_guard lock(p.mutex);
        if (p.cached + bytes <= kPoolCapBytes) {
            try {
                p.free[bytes].push_back(block);
                p.cached += bytes;
                return;
            } catch (...) {
                // Fall through and free the block.
            }
        }
    }
    ::operator delete(block);
}

}  // namespace detail

AdvectionScheme parse_advection_scheme(std::string_view name) {
    if (name == "centered" || name == "centred") return AdvectionScheme::Centered;
    if (name == "upwind") return AdvectionScheme::Upwind;
    throw ConfigError("unknown advection scheme '" + std::string(name) +
                      "' (expected 'upwind' or 'centered')");
}

std::string_view to_string(AdvectionScheme s) {
    return s == AdvectionScheme::Upwind ? "upwind" : "centered";
}

Layout::Layout(std::array<int, 3> cells, std::array<int, 3> ghosts) : n(cells), g(ghosts) {
    stride[0] = 1;
    stride[1] = n[0] + 2 * g[0];
    stride[2] = stride[1] * (n[1] + 2 * g[1]);
    size = static_cast<std::size_t>(stride[2] * (n[2] + 2 * g[2]));
}

Grid::Grid(int dims, std::array<int, 3> cells, std::array<double, 3> lengths,
           std::array<bool, 3> periodic)
    : dims_(dims), lengths_(lengths), h_{}, periodic_(periodic) {
    if (dims != 2 && dims != 3) throw ConfigError("grid dimension must be 2 or 3");
    std::array<int, 3> ghosts{1, 1, dims == 3 ? 1 : 0};
    if (dims == 2) {
        cells[2] = 1;
        lengths_[2] = 1.0;
        periodic_[2] = false;
    }
    for (int a = 0; a < 3; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        if (cells[ua] < 1) throw ConfigError("grid needs at least one cell per axis");
        if (!(lengths_[ua] > 0.0) || !std::isfinite(lengths_[ua]))
            throw ConfigError("grid lengths must be positive");
        if (a < dims && cells[ua] < 2) throw ConfigError("grid needs at least two cells per active axis");
        h_[ua] = lengths_[ua] / cells[ua];
    }
    layout_ = Layout(cells, ghosts);
}

BoundaryKind Grid::kind(FieldRole role, int axis) const {
    if (periodic(axis)) return BoundaryKind::Periodic;
    return role == FieldRole::Velocity ? BoundaryKind::DirichletZero : BoundaryKind::NeumannZero;
}

double Grid::min_spacing() const {
    double m = h_[0];
    for (int a = 1; a < dims_; ++a) m = std::min(m, h(a));
    return m;
}

double reduce_rows(const Layout& L, const std::function<double(std::ptrdiff_t)>& fn) {
    return parallel::sum(L.rows(), [&](std::size_t r) { return fn(L.row_start(r)); });
}

void require_same_layout(const Layout& a, const Layout& b, const char* what) {
    if (!(a == b)) throw ShapeError(std::string("layout mismatch in ") + what);
}

namespace {

void check(const ScalarField& f, const Grid& grid, const char* what) {
    if (f.size() == 0) throw ShapeError(std::string("empty field passed to ") + what);
    require_same_layout(f.layout(), grid.layout(), what);
}

void fill_axis(double* d, const Layout& L, int axis, BoundaryKind kind) {
    const auto ua = static_cast<std::size_t>(axis);
    if (L.g[ua] == 0) return;
    const int b1 = axis == 0 ? 1 : 0;
    const int b2 = axis == 2 ? 1 : 2;
    const auto u1 = static_cast<std::size_t>(b1);
    const auto u2 = static_cast<std::size_t>(b2);
    const int p1 = L.n[u1] + 2 * L.g[u1];
    const int p2 = L.n[u2] + 2 * L.g[u2];
    const std::ptrdiff_t s = L.stride[ua];
    const std::ptrdiff_t n = L.n[ua];
    for (int y = 0; y < p2; ++y) {
        for (int x = 0; x < p1; ++x) {
            double* base = d + x * L.stride[u1] + y * L.stride[u2];
            double& lo = base[0];
            double& hi = base[(n + 1) * s];
            const double first = base[s];
            const double last = base[n * s];
            switch (kind) {
                case BoundaryKind::NeumannZero:
                    lo = first;
                    hi = last;
                    break;
                case BoundaryKind::DirichletZero:
                    lo = -first;
                    hi = -last;
                    break;
                case BoundaryKind::Periodic:
                    lo = last;
                    hi = first;
                    break;
            }
        }
    }
}

}  // namespace

void fill_ghosts(ScalarField& f, const Grid& grid, BoundaryKind kind) {
    check(f, grid, "fill_ghosts");
    for (int a = 0; a < grid.dims(); ++a)
        fill_axis(f.data(), f.layout(), a, grid.periodic(a) ? BoundaryKind::Periodic : kind);
}

void fill_ghosts(ScalarField& f, const Grid& grid, FieldRole role) {
    check(f, grid, "fill_ghosts");
    for (int a = 0; a < grid.dims(); ++a) fill_axis(f.data(), f.layout(), a, grid.kind(role, a));
}

void fill_ghosts(VectorField& v, const Grid& grid, FieldRole role) {
    for (auto& c : v.comp) fill_ghosts(c, grid, role);
}

void fill_ghosts(QField& q, const Grid& grid) {
    for (auto& c : q.comp) fill_ghosts(c, grid, FieldRole::Scalar);
}

void partial(const ScalarField& f, const Grid& grid, int axis, ScalarField& out) {
    check(f, grid, "partial");
    if (out.layout() != f.layout()) out = ScalarField(f.layout());
    const Layout& L = f.layout();
    if (axis >= grid.dims()) {
        out.fill(0.0);
        return;
    }
    const auto& k = simd::kernels();
    const std::ptrdiff_t s = L.stride[static_cast<std::size_t>(axis)];
    const double inv2h = 0.5 / grid.h(axis);
    const auto n = static_cast<std::size_t>(L.n[0]);
    for_each_row(L, [&](std::ptrdiff_t o, int, int) {
        k.central_diff_row(out.data() + o, f.data() + o, n, s, inv2h);
    });
}

ScalarField partial(const ScalarField& f, const Grid& grid, int axis) {
    ScalarField out(f.layout());
    partial(f, grid, axis, out);
    return out;
}

VectorField gradient(const ScalarField& f, const Grid& grid) {
    VectorField g(f.layout());
    for (int a = 0; a < grid.dims(); ++a) partial(f, grid, a, g[a]);
    return g;
}

ScalarField divergence(const VectorField& v, const Grid& grid) {
    const Layout& L = grid.layout();
    ScalarField out(L);
    ScalarField tmp(L);
    for (int a = 0; a < grid.dims(); ++a) {
        partial(v[a], grid, a, tmp);
        const auto n = static_cast<std::size_t>(L.n[0]);
        for_each_row(L, [&](std::ptrdiff_t o, int, int) {
            double* d = out.data() + o;
            const double* t = tmp.data() + o;
            for (std::size_t i = 0; i < n; ++i) d[i] += t[i];
        });
    }
    return out;
}

void laplacian(const ScalarField& f, const Grid& grid, ScalarField& out) {
    check(f, grid, "laplacian");
    const Layout& L = f.layout();
    if (out.layout() != L) out = ScalarField(L);
    const auto& k = simd::kernels();
    const double ix2 = 1.0 / (grid.h(0) * grid.h(0));
    const double iy2 = 1.0 / (grid.h(1) * grid.h(1));
    const double iz2 = 1.0 / (grid.h(2) * grid.h(2));
    const std::ptrdiff_t sz = grid.dims() == 3 ? L.stride[2] : 0;
    const auto n = static_cast<std::size_t>(L.n[0]);
    for_each_row(L, [&](std::ptrdiff_t o, int, int) {
        k.laplacian_row(out.data() + o, f.data() + o, n, L.stride[1], sz, ix2, iy2, iz2);
    });
}

ScalarField laplacian(const ScalarField& f, const Grid& grid) {
    ScalarField out(f.layout());
    laplacian(f, grid, out);
    return out;
}

VectorField laplacian(const VectorField& v, const Grid& grid) {
    VectorField out(grid.layout());
    for (int a = 0; a < 3; ++a) laplacian(v[a], grid, out[a]);
    return out;
}

QField laplacian(const QField& q, const Grid& grid) {
    QField out(grid.layout());
    for (int a = 0; a < 5; ++a) laplacian(q[a], grid, out[a]);
    return out;
}

void advect_add(const ScalarField& f, const VectorField& u, const Grid& grid,
                AdvectionScheme scheme, ScalarField& tendency) {
    check(f, grid, "advect");
    require_same_layout(tendency.layout(), f.layout(), "advect");
    const Layout& L = f.layout();
    const auto& k = simd::kernels();
    const auto n = static_cast<std::size_t>(L.n[0]);
    for (int a = 0; a < grid.dims(); ++a) {
        require_same_layout(u[a].layout(), L, "advect");
        const std::ptrdiff_t s = L.stride[static_cast<std::size_t>(a)];
        const double invh = 1.0 / grid.h(a);
        for_each_row(L, [&](std::ptrdiff_t o, int, int) {
            if (scheme == AdvectionScheme::Upwind)
                k.upwind_advect_row(tendency.data() + o, f.data() + o, u[a].data() + o, n, s, invh);
            else
                k.centered_advect_row(tendency.data() + o, f.data() + o, u[a].data() + o, n, s,
                                      0.5 * invh);
        });
    }
}

ScalarField advect(const ScalarField& f, const VectorField& u, const Grid& grid,
                   AdvectionScheme scheme) {
    ScalarField t(f.layout());
    advect_add(f, u, grid, scheme, t);
    return t;
}

void conservative_advect_add(const ScalarField& f, const VectorField& u, const Grid& grid,
                             AdvectionScheme scheme, ScalarField& tendency) {
    check(f, grid, "conservative_advect");
    require_same_layout(tendency.layout(), f.layout(), "conservative_advect");
    const Layout& L = f.layout();
    const auto n = static_cast<std::size_t>(L.n[0]);
    const bool up = scheme == AdvectionScheme::Upwind;
    auto flux = [up](double fl, double fr, double ul, double ur) {
        const double uf = 0.5 * (ul + ur);
        const double ff = up ? (uf > 0.0 ? fl : fr) : 0.5 * (fl + fr);
        return uf * ff;
    };
    for (int a = 0; a < grid.dims(); ++a) {
        require_same_layout(u[a].layout(), L, "conservative_advect");
        const std::ptrdiff_t s = L.stride[static_cast<std::size_t>(a)];
        const double invh = 1.0 / grid.h(a);
        for_each_row(L, [&](std::ptrdiff_t o, int, int) {
            const double* p = f.data() + o;
            const double* v = u[a].data() + o;
            double* t = tendency.data() + o;
            for (std::size_t i = 0; i < n; ++i) {
                const double fr = flux(p[i], p[i + s], v[i], v[i + s]);
                const double fl = flux(p[i - s], p[i], v[i - s], v[i]);
                t[i] -= (fr - fl) * invh;
            }
        });
    }
}

double integrate(const ScalarField& f, const Grid& grid) {
    check(f, grid, "integrate");
    const auto n = static_cast<std::size_t>(grid.layout().n[0]);
    const double* d = f.data();
    return grid.cell_volume() * reduce_rows(grid.layout(), [&](std::ptrdiff_t o) {
               double s = 0.0;
               for (std::size_t i = 0; i < n; ++i) s += d[o + static_cast<std::ptrdiff_t>(i)];
               return s;
           });
}

double inner(const ScalarField& a, const ScalarField& b, const Grid& grid) {
    check(a, grid, "inner");
    check(b, grid, "inner");
    const auto n = static_cast<std::size_t>(grid.layout().n[0]);
    return grid.cell_volume() * reduce_rows(grid.layout(), [&](std::ptrdiff_t o) {
               double s = 0.0;
               const double* x = a.data() + o;
               const double* y = b.data() + o;
               for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
               return s;
           });
}

double inner(const VectorField& a, const VectorField& b, const Grid& grid) {
    for (int c = 0; c < 3; ++c) {
        check(a[c], grid, "inner");
        check(b[c], grid, "inner");
    }
    const auto n = static_cast<std::size_t>(grid.layout().n[0]);
    return grid.cell_volume() * reduce_rows(grid.layout(), [&](std::ptrdiff_t o) {
               double s = 0.0;
               for (std::size_t i = 0; i < n; ++i) {
                   const auto idx = o + static_cast<std::ptrdiff_t>(i);
                   s += a[0].data()[idx] * b[0].data()[idx] + a[1].data()[idx] * b[1].data()[idx] +
                        a[2].data()[idx] * b[2].data()[idx];
               }
               return s;
           });
}

double inner(const QField& a, const QField& b, const Grid& grid) {
    for (int c = 0; c < 5; ++c) {
        check(a[c], grid, "inner");
        check(b[c], grid, "inner");
    }
    const auto n = static_cast<std::size_t>(grid.layout().n[0]);
    return grid.cell_volume() * reduce_rows(grid.layout(), [&](std::ptrdiff_t o) {
               double s = 0.0;
               for (std::size_t i = 0; i < n; ++i) {
                   const auto idx = o + static_cast<std::ptrdiff_t>(i);
                   s += frob(a.at(idx), b.at(idx));
               }
               return s;
           });
}

double face_gradient_norm2(const ScalarField& f, const Grid& grid) {
    check(f, grid, "face_gradient_norm2");
    const Layout& L = grid.layout();
    const auto n0 = L.n[0];
    const double* d = f.data();
    const int dims = grid.dims();
    const double total = parallel::sum(L.rows(), [&](std::size_t r) {
        const int j = static_cast<int>(r % static_cast<std::size_t>(L.n[1]));
        const int k = static_cast<int>(r / static_cast<std::size_t>(L.n[1]));
        const double* p = d + L.index(0, j, k);
        const std::array<int, 3> pos{0, j, k};
        double acc = 0.0;
        for (int a = 0; a < dims; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            const std::ptrdiff_t s = L.stride[ua];
            const double ih2 = 1.0 / (grid.h(a) * grid.h(a));
            const bool wall = !grid.periodic(a);
            double row = 0.0;
            for (int i = 0; i < n0; ++i) {
                const double dl = p[i] - p[i - s];
                const int along = a == 0 ? i : pos[ua];
                row += (wall && along == 0 ? 0.5 : 1.0) * dl * dl;
                if (wall && along == L.n[ua] - 1) {
                    const double dr = p[i + s] - p[i];
                    row += 0.5 * dr * dr;
                }
            }
            acc += row * ih2;
        }
        return acc;
    });
    return grid.cell_volume() * total;
}

double max_abs(const ScalarField& f) {
    const Layout& L = f.layout();
    const auto n = static_cast<std::size_t>(L.n[0]);
    return parallel::max(L.rows(), [&](std::size_t r) {
        const double* p = f.data() + L.row_start(r);
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(p[i]));
        return m;
    });
}

double interior_min(const ScalarField& f) {
    const Layout& L = f.layout();
    const auto n = static_cast<std::size_t>(L.n[0]);
    return parallel::min(L.rows(), [&](std::size_t r) {
        const double* p = f.data() + L.row_start(r);
        double m = p[0];
        for (std::size_t i = 1; i < n; ++i) m = std::min(m, p[i]);
        return m;
    });
}

double interior_max(const ScalarField& f) {
    const Layout& L = f.layout();
    const auto n = static_cast<std::size_t>(L.n[0]);
    return parallel::max(L.rows(), [&](std::size_t r) {
        const double* p = f.data() + L.row_start(r);
        double m = p[0];
        for (std::size_t i = 1; i < n; ++i) m = std::max(m, p[i]);
        return m;
    });
}

bool all_finite(const ScalarField& f) {
    const Layout& L = f.layout();
    const auto n = static_cast<std::size_t>(L.n[0]);
    const double bad = parallel::sum(L.rows(), [&](std::size_t r) {
        const double* p = f.data() + L.row_start(r);
        double b = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (!std::isfinite(p[i])) b += 1.0;
        return b;
    });
    return bad == 0.0;
}

}  // namespace activelc
