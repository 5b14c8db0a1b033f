#pragma once

// Uniform cell-centred box grids in 2 or 3 dimensions with one ghost layer,
// second-order difference operators and midpoint quadrature.
//
// A 2D grid is stored as a 3D grid with one cell and no ghosts along z;
// z-derivatives vanish and integrals are per unit depth.

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include <algorithm>
#include <functional>

#include "activelc/parallel.hpp"
#include "activelc/qtensor.hpp"

namespace activelc {

enum class BoundaryKind { DirichletZero, NeumannZero, Periodic };

/// Which boundary condition family a field obeys: scalars (c, rho, Q) are
/// NeumannZero on walls, velocity-like fields (u, m) are DirichletZero.
enum class FieldRole { Scalar, Velocity };

enum class AdvectionScheme { Centered, Upwind };

/// Throws ConfigError for anything other than "centered" / "upwind".
[[nodiscard]] AdvectionScheme parse_advection_scheme(std::string_view name);
[[nodiscard]] std::string_view to_string(AdvectionScheme s);

struct Layout {
    std::array<int, 3> n{1, 1, 1};  ///< interior cells per axis
    std::array<int, 3> g{0, 0, 0};  ///< ghost width per axis (0 or 1)
    std::array<std::ptrdiff_t, 3> stride{1, 0, 0};
    std::size_t size = 0;

    Layout() = default;
    Layout(std::array<int, 3> cells, std::array<int, 3> ghosts);

    [[nodiscard]] std::ptrdiff_t index(int i, int j, int k) const {
        return (i + g[0]) + (j + g[1]) * stride[1] + (k + g[2]) * stride[2];
    }
    [[nodiscard]] std::size_t rows() const { return static_cast<std::size_t>(n[1]) * n[2]; }
    [[nodiscard]] std::size_t interior_size() const { return rows() * static_cast<std::size_t>(n[0]); }
    /// Offset of interior cell (0, j, k) for row r = j + n1 * k.
    [[nodiscard]] std::ptrdiff_t row_start(std::size_t r) const {
        const int j = static_cast<int>(r % static_cast<std::size_t>(n[1]));
        const int k = static_cast<int>(r / static_cast<std::size_t>(n[1]));
        return index(0, j, k);
    }
    friend bool operator==(const Layout&, const Layout&) = default;
};

class Grid {
public:
    /// cells/lengths for inactive axes (axis >= dims) are ignored.
    Grid(int dims, std::array<int, 3> cells, std::array<double, 3> lengths,
         std::array<bool, 3> periodic = {false, false, false});

    [[nodiscard]] int dims() const { return dims_; }
    [[nodiscard]] const std::array<int, 3>& cells() const { return layout_.n; }
    [[nodiscard]] const std::array<double, 3>& lengths() const { return lengths_; }
    [[nodiscard]] const std::array<double, 3>& spacing() const { return h_; }
    [[nodiscard]] double h(int axis) const { return h_[static_cast<std::size_t>(axis)]; }
    [[nodiscard]] bool periodic(int axis) const { return periodic_[static_cast<std::size_t>(axis)]; }
    [[nodiscard]] const std::array<bool, 3>& periodic_axes() const { return periodic_; }
    [[nodiscard]] const Layout& layout() const { return layout_; }
    [[nodiscard]] double cell_volume() const { return h_[0] * h_[1] * h_[2]; }
    [[nodiscard]] double volume() const { return lengths_[0] * lengths_[1] * lengths_[2]; }
    [[nodiscard]] double center(int axis, int i) const { return (i + 0.5) * h(axis); }
    [[nodiscard]] BoundaryKind kind(FieldRole role, int axis) const;
    [[nodiscard]] std::size_t cell_count() const { return layout_.interior_size(); }
    [[nodiscard]] double min_spacing() const;

private:
    int dims_;
    std::array<double, 3> lengths_;
    std::array<double, 3> h_;
    std::array<bool, 3> periodic_;
    Layout layout_;
};

namespace detail {
[[nodiscard]] void* acquire_field_block(std::size_t bytes);
void release_field_block(void* p, std::size_t bytes) noexcept;
}  // namespace detail

/// Allocator for field storage. Large buffers are recycled through a
/// size-keyed free list, since time stepping creates and drops many
/// same-size temporaries and the system allocator would map and unmap
/// each one.
template <class T>
struct FieldAllocator {
    using value_type = T;
    FieldAllocator() = default;
    template <class U>
    FieldAllocator(const FieldAllocator<U>&) noexcept {}
    [[nodiscard]] T* allocate(std::size_t n) { return static_cast<T*>(detail::acquire_field_block(n * sizeof(T))); }
    void deallocate(T* p, std::size_t n) noexcept { detail::release_field_block(p, n * sizeof(T)); }
    friend bool operator==(const FieldAllocator&, const FieldAllocator&) { return true; }
};

using FieldStorage = std::vector<double, FieldAllocator<double>>;

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const Layout& layout, double value = 0.0)
        : layout_(layout), data_(layout.size, value) {}

    [[nodiscard]] double& operator()(int i, int j, int k = 0) { return data_[static_cast<std::size_t>(layout_.index(i, j, k))]; }
    [[nodiscard]] double operator()(int i, int j, int k = 0) const { return data_[static_cast<std::size_t>(layout_.index(i, j, k))]; }
    [[nodiscard]] double* data() { return data_.data(); }
    [[nodiscard]] const double* data() const { return data_.data(); }
    [[nodiscard]] std::size_t size() const { return data_.size(); }
    [[nodiscard]] const Layout& layout() const { return layout_; }
    [[nodiscard]] FieldStorage& raw() { return data_; }
    [[nodiscard]] const FieldStorage& raw() const { return data_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    friend bool operator==(const ScalarField&, const ScalarField&) = default;

private:
    Layout layout_;
    FieldStorage data_;
};

struct VectorField {
    std::array<ScalarField, 3> comp;

    VectorField() = default;
    explicit VectorField(const Layout& l, double v = 0.0) : comp{ScalarField(l, v), ScalarField(l, v), ScalarField(l, v)} {}
    ScalarField& operator[](int a) { return comp[static_cast<std::size_t>(a)]; }
    const ScalarField& operator[](int a) const { return comp[static_cast<std::size_t>(a)]; }
    friend bool operator==(const VectorField&, const VectorField&) = default;
};

struct QField {
    std::array<ScalarField, 5> comp;

    QField() = default;
    explicit QField(const Layout& l) : comp{ScalarField(l), ScalarField(l), ScalarField(l), ScalarField(l), ScalarField(l)} {}
    ScalarField& operator[](int a) { return comp[static_cast<std::size_t>(a)]; }
    const ScalarField& operator[](int a) const { return comp[static_cast<std::size_t>(a)]; }

    [[nodiscard]] QTensor at(std::ptrdiff_t idx) const {
        QTensor q;
        for (std::size_t a = 0; a < 5; ++a) q.q[a] = comp[a].data()[idx];
        return q;
    }
    void set(std::ptrdiff_t idx, const QTensor& q) {
        for (std::size_t a = 0; a < 5; ++a) comp[a].data()[idx] = q.q[a];
    }
    [[nodiscard]] QTensor at(int i, int j, int k = 0) const { return at(comp[0].layout().index(i, j, k)); }
    void set(int i, int j, int k, const QTensor& q) { set(comp[0].layout().index(i, j, k), q); }
    void fill(const QTensor& q) {
        for (std::size_t a = 0; a < 5; ++a) comp[a].fill(q.q[a]);
    }
    friend bool operator==(const QField&, const QField&) = default;
};

// ---------------------------------------------------------------------------
// Iteration helpers.

/// Calls fn(offset_of_first_cell, j, k) for every interior row, in parallel.
template <class Fn>
void for_each_row(const Layout& L, Fn&& fn);

/// Deterministic (under the active reduction mode) sum of fn(row_offset)
/// over interior rows.
double reduce_rows(const Layout& L, const std::function<double(std::ptrdiff_t)>& fn);

// ---------------------------------------------------------------------------
// Boundary handling.

/// NeumannZero mirrors the adjacent interior value, DirichletZero reflects
/// with a sign flip (so the face value interpolates to 0), Periodic wraps.
void fill_ghosts(ScalarField& f, const Grid& grid, BoundaryKind kind);
void fill_ghosts(ScalarField& f, const Grid& grid, FieldRole role);
void fill_ghosts(VectorField& v, const Grid& grid, FieldRole role = FieldRole::Velocity);
void fill_ghosts(QField& q, const Grid& grid);

// ---------------------------------------------------------------------------
// Difference operators. Inputs must have ghosts filled; outputs are defined
// on interior cells only (ghosts left at 0).

/// Centred first derivative along one axis: out = (f[i+1] - f[i-1]) / 2h.
void partial(const ScalarField& f, const Grid& grid, int axis, ScalarField& out);
[[nodiscard]] ScalarField partial(const ScalarField& f, const Grid& grid, int axis);
[[nodiscard]] VectorField gradient(const ScalarField& f, const Grid& grid);
[[nodiscard]] ScalarField divergence(const VectorField& v, const Grid& grid);
/// Compact 5/7-point Laplacian.
void laplacian(const ScalarField& f, const Grid& grid, ScalarField& out);
[[nodiscard]] ScalarField laplacian(const ScalarField& f, const Grid& grid);
[[nodiscard]] VectorField laplacian(const VectorField& v, const Grid& grid);
[[nodiscard]] QField laplacian(const QField& q, const Grid& grid);

/// Tendency -(u . grad) f (non-conservative form).
[[nodiscard]] ScalarField advect(const ScalarField& f, const VectorField& u, const Grid& grid,
                                 AdvectionScheme scheme);
void advect_add(const ScalarField& f, const VectorField& u, const Grid& grid,
                AdvectionScheme scheme, ScalarField& tendency);

/// Tendency -div(f u) in flux form. Face velocity is the average of the two
/// adjacent cells; the face value of f is upwinded or averaged. Fluxes are
/// antisymmetric across faces, so the interior sum telescopes to the
/// boundary flux.
void conservative_advect_add(const ScalarField& f, const VectorField& u, const Grid& grid,
                             AdvectionScheme scheme, ScalarField& tendency);

// ---------------------------------------------------------------------------
// Quadrature.

[[nodiscard]] double integrate(const ScalarField& f, const Grid& grid);
[[nodiscard]] double inner(const ScalarField& a, const ScalarField& b, const Grid& grid);
[[nodiscard]] double inner(const VectorField& a, const VectorField& b, const Grid& grid);
/// Frobenius contraction, integrated.
[[nodiscard]] double inner(const QField& a, const QField& b, const Grid& grid);

/// Sum over cell faces of |(f_R - f_L)/h|^2 times the cell volume. Wall
/// faces (interior to ghost) carry weight 1/2 and vanish for NeumannZero.
/// Equals -<Lap f, f> for every ghost rule, so its variation is -2 Lap f.
[[nodiscard]] double face_gradient_norm2(const ScalarField& f, const Grid& grid);

[[nodiscard]] double max_abs(const ScalarField& f);
[[nodiscard]] double interior_min(const ScalarField& f);
[[nodiscard]] double interior_max(const ScalarField& f);
[[nodiscard]] bool all_finite(const ScalarField& f);

/// Shape check, throws ShapeError.
void require_same_layout(const Layout& a, const Layout& b, const char* what);

// ---------------------------------------------------------------------------

template <class Fn>
void for_each_row(const Layout& L, Fn&& fn) {
    parallel::for_range(L.rows(), [&](std::size_t b, std::size_t e) {
        for (std::size_t r = b; r < e; ++r) {
            const int j = static_cast<int>(r % static_cast<std::size_t>(L.n[1]));
            const int k = static_cast<int>(r / static_cast<std::size_t>(L.n[1]));
            fn(L.index(0, j, k), j, k);
        }
    });
}

}  // namespace activelc
