#pragma once

// Direct solver for alpha I - beta Lap_h on the cell-centred grid. The
// compact Laplacian with mirror, antisymmetric or periodic ghosts is
// diagonalised exactly by DCT-II, DST-II or the real DFT along each axis.
// With walls in z, the z direction is solved as a banded system per
// (x, y) frequency instead of transformed.

#include <array>
#include <memory>
#include <mutex>
#include <vector>

#include "activelc/grid.hpp"

namespace activelc {

struct BandFactor;

class SpectralHelmholtz {
public:
    SpectralHelmholtz(const Grid& grid, FieldRole role);
    ~SpectralHelmholtz();
    SpectralHelmholtz(const SpectralHelmholtz&) = delete;
    SpectralHelmholtz& operator=(const SpectralHelmholtz&) = delete;

    /// Interior of x = (alpha I - beta Lap_h)^-1 rhs, ghosts filled for the
    /// role. Requires alpha > 0 and beta >= 0. Serialised internally.
    void solve(double alpha, double beta, const ScalarField& rhs, ScalarField& x) const;

    /// Same with gamma (-D_a D_a) added, D_a the centred first difference
    /// along `axis` whose result takes the opposite wall ghost rule. For a
    /// velocity component this is the diagonal block of -grad_h div_h.
    /// Requires gamma >= 0.
    void solve(double alpha, double beta, int axis, double gamma, const ScalarField& rhs, ScalarField& x) const;

    /// Eigenvalues of -Lap_h along one axis, in transform order.
    [[nodiscard]] const std::vector<double>& axis_eigenvalues(int axis) const {
        return eig_[static_cast<std::size_t>(axis)];
    }

private:
    struct Plans;
    const BandFactor& factor(double alpha, double beta, int axis, double gamma_z,
                             const std::array<std::vector<double>, 3>& d) const;
    Grid grid_;
    FieldRole role_;
    std::array<std::vector<double>, 3> eig_;   ///< eigenvalues of -Lap_h per axis
    std::array<std::vector<double>, 3> wide_;  ///< eigenvalues of -D_a D_a per axis
    double norm_full_ = 1.0;                   ///< round-trip scale of the full transform
    double norm_planar_ = 1.0;                 ///< same for the x-y transform
    bool planar_ = false;                      ///< 3D with walls in z
    /// Upper bands (offsets 0..2) of -Lap_z and -D_z D_z, row-major by z cell.
    std::vector<double> lap_z_, wide_z_;
    std::unique_ptr<Plans> plans_;
    mutable std::mutex mutex_;
};

/// Process-wide cache keyed by grid geometry and role.
[[nodiscard]] const SpectralHelmholtz& spectral_helmholtz(const Grid& grid, FieldRole role);

}  // namespace activelc
