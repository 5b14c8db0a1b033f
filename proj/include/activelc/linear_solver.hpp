#pragma once

// Preconditioned conjugate gradients on bundles of grid fields, and the SPD
// operators used by the implicit parts of the time step.

#include <functional>
#include <vector>

#include "activelc/grid.hpp"
#include "activelc/params.hpp"

namespace activelc {

using FieldBundle = std::vector<ScalarField>;

struct CgOptions {
    double rtol = 1e-10;
    int max_iter = 10000;
};

struct CgResult {
    int iterations = 0;
    double residual = 0.0;  ///< final relative residual ||r|| / ||b||
};

/// out = A x. May overwrite the ghost cells of x.
using LinearOperator = std::function<void(FieldBundle& x, FieldBundle& out)>;

/// z = M^-1 r for an SPD approximation M of the operator.
using Preconditioner = std::function<void(const FieldBundle& r, FieldBundle& z)>;

/// Solves A x = b starting from the given x. Throws NumericalError on
/// non-convergence or loss of positive definiteness.
CgResult pcg(const LinearOperator& A, const Preconditioner& M, const FieldBundle& b,
             FieldBundle& x, const CgOptions& opt = {});

/// Jacobi variant; `diag` must be positive.
CgResult pcg(const LinearOperator& A, const FieldBundle& diag, const FieldBundle& b,
             FieldBundle& x, const CgOptions& opt = {});

/// Interior dot product over all bundle components, reduced row by row.
[[nodiscard]] double bundle_dot(const FieldBundle& a, const FieldBundle& b);

/// out = alpha x - beta Lap_h x, with x's ghosts filled for `role`.
void helmholtz_apply(ScalarField& x, const Grid& grid, FieldRole role, double alpha, double beta,
                     ScalarField& out);

/// Solves (alpha I - beta Lap_h) x = rhs; x holds the initial guess. With
/// alpha > 0 and beta >= 0 the preconditioner is the exact spectral inverse,
/// so convergence takes one or two iterations.
CgResult solve_helmholtz(const Grid& grid, FieldRole role, double alpha, double beta,
                         const ScalarField& rhs, ScalarField& x, const CgOptions& opt = {});

/// out = mu Lap_h u + (nu + mu) grad_h div_h u. u is treated as a velocity
/// (Dirichlet walls) and div u as a scalar (Neumann walls), which makes the
/// discrete grad the negative adjoint of the discrete div. Fills u's ghosts.
void viscous_apply(VectorField& u, const Grid& grid, const PhysParams& phys, VectorField& out);

/// Solves (diag(rho) - dt L_h) u = rhs for the momentum update. u holds the
/// initial guess. Preconditioned per component by the spectral inverse of
/// the operator with rho replaced by its mean and grad div by its diagonal
/// block.
CgResult solve_momentum(const Grid& grid, const PhysParams& phys, const ScalarField& rho,
                        double dt, const VectorField& rhs, VectorField& u,
                        const CgOptions& opt = {});

}  // namespace activelc
