#pragma once

// Faedo-Galerkin momentum backend on the Dirichlet Laplacian eigenbasis of
// the box: sine-product modes sampled at cell centres, times the three
// coordinate directions. c, rho and Q stay on the grid.

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "activelc/grid.hpp"
#include "activelc/integrator.hpp"
#include "activelc/params.hpp"

namespace activelc {

struct EigenBasis {
    std::array<int, 3> cells{};       ///< grid the modes are sampled on
    int dims = 0;
    std::vector<std::array<int, 3>> k;  ///< wave indices (0 on inactive axes)
    std::vector<double> lambda;        ///< sum_d (k_d pi / L_d)^2, ascending
    /// Row i is mode i sampled on interior cells in row-major (x fastest) order,
    /// normalised so that vol * sum psi_i^2 = 1.
    Eigen::MatrixXd psi;
    double cell_volume = 0.0;

    [[nodiscard]] int size() const { return static_cast<int>(lambda.size()); }
    /// 3 * size(): coefficient a[alpha * size() + i] multiplies psi_i e_alpha.
    [[nodiscard]] int unknowns() const { return 3 * size(); }
};

/// The n lowest modes, ties broken by wave index. Throws ConfigError when n
/// exceeds the number of modes the grid resolves (k_d <= N_d).
[[nodiscard]] EigenBasis build_basis(int n, const Grid& grid);

/// Discrete eigenvalue of the grid Laplacian for mode i (DirichletZero ghosts).
[[nodiscard]] double discrete_eigenvalue(const EigenBasis& B, const Grid& grid, int i);

/// a = (v, psi_i e_alpha) for every mode and direction.
[[nodiscard]] Eigen::VectorXd modal_transform(const VectorField& v, const EigenBasis& B, const Grid& grid);
/// sum_i a_i psi_i e_alpha, DirichletZero ghosts filled.
[[nodiscard]] VectorField reconstruct(const Eigen::VectorXd& a, const EigenBasis& B, const Grid& grid);

/// n x n block S_ij = integral rho psi_i psi_j.
[[nodiscard]] Eigen::MatrixXd assemble_mass_block(const ScalarField& rho, const EigenBasis& B, const Grid& grid);
/// Full 3n x 3n mass matrix, block diagonal with three copies of the block.
[[nodiscard]] Eigen::MatrixXd assemble_mass(const ScalarField& rho, const EigenBasis& B, const Grid& grid);

/// K = -(psi_i e_a, L_h psi_j e_b) for the grid viscous operator L_h; SPD.
[[nodiscard]] Eigen::MatrixXd assemble_stiffness(const EigenBasis& B, const Grid& grid, const PhysParams& p);

/// Solves (M[rho_new] + dt K) a = M[rho_old] a_old + dt (force, psi)
/// (viscous part explicit, i.e. dt K moved to the right, when !implicit).
/// Throws NumericalError if the system is not positive definite.
[[nodiscard]] Eigen::VectorXd galerkin_momentum_step(const ScalarField& rho_old, const Eigen::VectorXd& a_old,
                                                     const ScalarField& rho_new, const VectorField& force,
                                                     double dt, const EigenBasis& B, const Eigen::MatrixXd& K,
                                                     const Grid& grid, bool implicit = true);

/// ||M^-1[rho1] - M^-1[rho2]||_2 / ||rho1 - rho2||_L1, or 0 when rho1 == rho2.
[[nodiscard]] double lipschitz_probe(const ScalarField& rho1, const ScalarField& rho2, const EigenBasis& B,
                                     const Grid& grid);

/// A priori bound on lipschitz_probe for densities >= eta:
/// eta^-2 * sqrt(sum_ij max_x |psi_i psi_j|^2).
[[nodiscard]] double lipschitz_bound(const EigenBasis& B, double eta);

class GalerkinBackend final : public MomentumBackend {
public:
    GalerkinBackend(const Grid& grid, const PhysParams& p, int n_modes, bool implicit_viscous = true);

    [[nodiscard]] const EigenBasis& basis() const { return basis_; }
    [[nodiscard]] const Eigen::MatrixXd& stiffness() const { return K_; }

    [[nodiscard]] VectorField solve(const State& old_state, const VectorField& u_old, const ScalarField& rho_new,
                                    const VectorField& force, double dt, StepReport& report) const override;

private:
    Grid grid_;
    EigenBasis basis_;
    Eigen::MatrixXd K_;
    bool implicit_;
};

}  // namespace activelc
