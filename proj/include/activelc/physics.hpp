#pragma once

// Continuum terms of the coupled system: molecular field, free energies,
// pressure and the elastic/rotational/active force densities. K = k = 1.

#include <array>

#include "activelc/grid.hpp"
#include "activelc/params.hpp"
#include "activelc/state.hpp"

namespace activelc {

/// H = Lap Q + bulk_field(Q, c). Q ghosts must be filled.
[[nodiscard]] QField molecular_field(const QField& Q, const ScalarField& c, const Grid& grid,
                                     const PhysParams& p);

/// Face-difference gradient energy sum_faces |dQ|^2 (Frobenius), the
/// discrete counterpart of integral |grad Q|^2. Ghosts must be filled.
[[nodiscard]] double q_face_gradient_norm2(const QField& Q, const Grid& grid);

/// Landau-de Gennes energy
/// integral (c - c*)/4 trQ^2 - b/3 trQ^3 + c*/4 (trQ^2)^2 + 1/2 |grad Q|^2,
/// with the gradient part taken from q_face_gradient_norm2 so that
/// molecular_field is exactly its negative variation.
[[nodiscard]] double free_energy(const QField& Q, const ScalarField& c, const Grid& grid,
                                 const PhysParams& p);

/// Centred derivatives dQ/dx_a for each axis (zero on inactive axes).
[[nodiscard]] std::array<QField, 3> q_gradient(const QField& Q, const Grid& grid);

/// F(Q) = 1/2 |grad Q|^2 + 1/2 trQ^2 + c*/4 (trQ^2)^2 per cell, gradients
/// centred.
[[nodiscard]] ScalarField capital_F(const QField& Q, const Grid& grid, const PhysParams& p);

struct EnergyComponents {
    double concentration = 0.0;   ///< 1/2 c^2
    double kinetic = 0.0;         ///< 1/2 rho |u|^2
    double pressure = 0.0;        ///< rho^gamma / (gamma - 1)
    double artificial = 0.0;      ///< delta rho^beta / (beta - 1)
    double q_bulk = 0.0;          ///< 1/2 |Q|^2 + c*/4 |Q|^4
    double q_elastic = 0.0;       ///< 1/2 |grad Q|^2 (face form)
    [[nodiscard]] double total() const {
        return concentration + kinetic + pressure + artificial + q_bulk + q_elastic;
    }
};

/// Ghosts of s.Q must be filled.
[[nodiscard]] EnergyComponents total_energy(const State& s, const Grid& grid, const PhysParams& p,
                                            const RegParams& r, double vacuum_floor = 1e-10);

struct Forces {
    VectorField f_tau;  ///< div(F(Q) I - grad Q . grad Q)
    VectorField f_rot;  ///< div(Q Lap Q - Lap Q Q)
    VectorField f_act;  ///< sigma* div(c^2 Q)
};

/// Force densities from (Q, c). Ghosts of Q and c must be filled; the
/// intermediate stresses get NeumannZero ghosts.
[[nodiscard]] Forces stress_forces(const State& s, const Grid& grid, const PhysParams& p);

/// rho^gamma + delta rho^beta. Throws DomainError for negative rho.
[[nodiscard]] double pressure(double rho, const PhysParams& p, const RegParams& r);
/// Pointwise over every stored value, ghosts included.
[[nodiscard]] ScalarField pressure(const ScalarField& rho, const PhysParams& p, const RegParams& r);
/// dP/drho.
[[nodiscard]] double sound_speed2(double rho, const PhysParams& p, const RegParams& r);

/// max over cells of |sigma + sigma^T| for sigma = Q H - H Q.
[[nodiscard]] double rotational_stress_symmetry_defect(const QField& Q, const ScalarField& c,
                                                       const Grid& grid, const PhysParams& p);

}  // namespace activelc
