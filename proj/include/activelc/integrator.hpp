#pragma once

// Operator-split semi-implicit time stepping of the regularised system.
// One step advances c -> Q -> rho -> m, each sub-step using the freshest
// fields. Advection, co-rotation, pressure and stresses are explicit; all
// Laplacians are backward Euler via conjugate gradients.

#include <string>
#include <vector>

#include "activelc/grid.hpp"
#include "activelc/linear_solver.hpp"
#include "activelc/params.hpp"
#include "activelc/state.hpp"

namespace activelc {

struct StepControl {
    double cfl = 0.4;                 ///< in (0, 1]
    double dt_max = 1e-2;
    AdvectionScheme advection = AdvectionScheme::Upwind;
    bool implicit_diffusion = true;
    double vacuum_floor = 1e-10;
    /// Include the sound speed in the advective bound (pressure is explicit).
    bool acoustic_bound = true;
    /// Reject steps larger than the cfl = 1 advective limit.
    bool check_stability = true;
    CgOptions cg{};

    void validate() const;
};

struct StepReport {
    double dt = 0.0;
    int cg_concentration = 0;
    int cg_q = 0;
    int cg_density = 0;
    int cg_momentum = 0;
    bool density_clamped = false;
    double density_min_before_clamp = 0.0;
    std::vector<std::string> flags;
};

/// Solves for the new velocity given the explicit momentum forcing f, i.e.
/// the discrete form of rho^{n+1} u^{n+1} - dt L u^{n+1} = m^n + dt f.
class MomentumBackend {
public:
    virtual ~MomentumBackend() = default;
    [[nodiscard]] virtual VectorField solve(const State& old_state, const VectorField& u_old,
                                            const ScalarField& rho_new, const VectorField& force,
                                            double dt, StepReport& report) const = 0;
};

struct StepOptions {
    const MomentumBackend* backend = nullptr;   ///< nullptr: grid solve
    const ScalarField* c_source = nullptr;      ///< added to dc/dt at t^{n+1}
};

/// Largest stable step for cfl = 1: 1 / max_cells sum_d (|u_d| + c_s) / h_d
/// (c_s omitted unless ctl.acoustic_bound). Infinite for a state at rest
/// without the acoustic bound.
[[nodiscard]] double advective_limit(const State& s, const Grid& grid, const PhysParams& p,
                                     const RegParams& r, const StepControl& ctl);

/// cfl * min(advective, explicit diffusive bounds), capped at dt_max.
[[nodiscard]] double cfl_dt(const State& s, const Grid& grid, const PhysParams& p,
                            const RegParams& r, const StepControl& ctl);

/// c^{n+1}: explicit advection then (I - dt D0 Lap) c^{n+1} = c*.
[[nodiscard]] ScalarField step_concentration(const State& s, const VectorField& u, const Grid& grid,
                                             const PhysParams& p, const StepControl& ctl, double dt,
                                             StepReport& report, const ScalarField* source = nullptr);

/// Q^{n+1} from Q* = Q + dt(-(u.grad)Q - (Q Omega - Omega Q) + Gamma bulk(Q, c_new)),
/// then (I - dt Gamma Lap) Q^{n+1} = Q* per component.
[[nodiscard]] QField step_q(const State& s, const ScalarField& c_new, const VectorField& u,
                            const Grid& grid, const PhysParams& p, const StepControl& ctl, double dt,
                            StepReport& report);

/// rho^{n+1} in flux form, then (I - dt eps Lap) with the total mass
/// restored exactly. Negative values are clamped to 0 and flagged.
[[nodiscard]] ScalarField step_density(const State& s, const VectorField& u, const Grid& grid,
                                       const RegParams& r, const StepControl& ctl, double dt,
                                       StepReport& report);

/// Explicit momentum forcing
/// -div(m (x) u) - grad P(rho_new) - eps (grad rho_new . grad) u + f_tau + f_rot + f_act,
/// with the stresses evaluated on (Q_new, c_new).
[[nodiscard]] VectorField momentum_forcing(const State& s, const VectorField& u,
                                           const ScalarField& rho_new, const ScalarField& c_new,
                                           const QField& Q_new, const Grid& grid, const PhysParams& p,
                                           const RegParams& r, const StepControl& ctl);

/// Grid backend: (diag(rho_new) - dt L_h) u^{n+1} = m^n + dt f.
[[nodiscard]] VectorField solve_momentum_grid(const State& s, const VectorField& u_old,
                                              const ScalarField& rho_new, const VectorField& force,
                                              const Grid& grid, const PhysParams& p,
                                              const StepControl& ctl, double dt, StepReport& report);

/// New momentum m^{n+1} = rho^{n+1} u^{n+1} (grid backend unless opts says otherwise).
[[nodiscard]] VectorField step_momentum(const State& s, const VectorField& u,
                                        const ScalarField& rho_new, const ScalarField& c_new,
                                        const QField& Q_new, const Grid& grid, const PhysParams& p,
                                        const RegParams& r, const StepControl& ctl, double dt,
                                        StepReport& report, const StepOptions& opts = {});

/// Full step in place. Throws NumericalError on CFL violation, solver
/// failure or non-finite values. dt == 0 leaves the state untouched.
StepReport step(State& s, const Grid& grid, const PhysParams& p, const RegParams& r,
                const StepControl& ctl, double dt, const StepOptions& opts = {});

}  // namespace activelc
