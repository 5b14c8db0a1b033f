#pragma once

#include <functional>
#include <string>
#include <vector>

#include "activelc/grid.hpp"
#include "activelc/params.hpp"
#include "activelc/physics.hpp"
#include "activelc/state.hpp"

namespace activelc {

// ---------------------------------------------------------------------------
// Energy balance

struct EnergyReport {
    double t = 0.0;
    EnergyComponents energy;
    double E = 0.0;

    // Weighted dissipation terms of the energy inequality.
    double diss_c = 0.0;    ///< D0/2 ||grad c||^2
    double diss_u = 0.0;    ///< mu/2 ||grad u||^2
    double diss_div = 0.0;  ///< (nu + mu) ||div u||^2
    double diss_q = 0.0;    ///< Gamma/2 ||Lap Q||^2
    double diss_q6 = 0.0;   ///< c*^2 Gamma/2 ||Q||_6^6
    double dissipation = 0.0;

    // Unweighted norms.
    double grad_c2 = 0.0, grad_u2 = 0.0, div_u2 = 0.0, lap_q2 = 0.0, q6 = 0.0;

    /// ||u||^2 + ||grad Q||^2 + ||Q||^2 + ||Q||_4^4
    double rhs_bound = 0.0;
    double u2 = 0.0, grad_q2 = 0.0, q2 = 0.0, q4 = 0.0;
};

/// Refills ghosts on a copy of s; centred gradients throughout.
[[nodiscard]] EnergyReport energy_report(const State& s, const Grid& grid, const PhysParams& p,
                                         const RegParams& r, double vacuum_floor = 1e-10);

struct EnergyInequality {
    /// Smallest C >= 0 (up to a relative 1e-12 guard) with
    /// (E_{n+1} - E_n)/dt + D_n <= C rhs_n for all n; infinite if no such C.
    double C_hat = 0.0;
    std::vector<double> t;
    std::vector<double> residual;  ///< (E_{n+1} - E_n)/dt + D_n - C_hat rhs_n
    /// Gronwall constants for E(t) <= (E(0) + C1 t) exp(C2 t).
    double C1 = 0.0;
    double C2 = 0.0;
    double max_envelope_ratio = 0.0;  ///< max_n E_n / envelope(t_n)
    [[nodiscard]] bool finite() const;
    [[nodiscard]] bool residual_nonpositive() const;
    [[nodiscard]] bool gronwall_holds() const { return max_envelope_ratio <= 1.0 + 1e-12; }
};

/// Needs at least two reports; throws std::invalid_argument otherwise.
[[nodiscard]] EnergyInequality energy_inequality_residual(const std::vector<EnergyReport>& history);

/// P_delta(rho) - (nu + 2 mu) div u.
[[nodiscard]] ScalarField effective_viscous_flux(const State& s, const Grid& grid, const PhysParams& p,
                                                 const RegParams& r, double vacuum_floor = 1e-10);

// ---------------------------------------------------------------------------
// Cut-off and renormalisation

/// T_k(z) = k T(z/k) with T(y) = y on [0,1], y - (y-1)^2/4 on [1,3], 2 on [3, inf).
/// Throws DomainError for z < 0 or k <= 0.
[[nodiscard]] double cutoff_Tk(double z, double k);
[[nodiscard]] double cutoff_Tk_prime(double z, double k);

/// L_k(z) = z log z for z < k and z log k + z integral_k^z T_k(s)/s^2 ds
/// otherwise; equals beta_k z - 2k for z >= 3k. Satisfies z L_k' - L_k = T_k.
[[nodiscard]] double log_renorm_Lk(double z, double k);
[[nodiscard]] double log_renorm_Lk_prime(double z, double k);
/// log k + (3/2) log 3.
[[nodiscard]] double beta_k(double k);

struct RenormFunction {
    std::function<double(double)> g;
    std::function<double(double)> dg;
    double cutoff = 0.0;  ///< dg(z) = 0 for z >= cutoff

    [[nodiscard]] static RenormFunction constant(double value);
    /// g = T_k, with cutoff 3k.
    [[nodiscard]] static RenormFunction truncation(double k);
    /// g(z) = z^2 (no cutoff; for convergence studies).
    [[nodiscard]] static RenormFunction square();

    /// Samples [cutoff, 10 cutoff] and checks dg == 0 there.
    [[nodiscard]] bool cutoff_respected(int samples = 1000) const;
};

/// L1 norm of (g(rho1) - g(rho0))/dt + div(g(rho0) u0) + (g'(rho0) rho0 - g(rho0)) div u0,
/// with centred differences at the old time level. Ghosts of prev are refilled.
[[nodiscard]] double renormalized_residual(const State& prev, const State& next, double dt,
                                           const RenormFunction& g, const Grid& grid,
                                           double vacuum_floor = 1e-10);
/// Same, with rho and u given directly (ghosts must be filled).
[[nodiscard]] double renormalized_residual(const ScalarField& rho0, const ScalarField& rho1,
                                           const VectorField& u0, double dt, const RenormFunction& g,
                                           const Grid& grid);

// ---------------------------------------------------------------------------
// Identity residuals

/// |tr((W Q - Q W)(Q + c* Q trQ^2))| for one tensor pair; zero in exact arithmetic.
[[nodiscard]] double pointwise_skew_residual(const QTensor& Q, const SkewTensor& W, double c_star);

/// Omega = (grad u - grad u^T)/2 per cell from centred differences.
[[nodiscard]] std::array<ScalarField, 3> vorticity_tensor(const VectorField& u, const Grid& grid);

/// |(W Q' - Q' W, Lap Q) - (div(Q' Lap Q - Lap Q Q'), u)| with Q' = Qp + iso I.
/// Uses the ghosts of Qp, Q and u as given; the antisymmetric stress gets
/// NeumannZero ghosts.
[[nodiscard]] double lemma_a1_residual(const QField& Qp, const QField& Q, const VectorField& u,
                                       const Grid& grid, double iso = 0.0);

struct IdentityResiduals {
    double lemmaA1 = 0.0;
    double pointwise_skew = 0.0;
};

/// Both residuals on the state (Q' = Q), with boundary-condition ghosts.
[[nodiscard]] IdentityResiduals identity_residuals(const State& s, const Grid& grid, const PhysParams& p,
                                                   double vacuum_floor = 1e-10);

/// (f_tau + f_rot, u) - ((u.grad)Q, W) + (Q Omega - Omega Q, W) with
/// W = Lap Q - Q - c* Q trQ^2 and centred advection; vanishes in the
/// continuum for conforming boundary data.
[[nodiscard]] double transport_cancellation_residual(const State& s, const Grid& grid, const PhysParams& p,
                                                     double vacuum_floor = 1e-10);

// ---------------------------------------------------------------------------
// Monitors

struct MonitorConfig {
    double c_tolerance = 1e-8;
    double mass_tolerance = 1e-10;
    double envelope_slack = 0.05;  ///< fraction of the initial minimum density
    double theta = -1.0;           ///< < 0: 0.9 min{1/4, 2 gamma/3 - 1}
};

[[nodiscard]] double default_theta(double gamma_exp);

struct InvariantReport {
    double t = 0.0;
    double c_min = 0.0, c_max = 0.0, c_violation = 0.0;
    bool c_ok = true;
    double mass = 0.0, mass_drift = 0.0;
    bool mass_ok = true;
    double rho_min = 0.0;
    bool rho_positive = true;
    double envelope = 0.0;           ///< rho_min(0) exp(-int ||div u||_inf)
    bool envelope_ok = true;         ///< soft
    double trace_drift = 0.0;        ///< max |tr Q| + max |Q - Q^T|
    bool trace_ok = true;
    double theta = 0.0;
    double rho_gamma_theta = 0.0;    ///< integral rho^(gamma + theta)
    double q_L10 = 0.0;
    double grad_q_L10_3 = 0.0;
    double delta_rho_beta = 0.0;     ///< delta integral rho^beta

    /// Hard monitors: positivity and trace. Messages for each failure.
    [[nodiscard]] std::vector<std::string> hard_violations() const;
    /// Soft monitors: c range, mass, envelope.
    [[nodiscard]] std::vector<std::string> soft_violations() const;
};

/// Tracks the running integral of ||div u||_inf against the initial state.
class InvariantMonitor {
public:
    InvariantMonitor(const State& s0, const Grid& grid, const PhysParams& p, const RegParams& r,
                     MonitorConfig cfg = {}, double vacuum_floor = 1e-10);

    /// Call once per completed step with the new state and the step size.
    /// Without `integrability` the norms rho_gamma_theta, q_L10 and
    /// grad_q_L10_3 are left at zero.
    InvariantReport update(const State& s, double dt, bool integrability = true);
    /// Report without advancing the integral.
    [[nodiscard]] InvariantReport evaluate(const State& s, bool integrability = true) const;

    [[nodiscard]] double div_integral() const { return div_integral_; }

private:
    [[nodiscard]] double div_inf(const State& s) const;

    Grid grid_;
    PhysParams p_;
    RegParams r_;
    MonitorConfig cfg_;
    double floor_;
    double c_lo_, c_hi_, mass0_, rho_min0_;
    double div_integral_ = 0.0;
    double last_div_ = 0.0;
};

/// || T_k(rho1) - T_k(rho2) ||_{L^{gamma+1}}, the oscillation proxy between
/// successive continuation runs.
[[nodiscard]] double truncation_distance(const ScalarField& rho1, const ScalarField& rho2, double k,
                                         double gamma_exp, const Grid& grid);

}  // namespace activelc
