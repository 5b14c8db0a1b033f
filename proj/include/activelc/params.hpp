#pragma once

#include <algorithm>

namespace activelc {

/// Physical constants of the coupled system. Elastic constant K and the
/// Landau coefficient k are fixed to 1, as is the pressure prefactor.
struct PhysParams {
    double D0 = 1.0;          ///< concentration diffusivity
    double mu = 1.0;          ///< shear viscosity
    double nu = 1.0;          ///< second viscosity (enters as nu + mu)
    double Gamma = 1.0;       ///< inverse rotational viscosity
    double c_star = 1.0;      ///< critical concentration
    double b = 1.0;
    double sigma_star = 1.0;  ///< activity: >0 contractile, <0 extensile
    double gamma_exp = 2.0;   ///< adiabatic exponent

    /// Throws ConfigError naming the violated constraint.
    void validate() const;
};

/// Regularization constants: artificial viscosity eps*Lap(rho) and
/// artificial pressure delta*rho^beta.
struct RegParams {
    double epsilon = 0.0;
    double delta = 0.0;
    double beta_exp = 13.0;

    void validate() const;

    /// beta > max{6g/(2g-3), g, 4}; required for delta-continuation sweeps.
    [[nodiscard]] static double continuation_beta_threshold(double gamma_exp) {
        return std::max({6.0 * gamma_exp / (2.0 * gamma_exp - 3.0), gamma_exp, 4.0});
    }
};

}  // namespace activelc
