#include "activelc/params.hpp"

#include <cmath>
#include <string>

#include "activelc/errors.hpp"

namespace activelc {

namespace {

void require_positive(double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0)
        throw ConfigError(std::string(name) + " must be a finite positive number (got " +
                          std::to_string(v) + ")");
}

}  // namespace

void PhysParams::validate() const {
    require_positive(D0, "D0");
    require_positive(mu, "mu");
    require_positive(nu, "nu");
    require_positive(Gamma, "Gamma");
    require_positive(c_star, "c_star");
    if (!std::isfinite(b)) throw ConfigError("b must be finite");
    if (!std::isfinite(sigma_star)) throw ConfigError("sigma_star must be finite");
    if (!std::isfinite(gamma_exp) || gamma_exp <= 1.5)
        throw ConfigError("adiabatic exponent below theoretical threshold: gamma must exceed 3/2 (got " +
                          std::to_string(gamma_exp) + ")");
}

void RegParams::validate() const {
    if (!std::isfinite(epsilon) || epsilon < 0.0)
        throw ConfigError("epsilon (artificial viscosity) must be >= 0");
    if (!std::isfinite(delta) || delta < 0.0)
        throw ConfigError("delta (artificial pressure) must be >= 0");
    if (!std::isfinite(beta_exp)) throw ConfigError("beta must be finite");
    if (delta > 0.0 && beta_exp < 4.0)
        throw ConfigError("artificial pressure exponent constraint violated: beta >= 4 is required when delta > 0 (got " +
                          std::to_string(beta_exp) + ")");
}

}  // namespace activelc
