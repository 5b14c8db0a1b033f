#pragma once

#include <cstdint>
#include <string>

#include "activelc/grid.hpp"
#include "activelc/params.hpp"
#include "activelc/state.hpp"

namespace activelc {

enum class IcPreset { Quiescent, RandomSmooth, Manufactured, File };

[[nodiscard]] IcPreset parse_ic_preset(const std::string& name);
[[nodiscard]] std::string to_string(IcPreset preset);

struct IcSpec {
    IcPreset preset = IcPreset::Quiescent;
    std::uint64_t seed = 0;
    double u_amplitude = 0.1;  ///< max |u| of the random-smooth preset
    double q_amplitude = 0.1;  ///< max |Q_ab| of the random-smooth preset
    std::string path;          ///< checkpoint file for the File preset
};

/// c = c*, rho = 1, m = 0, Q = 0.
[[nodiscard]] State quiescent_state(const Grid& grid, const PhysParams& p);

/// Low-pass seeded noise (modes |k_d| <= 3 weighted by 1/(1 + |k|^2)),
/// rescaled to c in [0.5, 1.5] c*, rho in [0.5, 1.5], max |u| = u_amplitude
/// and max |Q_ab| = q_amplitude. u uses sine modes on wall axes so it vanishes
/// there; in 2D u_z = Q13 = Q23 = 0.
[[nodiscard]] State random_smooth_state(const Grid& grid, const PhysParams& p, std::uint64_t seed,
                                        double u_amplitude = 0.1, double q_amplitude = 0.1);

/// Fixed smooth profile with wall-compatible velocity bubble and cosine modes
/// for c, rho and Q.
[[nodiscard]] State manufactured_state(const Grid& grid, const PhysParams& p);

/// Builds the preset; File reads a checkpoint with matching grid, ignoring its config hash.
[[nodiscard]] State make_initial_state(const IcSpec& spec, const Grid& grid, const PhysParams& p);

/// Compatibility of initial data: finite values, rho >= 0, m = 0 where
/// rho = 0, finite kinetic energy and c_lower <= c <= c_upper. Throws ConfigError.
void validate_initial_state(const State& s, const Grid& grid, double c_lower, double c_upper);

}  // namespace activelc
