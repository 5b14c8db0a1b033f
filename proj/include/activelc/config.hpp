#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "activelc/diagnostics.hpp"
#include "activelc/grid.hpp"
#include "activelc/initial.hpp"
#include "activelc/integrator.hpp"
#include "activelc/params.hpp"

namespace activelc {

enum class MomentumMode { Grid, Galerkin };

[[nodiscard]] MomentumMode parse_mode(const std::string& name);
[[nodiscard]] std::string to_string(MomentumMode mode);

struct GridSpec {
    int dims = 2;
    std::array<int, 3> cells{32, 32, 1};
    std::array<double, 3> lengths{1.0, 1.0, 1.0};
    std::array<bool, 3> periodic{false, false, false};

    [[nodiscard]] Grid make() const;
};

struct OutputSpec {
    std::string dir = "out";
    int series_every = 1;      ///< CSV row and energy sample every N steps
    int vtk_every = 0;         ///< 0: initial and final snapshots only
    int checkpoint_every = 0;  ///< 0: final checkpoint only
    bool identities = true;    ///< identity residual columns (costly on large grids)
    bool write_files = true;
};

struct RunConfig {
    GridSpec grid;
    PhysParams phys;
    RegParams reg;
    StepControl control;
    double t_final = 1.0;
    double fixed_dt = 0.0;  ///< > 0: constant step instead of the CFL-limited one
    long max_steps = 0;  ///< 0: unlimited
    IcSpec initial;
    double c_lower = 1e-3;
    double c_upper = 1e3;
    OutputSpec output;
    MomentumMode mode = MomentumMode::Grid;
    int galerkin_modes = 64;  ///< scalar eigenmodes of the Galerkin trial space
    MonitorConfig monitor;
    std::vector<double> epsilon_list;
    std::vector<double> delta_list;
    double continuation_k = 2.0;  ///< T_k level of the oscillation proxy
    bool deterministic = false;
    int threads = 0;  ///< 0: hardware concurrency

    /// Parameter constraints; throws ConfigError naming the violated one.
    void validate() const;

    /// Canonical text of every setting that affects the numerical result.
    [[nodiscard]] std::string canonical() const;
    [[nodiscard]] std::uint64_t hash() const;
};

/// Parses an INI document with sections [grid] [physics] [regularization]
/// [control] [run] [initial] [continuation]. Unknown keys are errors.
/// The result is validated, including the initial data it describes.
[[nodiscard]] RunConfig parse_config(std::string_view text);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

/// Strictly descending, positive (zero allowed as the last entry) list; throws ConfigError.
void require_descending(const std::vector<double>& values, std::string_view what);

}  // namespace activelc
