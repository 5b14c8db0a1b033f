#pragma once

// File formats: legacy VTK structured points (ASCII, one file per field),
// CSV time series with a fixed column schema, and a little-endian binary
// checkpoint carrying grid metadata and the config hash.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "activelc/diagnostics.hpp"
#include "activelc/errors.hpp"
#include "activelc/grid.hpp"
#include "activelc/integrator.hpp"
#include "activelc/state.hpp"

namespace activelc {

/// Checkpoint format or config hash does not match the reader's expectation.
class VersionError : public IoError {
public:
    using IoError::IoError;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

[[nodiscard]] std::uint64_t fnv1a64(std::string_view bytes);

/// Writes every stored value (ghosts included) so restore is bit-exact.
void write_checkpoint(const std::filesystem::path& path, const State& s, const Grid& grid,
                      std::uint64_t config_hash, std::uint64_t step = 0);

struct RestoredCheckpoint {
    State state;
    std::uint64_t step = 0;
    std::uint64_t config_hash = 0;
};

/// Throws VersionError on a bad magic, unknown version, different grid or,
/// when expected_hash is given, a different config hash.
[[nodiscard]] RestoredCheckpoint read_checkpoint(const std::filesystem::path& path, const Grid& grid,
                                                 std::optional<std::uint64_t> expected_hash = std::nullopt);

/// One scalar field as a legacy VTK STRUCTURED_POINTS file; values in %.17g.
void write_vtk(const std::filesystem::path& path, std::string_view name, const ScalarField& f, const Grid& grid);

/// Files <dir>/<field>_<step>.vtk for c, rho, u_x, u_y, u_z and the five Q
/// components. Returns the paths written.
std::vector<std::filesystem::path> write_snapshot(const std::filesystem::path& dir, std::uint64_t step,
                                                  const State& s, const Grid& grid, double vacuum_floor);

/// Column schema of the time-series CSV.
inline constexpr std::string_view kSeriesHeader =
    "step,t,dt,E,E_concentration,E_kinetic,E_pressure,E_artificial,E_q_bulk,E_q_elastic,"
    "D_c,D_u,D_div,D_q,D_q6,rhs_bound,c_min,c_max,c_violation,mass,mass_drift,rho_min,envelope,"
    "div_integral,trace_drift,rho_gamma_theta,q_L10,grad_q_L10_3,delta_rho_beta,lemmaA1,"
    "pointwise_skew,cg_c,cg_q,cg_rho,cg_m";

struct SeriesRow {
    std::uint64_t step = 0;
    double dt = 0.0;
    EnergyReport energy;
    InvariantReport monitors;
    double div_integral = 0.0;
    IdentityResiduals identities;
    StepReport step_report;
};

class SeriesWriter {
public:
    /// Creates the file and writes the header.
    explicit SeriesWriter(const std::filesystem::path& path);
    void write(const SeriesRow& row);
    void flush();

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

/// Formats a row exactly as SeriesWriter does (no trailing newline).
[[nodiscard]] std::string format_series_row(const SeriesRow& row);

/// Writes text to a file, replacing it. Throws IoError with the path.
void write_text(const std::filesystem::path& path, std::string_view text);
[[nodiscard]] std::string read_text(const std::filesystem::path& path);

}  // namespace activelc
