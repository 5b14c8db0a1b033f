#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "activelc/config.hpp"
#include "activelc/diagnostics.hpp"
#include "activelc/state.hpp"

namespace activelc {

struct RunSummary {
    std::string status = "ok";  ///< ok | config_error | numerical_error | monitor_violation
    std::string message;
    std::uint64_t steps = 0;
    double t = 0.0;
    double E0 = 0.0;
    double E_final = 0.0;
    EnergyInequality energy;
    bool dissipation_nonnegative = true;
    InvariantReport final_monitors;
    double max_c_violation = 0.0;
    double max_mass_drift = 0.0;
    double max_trace_drift = 0.0;
    double min_rho = 0.0;
    std::vector<std::string> soft_flags;   ///< first occurrence of each soft monitor failure
    double delta_rho_beta_time_integral = 0.0;  ///< sum over steps of dt * delta integral rho^beta
    std::vector<EnergyReport> history;
    State final_state;
    std::uint64_t config_hash = 0;

    [[nodiscard]] int exit_code() const;
};

struct RunHooks {
    /// Called after each completed step with the new state.
    std::function<void(const State&, const StepReport&)> on_step;
};

/// Applies the config's thread count and reduction mode to the process-wide pool.
void apply_parallel_settings(const RunConfig& cfg);

/// Time loop to t_final (or max_steps) with cadenced CSV rows, VTK snapshots
/// and checkpoints under cfg.output.dir, plus summary.json at the end.
/// Numerical failures and hard monitor violations write failure.ckpt and
/// rethrow (NumericalError / MonitorViolation).
RunSummary run(const RunConfig& cfg, const RunHooks& hooks = {});

/// Same as run, but starting from a given state (restart).
RunSummary run_from(const RunConfig& cfg, State initial, std::uint64_t first_step = 0, const RunHooks& hooks = {});

enum class ContinuationKind { Epsilon, Delta };

struct ContinuationReport {
    ContinuationKind kind = ContinuationKind::Epsilon;
    std::vector<double> values;
    std::vector<RunSummary> runs;
    std::vector<double> l2_distances;          ///< ||rho_i - rho_{i+1}||_L2 of the final states
    std::vector<double> truncation_distances;  ///< ||T_k(rho_i) - T_k(rho_{i+1})||_{L^{gamma+1}}
    std::vector<double> delta_rho_beta;        ///< time-integrated delta integral rho^beta per run
    bool cauchy_decreasing = true;             ///< l2_distances strictly decreasing
    std::vector<std::string> flags;
};

/// Runs the sweep over cfg.epsilon_list or cfg.delta_list (descending), each
/// run in <out>/<eps|delta>_<i>, and writes continuation.csv / .json.
ContinuationReport run_continuation(const RunConfig& cfg, ContinuationKind kind);

[[nodiscard]] std::string to_json(const RunSummary& s);
[[nodiscard]] std::string to_json(const ContinuationReport& r);

}  // namespace activelc
