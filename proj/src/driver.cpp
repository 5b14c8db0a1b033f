#include "activelc/driver.hpp"

#include <cmath>
#include <fmt/format.h>
#include <json.hpp>
#include <memory>
#include <optional>

#include "activelc/errors.hpp"
#include "activelc/galerkin.hpp"
#include "activelc/initial.hpp"
#include "activelc/integrator.hpp"
#include "activelc/io.hpp"
#include "activelc/parallel.hpp"

namespace activelc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Output side of a run; inert when files are disabled.
class RunOutput {
public:
    RunOutput(const RunConfig& cfg, const Grid& grid)
        : cfg_(cfg), grid_(grid), dir_(cfg.output.dir), enabled_(cfg.output.write_files) {
        if (enabled_) series_.emplace(dir_ / "series.csv");
    }

    void row(const SeriesRow& r) {
        if (series_) series_->write(r);
    }

    void snapshot(std::uint64_t step, const State& s) {
        if (enabled_) (void)write_snapshot(dir_ / "vtk", step, s, grid_, cfg_.control.vacuum_floor);
    }

    void checkpoint(const std::string& name, std::uint64_t step, const State& s) {
        if (enabled_) write_checkpoint(dir_ / name, s, grid_, cfg_.hash(), step);
    }

    void summary(const RunSummary& sum) {
        if (!enabled_) return;
        if (series_) series_->flush();
        write_text(dir_ / "summary.json", to_json(sum));
    }

private:
    const RunConfig& cfg_;
    const Grid& grid_;
    fs::path dir_;
    bool enabled_;
    std::optional<SeriesWriter> series_;
};

bool dissipation_nonnegative(const EnergyReport& e) {
    return e.diss_c >= 0.0 && e.diss_u >= 0.0 && e.diss_div >= 0.0 && e.diss_q >= 0.0 && e.diss_q6 >= 0.0;
}

double l2_distance(const ScalarField& a, const ScalarField& b, const Grid& grid) {
    ScalarField d(grid.layout());
    for (std::size_t i = 0; i < d.size(); ++i) d.data()[i] = a.data()[i] - b.data()[i];
    return std::sqrt(inner(d, d, grid));
}

}  // namespace

int RunSummary::exit_code() const {
    if (status == "ok") return 0;
    if (status == "config_error") return 2;
    if (status == "numerical_error") return 3;
    return 4;
}

void apply_parallel_settings(const RunConfig& cfg) {
    if (cfg.threads > 0) parallel::set_num_threads(cfg.threads);
    parallel::set_reduction_mode(cfg.deterministic ? parallel::ReductionMode::Deterministic
                                                   : parallel::ReductionMode::PerThread);
}

RunSummary run(const RunConfig& cfg, const RunHooks& hooks) {
    cfg.validate();
    const Grid grid = cfg.grid.make();
    State s0 = make_initial_state(cfg.initial, grid, cfg.phys);
    validate_initial_state(s0, grid, cfg.c_lower, cfg.c_upper);
    return run_from(cfg, std::move(s0), 0, hooks);
}

RunSummary run_from(const RunConfig& cfg, State s, std::uint64_t first_step, const RunHooks& hooks) {
    cfg.validate();
    apply_parallel_settings(cfg);
    const Grid grid = cfg.grid.make();
    const double floor = cfg.control.vacuum_floor;
    fill_state_ghosts(s, grid);

    std::unique_ptr<GalerkinBackend> backend;
    if (cfg.mode == MomentumMode::Galerkin)
        backend = std::make_unique<GalerkinBackend>(grid, cfg.phys, cfg.galerkin_modes);
    StepOptions opts;
    opts.backend = backend.get();

    RunSummary sum;
    sum.config_hash = cfg.hash();
    RunOutput out(cfg, grid);
    InvariantMonitor monitor(s, grid, cfg.phys, cfg.reg, cfg.monitor, floor);
    std::uint64_t step_no = first_step;

    auto sample = [&](double dt, const InvariantReport& inv, const StepReport& rep) {
        sum.history.push_back(energy_report(s, grid, cfg.phys, cfg.reg, floor));
        if (!dissipation_nonnegative(sum.history.back())) sum.dissipation_nonnegative = false;
        SeriesRow row;
        row.step = step_no;
        row.dt = dt;
        row.energy = sum.history.back();
        row.monitors = inv;
        row.div_integral = monitor.div_integral();
        if (cfg.output.identities) row.identities = identity_residuals(s, grid, cfg.phys, floor);
        row.step_report = rep;
        out.row(row);
    };
    auto track = [&](const InvariantReport& inv) {
        sum.max_c_violation = std::max(sum.max_c_violation, inv.c_violation);
        sum.max_mass_drift = std::max(sum.max_mass_drift, inv.mass_drift);
        sum.max_trace_drift = std::max(sum.max_trace_drift, inv.trace_drift);
        sum.min_rho = std::min(sum.min_rho, inv.rho_min);
        for (const auto& msg : inv.soft_violations()) {
            const auto key = msg.substr(0, msg.find(' ', msg.find(' ') + 1));
            bool seen = false;
            for (const auto& f : sum.soft_flags) seen = seen || f.rfind(key, 0) == 0;
            if (!seen) sum.soft_flags.push_back(fmt::format("{} (t = {:.6g})", msg, inv.t));
        }
    };
    auto finish = [&](const InvariantReport& inv) {
        sum.steps = step_no - first_step;
        sum.t = s.t;
        sum.final_monitors = inv;
        sum.E0 = sum.history.front().E;
        sum.E_final = sum.history.back().E;
        if (sum.history.size() >= 2) sum.energy = energy_inequality_residual(sum.history);
        sum.final_state = s;
    };
    auto fail = [&](const char* status, const std::string& what) {
        sum.status = status;
        sum.message = what;
        finish(monitor.evaluate(s));
        out.checkpoint("failure.ckpt", step_no, s);
        out.summary(sum);
    };

    InvariantReport inv = monitor.evaluate(s);
    sum.min_rho = inv.rho_min;
    track(inv);
    sample(0.0, inv, StepReport{});
    out.snapshot(step_no, s);

    const double t_end = cfg.t_final;
    const double t_eps = 1e-12 * std::max(1.0, std::abs(t_end));
    while (s.t < t_end - t_eps && (cfg.max_steps == 0 || static_cast<long>(step_no - first_step) < cfg.max_steps)) {
        StepReport rep;
        double dt = 0.0;
        try {
            dt = std::min(cfg.fixed_dt > 0.0 ? cfg.fixed_dt : cfl_dt(s, grid, cfg.phys, cfg.reg, cfg.control), t_end - s.t);
            rep = step(s, grid, cfg.phys, cfg.reg, cfg.control, dt, opts);
        } catch (const NumericalError& e) {
            fail("numerical_error", e.what());
            throw;
        }
        ++step_no;
        const bool last = !(s.t < t_end - t_eps) || (cfg.max_steps != 0 && static_cast<long>(step_no - first_step) >= cfg.max_steps);
        const bool sampled = (step_no - first_step) % static_cast<std::uint64_t>(cfg.output.series_every) == 0 || last;
        inv = monitor.update(s, dt, sampled);
        track(inv);
        sum.delta_rho_beta_time_integral += dt * inv.delta_rho_beta;
        auto hard = inv.hard_violations();
        if (rep.density_clamped)
            hard.push_back(fmt::format("negative density {:.6e} clamped at step {}", rep.density_min_before_clamp, step_no));
        if (!hard.empty()) {
            std::string msg = hard.front();
            for (std::size_t i = 1; i < hard.size(); ++i) msg += "; " + hard[i];
            fail("monitor_violation", msg);
            throw MonitorViolation(msg);
        }
        if (sampled) sample(dt, inv, rep);
        if (cfg.output.vtk_every > 0 && step_no % static_cast<std::uint64_t>(cfg.output.vtk_every) == 0 && !last)
            out.snapshot(step_no, s);
        if (cfg.output.checkpoint_every > 0 && step_no % static_cast<std::uint64_t>(cfg.output.checkpoint_every) == 0)
            out.checkpoint(fmt::format("checkpoint_{:06d}.ckpt", step_no), step_no, s);
        if (hooks.on_step) hooks.on_step(s, rep);
    }

    finish(inv);
    if (step_no > first_step) out.snapshot(step_no, s);
    out.checkpoint("final.ckpt", step_no, s);
    out.summary(sum);
    return sum;
}

ContinuationReport run_continuation(const RunConfig& cfg, ContinuationKind kind) {
    cfg.validate();
    ContinuationReport rep;
    rep.kind = kind;
    rep.values = kind == ContinuationKind::Epsilon ? cfg.epsilon_list : cfg.delta_list;
    const char* label = kind == ContinuationKind::Epsilon ? "eps" : "delta";
    if (rep.values.empty())
        throw ConfigError(fmt::format("[continuation] {} list is empty", kind == ContinuationKind::Epsilon ? "epsilon" : "delta"));
    const Grid grid = cfg.grid.make();
    for (std::size_t i = 0; i < rep.values.size(); ++i) {
        RunConfig ci = cfg;
        (kind == ContinuationKind::Epsilon ? ci.reg.epsilon : ci.reg.delta) = rep.values[i];
        ci.output.dir = (fs::path(cfg.output.dir) / fmt::format("{}_{}", label, i)).string();
        rep.runs.push_back(run(ci));
        rep.delta_rho_beta.push_back(rep.runs.back().delta_rho_beta_time_integral);
    }
    for (std::size_t i = 0; i + 1 < rep.runs.size(); ++i) {
        const auto& a = rep.runs[i].final_state.rho;
        const auto& b = rep.runs[i + 1].final_state.rho;
        rep.l2_distances.push_back(l2_distance(a, b, grid));
        rep.truncation_distances.push_back(truncation_distance(a, b, cfg.continuation_k, cfg.phys.gamma_exp, grid));
    }
    for (std::size_t i = 1; i < rep.l2_distances.size(); ++i)
        if (!(rep.l2_distances[i] < rep.l2_distances[i - 1])) {
            rep.cauchy_decreasing = false;
            rep.flags.push_back(fmt::format("density distances not strictly decreasing at pair {}: {:.6e} >= {:.6e}", i,
                                            rep.l2_distances[i], rep.l2_distances[i - 1]));
        }
    if (cfg.output.write_files) {
        std::string csv = "index,value,E_final,C_hat,delta_rho_beta,l2_to_next,tk_to_next\n";
        for (std::size_t i = 0; i < rep.runs.size(); ++i) {
            const bool has_next = i < rep.l2_distances.size();
            csv += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{},{}\n", i, rep.values[i], rep.runs[i].E_final,
                               rep.runs[i].energy.C_hat, rep.delta_rho_beta[i],
                               has_next ? fmt::format("{:.17g}", rep.l2_distances[i]) : "",
                               has_next ? fmt::format("{:.17g}", rep.truncation_distances[i]) : "");
        }
        write_text(fs::path(cfg.output.dir) / "continuation.csv", csv);
        write_text(fs::path(cfg.output.dir) / "continuation.json", to_json(rep));
    }
    return rep;
}

namespace {

json summary_json(const RunSummary& s) {
    const auto& m = s.final_monitors;
    json j;
    j["status"] = s.status;
    j["message"] = s.message;
    j["config_hash"] = fmt::format("{:016x}", s.config_hash);
    j["steps"] = s.steps;
    j["t"] = s.t;
    j["E0"] = s.E0;
    j["E_final"] = s.E_final;
    j["energy_inequality"] = {{"C_hat", std::isfinite(s.energy.C_hat) ? json(s.energy.C_hat) : json("inf")},
                              {"C1", s.energy.C1},
                              {"C2", std::isfinite(s.energy.C2) ? json(s.energy.C2) : json("inf")},
                              {"residual_nonpositive", s.energy.residual_nonpositive()},
                              {"gronwall_holds", s.energy.gronwall_holds()},
                              {"max_envelope_ratio", s.energy.max_envelope_ratio},
                              {"dissipation_nonnegative", s.dissipation_nonnegative}};
    j["monitors"] = {{"max_c_violation", s.max_c_violation},
                     {"max_mass_drift", s.max_mass_drift},
                     {"max_trace_drift", s.max_trace_drift},
                     {"min_rho", s.min_rho},
                     {"final_envelope", m.envelope},
                     {"theta", m.theta},
                     {"rho_gamma_theta", m.rho_gamma_theta},
                     {"q_L10", m.q_L10},
                     {"grad_q_L10_3", m.grad_q_L10_3},
                     {"delta_rho_beta_time_integral", s.delta_rho_beta_time_integral},
                     {"soft_flags", s.soft_flags}};
    return j;
}

}  // namespace

std::string to_json(const RunSummary& s) { return summary_json(s).dump(2) + "\n"; }

std::string to_json(const ContinuationReport& r) {
    json j;
    j["kind"] = r.kind == ContinuationKind::Epsilon ? "epsilon" : "delta";
    j["values"] = r.values;
    j["l2_distances"] = r.l2_distances;
    j["truncation_distances"] = r.truncation_distances;
    j["delta_rho_beta"] = r.delta_rho_beta;
    j["cauchy_decreasing"] = r.cauchy_decreasing;
    j["flags"] = r.flags;
    j["runs"] = json::array();
    for (const auto& s : r.runs) j["runs"].push_back(summary_json(s));
    return j.dump(2) + "\n";
}

}  // namespace activelc
