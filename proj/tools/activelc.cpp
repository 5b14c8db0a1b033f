// Command-line front end: single runs, epsilon/delta continuation sweeps and
// the acceptance suite. Exit codes: 0 ok, 2 bad configuration, 3 numerical
// failure, 4 monitor violation or failed verification.

#include <CLI11.hpp>
#include <cstdlib>
#include <fmt/format.h>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "activelc/driver.hpp"
#include "activelc/errors.hpp"
#include "activelc/verify.hpp"

namespace {

using namespace activelc;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitMonitor = 4;

struct Overrides {
    std::string config;
    std::optional<std::string> out;
    std::optional<unsigned long long> seed;
    std::optional<std::string> mode;
    std::optional<int> dims;
    std::optional<double> t_final;
    std::optional<int> threads;
    bool deterministic = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("-c,--config", o.config, "INI configuration file (defaults when omitted)");
    cmd->add_option("-o,--out", o.out, "output directory");
    cmd->add_option("--seed", o.seed, "seed of the random-smooth initial data");
    cmd->add_option("--mode", o.mode, "momentum backend")->check(CLI::IsMember({"grid", "galerkin"}));
    cmd->add_option("--dim", o.dims, "spatial dimension")->check(CLI::IsMember({2, 3}));
    cmd->add_option("--tfinal", o.t_final, "final time");
    cmd->add_option("--threads", o.threads, "worker threads (0: all cores)");
    cmd->add_flag("--deterministic", o.deterministic, "fixed-order reductions, bitwise reproducible");
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw ConfigError(fmt::format("malformed number '{}' in list '{}'", item, text));
        }
    }
    if (values.empty()) throw ConfigError("empty parameter list");
    return values;
}

RunConfig build_config(const Overrides& o) {
    RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
    if (o.out) cfg.output.dir = *o.out;
    if (o.seed) cfg.initial.seed = *o.seed;
    if (o.mode) cfg.mode = parse_mode(*o.mode);
    if (o.dims) {
        cfg.grid.dims = *o.dims;
        if (*o.dims == 3 && cfg.grid.cells[2] == 1) cfg.grid.cells[2] = cfg.grid.cells[0];
        if (*o.dims == 2) cfg.grid.cells[2] = 1;
    }
    if (o.t_final) cfg.t_final = *o.t_final;
    if (o.threads) cfg.threads = *o.threads;
    if (o.deterministic) cfg.deterministic = true;
    return cfg;
}

int report_run(const RunSummary& s) {
    fmt::print("status {} after {} steps, t = {:.6g}\n", s.status, s.steps, s.t);
    fmt::print("energy {:.10g} -> {:.10g}, C_hat = {:.3e}\n", s.E0, s.E_final, s.energy.C_hat);
    fmt::print("max c violation {:.3e}, max mass drift {:.3e}, max trace drift {:.3e}, min rho {:.6g}\n",
               s.max_c_violation, s.max_mass_drift, s.max_trace_drift, s.min_rho);
    for (const auto& f : s.soft_flags) fmt::print("flag: {}\n", f);
    return s.exit_code();
}

int report_continuation(const ContinuationReport& r) {
    for (std::size_t i = 0; i < r.values.size(); ++i)
        fmt::print("value {:.6g}: status {}, delta int rho^beta = {:.6e}\n", r.values[i], r.runs[i].status,
                   r.delta_rho_beta[i]);
    for (std::size_t i = 0; i < r.l2_distances.size(); ++i)
        fmt::print("distance {}: L2 {:.6e}, T_k {:.6e}\n", i, r.l2_distances[i], r.truncation_distances[i]);
    for (const auto& f : r.flags) fmt::print("flag: {}\n", f);
    for (const auto& run : r.runs)
        if (run.exit_code() != 0) return run.exit_code();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compressible active liquid-crystal solver"};
    app.require_subcommand(1);

    Overrides run_o, eps_o, delta_o;
    std::optional<double> epsilon, delta;
    auto* run_cmd = app.add_subcommand("run", "integrate one configuration to the final time");
    add_common(run_cmd, run_o);
    run_cmd->add_option("--epsilon", epsilon, "artificial density diffusion");
    run_cmd->add_option("--delta", delta, "artificial pressure coefficient");

    std::string eps_list, delta_list;
    auto* eps_cmd = app.add_subcommand("continue-eps", "sweep a descending list of epsilon values");
    add_common(eps_cmd, eps_o);
    eps_cmd->add_option("--epsilon", eps_list, "comma-separated, strictly descending");

    auto* delta_cmd = app.add_subcommand("continue-delta", "sweep a descending list of delta values");
    add_common(delta_cmd, delta_o);
    delta_cmd->add_option("--delta", delta_list, "comma-separated, strictly descending");

    std::vector<int> ids;
    verify::Options vopt;
    std::string scratch;
    auto* verify_cmd = app.add_subcommand("verify", "run the acceptance criteria");
    verify_cmd->add_option("ids", ids, "criterion ids (all when omitted)");
    verify_cmd->add_option("--scratch", scratch, "directory for temporary run output");
    verify_cmd->add_option("--threads", vopt.max_threads, "thread count for the determinism check");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            RunConfig cfg = build_config(run_o);
            if (epsilon) cfg.reg.epsilon = *epsilon;
            if (delta) cfg.reg.delta = *delta;
            return report_run(run(cfg));
        }
        if (eps_cmd->parsed()) {
            RunConfig cfg = build_config(eps_o);
            if (!eps_list.empty()) cfg.epsilon_list = parse_list(eps_list);
            return report_continuation(run_continuation(cfg, ContinuationKind::Epsilon));
        }
        if (delta_cmd->parsed()) {
            RunConfig cfg = build_config(delta_o);
            if (!delta_list.empty()) cfg.delta_list = parse_list(delta_list);
            return report_continuation(run_continuation(cfg, ContinuationKind::Delta));
        }
        if (!scratch.empty()) vopt.scratch = scratch;
        for (int id : ids)
            if (id < 1 || id > verify::count()) throw ConfigError(fmt::format("no criterion {}", id));
        int failed = 0;
        const auto results = verify::run_all(ids, vopt, [](const verify::CriterionResult& r) {
            std::cout << verify::format(r) << std::endl;
        });
        for (const auto& r : results) failed += r.passed ? 0 : 1;
        fmt::print("{}/{} criteria passed\n", results.size() - static_cast<std::size_t>(failed), results.size());
        return failed == 0 ? EXIT_SUCCESS : kExitMonitor;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const MonitorViolation& e) {
        std::cerr << "monitor violation: " << e.what() << '\n';
        return kExitMonitor;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitConfig;
    }
}
