#include <doctest.h>

#include <filesystem>

#include "activelc/driver.hpp"
#include "activelc/errors.hpp"
#include "activelc/io.hpp"
#include "activelc/parallel.hpp"
#include "test_util.hpp"

using namespace activelc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "activelc_tests" / name;
    fs::remove_all(p);
    return p;
}

RunConfig small_config(const std::string& name) {
    RunConfig c;
    c.grid.cells = {12, 12, 1};
    c.t_final = 0.05;
    c.output.dir = scratch(name).string();
    return c;
}

}  // namespace

TEST_CASE("quiescent run has zero drift") {
    RunConfig c = small_config("quiescent");
    c.t_final = 1.0;
    c.max_steps = 100;
    const RunSummary s = run(c);
    CHECK(s.status == "ok");
    CHECK(s.exit_code() == 0);
    CHECK(s.steps == 100);
    CHECK(s.max_mass_drift == 0.0);
    CHECK(s.max_c_violation == 0.0);
    CHECK(s.max_trace_drift == 0.0);
    CHECK(s.energy.C_hat == 0.0);
    CHECK(s.soft_flags.empty());
    CHECK(s.E_final == s.E0);
    CHECK(fs::exists(fs::path(c.output.dir) / "summary.json"));
    CHECK(fs::exists(fs::path(c.output.dir) / "final.ckpt"));
    CHECK(fs::exists(fs::path(c.output.dir) / "vtk" / "rho_000100.vtk"));
    CHECK(read_text(fs::path(c.output.dir) / "summary.json").find("\"status\": \"ok\"") != std::string::npos);
}

TEST_CASE("random-smooth runs are deterministic across runs and thread counts") {
    RunConfig c = small_config("det_a");
    c.initial.preset = IcPreset::RandomSmooth;
    c.initial.seed = 7;
    c.deterministic = true;
    c.threads = 1;
    (void)run(c);
    const std::string a = read_text(fs::path(c.output.dir) / "series.csv");
    c.output.dir = scratch("det_b").string();
    (void)run(c);
    CHECK(read_text(fs::path(c.output.dir) / "series.csv") == a);
    c.output.dir = scratch("det_c").string();
    c.threads = 4;
    (void)run(c);
    CHECK(read_text(fs::path(c.output.dir) / "series.csv") == a);
    parallel::set_num_threads(1);
}

TEST_CASE("run results") {
    RunConfig c = small_config("energy");
    c.initial.preset = IcPreset::RandomSmooth;
    c.initial.seed = 3;
    c.output.write_files = false;
    const RunSummary s = run(c);
    CHECK(s.t == doctest::Approx(c.t_final));
    CHECK(s.energy.finite());
    CHECK(s.energy.residual_nonpositive());
    CHECK(s.energy.gronwall_holds());
    CHECK(s.dissipation_nonnegative);
    CHECK(s.max_mass_drift <= 1e-12);
    CHECK(s.max_c_violation <= 1e-8);
    CHECK(s.history.size() == s.steps + 1);
    CHECK_FALSE(fs::exists(c.output.dir));
}

TEST_CASE("restart from a checkpoint continues identically") {
    RunConfig c = small_config("restart_full");
    c.initial.preset = IcPreset::RandomSmooth;
    c.deterministic = true;
    c.max_steps = 6;
    const RunSummary full = run(c);

    RunConfig half = c;
    half.output.dir = scratch("restart_half").string();
    half.max_steps = 3;
    (void)run(half);
    const Grid g = c.grid.make();
    const RestoredCheckpoint rc = read_checkpoint(fs::path(half.output.dir) / "final.ckpt", g, half.hash());
    RunConfig rest = c;
    rest.output.write_files = false;
    rest.max_steps = 3;
    const RunSummary tail = run_from(rest, rc.state, rc.step);
    CHECK(tail.final_state == full.final_state);
}

TEST_CASE("forced dt above the advective limit aborts with a CFL diagnostic") {
    RunConfig c = small_config("cfl");
    c.initial.preset = IcPreset::RandomSmooth;
    c.fixed_dt = 0.5;
    try {
        (void)run(c);
        FAIL("no error");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("CFL") != std::string::npos);
    }
    CHECK(fs::exists(fs::path(c.output.dir) / "failure.ckpt"));
    CHECK(read_text(fs::path(c.output.dir) / "summary.json").find("numerical_error") != std::string::npos);
}

TEST_CASE("negative density aborts with a monitor violation") {
    RunConfig c = small_config("negative");
    const Grid g = c.grid.make();
    State s(g.layout());
    s.c.fill(1.0);
    s.rho.fill(1.0);
    s.rho(4, 4) = -0.01;
    CHECK_THROWS_AS((void)run_from(c, s), MonitorViolation);
    CHECK(fs::exists(fs::path(c.output.dir) / "failure.ckpt"));
}

TEST_CASE("galerkin mode runs") {
    RunConfig c = small_config("galerkin");
    c.mode = MomentumMode::Galerkin;
    c.galerkin_modes = 16;
    c.initial.preset = IcPreset::RandomSmooth;
    c.output.write_files = false;
    const RunSummary s = run(c);
    CHECK(s.status == "ok");
    CHECK(s.energy.finite());
}

TEST_CASE("continuation sweeps") {
    RunConfig c = small_config("cont_single");
    c.initial.preset = IcPreset::RandomSmooth;
    c.epsilon_list = {0.01};
    const ContinuationReport one = run_continuation(c, ContinuationKind::Epsilon);
    REQUIRE(one.runs.size() == 1);
    RunConfig plain = c;
    plain.reg.epsilon = 0.01;
    plain.output.write_files = false;
    CHECK(run(plain).final_state == one.runs[0].final_state);
    CHECK(one.l2_distances.empty());
    CHECK(fs::exists(fs::path(c.output.dir) / "continuation.csv"));

    c.output.dir = scratch("cont_delta").string();
    c.delta_list = {1e-2, 1e-3};
    const ContinuationReport d = run_continuation(c, ContinuationKind::Delta);
    REQUIRE(d.delta_rho_beta.size() == 2);
    CHECK(d.delta_rho_beta[0] > d.delta_rho_beta[1]);
    CHECK(d.l2_distances.size() == 1);
    CHECK(d.truncation_distances.size() == 1);

    c.delta_list = {};
    CHECK_THROWS_AS((void)run_continuation(c, ContinuationKind::Delta), ConfigError);
}
