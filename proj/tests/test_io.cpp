#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <sstream>

#include "activelc/config.hpp"
#include "activelc/initial.hpp"
#include "activelc/io.hpp"
#include "test_util.hpp"

using namespace activelc;
using namespace testutil;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "activelc_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

bool bit_equal(const ScalarField& a, const ScalarField& b) {
    if (a.size() != b.size()) return false;
    return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
    const RunConfig c = parse_config("[grid]\nnx = 8\nny = 8\n[run]\nt_final = 0.5\n");
    CHECK(c.grid.cells[0] == 8);
    CHECK(c.t_final == 0.5);
    CHECK(c.phys.gamma_exp == 2.0);
    CHECK(c.reg.beta_exp == 13.0);
    CHECK(c.reg.epsilon == 0.0);
    CHECK(c.reg.delta == 0.0);
    CHECK(c.mode == MomentumMode::Grid);
    CHECK(c.initial.preset == IcPreset::Quiescent);
    CHECK(c.control.advection == AdvectionScheme::Upwind);
}

TEST_CASE("config sections are read") {
    const RunConfig c = parse_config(R"(
[grid]
dims = 3
nx = 6
periodic = x, z
[physics]
gamma = 1.8
sigma_star = -1
[regularization]
epsilon = 0.01
delta = 0.001
beta = 13
[control]
advection = centered
cfl = 0.3
[run]
mode = galerkin
galerkin_modes = 8
deterministic = yes
[initial]
preset = random-smooth
seed = 7
[continuation]
epsilon = 0.1, 0.01, 0.001
)");
    CHECK(c.grid.dims == 3);
    CHECK(c.grid.cells[2] == 6);
    CHECK(c.grid.periodic[0]);
    CHECK_FALSE(c.grid.periodic[1]);
    CHECK(c.grid.periodic[2]);
    CHECK(c.phys.gamma_exp == 1.8);
    CHECK(c.phys.sigma_star == -1.0);
    CHECK(c.control.advection == AdvectionScheme::Centered);
    CHECK(c.mode == MomentumMode::Galerkin);
    CHECK(c.deterministic);
    CHECK(c.initial.preset == IcPreset::RandomSmooth);
    CHECK(c.initial.seed == 7);
    CHECK(c.epsilon_list == std::vector<double>{0.1, 0.01, 0.001});
}

TEST_CASE("config rejections name the violated constraint") {
    auto reject = [](const std::string& text, const std::string& needle) {
        try {
            (void)parse_config(text);
            FAIL("accepted: " << text);
        } catch (const ConfigError& e) {
            CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
        }
    };
    reject("[physics]\ngamma = 1.2\n", "adiabatic exponent below theoretical threshold");
    reject("[physics]\ngamma = 1.5\n", "adiabatic exponent below theoretical threshold");
    reject("[regularization]\ndelta = 0.1\nbeta = 3\n", "beta >= 4");
    reject("[regularization]\ndelta = 0.1\nbeta = 4\n", "beta > max(4, gamma)");
    reject("[physics]\ngamma = 5\n[regularization]\ndelta = 0.1\nbeta = 4.5\n", "beta > max(4, gamma)");
    reject("[regularization]\nbeta = 10\n[continuation]\ndelta = 0.01, 0.001\n", "delta continuation requires beta");
    reject("[continuation]\nepsilon = 0.01, 0.1\n", "strictly descending");
    reject("[grid]\nbogus = 1\n", "unknown configuration key");
    reject("[grid]\nnx = eight\n", "not a valid number");
    reject("[grid]\ndims = 4\n", "dims must be 2 or 3");
    reject("[initial]\npreset = vortex\n", "unknown initial-condition preset");
    reject("[run]\nmode = spectral\n", "unknown momentum mode");
    reject("[control]\nadvection = weno\n", "advection");
    reject("[initial]\nc_lower = 0\n", "0 < c_lower");
    reject("[initial]\npreset = random-smooth\nc_lower = 0.9\n", "c_lower <= c0 <= c_upper");
    reject("[physics]\nmu = -1\n", "mu");
    reject("[grid]\nperiodic = w\n", "unknown axis");
    reject("[initial]\npreset = file\n", "requires [initial] path");
    reject("[monitor]\ntheta = 0.3\n", "theta");
    reject("[grid\nnx = 3\n", "malformed");
}

TEST_CASE("initial data compatibility") {
    const Grid g(2, {8, 8, 1}, {1, 1, 1});
    State s = quiescent_state(g, PhysParams{});
    CHECK_NOTHROW(validate_initial_state(s, g, 0.5, 2.0));
    SUBCASE("negative density") {
        s.rho(2, 2) = -0.1;
        CHECK_THROWS_WITH_AS(validate_initial_state(s, g, 0.5, 2.0), doctest::Contains("rho0 >= 0"), ConfigError);
    }
    SUBCASE("momentum in vacuum") {
        s.rho(2, 2) = 0.0;
        CHECK_NOTHROW(validate_initial_state(s, g, 0.5, 2.0));
        s.m[1](2, 2) = 1e-3;
        CHECK_THROWS_WITH_AS(validate_initial_state(s, g, 0.5, 2.0), doctest::Contains("m0 = 0 required where rho0 = 0"), ConfigError);
    }
    SUBCASE("concentration bounds") {
        s.c(0, 0) = 3.0;
        CHECK_THROWS_AS(validate_initial_state(s, g, 0.5, 2.0), ConfigError);
    }
    SUBCASE("non-finite") {
        s.Q[2](1, 1) = std::nan("");
        CHECK_THROWS_AS(validate_initial_state(s, g, 0.5, 2.0), ConfigError);
    }
}

TEST_CASE("random-smooth initial condition") {
    PhysParams p;
    p.c_star = 2.0;
    SUBCASE("2D amplitudes and zero components") {
        const Grid g(2, {24, 16, 1}, {1, 1, 1});
        const State s = random_smooth_state(g, p, 7);
        CHECK(interior_min(s.c) == doctest::Approx(1.0));
        CHECK(interior_max(s.c) == doctest::Approx(3.0));
        CHECK(interior_min(s.rho) == doctest::Approx(0.5));
        CHECK(interior_max(s.rho) == doctest::Approx(1.5));
        const VectorField u = velocity(s, g, 1e-10);
        CHECK(std::max(max_abs(u[0]), max_abs(u[1])) == doctest::Approx(0.1));
        CHECK(max_abs(u[2]) == 0.0);
        CHECK(max_abs(s.Q[3]) == 0.0);
        CHECK(max_abs(s.Q[4]) == 0.0);
        CHECK(max_abs(s.Q[0]) <= 0.1 + 1e-15);
        CHECK(max_abs(s.Q[0]) > 0.0);
        // The sine modes vanish at the walls: the wall-adjacent cell is O(h) small.
        double wall = 0.0;
        for (int j = 0; j < 16; ++j) wall = std::max(wall, std::abs(u[0](0, j)));
        CHECK(wall < 0.1);
    }
    SUBCASE("seed determinism") {
        const Grid g(3, {8, 8, 8}, {1, 1, 1});
        CHECK(random_smooth_state(g, p, 7) == random_smooth_state(g, p, 7));
        CHECK_FALSE(random_smooth_state(g, p, 7) == random_smooth_state(g, p, 8));
        const State s = random_smooth_state(g, p, 3);
        CHECK(max_abs(s.Q[4]) > 0.0);
        CHECK_NOTHROW(validate_initial_state(s, g, 0.5 * p.c_star, 1.5 * p.c_star));
    }
    SUBCASE("manufactured preset is valid") {
        const Grid g(2, {16, 16, 1}, {1, 1, 1});
        CHECK_NOTHROW(validate_initial_state(manufactured_state(g, p), g, 0.5, 5.0));
    }
    CHECK(parse_ic_preset(to_string(IcPreset::RandomSmooth)) == IcPreset::RandomSmooth);
}

TEST_CASE("checkpoint round trip is bit-exact") {
    const fs::path dir = scratch("ckpt");
    const Grid g(3, {6, 5, 4}, {1, 2, 3});
    State s = random_smooth_state(g, PhysParams{}, 11);
    s.t = 0.123456789;
    s.Q[4](1, 2, 3) = 1.0 / 3.0;
    write_checkpoint(dir / "a.ckpt", s, g, 0xabcdef, 42);
    const RestoredCheckpoint rc = read_checkpoint(dir / "a.ckpt", g, 0xabcdefULL);
    CHECK(rc.step == 42);
    CHECK(rc.state.t == s.t);
    CHECK(bit_equal(rc.state.c, s.c));
    CHECK(bit_equal(rc.state.rho, s.rho));
    for (int a = 0; a < 3; ++a) CHECK(bit_equal(rc.state.m[a], s.m[a]));
    for (int a = 0; a < 5; ++a) CHECK(bit_equal(rc.state.Q[a], s.Q[a]));
    CHECK(rc.state == s);

    CHECK_THROWS_AS((void)read_checkpoint(dir / "a.ckpt", g, 0x1234ULL), VersionError);
    CHECK_THROWS_AS((void)read_checkpoint(dir / "a.ckpt", Grid(3, {6, 5, 5}, {1, 2, 3})), VersionError);
    CHECK_THROWS_AS((void)read_checkpoint(dir / "missing.ckpt", g), IoError);
    write_text(dir / "bad.ckpt", "not a checkpoint");
    CHECK_THROWS_AS((void)read_checkpoint(dir / "bad.ckpt", g), VersionError);
    const std::string bytes = read_text(dir / "a.ckpt");
    write_text(dir / "short.ckpt", bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS((void)read_checkpoint(dir / "short.ckpt", g), IoError);
    // Format header: magic, then version 1 little-endian.
    CHECK(bytes.substr(0, 8) == std::string("ALCCKPT\0", 8));
    CHECK(bytes[8] == 1);
    CHECK(bytes[9] == 0);
}

TEST_CASE("file preset restores a checkpoint") {
    const fs::path dir = scratch("filepreset");
    const Grid g(2, {8, 8, 1}, {1, 1, 1});
    const State s = random_smooth_state(g, PhysParams{}, 5);
    write_checkpoint(dir / "ic.ckpt", s, g, 99);
    const RunConfig c = parse_config("[grid]\nnx = 8\nny = 8\n[initial]\npreset = file\npath = " + (dir / "ic.ckpt").string() + "\n");
    CHECK(make_initial_state(c.initial, g, c.phys) == s);
}

TEST_CASE("config hash tracks numerical settings") {
    RunConfig a;
    RunConfig b = a;
    CHECK(a.hash() == b.hash());
    b.phys.mu = 2.0;
    CHECK(a.hash() != b.hash());
    b = a;
    b.output.dir = "elsewhere";
    CHECK(a.hash() == b.hash());
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("VTK of uniform density has all values 1") {
    const fs::path dir = scratch("vtk");
    const Grid g(2, {4, 3, 1}, {1, 1, 1});
    ScalarField rho(g.layout(), 1.0);
    write_vtk(dir / "rho.vtk", "rho", rho, g);
    std::istringstream in(read_text(dir / "rho.vtk"));
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    REQUIRE(lines.size() == 10 + 12);
    CHECK(lines[0] == "# vtk DataFile Version 3.0");
    CHECK(lines[3] == "DATASET STRUCTURED_POINTS");
    CHECK(lines[4] == "DIMENSIONS 4 3 1");
    CHECK(lines[7] == "POINT_DATA 12");
    CHECK(lines[8] == "SCALARS rho double 1");
    for (std::size_t i = 10; i < lines.size(); ++i) CHECK(lines[i] == "1");

    const State s = quiescent_state(g, PhysParams{});
    CHECK(write_snapshot(dir, 3, s, g, 1e-10).size() == 10);
    CHECK(fs::exists(dir / "Q23_000003.vtk"));
    CHECK_THROWS_AS(write_vtk("/proc/definitely/not/writable.vtk", "x", rho, g), IoError);
}

TEST_CASE("CSV header matches the documented schema") {
    const fs::path dir = scratch("csv");
    {
        SeriesWriter w(dir / "series.csv");
        SeriesRow r;
        r.step = 3;
        r.energy.t = 0.5;
        r.energy.E = 1.0 / 3.0;
        w.write(r);
    }
    std::istringstream in(read_text(dir / "series.csv"));
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header ==
          "step,t,dt,E,E_concentration,E_kinetic,E_pressure,E_artificial,E_q_bulk,E_q_elastic,"
          "D_c,D_u,D_div,D_q,D_q6,rhs_bound,c_min,c_max,c_violation,mass,mass_drift,rho_min,envelope,"
          "div_integral,trace_drift,rho_gamma_theta,q_L10,grad_q_L10_3,delta_rho_beta,lemmaA1,"
          "pointwise_skew,cg_c,cg_q,cg_rho,cg_m");
    CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
    CHECK(row.rfind("3,0.5,0,0.33333333333333331,", 0) == 0);
}
