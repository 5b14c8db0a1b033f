#include "activelc/verify.hpp"

#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <numbers>
#include <random>

#include "activelc/config.hpp"
#include "activelc/diagnostics.hpp"
#include "activelc/driver.hpp"
#include "activelc/errors.hpp"
#include "activelc/galerkin.hpp"
#include "activelc/initial.hpp"
#include "activelc/integrator.hpp"
#include "activelc/io.hpp"
#include "activelc/parallel.hpp"
#include "activelc/physics.hpp"

namespace activelc::verify {

namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

struct Outcome {
    bool passed;
    std::string detail;
};

using Check = Outcome (*)(const Options&);

template <class Fn>
void set_cells(ScalarField& f, const Grid& g, bool with_ghosts, Fn fn) {
    const Layout& L = g.layout();
    const int gx = with_ghosts ? L.g[0] : 0, gy = with_ghosts ? L.g[1] : 0, gz = with_ghosts ? L.g[2] : 0;
    for (int k = -gz; k < L.n[2] + gz; ++k)
        for (int j = -gy; j < L.n[1] + gy; ++j)
            for (int i = -gx; i < L.n[0] + gx; ++i) f(i, j, k) = fn(g.center(0, i), g.center(1, j), g.center(2, k));
}

double max_diff(const ScalarField& a, const ScalarField& b, const Grid& g) {
    double e = 0.0;
    const auto& n = g.cells();
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i) e = std::max(e, std::abs(a(i, j, k) - b(i, j, k)));
    return e;
}

double state_diff(const State& a, const State& b, const Grid& g) {
    double e = std::max(max_diff(a.c, b.c, g), max_diff(a.rho, b.rho, g));
    for (int x = 0; x < 3; ++x) e = std::max(e, max_diff(a.m[x], b.m[x], g));
    for (int x = 0; x < 5; ++x) e = std::max(e, max_diff(a.Q[x], b.Q[x], g));
    return e;
}

RunConfig acceptance_config(const Options& opt, const std::string& name, int n) {
    RunConfig c;
    c.grid.cells = {n, n, 1};
    c.t_final = 1.0;
    c.initial.preset = IcPreset::RandomSmooth;
    c.initial.seed = 7;
    c.output.write_files = false;
    c.output.identities = false;
    c.output.dir = (opt.scratch / name).string();
    return c;
}

// 1 -------------------------------------------------------------------------
Outcome variational_consistency(const Options&) {
    const Grid g(3, {8, 8, 8}, {1, 1, 1});
    PhysParams p;
    p.b = 0.7;
    p.c_star = 0.9;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> uq(-0.3, 0.3), uc(0.5, 1.5), uv(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        QField Q(g.layout()), V(g.layout());
        ScalarField c(g.layout());
        for (int a = 0; a < 5; ++a) {
            set_cells(Q[a], g, false, [&](double, double, double) { return uq(rng); });
            set_cells(V[a], g, false, [&](double, double, double) { return uv(rng); });
        }
        set_cells(c, g, false, [&](double, double, double) { return uc(rng); });
        fill_ghosts(Q, g);
        const QField H = molecular_field(Q, c, g, p);
        // dF/ds along Q + s V is -(H, V) in the Frobenius sense.
        const double expect = -inner(H, V, g);
        auto F = [&](double s) {
            QField X = Q;
            for (int a = 0; a < 5; ++a)
                for (std::size_t i = 0; i < X[a].size(); ++i) X[a].data()[i] += s * V[a].data()[i];
            fill_ghosts(X, g);
            return free_energy(X, c, g, p);
        };
        const double h = 1e-4;
        // Fourth-order central difference.
        const double fd = (-F(2 * h) + 8 * F(h) - 8 * F(-h) + F(-2 * h)) / (12 * h);
        worst = std::max(worst, std::abs(fd - expect) / std::abs(expect));
    }
    return {worst <= 1e-6, fmt::format("max relative error {:.2e} over 20 random (Q, c) on 8^3", worst)};
}

// 2 -------------------------------------------------------------------------
Outcome pointwise_cancellation(const Options&) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const QTensor q{{d(rng), d(rng), d(rng), d(rng), d(rng)}};
        const SkewTensor w{{d(rng), d(rng), d(rng)}};
        worst = std::max(worst, pointwise_skew_residual(q, w, 1.0 + 0.5 * d(rng)));
    }
    return {worst <= 1e-13, fmt::format("max residual {:.2e} over 1e4 random pairs", worst)};
}

// 3 -------------------------------------------------------------------------
Outcome lemma_a1(const Options&) {
    std::vector<double> res;
    double bc_exact = 0.0;
    for (int n : {16, 32, 64}) {
        const Grid g(3, {n, n, n}, {1, 1, 1});
        QField Q(g.layout());
        VectorField u(g.layout());
        auto b = [](double t) { return t * (1 - t); };
        set_cells(u[0], g, true, [&](double x, double y, double z) { return b(x) * b(y) * b(z) * (1 + y); });
        set_cells(u[1], g, true, [&](double x, double y, double z) { return b(x) * (2 - x) * b(y) * b(z); });
        set_cells(u[2], g, true, [&](double x, double y, double z) { return b(x) * b(y) * b(z) * (1 + x + 0.5 * z); });
        set_cells(Q[0], g, true, [](double x, double y, double z) { return 0.3 * std::cos(pi * x) * std::cos(pi * y) * std::cos(pi * z); });
        set_cells(Q[1], g, true, [](double x, double, double z) { return 0.1 * std::cos(2 * pi * x) * std::cos(pi * z); });
        set_cells(Q[2], g, true, [](double x, double y, double) { return 0.2 * std::cos(pi * x) * std::cos(2 * pi * y); });
        set_cells(Q[3], g, true, [](double, double y, double z) { return 0.15 * std::cos(pi * y) * std::cos(pi * z); });
        set_cells(Q[4], g, true, [](double x, double, double z) { return 0.1 * std::cos(pi * x) * std::cos(2 * pi * z); });
        res.push_back(lemma_a1_residual(Q, Q, u, g));
        if (n == 16) {
            fill_ghosts(Q, g);
            fill_ghosts(u, g);
            bc_exact = lemma_a1_residual(Q, Q, u, g);
        }
    }
    const double o1 = std::log2(res[0] / res[1]), o2 = std::log2(res[1] / res[2]);
    return {o1 >= 1.9 && o2 >= 1.9,
            fmt::format("residuals {:.3e}, {:.3e}, {:.3e}; orders {:.3f}, {:.3f} (with boundary ghosts: {:.1e})", res[0],
                        res[1], res[2], o1, o2, bc_exact)};
}

// 4 -------------------------------------------------------------------------
Outcome quiescent(const Options&) {
    PhysParams p;
    RegParams r;
    StepControl ctl;
    double worst = 0.0;
    std::vector<std::string> parts;
    auto trial = [&](const Grid& g, const MomentumBackend* backend, const char* label) {
        const State s0 = quiescent_state(g, p);
        State s = s0;
        StepOptions opts;
        opts.backend = backend;
        for (int n = 0; n < 100; ++n) step(s, g, p, r, ctl, cfl_dt(s, g, p, r, ctl), opts);
        const double e = state_diff(s, s0, g);
        worst = std::max(worst, e);
        parts.push_back(fmt::format("{} {:.1e}", label, e));
    };
    const Grid g2(2, {16, 16, 1}, {1, 1, 1});
    const Grid g3(3, {8, 8, 8}, {1, 1, 1});
    trial(g2, nullptr, "grid 2D");
    trial(g3, nullptr, "grid 3D");
    const GalerkinBackend b2(g2, p, 32);
    trial(g2, &b2, "galerkin 2D");
    const GalerkinBackend b3(g3, p, 16);
    trial(g3, &b3, "galerkin 3D");
    return {worst <= 1e-12, fmt::format("max change after 100 steps: {}", fmt::join(parts, ", "))};
}

// 5 -------------------------------------------------------------------------
Outcome mass(const Options& opt) {
    std::vector<std::string> parts;
    bool ok = true;
    for (double eps : {0.0, 1e-2}) {
        RunConfig c = acceptance_config(opt, "mass", 32);
        c.grid.dims = 3;
        c.grid.cells = {32, 32, 32};
        c.reg.epsilon = eps;
        c.t_final = 1e9;
        c.max_steps = 1000;
        c.output.series_every = 1000;
        const RunSummary s = run(c);
        ok = ok && s.steps == 1000 && s.max_mass_drift <= 1e-10;
        parts.push_back(fmt::format("eps={}: drift {:.2e}", eps, s.max_mass_drift));
    }
    return {ok, fmt::format("32^3, 1000 steps; {}", fmt::join(parts, ", "))};
}

// 6 -------------------------------------------------------------------------
Outcome max_principle(const Options& opt) {
    RunConfig c = acceptance_config(opt, "maxprinciple", 64);
    c.output.series_every = 1000000;
    const RunSummary s = run(c);
    return {s.max_c_violation <= 1e-8,
            fmt::format("64^2, T = 1, {} steps: range violation {:.2e}", s.steps, s.max_c_violation)};
}

// 7 -------------------------------------------------------------------------
Outcome trace_symmetry(const Options& opt) {
    RunConfig c = acceptance_config(opt, "trace", 12);
    c.grid.dims = 3;
    c.grid.cells = {12, 12, 12};
    c.t_final = 1e9;
    c.max_steps = 300;
    c.output.series_every = 1000000;
    const Grid g = c.grid.make();
    double worst = 0.0;
    int checks = 0, steps = 0;
    RunHooks hooks;
    hooks.on_step = [&](const State& s, const StepReport&) {
        if (++steps % 100 != 0) return;
        ++checks;
        const auto& n = g.cells();
        for (int k = 0; k < n[2]; ++k)
            for (int j = 0; j < n[1]; ++j)
                for (int i = 0; i < n[0]; ++i) {
                    const Matrix3 m = to_matrix(s.Q.at(i, j, k));
                    worst = std::max(worst, std::abs(m.trace()));
                    for (int a = 0; a < 3; ++a)
                        for (int b = 0; b < 3; ++b) worst = std::max(worst, std::abs(m(a, b) - m(b, a)));
                }
    };
    (void)run(c, hooks);
    return {checks == 3 && worst <= 1e-15,
            fmt::format("12^3 random-smooth, {} reconstructions: max |tr Q| + asymmetry {:.1e}", checks, worst)};
}

// 8 -------------------------------------------------------------------------
Outcome energy_inequality(const Options& opt) {
    std::vector<std::string> parts;
    bool ok = true;
    for (double sigma : {1.0, -1.0}) {
        RunConfig c = acceptance_config(opt, "energy", 64);
        c.phys.sigma_star = sigma;
        const RunSummary s = run(c);
        const auto& e = s.energy;
        ok = ok && e.finite() && e.residual_nonpositive() && s.dissipation_nonnegative && e.gronwall_holds();
        parts.push_back(fmt::format("sigma*={:+}: {} samples, C_hat {:.3e}, C2 {:.3e}, E {:.4f} -> {:.4f}, max E/envelope {:.6f}",
                                    sigma, s.history.size(), e.C_hat, e.C2, s.E0, s.E_final, e.max_envelope_ratio));
    }
    return {ok, fmt::format("{}", fmt::join(parts, "; "))};
}

// 9 -------------------------------------------------------------------------
Outcome manufactured(const Options&) {
    PhysParams p;
    p.D0 = 0.5;
    StepControl ctl;
    ctl.advection = AdvectionScheme::Centered;
    auto cex = [](double x, double y, double t) { return 1.0 + 0.5 * std::cos(pi * x) * std::cos(pi * y) * std::exp(-t); };
    auto ux = [](double x, double y) { return 0.5 * std::sin(pi * x) * std::sin(pi * y); };
    auto uy = [](double x, double y) { return 0.3 * std::sin(2 * pi * x) * std::sin(pi * y); };
    auto source = [&](double x, double y, double t) {
        const double e = std::exp(-t);
        const double ct = -0.5 * std::cos(pi * x) * std::cos(pi * y) * e;
        const double cx = -0.5 * pi * std::sin(pi * x) * std::cos(pi * y) * e;
        const double cy = -0.5 * pi * std::cos(pi * x) * std::sin(pi * y) * e;
        const double lap = -pi * pi * std::cos(pi * x) * std::cos(pi * y) * e;
        return ct + ux(x, y) * cx + uy(x, y) * cy - p.D0 * lap;
    };
    const double T = 0.1;
    std::vector<double> err;
    for (int n : {32, 64, 128}) {
        const Grid g(2, {n, n, 1}, {1, 1, 1});
        State s(g.layout());
        s.rho.fill(1.0);
        set_cells(s.m[0], g, false, [&](double x, double y, double) { return ux(x, y); });
        set_cells(s.m[1], g, false, [&](double x, double y, double) { return uy(x, y); });
        set_cells(s.c, g, false, [&](double x, double y, double) { return cex(x, y, 0.0); });
        fill_state_ghosts(s, g);
        const VectorField u = velocity(s, g, ctl.vacuum_floor);
        const double h = 1.0 / n;
        const int steps = static_cast<int>(std::ceil(T / (h * h)));
        const double dt = T / steps;
        ScalarField src(g.layout());
        StepReport rep;
        for (int k = 1; k <= steps; ++k) {
            const double t = k * dt;
            set_cells(src, g, false, [&](double x, double y, double) { return source(x, y, t); });
            s.c = step_concentration(s, u, g, p, ctl, dt, rep, &src);
            fill_ghosts(s.c, g, FieldRole::Scalar);
        }
        ScalarField exact(g.layout());
        set_cells(exact, g, false, [&](double x, double y, double) { return cex(x, y, T); });
        err.push_back(max_diff(s.c, exact, g));
    }
    const double o1 = std::log2(err[0] / err[1]), o2 = std::log2(err[1] / err[2]);

    std::vector<double> res;
    const double t0 = 0.5;
    for (int n : {32, 64, 128}) {
        const Grid g(2, {n, 4, 1}, {1, 4.0 / n, 1}, {true, true, false});
        const double dt = 1.0 / n;
        auto rho = [](double x, double t) { return 1.0 + 0.1 * pi * std::cos(2 * pi * x) * std::sin(t); };
        auto mom = [](double x, double t) { return -0.05 * std::sin(2 * pi * x) * std::cos(t); };
        ScalarField r0(g.layout()), r1(g.layout());
        VectorField u(g.layout());
        set_cells(r0, g, true, [&](double x, double, double) { return rho(x, t0); });
        set_cells(r1, g, true, [&](double x, double, double) { return rho(x, t0 + dt); });
        set_cells(u[0], g, true, [&](double x, double, double) { return mom(x, t0) / rho(x, t0); });
        res.push_back(renormalized_residual(r0, r1, u, dt, RenormFunction::square(), g));
    }
    const double r1 = std::log2(res[0] / res[1]), r2 = std::log2(res[1] / res[2]);
    return {o1 >= 1.9 && o2 >= 1.9 && r1 >= 0.9 && r2 >= 0.9,
            fmt::format("c errors {:.3e}, {:.3e}, {:.3e} (orders {:.3f}, {:.3f}); renormalized residual orders {:.3f}, {:.3f}",
                        err[0], err[1], err[2], o1, o2, r1, r2)};
}

// 10 ------------------------------------------------------------------------
Outcome eps_continuation(const Options& opt) {
    RunConfig c = acceptance_config(opt, "eps_cont", 32);
    c.t_final = 0.5;
    c.output.series_every = 1000000;
    c.epsilon_list = {1e-1, 1e-2, 1e-3};
    const ContinuationReport r = run_continuation(c, ContinuationKind::Epsilon);
    return {r.cauchy_decreasing && r.l2_distances.size() == 2,
            fmt::format("||rho_eps_i - rho_eps_i+1||_L2 = {:.4e}, {:.4e}; T_k proxy {:.4e}, {:.4e}", r.l2_distances[0],
                        r.l2_distances[1], r.truncation_distances[0], r.truncation_distances[1])};
}

// 11 ------------------------------------------------------------------------
Outcome delta_continuation(const Options& opt) {
    RunConfig c = acceptance_config(opt, "delta_cont", 32);
    c.t_final = 0.5;
    c.output.series_every = 1000000;
    c.delta_list = {1e-2, 1e-3, 1e-4};
    const ContinuationReport r = run_continuation(c, ContinuationKind::Delta);
    const auto& v = r.delta_rho_beta;
    const double f1 = v[0] / v[1], f2 = v[1] / v[2];
    const bool ok = f1 >= 10.0 / 3.0 && f1 <= 30.0 && f2 >= 10.0 / 3.0 && f2 <= 30.0;
    return {ok, fmt::format("time-integrated delta int rho^beta = {:.4e}, {:.4e}, {:.4e}; factors per decade {:.3f}, {:.3f}",
                            v[0], v[1], v[2], f1, f2)};
}

// 12 ------------------------------------------------------------------------
Outcome cutoff_contract(const Options&) {
    bool exact_low = true, exact_high = true;
    double worst_second = -INFINITY;
    for (double k : {0.5, 1.0, 10.0, 1e3}) {
        const double h = k / 1000.0;
        for (int i = 0; i <= 10000; ++i) {
            const double z = i * h;
            const double t = cutoff_Tk(z, k);
            if (z <= k && t != z) exact_low = false;
            if (z >= 3 * k && t != 2 * k) exact_high = false;
            if (i > 0) worst_second = std::max(worst_second, cutoff_Tk(z + h, k) - 2 * t + cutoff_Tk(z - h, k));
        }
    }
    return {exact_low && exact_high && worst_second <= 1e-12,
            fmt::format("T_k(z) = z below k: {}; T_k(z) = 2k above 3k: {}; max second difference {:.2e}", exact_low,
                        exact_high, worst_second)};
}

// 13 ------------------------------------------------------------------------
Outcome galerkin_mode(const Options&) {
    const Grid g(2, {16, 16, 1}, {1, 1, 1});
    const EigenBasis B = build_basis(48, g);
    const Eigen::MatrixXd gram = B.cell_volume * B.psi * B.psi.transpose();
    const double gram_err = (gram - Eigen::MatrixXd::Identity(B.size(), B.size())).cwiseAbs().maxCoeff();
    const ScalarField one(g.layout(), 1.0);
    const Eigen::MatrixXd M = assemble_mass(one, B, g);
    const double mass_err = (M - Eigen::MatrixXd::Identity(B.unknowns(), B.unknowns())).cwiseAbs().maxCoeff();

    const double eta = 0.5;
    auto probe = [&](unsigned seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> d(eta, 2.0);
        double worst = 0.0;
        ScalarField r1(g.layout()), r2(g.layout());
        for (int i = 0; i < 100; ++i) {
            set_cells(r1, g, false, [&](double, double, double) { return d(rng); });
            set_cells(r2, g, false, [&](double, double, double) { return d(rng); });
            worst = std::max(worst, lipschitz_probe(r1, r2, B, g));
        }
        return worst;
    };
    const double lip = probe(5), lip_again = probe(5);
    const double bound = lipschitz_bound(B, eta);

    // Full-resolution basis against the grid momentum step on smooth data.
    PhysParams p;
    RegParams r;
    StepControl ctl;
    double cross = 0.0;
    for (int n : {8, 12}) {
        const Grid gc(2, {n, n, 1}, {1, 1, 1});
        State s = manufactured_state(gc, p);
        const GalerkinBackend backend(gc, p, n * n);
        State sg = s, sm = s;
        StepOptions opts;
        opts.backend = &backend;
        for (int k = 0; k < 3; ++k) {
            const double dt = cfl_dt(sg, gc, p, r, ctl);
            step(sg, gc, p, r, ctl, dt);
            step(sm, gc, p, r, ctl, dt, opts);
        }
        cross = std::max(cross, state_diff(sg, sm, gc));
    }
    const bool ok = gram_err <= 1e-10 && mass_err <= 1e-10 && std::isfinite(lip) && lip <= bound && lip == lip_again &&
                    cross <= 1e-9;
    return {ok, fmt::format("Gram error {:.1e}; mass(1) error {:.1e}; Lipschitz max {:.3e} (bound {:.3e}, repeat {}); "
                            "full-resolution cross-backend difference {:.1e}",
                            gram_err, mass_err, lip, bound, lip == lip_again ? "identical" : "differs", cross)};
}

// 14 ------------------------------------------------------------------------
Outcome determinism(const Options& opt) {
    auto once = [&](const std::string& name, int threads) {
        RunConfig c = acceptance_config(opt, name, 32);
        c.t_final = 0.2;
        c.deterministic = true;
        c.threads = threads;
        c.output.write_files = true;
        c.output.identities = true;
        fs::remove_all(c.output.dir);
        (void)run(c);
        return read_text(fs::path(c.output.dir) / "series.csv");
    };
    const std::string a = once("det_1a", 1);
    const std::string b = once("det_1b", 1);
    const std::string m = once("det_n", opt.max_threads);
    parallel::set_num_threads(1);
    return {a == b && a == m && !a.empty(),
            fmt::format("series.csv ({} bytes): repeat {}, 1 vs {} threads {}", a.size(), a == b ? "identical" : "differs",
                        opt.max_threads, a == m ? "identical" : "differs")};
}

struct Entry {
    const char* name;
    double budget;
    Check fn;
};

const std::vector<Entry>& table() {
    static const std::vector<Entry> t{
        {"variational consistency H = -dF/dQ", 10, variational_consistency},
        {"pointwise co-rotational cancellation", 1, pointwise_cancellation},
        {"antisymmetric stress identity (second order)", 60, lemma_a1},
        {"quiescent fixed point (grid and galerkin)", 10, quiescent},
        {"mass conservation", 120, mass},
        {"maximum principle for c", 60, max_principle},
        {"Q trace and symmetry", 60, trace_symmetry},
        {"energy inequality and Gronwall envelope", 120, energy_inequality},
        {"manufactured convergence", 120, manufactured},
        {"epsilon continuation", 300, eps_continuation},
        {"delta continuation", 300, delta_continuation},
        {"cut-off T_k contract", 1, cutoff_contract},
        {"galerkin backend", 120, galerkin_mode},
        {"determinism", 60, determinism},
    };
    return t;
}

}  // namespace

int count() { return static_cast<int>(table().size()); }

CriterionResult run_criterion(int id, const Options& opt) {
    if (id < 1 || id > count()) throw std::out_of_range(fmt::format("no acceptance criterion {}", id));
    const Entry& e = table()[static_cast<std::size_t>(id - 1)];
    CriterionResult r;
    r.id = id;
    r.name = e.name;
    r.budget_seconds = e.budget;
    const auto start = std::chrono::steady_clock::now();
    try {
        const Outcome o = e.fn(opt);
        r.passed = o.passed;
        r.detail = o.detail;
    } catch (const std::exception& ex) {
        r.passed = false;
        r.detail = fmt::format("exception: {}", ex.what());
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.seconds > r.budget_seconds) {
        r.passed = false;
        r.detail += fmt::format("; exceeded the {} s budget", r.budget_seconds);
    }
    return r;
}

std::vector<CriterionResult> run_all(const std::vector<int>& ids, const Options& opt,
                                     const std::function<void(const CriterionResult&)>& report) {
    std::vector<int> todo = ids;
    if (todo.empty())
        for (int i = 1; i <= count(); ++i) todo.push_back(i);
    std::vector<CriterionResult> out;
    for (int id : todo) {
        out.push_back(run_criterion(id, opt));
        if (report) report(out.back());
    }
    return out;
}

std::string format(const CriterionResult& r) {
    return fmt::format("[{}] {:>2} {}: {} ({:.2f} s / {:.0f} s)", r.passed ? "PASS" : "FAIL", r.id, r.name, r.detail,
                       r.seconds, r.budget_seconds);
}

}  // namespace activelc::verify
