#include "activelc/integrator.hpp"

#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "activelc/errors.hpp"
#include "activelc/physics.hpp"
#include "activelc/simd.hpp"

namespace activelc {

void StepControl::validate() const {
    if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError(fmt::format("cfl must lie in (0, 1], got {}", cfl));
    if (!(dt_max > 0.0)) throw ConfigError("dt_max must be positive");
    if (!(vacuum_floor > 0.0)) throw ConfigError("vacuum_floor must be positive");
    if (!(cg.rtol > 0.0) || cg.max_iter < 1) throw ConfigError("invalid linear solver tolerance");
}

namespace {

std::size_t row_len(const Layout& L) { return static_cast<std::size_t>(L.n[0]); }

/// y = x + a * z over interior cells.
void interior_axpy(ScalarField& y, const ScalarField& x, double a, const ScalarField& z) {
    const Layout& L = y.layout();
    const auto n = row_len(L);
    for_each_row(L, [&](std::ptrdiff_t o, int, int) {
        double* d = y.data() + o;
        const double* xs = x.data() + o;
        const double* zs = z.data() + o;
        for (std::size_t i = 0; i < n; ++i) d[i] = xs[i] + a * zs[i];
    });
}

void check_finite(const ScalarField& f, const char* name, double t) {
    if (!all_finite(f))
        throw NumericalError(fmt::format("non-finite {} after step ending at t = {:.6g}", name, t));
}

}  // namespace

double advective_limit(const State& s, const Grid& grid, const PhysParams& p, const RegParams& r,
                       const StepControl& ctl) {
    if (s.rho.size() == 0 || s.m[0].size() == 0) throw ShapeError("cfl_dt called on an empty state");
    const Layout& L = grid.layout();
    const auto n = row_len(L);
    const int dims = grid.dims();
    const double rate = parallel::max(L.rows(), [&](std::size_t row) {
        const std::ptrdiff_t o = L.row_start(row);
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto idx = o + static_cast<std::ptrdiff_t>(i);
            const double rho = s.rho.data()[idx];
            const double inv = 1.0 / std::max(rho, ctl.vacuum_floor);
            const double cs = ctl.acoustic_bound ? std::sqrt(sound_speed2(rho, p, r)) : 0.0;
            double sum = 0.0;
            for (int a = 0; a < dims; ++a) sum += (std::abs(s.m[a].data()[idx] * inv) + cs) / grid.h(a);
            m = std::max(m, sum);
        }
        return m;
    });
    if (!std::isfinite(rate)) throw NumericalError("non-finite velocity or density in CFL estimate");
    return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

double cfl_dt(const State& s, const Grid& grid, const PhysParams& p, const RegParams& r,
              const StepControl& ctl) {
    double dt = ctl.cfl * advective_limit(s, grid, p, r, ctl);
    if (!ctl.implicit_diffusion) {
        const double rho_min = std::max(interior_min(s.rho), ctl.vacuum_floor);
        const double kappa = std::max({p.D0, p.Gamma, r.epsilon, (2.0 * p.mu + p.nu) / rho_min});
        const double h = grid.min_spacing();
        dt = std::min(dt, ctl.cfl * h * h / (2.0 * grid.dims() * kappa));
    }
    return std::min(dt, ctl.dt_max);
}

ScalarField step_concentration(const State& s, const VectorField& u, const Grid& grid, const PhysParams& p,
                               const StepControl& ctl, double dt, StepReport& report,
                               const ScalarField* source) {
    ScalarField c = s.c;
    fill_ghosts(c, grid, FieldRole::Scalar);
    ScalarField rhs(grid.layout());
    interior_axpy(rhs, c, dt, advect(c, u, grid, ctl.advection));
    if (source != nullptr) interior_axpy(rhs, rhs, dt, *source);

    if (!ctl.implicit_diffusion) {
        interior_axpy(rhs, rhs, dt * p.D0, laplacian(c, grid));
        return rhs;
    }
    ScalarField out = rhs;
    report.cg_concentration += solve_helmholtz(grid, FieldRole::Scalar, 1.0, dt * p.D0, rhs, out, ctl.cg).iterations;
    return out;
}

QField step_q(const State& s, const ScalarField& c_new, const VectorField& u, const Grid& grid,
              const PhysParams& p, const StepControl& ctl, double dt, StepReport& report) {
    const Layout& L = grid.layout();
    QField Q = s.Q;
    fill_ghosts(Q, grid);
    QField tend(L);
    for (int a = 0; a < 5; ++a) advect_add(Q[a], u, grid, ctl.advection, tend[a]);

    std::array<VectorField, 3> gu{gradient(u[0], grid), gradient(u[1], grid), gradient(u[2], grid)};
    const auto n = row_len(L);
    for_each_row(L, [&](std::ptrdiff_t o, int, int) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto idx = o + static_cast<std::ptrdiff_t>(i);
            auto d = [&](int comp, int axis) { return gu[static_cast<std::size_t>(comp)][axis].data()[idx]; };
            const SkewTensor om{{0.5 * (d(0, 1) - d(1, 0)), 0.5 * (d(0, 2) - d(2, 0)), 0.5 * (d(1, 2) - d(2, 1))}};
            const QTensor q = Q.at(idx);
            QTensor t = tend.at(idx) - commutator(q, om) + p.Gamma * bulk_field(q, c_new.data()[idx], p);
            tend.set(idx, q + dt * t);
        }
    });

    if (!ctl.implicit_diffusion) {
        const QField lap = laplacian(Q, grid);
        for (int a = 0; a < 5; ++a) interior_axpy(tend[a], tend[a], dt * p.Gamma, lap[a]);
        return tend;
    }
    QField out = tend;
    for (int a = 0; a < 5; ++a)
        report.cg_q += solve_helmholtz(grid, FieldRole::Scalar, 1.0, dt * p.Gamma, tend[a], out[a], ctl.cg).iterations;
    return out;
}

ScalarField step_density(const State& s, const VectorField& u, const Grid& grid, const RegParams& r,
                         const StepControl& ctl, double dt, StepReport& report) {
    ScalarField rho = s.rho;
    fill_ghosts(rho, grid, FieldRole::Scalar);
    ScalarField tend(grid.layout());
    conservative_advect_add(rho, u, grid, ctl.advection, tend);
    ScalarField star(grid.layout());
    interior_axpy(star, rho, dt, tend);

    ScalarField out;
    if (r.epsilon > 0.0) {
        if (ctl.implicit_diffusion) {
            out = star;
            report.cg_density += solve_helmholtz(grid, FieldRole::Scalar, 1.0, dt * r.epsilon, star, out, ctl.cg).iterations;
            // The exact solve conserves mass; remove the solver's residual drift.
            const double shift = (integrate(star, grid) - integrate(out, grid)) / grid.volume();
            if (shift != 0.0) {
                const Layout& L = grid.layout();
                const auto n = row_len(L);
                for_each_row(L, [&](std::ptrdiff_t o, int, int) {
                    for (std::size_t i = 0; i < n; ++i) out.data()[o + static_cast<std::ptrdiff_t>(i)] += shift;
                });
            }
        } else {
            out = star;
            interior_axpy(out, star, dt * r.epsilon, laplacian(rho, grid));
        }
    } else {
        out = std::move(star);
    }

    const double mn = interior_min(out);
    if (mn < 0.0) {
        report.density_clamped = true;
        report.density_min_before_clamp = mn;
        report.flags.push_back(fmt::format("negative density {:.3e} clamped to 0", mn));
        for (double& v : out.raw()) v = std::max(v, 0.0);
    }
    return out;
}

VectorField momentum_forcing(const State& s, const VectorField& u, const ScalarField& rho_new,
                             const ScalarField& c_new, const QField& Q_new, const Grid& grid,
                             const PhysParams& p, const RegParams& r, const StepControl& ctl) {
    const Layout& L = grid.layout();
    const auto n = row_len(L);
    VectorField f(L);

    VectorField m = s.m;
    fill_ghosts(m, grid, FieldRole::Velocity);
    for (int a = 0; a < grid.dims(); ++a) conservative_advect_add(m[a], u, grid, ctl.advection, f[a]);

    ScalarField rho = rho_new;
    fill_ghosts(rho, grid, FieldRole::Scalar);
    const ScalarField P = pressure(rho, p, r);
    const auto& k = simd::kernels();
    ScalarField tmp(L);
    for (int a = 0; a < grid.dims(); ++a) {
        partial(P, grid, a, tmp);
        for_each_row(L, [&](std::ptrdiff_t o, int, int) { k.axpy(f[a].data() + o, -1.0, tmp.data() + o, n); });
    }

    if (r.epsilon > 0.0) {
        const VectorField grho = gradient(rho, grid);
        for (int a = 0; a < grid.dims(); ++a) {
            const VectorField gua = gradient(u[a], grid);
            for_each_row(L, [&](std::ptrdiff_t o, int, int) {
                for (std::size_t i = 0; i < n; ++i) {
                    const auto idx = o + static_cast<std::ptrdiff_t>(i);
                    double adv = 0.0;
                    for (int d = 0; d < grid.dims(); ++d) adv += grho[d].data()[idx] * gua[d].data()[idx];
                    f[a].data()[idx] -= r.epsilon * adv;
                }
            });
        }
    }

    State fresh;
    fresh.Q = Q_new;
    fresh.c = c_new;
    fill_ghosts(fresh.Q, grid);
    fill_ghosts(fresh.c, grid, FieldRole::Scalar);
    const Forces forces = stress_forces(fresh, grid, p);
    for (int a = 0; a < 3; ++a) {
        for_each_row(L, [&](std::ptrdiff_t o, int, int) {
            double* d = f[a].data() + o;
            const double* t = forces.f_tau[a].data() + o;
            const double* q = forces.f_rot[a].data() + o;
            const double* c = forces.f_act[a].data() + o;
            for (std::size_t i = 0; i < n; ++i) d[i] += (t[i] + q[i]) + c[i];
        });
    }
    return f;
}

VectorField solve_momentum_grid(const State& s, const VectorField& u_old, const ScalarField& rho_new,
                                const VectorField& force, const Grid& grid, const PhysParams& p,
                                const StepControl& ctl, double dt, StepReport& report) {
    const Layout& L = grid.layout();
    VectorField rhs(L);
    for (int a = 0; a < 3; ++a) interior_axpy(rhs[a], s.m[a], dt, force[a]);
    if (ctl.implicit_diffusion) {
        VectorField u = u_old;
        report.cg_momentum += solve_momentum(grid, p, rho_new, dt, rhs, u, ctl.cg).iterations;
        return u;
    }
    VectorField uo = u_old;
    VectorField Lu(L);
    viscous_apply(uo, grid, p, Lu);
    VectorField u(L);
    const auto n = row_len(L);
    for (int a = 0; a < 3; ++a) {
        for_each_row(L, [&](std::ptrdiff_t o, int, int) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto idx = o + static_cast<std::ptrdiff_t>(i);
                u[a].data()[idx] = (rhs[a].data()[idx] + dt * Lu[a].data()[idx]) /
                                   std::max(rho_new.data()[idx], ctl.vacuum_floor);
            }
        });
    }
    return u;
}

VectorField step_momentum(const State& s, const VectorField& u, const ScalarField& rho_new,
                          const ScalarField& c_new, const QField& Q_new, const Grid& grid, const PhysParams& p,
                          const RegParams& r, const StepControl& ctl, double dt, StepReport& report,
                          const StepOptions& opts) {
    const VectorField f = momentum_forcing(s, u, rho_new, c_new, Q_new, grid, p, r, ctl);
    VectorField un = opts.backend != nullptr
                         ? opts.backend->solve(s, u, rho_new, f, dt, report)
                         : solve_momentum_grid(s, u, rho_new, f, grid, p, ctl, dt, report);
    const Layout& L = grid.layout();
    const auto n = row_len(L);
    VectorField m(L);
    for (int a = 0; a < 3; ++a) {
        for_each_row(L, [&](std::ptrdiff_t o, int, int) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto idx = o + static_cast<std::ptrdiff_t>(i);
                m[a].data()[idx] = rho_new.data()[idx] * un[a].data()[idx];
            }
        });
    }
    fill_ghosts(m, grid, FieldRole::Velocity);
    return m;
}

StepReport step(State& s, const Grid& grid, const PhysParams& p, const RegParams& r, const StepControl& ctl,
                double dt, const StepOptions& opts) {
    StepReport report;
    report.dt = dt;
    if (!(dt >= 0.0) || !std::isfinite(dt)) throw NumericalError(fmt::format("invalid time step {}", dt));
    if (dt == 0.0) return report;

    if (ctl.check_stability) {
        const double limit = advective_limit(s, grid, p, r, ctl);
        if (dt > limit * (1.0 + 1e-12))
            throw NumericalError(fmt::format(
                "CFL violation: dt = {:.6g} exceeds the explicit advection limit {:.6g} (CFL number {:.3f} > 1) at t = {:.6g}",
                dt, limit, dt / limit, s.t));
    }

    const VectorField u = velocity(s, grid, ctl.vacuum_floor);
    ScalarField c_new = step_concentration(s, u, grid, p, ctl, dt, report, opts.c_source);
    fill_ghosts(c_new, grid, FieldRole::Scalar);
    QField Q_new = step_q(s, c_new, u, grid, p, ctl, dt, report);
    fill_ghosts(Q_new, grid);
    ScalarField rho_new = step_density(s, u, grid, r, ctl, dt, report);
    fill_ghosts(rho_new, grid, FieldRole::Scalar);
    VectorField m_new = step_momentum(s, u, rho_new, c_new, Q_new, grid, p, r, ctl, dt, report, opts);

    const double t_new = s.t + dt;
    check_finite(c_new, "concentration", t_new);
    check_finite(rho_new, "density", t_new);
    for (int a = 0; a < 5; ++a) check_finite(Q_new[a], "Q-tensor", t_new);
    for (int a = 0; a < 3; ++a) check_finite(m_new[a], "momentum", t_new);

    s.c = std::move(c_new);
    s.Q = std::move(Q_new);
    s.rho = std::move(rho_new);
    s.m = std::move(m_new);
    s.t = t_new;
    return report;
}

}  // namespace activelc
