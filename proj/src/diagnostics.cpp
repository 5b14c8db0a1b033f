#include "activelc/diagnostics.hpp"

#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <stdexcept>

#include "activelc/errors.hpp"

namespace activelc {

namespace {

std::size_t row_len(const Layout& L) { return static_cast<std::size_t>(L.n[0]); }

/// vol * sum over interior cells of fn(idx).
template <class Fn>
double cell_integral(const Grid& grid, Fn&& fn) {
    const Layout& L = grid.layout();
    const auto n = row_len(L);
    return grid.cell_volume() * reduce_rows(L, [&](std::ptrdiff_t o) {
               double s = 0.0;
               for (std::size_t i = 0; i < n; ++i) s += fn(o + static_cast<std::ptrdiff_t>(i));
               return s;
           });
}

template <class Fn>
double cell_max(const Grid& grid, Fn&& fn) {
    const Layout& L = grid.layout();
    const auto n = row_len(L);
    return parallel::max(L.rows(), [&](std::size_t r) {
        const std::ptrdiff_t o = L.row_start(r);
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, fn(o + static_cast<std::ptrdiff_t>(i)));
        return m;
    });
}

double grad_norm2(const ScalarField& f, const Grid& grid) {
    double s = 0.0;
    ScalarField d(grid.layout());
    for (int a = 0; a < grid.dims(); ++a) {
        partial(f, grid, a, d);
        s += inner(d, d, grid);
    }
    return s;
}

/// u = m / max(rho, floor) on every stored value, ghosts included as given.
VectorField velocity_as_given(const State& s, double floor) {
    VectorField u(s.rho.layout());
    for (int a = 0; a < 3; ++a)
        for (std::size_t i = 0; i < s.rho.size(); ++i)
            u[a].data()[i] = s.m[a].data()[i] / std::max(s.rho.data()[i], floor);
    return u;
}

Matrix3 with_iso(const QTensor& q, double iso) {
    Matrix3 m = to_matrix(q);
    m(0, 0) += iso;
    m(1, 1) += iso;
    m(2, 2) += iso;
    return m;
}

}  // namespace

EnergyReport energy_report(const State& state, const Grid& grid, const PhysParams& p, const RegParams& r,
                           double vacuum_floor) {
    State s = state;
    fill_state_ghosts(s, grid);
    const VectorField u = velocity(s, grid, vacuum_floor);

    EnergyReport e;
    e.t = s.t;
    e.energy = total_energy(s, grid, p, r, vacuum_floor);
    e.E = e.energy.total();

    e.grad_c2 = grad_norm2(s.c, grid);
    for (int a = 0; a < 3; ++a) e.grad_u2 += grad_norm2(u[a], grid);
    const ScalarField div = divergence(u, grid);
    e.div_u2 = inner(div, div, grid);
    const QField lap = laplacian(s.Q, grid);
    e.lap_q2 = inner(lap, lap, grid);
    e.q2 = cell_integral(grid, [&](std::ptrdiff_t i) { return norm2(s.Q.at(i)); });
    e.q4 = cell_integral(grid, [&](std::ptrdiff_t i) {
        const double t = norm2(s.Q.at(i));
        return t * t;
    });
    e.q6 = cell_integral(grid, [&](std::ptrdiff_t i) {
        const double t = norm2(s.Q.at(i));
        return t * t * t;
    });
    e.u2 = inner(u, u, grid);
    e.grad_q2 = q_face_gradient_norm2(s.Q, grid);

    e.diss_c = 0.5 * p.D0 * e.grad_c2;
    e.diss_u = 0.5 * p.mu * e.grad_u2;
    e.diss_div = (p.nu + p.mu) * e.div_u2;
    e.diss_q = 0.5 * p.Gamma * e.lap_q2;
    e.diss_q6 = 0.5 * p.c_star * p.c_star * p.Gamma * e.q6;
    e.dissipation = e.diss_c + e.diss_u + e.diss_div + e.diss_q + e.diss_q6;
    e.rhs_bound = e.u2 + e.grad_q2 + e.q2 + e.q4;
    return e;
}

bool EnergyInequality::finite() const { return std::isfinite(C_hat); }

bool EnergyInequality::residual_nonpositive() const {
    if (!finite()) return false;
    for (double r : residual)
        if (r > 0.0) return false;
    return true;
}

EnergyInequality energy_inequality_residual(const std::vector<EnergyReport>& h) {
    if (h.size() < 2) throw std::invalid_argument("energy_inequality_residual needs at least two reports");
    EnergyInequality out;
    double C = 0.0;
    for (std::size_t n = 0; n + 1 < h.size(); ++n) {
        const double dt = h[n + 1].t - h[n].t;
        if (!(dt > 0.0)) throw std::invalid_argument("energy reports must have increasing times");
        const double num = (h[n + 1].E - h[n].E) / dt + h[n].dissipation;
        if (h[n].rhs_bound > 0.0)
            C = std::max(C, num / h[n].rhs_bound);
        else if (num > 0.0)
            C = std::numeric_limits<double>::infinity();
    }
    // Guard against the last-bit rounding of num - (num/rhs) rhs.
    out.C_hat = C > 0.0 ? C * (1.0 + 1e-12) : 0.0;
    for (std::size_t n = 0; n + 1 < h.size(); ++n) {
        const double dt = h[n + 1].t - h[n].t;
        const double num = (h[n + 1].E - h[n].E) / dt + h[n].dissipation;
        out.t.push_back(h[n].t);
        out.residual.push_back(h[n].rhs_bound > 0.0 || out.C_hat == 0.0 ? num - out.C_hat * h[n].rhs_bound : num);
    }
    if (!out.finite()) {
        out.C2 = std::numeric_limits<double>::infinity();
        out.max_envelope_ratio = std::numeric_limits<double>::infinity();
        return out;
    }
    double ratio = 0.0;
    for (const auto& r : h)
        if (r.E > 0.0) ratio = std::max(ratio, r.rhs_bound / r.E);
    out.C1 = 0.0;
    out.C2 = out.C_hat * ratio;
    const double t0 = h.front().t;
    for (const auto& r : h) {
        const double env = (h.front().E + out.C1 * (r.t - t0)) * std::exp(out.C2 * (r.t - t0));
        out.max_envelope_ratio = std::max(out.max_envelope_ratio, env > 0.0 ? r.E / env : (r.E > 0.0 ? INFINITY : 0.0));
    }
    return out;
}

ScalarField effective_viscous_flux(const State& s, const Grid& grid, const PhysParams& p, const RegParams& r,
                                   double vacuum_floor) {
    const VectorField u = velocity_as_given(s, vacuum_floor);
    const ScalarField div = divergence(u, grid);
    ScalarField out(grid.layout());
    const Layout& L = grid.layout();
    const auto n = row_len(L);
    for_each_row(L, [&](std::ptrdiff_t o, int, int) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto idx = o + static_cast<std::ptrdiff_t>(i);
            out.data()[idx] = pressure(s.rho.data()[idx], p, r) - (p.nu + 2.0 * p.mu) * div.data()[idx];
        }
    });
    return out;
}

double cutoff_Tk(double z, double k) {
    if (!(k > 0.0)) throw DomainError(fmt::format("cut-off level must be positive, got {}", k));
    if (!(z >= 0.0)) throw DomainError(fmt::format("cut-off argument must be nonnegative, got {}", z));
    if (z <= k) return z;
    if (z >= 3.0 * k) return 2.0 * k;
    const double w = z - k;
    return k + w - w * w / (4.0 * k);
}

double cutoff_Tk_prime(double z, double k) {
    (void)cutoff_Tk(z, k);
    if (z <= k) return 1.0;
    if (z >= 3.0 * k) return 0.0;
    return 1.0 - (z - k) / (2.0 * k);
}

double beta_k(double k) { return std::log(k) + 1.5 * std::log(3.0); }

double log_renorm_Lk(double z, double k) {
    (void)cutoff_Tk(z, k);
    if (z < k) return z > 0.0 ? z * std::log(z) : 0.0;
    if (z >= 3.0 * k) return beta_k(k) * z - 2.0 * k;
    const double y = z / k;
    return z * std::log(k) + z * (1.5 * std::log(y) - 0.25 * (y - 1.0 / y));
}

double log_renorm_Lk_prime(double z, double k) {
    // z L' - L = T  =>  L' = (L + T) / z
    (void)cutoff_Tk(z, k);
    if (z < k) return z > 0.0 ? std::log(z) + 1.0 : -std::numeric_limits<double>::infinity();
    if (z >= 3.0 * k) return beta_k(k);
    return (log_renorm_Lk(z, k) + cutoff_Tk(z, k)) / z;
}

RenormFunction RenormFunction::constant(double value) {
    return {[value](double) { return value; }, [](double) { return 0.0; }, 0.0};
}

RenormFunction RenormFunction::truncation(double k) {
    return {[k](double z) { return cutoff_Tk(std::max(z, 0.0), k); },
            [k](double z) { return cutoff_Tk_prime(std::max(z, 0.0), k); }, 3.0 * k};
}

RenormFunction RenormFunction::square() {
    return {[](double z) { return z * z; }, [](double z) { return 2.0 * z; },
            std::numeric_limits<double>::infinity()};
}

bool RenormFunction::cutoff_respected(int samples) const {
    if (!std::isfinite(cutoff)) return true;
    const double lo = std::max(cutoff, 0.0);
    const double hi = std::max(10.0 * lo, lo + 1.0);
    for (int i = 0; i <= samples; ++i) {
        const double z = lo + (hi - lo) * i / samples;
        if (dg(z) != 0.0) return false;
    }
    return true;
}

double renormalized_residual(const ScalarField& rho0, const ScalarField& rho1, const VectorField& u0, double dt,
                             const RenormFunction& g, const Grid& grid) {
    if (!(dt > 0.0)) throw std::invalid_argument("renormalized_residual needs dt > 0");
    const Layout& L = grid.layout();
    ScalarField gr(L);
    for (std::size_t i = 0; i < gr.size(); ++i) gr.data()[i] = g.g(rho0.data()[i]);
    VectorField gu(L);
    for (int a = 0; a < 3; ++a)
        for (std::size_t i = 0; i < gr.size(); ++i) gu[a].data()[i] = gr.data()[i] * u0[a].data()[i];
    const ScalarField div_gu = divergence(gu, grid);
    const ScalarField div_u = divergence(u0, grid);
    return cell_integral(grid, [&](std::ptrdiff_t i) {
        const double r0 = rho0.data()[i];
        const double g0 = gr.data()[i];
        const double res = (g.g(rho1.data()[i]) - g0) / dt + div_gu.data()[i] + (g.dg(r0) * r0 - g0) * div_u.data()[i];
        return std::abs(res);
    });
}

double renormalized_residual(const State& prev, const State& next, double dt, const RenormFunction& g,
                             const Grid& grid, double vacuum_floor) {
    State s = prev;
    fill_state_ghosts(s, grid);
    const VectorField u = velocity(s, grid, vacuum_floor);
    return renormalized_residual(s.rho, next.rho, u, dt, g, grid);
}

double pointwise_skew_residual(const QTensor& Q, const SkewTensor& W, double c_star) {
    const QTensor wq = -1.0 * commutator(Q, W);  // W Q - Q W
    const QTensor a = Q + (c_star * norm2(Q)) * Q;
    return std::abs(frob(wq, a));
}

std::array<ScalarField, 3> vorticity_tensor(const VectorField& u, const Grid& grid) {
    const Layout& L = grid.layout();
    std::array<ScalarField, 3> w{ScalarField(L), ScalarField(L), ScalarField(L)};
    const std::array<std::array<int, 2>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
    ScalarField d1(L), d2(L);
    for (std::size_t k = 0; k < 3; ++k) {
        const auto [a, b] = pairs[k];
        partial(u[a], grid, b, d1);
        partial(u[b], grid, a, d2);
        for (std::size_t i = 0; i < d1.size(); ++i) w[k].data()[i] = 0.5 * (d1.data()[i] - d2.data()[i]);
    }
    return w;
}

double lemma_a1_residual(const QField& Qp, const QField& Q, const VectorField& u, const Grid& grid, double iso) {
    const Layout& L = grid.layout();
    const QField lap = laplacian(Q, grid);
    const auto w = vorticity_tensor(u, grid);
    std::array<ScalarField, 3> sigma{ScalarField(L), ScalarField(L), ScalarField(L)};
    const auto n = row_len(L);
    for_each_row(L, [&](std::ptrdiff_t o, int, int) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto idx = o + static_cast<std::ptrdiff_t>(i);
            const Matrix3 qp = with_iso(Qp.at(idx), iso);
            const Matrix3 lm = to_matrix(lap.at(idx));
            const Matrix3 sg = qp * lm - lm * qp;
            sigma[0].data()[idx] = sg(0, 1);
            sigma[1].data()[idx] = sg(0, 2);
            sigma[2].data()[idx] = sg(1, 2);
        }
    });
    const double term1 = cell_integral(grid, [&](std::ptrdiff_t idx) {
        const Matrix3 qp = with_iso(Qp.at(idx), iso);
        const Matrix3 W = to_matrix(SkewTensor{{w[0].data()[idx], w[1].data()[idx], w[2].data()[idx]}});
        const Matrix3 c = W * qp - qp * W;
        const Matrix3 lm = to_matrix(lap.at(idx));
        double s = 0.0;
        for (std::size_t k = 0; k < 9; ++k) s += c.a[k] * lm.a[k];
        return s;
    });
    for (auto& sg : sigma) fill_ghosts(sg, grid, FieldRole::Scalar);
    // div of the antisymmetric stress with entries (12, 13, 23)
    ScalarField d(L);
    auto d_of = [&](const ScalarField& f, int axis) {
        partial(f, grid, axis, d);
        return d;
    };
    const ScalarField f0a = d_of(sigma[0], 1), f0b = d_of(sigma[1], 2);
    const ScalarField f1a = d_of(sigma[0], 0), f1b = d_of(sigma[2], 2);
    const ScalarField f2a = d_of(sigma[1], 0), f2b = d_of(sigma[2], 1);
    const double term2 = cell_integral(grid, [&](std::ptrdiff_t i) {
        const double fx = f0a.data()[i] + f0b.data()[i];
        const double fy = -f1a.data()[i] + f1b.data()[i];
        const double fz = -f2a.data()[i] - f2b.data()[i];
        return fx * u[0].data()[i] + fy * u[1].data()[i] + fz * u[2].data()[i];
    });
    return std::abs(term1 - term2);
}

IdentityResiduals identity_residuals(const State& state, const Grid& grid, const PhysParams& p, double vacuum_floor) {
    State s = state;
    fill_state_ghosts(s, grid);
    const VectorField u = velocity(s, grid, vacuum_floor);
    IdentityResiduals out;
    out.lemmaA1 = lemma_a1_residual(s.Q, s.Q, u, grid);
    const auto w = vorticity_tensor(u, grid);
    out.pointwise_skew = cell_max(grid, [&](std::ptrdiff_t i) {
        return pointwise_skew_residual(s.Q.at(i), SkewTensor{{w[0].data()[i], w[1].data()[i], w[2].data()[i]}}, p.c_star);
    });
    return out;
}

double transport_cancellation_residual(const State& state, const Grid& grid, const PhysParams& p,
                                       double vacuum_floor) {
    State s = state;
    fill_state_ghosts(s, grid);
    const VectorField u = velocity(s, grid, vacuum_floor);
    const Forces f = stress_forces(s, grid, p);
    const QField lap = laplacian(s.Q, grid);
    const auto w = vorticity_tensor(u, grid);
    QField adv(grid.layout());
    for (int a = 0; a < 5; ++a) adv[a] = advect(s.Q[a], u, grid, AdvectionScheme::Centered);
    const double force_work = inner(f.f_tau, u, grid) + inner(f.f_rot, u, grid);
    const double q_work = cell_integral(grid, [&](std::ptrdiff_t i) {
        const QTensor q = s.Q.at(i);
        const QTensor W = lap.at(i) - q - (p.c_star * norm2(q)) * q;
        const SkewTensor om{{w[0].data()[i], w[1].data()[i], w[2].data()[i]}};
        return frob(commutator(q, om) - adv.at(i), W);
    });
    return force_work + q_work;
}

double default_theta(double gamma_exp) { return 0.9 * std::min(0.25, 2.0 * gamma_exp / 3.0 - 1.0); }

std::vector<std::string> InvariantReport::hard_violations() const {
    std::vector<std::string> v;
    if (!rho_positive) v.push_back(fmt::format("density positivity violated: min rho = {:.6e} at t = {:.6g}", rho_min, t));
    if (!trace_ok) v.push_back(fmt::format("Q trace/symmetry drift {:.3e} at t = {:.6g}", trace_drift, t));
    return v;
}

std::vector<std::string> InvariantReport::soft_violations() const {
    std::vector<std::string> v;
    if (!c_ok) v.push_back(fmt::format("concentration left its initial range by {:.3e}", c_violation));
    if (!mass_ok) v.push_back(fmt::format("relative mass drift {:.3e}", mass_drift));
    if (!envelope_ok) v.push_back(fmt::format("density {:.6e} below envelope {:.6e}", rho_min, envelope));
    return v;
}

InvariantMonitor::InvariantMonitor(const State& s0, const Grid& grid, const PhysParams& p, const RegParams& r,
                                   MonitorConfig cfg, double vacuum_floor)
    : grid_(grid), p_(p), r_(r), cfg_(cfg), floor_(vacuum_floor) {
    if (cfg_.theta < 0.0) cfg_.theta = default_theta(p.gamma_exp);
    c_lo_ = interior_min(s0.c);
    c_hi_ = interior_max(s0.c);
    mass0_ = integrate(s0.rho, grid);
    rho_min0_ = interior_min(s0.rho);
    last_div_ = div_inf(s0);
}

double InvariantMonitor::div_inf(const State& s) const {
    const VectorField u = velocity(s, grid_, floor_);
    return max_abs(divergence(u, grid_));
}

InvariantReport InvariantMonitor::update(const State& s, double dt, bool integrability) {
    const double d = div_inf(s);
    div_integral_ += dt * std::max(d, last_div_);
    last_div_ = d;
    return evaluate(s, integrability);
}

InvariantReport InvariantMonitor::evaluate(const State& state, bool integrability) const {
    const Grid& grid = grid_;
    InvariantReport rep;
    rep.t = state.t;
    rep.c_min = interior_min(state.c);
    rep.c_max = interior_max(state.c);
    rep.c_violation = std::max({0.0, c_lo_ - rep.c_min, rep.c_max - c_hi_});
    rep.c_ok = rep.c_violation <= cfg_.c_tolerance;
    rep.mass = integrate(state.rho, grid);
    rep.mass_drift = mass0_ != 0.0 ? std::abs(rep.mass - mass0_) / std::abs(mass0_) : std::abs(rep.mass);
    rep.mass_ok = rep.mass_drift <= cfg_.mass_tolerance;
    rep.rho_min = interior_min(state.rho);
    rep.rho_positive = rep.rho_min >= 0.0;
    rep.envelope = rho_min0_ * std::exp(-div_integral_);
    rep.envelope_ok = rep.rho_min >= rep.envelope - cfg_.envelope_slack * rho_min0_;
    rep.trace_drift = cell_max(grid, [&](std::ptrdiff_t i) {
        const Matrix3 m = to_matrix(state.Q.at(i));
        double asym = 0.0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) asym = std::max(asym, std::abs(m(a, b) - m(b, a)));
        return std::abs(m.trace()) + asym;
    });
    rep.trace_ok = rep.trace_drift <= 1e-15;
    rep.theta = cfg_.theta;
    if (r_.delta > 0.0)
        rep.delta_rho_beta = r_.delta * cell_integral(grid, [&](std::ptrdiff_t i) {
                                 return std::pow(std::max(state.rho.data()[i], 0.0), r_.beta_exp);
                             });
    if (!integrability) return rep;
    const double ex = p_.gamma_exp + cfg_.theta;
    rep.rho_gamma_theta = cell_integral(grid, [&](std::ptrdiff_t i) { return std::pow(std::max(state.rho.data()[i], 0.0), ex); });
    rep.q_L10 = std::pow(cell_integral(grid, [&](std::ptrdiff_t i) { return std::pow(norm2(state.Q.at(i)), 5.0); }), 0.1);
    QField Q = state.Q;
    fill_ghosts(Q, grid);
    const auto g = q_gradient(Q, grid);
    const int dims = grid.dims();
    rep.grad_q_L10_3 = std::pow(cell_integral(grid, [&](std::ptrdiff_t i) {
                                    double s = 0.0;
                                    for (int a = 0; a < dims; ++a) s += norm2(g[static_cast<std::size_t>(a)].at(i));
                                    return std::pow(s, 5.0 / 3.0);
                                }),
                                0.3);
    return rep;
}

double truncation_distance(const ScalarField& rho1, const ScalarField& rho2, double k, double gamma_exp,
                           const Grid& grid) {
    const double q = gamma_exp + 1.0;
    return std::pow(cell_integral(grid, [&](std::ptrdiff_t i) {
                        const double d = cutoff_Tk(std::max(rho1.data()[i], 0.0), k) -
                                         cutoff_Tk(std::max(rho2.data()[i], 0.0), k);
                        return std::pow(std::abs(d), q);
                    }),
                    1.0 / q);
}

}  // namespace activelc
