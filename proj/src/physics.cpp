#include "activelc/physics.hpp"

#include <cmath>
#include <fmt/format.h>

#include "activelc/errors.hpp"

namespace activelc {

namespace {

std::size_t row_len(const Layout& L) { return static_cast<std::size_t>(L.n[0]); }

/// out += scale * sum_j d_j T[j] with centred differences (ghosts of T filled).
void add_row_divergence(const std::array<const ScalarField*, 3>& T, const Grid& grid, double scale,
                        ScalarField& out) {
    const Layout& L = grid.layout();
    const auto n = row_len(L);
    for (int j = 0; j < grid.dims(); ++j) {
        const ScalarField* t = T[static_cast<std::size_t>(j)];
        if (t == nullptr) continue;
        const std::ptrdiff_t s = L.stride[static_cast<std::size_t>(j)];
        const double f = scale * 0.5 / grid.h(j);
        for_each_row(L, [&](std::ptrdiff_t o, int, int) {
            const double* p = t->data() + o;
            double* d = out.data() + o;
            for (std::size_t i = 0; i < n; ++i) d[i] += (p[i + s] - p[i - s]) * f;
        });
    }
}

/// Symmetric 3x3 tensor field stored as 6 entries (11, 22, 33, 12, 13, 23).
struct SymField {
    std::array<ScalarField, 6> e;
    explicit SymField(const Layout& L) : e{ScalarField(L), ScalarField(L), ScalarField(L), ScalarField(L), ScalarField(L), ScalarField(L)} {}
    static constexpr std::array<std::array<int, 3>, 3> idx{{{0, 3, 4}, {3, 1, 5}, {4, 5, 2}}};
    [[nodiscard]] const ScalarField& at(int i, int j) const {
        return e[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])];
    }
};

/// Divergence of a symmetric tensor field: out_i = sum_j d_j S_ij.
VectorField divergence_sym(SymField& S, const Grid& grid, double scale) {
    for (auto& f : S.e) fill_ghosts(f, grid, FieldRole::Scalar);
    VectorField out(grid.layout());
    for (int i = 0; i < 3; ++i)
        add_row_divergence({&S.at(i, 0), &S.at(i, 1), &S.at(i, 2)}, grid, scale, out[i]);
    return out;
}

}  // namespace

QField molecular_field(const QField& Q, const ScalarField& c, const Grid& grid, const PhysParams& p) {
    QField H = laplacian(Q, grid);
    const Layout& L = grid.layout();
    const auto n = row_len(L);
    for_each_row(L, [&](std::ptrdiff_t o, int, int) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto idx = o + static_cast<std::ptrdiff_t>(i);
            H.set(idx, H.at(idx) + bulk_field(Q.at(idx), c.data()[idx], p));
        }
    });
    return H;
}

double q_face_gradient_norm2(const QField& Q, const Grid& grid) {
    // |dQ|^2 = dq11^2 + dq22^2 + (dq11 + dq22)^2 + 2 (dq12^2 + dq13^2 + dq23^2)
    ScalarField q33(grid.layout());
    for (std::size_t i = 0; i < q33.size(); ++i) q33.data()[i] = Q[0].data()[i] + Q[1].data()[i];
    return face_gradient_norm2(Q[0], grid) + face_gradient_norm2(Q[1], grid) +
           face_gradient_norm2(q33, grid) +
           2.0 * (face_gradient_norm2(Q[2], grid) + face_gradient_norm2(Q[3], grid) +
                  face_gradient_norm2(Q[4], grid));
}

double free_energy(const QField& Q, const ScalarField& c, const Grid& grid, const PhysParams& p) {
    const Layout& L = grid.layout();
    const auto n = row_len(L);
    const double bulk = reduce_rows(L, [&](std::ptrdiff_t o) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto idx = o + static_cast<std::ptrdiff_t>(i);
            const auto inv = scalar_invariants(Q.at(idx));
            s += 0.25 * (c.data()[idx] - p.c_star) * inv.trQ2 - p.b / 3.0 * inv.trQ3 +
                 0.25 * p.c_star * inv.trQ2_sq;
        }
        return s;
    });
    return grid.cell_volume() * bulk + 0.5 * q_face_gradient_norm2(Q, grid);
}

std::array<QField, 3> q_gradient(const QField& Q, const Grid& grid) {
    std::array<QField, 3> g{QField(grid.layout()), QField(grid.layout()), QField(grid.layout())};
    for (int a = 0; a < grid.dims(); ++a)
        for (int k = 0; k < 5; ++k) partial(Q[k], grid, a, g[static_cast<std::size_t>(a)][k]);
    return g;
}

ScalarField capital_F(const QField& Q, const Grid& grid, const PhysParams& p) {
    const auto g = q_gradient(Q, grid);
    const Layout& L = grid.layout();
    ScalarField F(L);
    const auto n = row_len(L);
    const int dims = grid.dims();
    for_each_row(L, [&](std::ptrdiff_t o, int, int) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto idx = o + static_cast<std::ptrdiff_t>(i);
            double grad2 = 0.0;
            for (int a = 0; a < dims; ++a) grad2 += norm2(g[static_cast<std::size_t>(a)].at(idx));
            const double t2 = norm2(Q.at(idx));
            F.data()[idx] = 0.5 * grad2 + 0.5 * t2 + 0.25 * p.c_star * t2 * t2;
        }
    });
    return F;
}

double pressure(double rho, const PhysParams& p, const RegParams& r) {
    if (rho < 0.0) throw DomainError(fmt::format("pressure of negative density {}", rho));
    double P = std::pow(rho, p.gamma_exp);
    if (r.delta > 0.0) P += r.delta * std::pow(rho, r.beta_exp);
    return P;
}

ScalarField pressure(const ScalarField& rho, const PhysParams& p, const RegParams& r) {
    ScalarField P(rho.layout());
    for (std::size_t i = 0; i < rho.size(); ++i) P.data()[i] = pressure(rho.data()[i], p, r);
    return P;
}

double sound_speed2(double rho, const PhysParams& p, const RegParams& r) {
    const double z = std::max(rho, 0.0);
    double c2 = p.gamma_exp * std::pow(z, p.gamma_exp - 1.0);
    if (r.delta > 0.0) c2 += r.delta * r.beta_exp * std::pow(z, r.beta_exp - 1.0);
    return c2;
}

EnergyComponents total_energy(const State& s, const Grid& grid, const PhysParams& p, const RegParams& r,
                              double vacuum_floor) {
    const Layout& L = grid.layout();
    const auto n = row_len(L);
    const double vol = grid.cell_volume();
    auto sum = [&](auto&& cell) {
        return vol * reduce_rows(L, [&](std::ptrdiff_t o) {
                   double acc = 0.0;
                   for (std::size_t i = 0; i < n; ++i) acc += cell(o + static_cast<std::ptrdiff_t>(i));
                   return acc;
               });
    };
    EnergyComponents e;
    e.concentration = sum([&](std::ptrdiff_t i) { return 0.5 * s.c.data()[i] * s.c.data()[i]; });
    e.kinetic = sum([&](std::ptrdiff_t i) {
        const double r0 = s.rho.data()[i];
        const double inv = 1.0 / std::max(r0, vacuum_floor);
        double m2 = 0.0;
        for (int a = 0; a < 3; ++a) m2 += s.m[a].data()[i] * s.m[a].data()[i];
        return 0.5 * m2 * r0 * inv * inv;
    });
    e.pressure = sum([&](std::ptrdiff_t i) {
        return std::pow(std::max(s.rho.data()[i], 0.0), p.gamma_exp) / (p.gamma_exp - 1.0);
    });
    if (r.delta > 0.0)
        e.artificial = sum([&](std::ptrdiff_t i) {
            return r.delta * std::pow(std::max(s.rho.data()[i], 0.0), r.beta_exp) / (r.beta_exp - 1.0);
        });
    e.q_bulk = sum([&](std::ptrdiff_t i) {
        const double t2 = norm2(s.Q.at(i));
        return 0.5 * t2 + 0.25 * p.c_star * t2 * t2;
    });
    e.q_elastic = 0.5 * q_face_gradient_norm2(s.Q, grid);
    return e;
}

Forces stress_forces(const State& s, const Grid& grid, const PhysParams& p) {
    const Layout& L = grid.layout();
    const auto n = row_len(L);
    const int dims = grid.dims();
    const auto g = q_gradient(s.Q, grid);
    const QField lapQ = laplacian(s.Q, grid);

    SymField tau(L);
    SymField cq(L);
    std::array<ScalarField, 3> sigma{ScalarField(L), ScalarField(L), ScalarField(L)};  // 12, 13, 23
    for_each_row(L, [&](std::ptrdiff_t o, int, int) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto idx = o + static_cast<std::ptrdiff_t>(i);
            const QTensor q = s.Q.at(idx);
            std::array<QTensor, 3> dq{g[0].at(idx), g[1].at(idx), g[2].at(idx)};
            double grad2 = 0.0;
            for (int a = 0; a < dims; ++a) grad2 += norm2(dq[static_cast<std::size_t>(a)]);
            const double t2 = norm2(q);
            const double F = 0.5 * grad2 + 0.5 * t2 + 0.25 * p.c_star * t2 * t2;
            for (int a = 0; a < 3; ++a) {
                for (int b = a; b < 3; ++b) {
                    const double v = (a == b ? F : 0.0) -
                                     frob(dq[static_cast<std::size_t>(a)], dq[static_cast<std::size_t>(b)]);
                    const int k = SymField::idx[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
                    tau.e[static_cast<std::size_t>(k)].data()[idx] = v;
                }
            }
            const Matrix3 Qm = to_matrix(q);
            const Matrix3 Lm = to_matrix(lapQ.at(idx));
            const Matrix3 sg = Qm * Lm - Lm * Qm;
            sigma[0].data()[idx] = sg(0, 1);
            sigma[1].data()[idx] = sg(0, 2);
            sigma[2].data()[idx] = sg(1, 2);
            const double c2 = s.c.data()[idx] * s.c.data()[idx];
            cq.e[0].data()[idx] = c2 * q.q[QTensor::k11];
            cq.e[1].data()[idx] = c2 * q.q[QTensor::k22];
            cq.e[2].data()[idx] = c2 * q.q33();
            cq.e[3].data()[idx] = c2 * q.q[QTensor::k12];
            cq.e[4].data()[idx] = c2 * q.q[QTensor::k13];
            cq.e[5].data()[idx] = c2 * q.q[QTensor::k23];
        }
    });

    Forces f;
    f.f_tau = divergence_sym(tau, grid, 1.0);
    f.f_act = divergence_sym(cq, grid, p.sigma_star);

    for (auto& sg : sigma) fill_ghosts(sg, grid, FieldRole::Scalar);
    f.f_rot = VectorField(L);
    add_row_divergence({nullptr, &sigma[0], &sigma[1]}, grid, 1.0, f.f_rot[0]);
    add_row_divergence({&sigma[0], nullptr, nullptr}, grid, -1.0, f.f_rot[1]);
    add_row_divergence({nullptr, nullptr, &sigma[2]}, grid, 1.0, f.f_rot[1]);
    add_row_divergence({&sigma[1], &sigma[2], nullptr}, grid, -1.0, f.f_rot[2]);
    return f;
}

double rotational_stress_symmetry_defect(const QField& Q, const ScalarField& c, const Grid& grid,
                                         const PhysParams& p) {
    const QField H = molecular_field(Q, c, grid, p);
    const Layout& L = grid.layout();
    const auto n = row_len(L);
    return parallel::max(L.rows(), [&](std::size_t r) {
        const std::ptrdiff_t o = L.row_start(r);
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto idx = o + static_cast<std::ptrdiff_t>(i);
            const Matrix3 Qm = to_matrix(Q.at(idx));
            const Matrix3 Hm = to_matrix(H.at(idx));
            const Matrix3 sg = Qm * Hm - Hm * Qm;
            const Matrix3 sym = sg + transpose(sg);
            for (double v : sym.a) m = std::max(m, std::abs(v));
        }
        return m;
    });
}

}  // namespace activelc
