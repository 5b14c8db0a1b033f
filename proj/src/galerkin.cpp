#include "activelc/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <numeric>

#include "activelc/errors.hpp"
#include "activelc/linear_solver.hpp"

namespace activelc {

namespace {

/// Interior values in compact row-major order.
Eigen::VectorXd pack(const ScalarField& f, const Grid& grid) {
    const Layout& L = grid.layout();
    Eigen::VectorXd v(static_cast<Eigen::Index>(L.interior_size()));
    const auto n = static_cast<std::size_t>(L.n[0]);
    for (std::size_t r = 0; r < L.rows(); ++r) {
        const double* p = f.data() + L.row_start(r);
        for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(r * n + i)] = p[i];
    }
    return v;
}

void unpack(const Eigen::Ref<const Eigen::VectorXd>& v, const Grid& grid, ScalarField& f) {
    const Layout& L = grid.layout();
    const auto n = static_cast<std::size_t>(L.n[0]);
    for (std::size_t r = 0; r < L.rows(); ++r) {
        double* p = f.data() + L.row_start(r);
        for (std::size_t i = 0; i < n; ++i) p[i] = v[static_cast<Eigen::Index>(r * n + i)];
    }
}

void require_conforming(const EigenBasis& B, const Grid& grid) {
    if (B.cells != grid.cells() || B.dims != grid.dims())
        throw ShapeError("eigenbasis was built for a different grid");
}

}  // namespace

EigenBasis build_basis(int n, const Grid& grid) {
    for (int a = 0; a < grid.dims(); ++a)
        if (grid.periodic(a)) throw ConfigError("the Galerkin eigenbasis needs DirichletZero walls on every axis");
    const auto& N = grid.cells();
    const int dims = grid.dims();
    const long total = static_cast<long>(N[0]) * N[1] * (dims == 3 ? N[2] : 1);
    if (n < 1 || n > total)
        throw ConfigError(fmt::format("requested {} Galerkin modes but the grid resolves only {} (k_d <= N_d)", n, total));

    using std::numbers::pi;
    std::vector<std::array<int, 3>> all;
    all.reserve(static_cast<std::size_t>(total));
    for (int kz = 1; kz <= (dims == 3 ? N[2] : 1); ++kz)
        for (int ky = 1; ky <= N[1]; ++ky)
            for (int kx = 1; kx <= N[0]; ++kx) all.push_back({kx, ky, dims == 3 ? kz : 0});
    auto lam = [&](const std::array<int, 3>& k) {
        double s = 0.0;
        for (int a = 0; a < dims; ++a) {
            const double w = k[static_cast<std::size_t>(a)] * pi / grid.lengths()[static_cast<std::size_t>(a)];
            s += w * w;
        }
        return s;
    };
    std::vector<double> lams(all.size());
    std::transform(all.begin(), all.end(), lams.begin(), lam);
    std::vector<std::size_t> order(all.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (lams[x] != lams[y]) return lams[x] < lams[y];
        return all[x] < all[y];
    });

    EigenBasis B;
    B.cells = N;
    B.dims = dims;
    B.cell_volume = grid.cell_volume();
    const Layout& L = grid.layout();
    const auto cells = static_cast<Eigen::Index>(L.interior_size());
    B.psi.resize(n, cells);
    for (int m = 0; m < n; ++m) {
        const auto& k = all[order[static_cast<std::size_t>(m)]];
        B.k.push_back(k);
        B.lambda.push_back(lams[order[static_cast<std::size_t>(m)]]);
    }
    parallel::for_range(static_cast<std::size_t>(n), [&](std::size_t b, std::size_t e) {
        for (std::size_t m = b; m < e; ++m) {
            const auto& k = B.k[m];
            std::array<std::vector<double>, 3> s1;
            for (int a = 0; a < 3; ++a) {
                const auto ua = static_cast<std::size_t>(a);
                s1[ua].resize(static_cast<std::size_t>(N[ua]));
                for (int i = 0; i < N[ua]; ++i)
                    s1[ua][static_cast<std::size_t>(i)] =
                        a < dims ? std::sin(k[ua] * pi * (i + 0.5) / N[ua]) : 1.0;
            }
            Eigen::Index c = 0;
            double norm = 0.0;
            for (int z = 0; z < N[2]; ++z)
                for (int y = 0; y < N[1]; ++y)
                    for (int x = 0; x < N[0]; ++x, ++c) {
                        const double v = s1[0][static_cast<std::size_t>(x)] * s1[1][static_cast<std::size_t>(y)] *
                                         s1[2][static_cast<std::size_t>(z)];
                        B.psi(static_cast<Eigen::Index>(m), c) = v;
                        norm += v * v;
                    }
            B.psi.row(static_cast<Eigen::Index>(m)) /= std::sqrt(norm * B.cell_volume);
        }
    });
    return B;
}

double discrete_eigenvalue(const EigenBasis& B, const Grid& grid, int i) {
    double s = 0.0;
    for (int a = 0; a < B.dims; ++a) {
        const double h = grid.h(a);
        const double t = std::sin(B.k[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] * std::numbers::pi * h /
                                  (2.0 * grid.lengths()[static_cast<std::size_t>(a)]));
        s += 4.0 / (h * h) * t * t;
    }
    return s;
}

Eigen::VectorXd modal_transform(const VectorField& v, const EigenBasis& B, const Grid& grid) {
    require_conforming(B, grid);
    const int n = B.size();
    Eigen::VectorXd a(B.unknowns());
    for (int c = 0; c < 3; ++c) {
        require_same_layout(v[c].layout(), grid.layout(), "modal_transform");
        a.segment(c * n, n) = B.cell_volume * (B.psi * pack(v[c], grid));
    }
    return a;
}

VectorField reconstruct(const Eigen::VectorXd& a, const EigenBasis& B, const Grid& grid) {
    require_conforming(B, grid);
    if (a.size() != B.unknowns())
        throw ShapeError(fmt::format("coefficient vector has {} entries, basis expects {}", a.size(), B.unknowns()));
    const int n = B.size();
    VectorField v(grid.layout());
    for (int c = 0; c < 3; ++c) {
        const Eigen::VectorXd vals = B.psi.transpose() * a.segment(c * n, n);
        unpack(vals, grid, v[c]);
    }
    fill_ghosts(v, grid, FieldRole::Velocity);
    return v;
}

Eigen::MatrixXd assemble_mass_block(const ScalarField& rho, const EigenBasis& B, const Grid& grid) {
    require_conforming(B, grid);
    const Eigen::VectorXd r = pack(rho, grid);
    const Eigen::MatrixXd weighted = B.psi * r.asDiagonal();
    const int n = B.size();
    Eigen::MatrixXd S(n, n);
    parallel::for_range(static_cast<std::size_t>(n), [&](std::size_t b, std::size_t e) {
        for (auto i = static_cast<Eigen::Index>(b); i < static_cast<Eigen::Index>(e); ++i)
            for (Eigen::Index j = 0; j <= i; ++j) S(i, j) = B.cell_volume * weighted.row(i).dot(B.psi.row(j));
    });
    S.triangularView<Eigen::StrictlyUpper>() = S.transpose();
    return S;
}

Eigen::MatrixXd assemble_mass(const ScalarField& rho, const EigenBasis& B, const Grid& grid) {
    const Eigen::MatrixXd S = assemble_mass_block(rho, B, grid);
    const int n = B.size();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(3 * n, 3 * n);
    for (int c = 0; c < 3; ++c) M.block(c * n, c * n, n, n) = S;
    return M;
}

Eigen::MatrixXd assemble_stiffness(const EigenBasis& B, const Grid& grid, const PhysParams& p) {
    require_conforming(B, grid);
    const int N = B.unknowns();
    Eigen::MatrixXd K(N, N);
    for (int col = 0; col < N; ++col) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(N);
        e[col] = 1.0;
        VectorField v = reconstruct(e, B, grid);
        VectorField Lv(grid.layout());
        viscous_apply(v, grid, p, Lv);
        K.col(col) = -modal_transform(Lv, B, grid);
    }
    // Symmetric up to roundoff by summation by parts; remove the asymmetry.
    return 0.5 * (K + K.transpose());
}

Eigen::VectorXd galerkin_momentum_step(const ScalarField& rho_old, const Eigen::VectorXd& a_old,
                                       const ScalarField& rho_new, const VectorField& force, double dt,
                                       const EigenBasis& B, const Eigen::MatrixXd& K, const Grid& grid,
                                       bool implicit) {
    const int n = B.size();
    const Eigen::MatrixXd S_old = assemble_mass_block(rho_old, B, grid);
    const Eigen::MatrixXd S_new = assemble_mass_block(rho_new, B, grid);
    Eigen::VectorXd rhs = modal_transform(force, B, grid) * dt;
    for (int c = 0; c < 3; ++c) rhs.segment(c * n, n) += S_old * a_old.segment(c * n, n);

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3 * n, 3 * n);
    for (int c = 0; c < 3; ++c) A.block(c * n, c * n, n, n) = S_new;
    if (implicit)
        A += dt * K;
    else
        rhs -= dt * (K * a_old);

    const Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success)
        throw NumericalError(
            "Galerkin mass matrix is not positive definite (vacuum in Galerkin mode); "
            "enforce rho >= eta > 0, e.g. with artificial viscosity epsilon > 0");
    Eigen::VectorXd a = llt.solve(rhs);
    const double bn = rhs.norm();
    if (bn > 0.0) {
        const double res = (A * a - rhs).norm() / bn;
        if (!(res <= 1e-10))
            throw NumericalError(fmt::format("Galerkin solve residual {:.3e} exceeds 1e-10", res));
    }
    return a;
}

double lipschitz_probe(const ScalarField& rho1, const ScalarField& rho2, const EigenBasis& B, const Grid& grid) {
    ScalarField diff(grid.layout());
    for (std::size_t i = 0; i < diff.size(); ++i) diff.data()[i] = std::abs(rho1.data()[i] - rho2.data()[i]);
    const double l1 = integrate(diff, grid);
    if (l1 == 0.0) return 0.0;
    auto inverse = [&](const ScalarField& rho) {
        const Eigen::MatrixXd S = assemble_mass_block(rho, B, grid);
        const Eigen::LLT<Eigen::MatrixXd> llt(S);
        if (llt.info() != Eigen::Success) throw NumericalError("singular mass matrix in Lipschitz probe");
        return Eigen::MatrixXd(llt.solve(Eigen::MatrixXd::Identity(S.rows(), S.cols())));
    };
    const Eigen::MatrixXd D = inverse(rho1) - inverse(rho2);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (D + D.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff() / l1;
}

double lipschitz_bound(const EigenBasis& B, double eta) {
    if (!(eta > 0.0)) throw DomainError("lipschitz_bound needs eta > 0");
    const int n = B.size();
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double m = (B.psi.row(i).cwiseProduct(B.psi.row(j))).cwiseAbs().maxCoeff();
            s += m * m;
        }
    return std::sqrt(s) / (eta * eta);
}

GalerkinBackend::GalerkinBackend(const Grid& grid, const PhysParams& p, int n_modes, bool implicit_viscous)
    : grid_(grid), basis_(build_basis(n_modes, grid)), K_(assemble_stiffness(basis_, grid, p)),
      implicit_(implicit_viscous) {}

VectorField GalerkinBackend::solve(const State& old_state, const VectorField& u_old, const ScalarField& rho_new,
                                   const VectorField& force, double dt, StepReport& /*report*/) const {
    const Eigen::VectorXd a_old = modal_transform(u_old, basis_, grid_);
    const Eigen::VectorXd a =
        galerkin_momentum_step(old_state.rho, a_old, rho_new, force, dt, basis_, K_, grid_, implicit_);
    return reconstruct(a, basis_, grid_);
}

}  // namespace activelc
