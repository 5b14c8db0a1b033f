#include "activelc/spectral.hpp"

#include <cmath>
#include <fftw3.h>
#include <fmt/format.h>
#include <map>
#include <numbers>
#include <tuple>

#include "activelc/errors.hpp"

namespace activelc {

namespace {

using std::numbers::pi;
constexpr std::size_t kBands = 3;  // main diagonal plus two upper bands

// FFTW's planner is not thread-safe.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct TransformPair {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;

    /// In-place transforms of `howmany` contiguous blocks of dims n (last fastest).
    void plan(double* buf, const std::vector<int>& n, int howmany, const std::vector<fftw_r2r_kind>& fwd,
              const std::vector<fftw_r2r_kind>& bwd) {
        int block = 1;
        for (int v : n) block *= v;
        const int rank = static_cast<int>(n.size());
        // FFTW_ESTIMATE picks the algorithm without timing, so results are reproducible.
        forward = fftw_plan_many_r2r(rank, n.data(), howmany, buf, nullptr, 1, block, buf, nullptr, 1, block,
                                     fwd.data(), FFTW_ESTIMATE);
        backward = fftw_plan_many_r2r(rank, n.data(), howmany, buf, nullptr, 1, block, buf, nullptr, 1, block,
                                      bwd.data(), FFTW_ESTIMATE);
        if (!forward || !backward) throw NumericalError("FFTW could not create a transform plan");
    }

    void release() {
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
        forward = backward = nullptr;
    }
};

void load_interior(const ScalarField& f, double* buf, double scale) {
    const Layout& L = f.layout();
    const auto nx = static_cast<std::size_t>(L.n[0]);
    for (std::size_t r = 0; r < L.rows(); ++r) {
        const double* src = f.data() + L.row_start(r);
        double* dst = buf + r * nx;
        for (std::size_t i = 0; i < nx; ++i) dst[i] = scale * src[i];
    }
}

void store_interior(const double* buf, ScalarField& f) {
    const Layout& L = f.layout();
    const auto nx = static_cast<std::size_t>(L.n[0]);
    for (std::size_t r = 0; r < L.rows(); ++r) std::copy(buf + r * nx, buf + (r + 1) * nx, f.data() + L.row_start(r));
}

/// (2 sin(pi f / 2N) / h)^2: -Lap_h eigenvalue of frequency f for DCT-II and DST-II alike.
double wall_eigenvalue(int f, int N, double h) { return std::pow(2.0 * std::sin(pi * f / (2.0 * N)) / h, 2); }

/// Ghost value beyond a wall for a cell value v.
double wall_ghost(BoundaryKind kind, double v) { return kind == BoundaryKind::DirichletZero ? -v : v; }

BoundaryKind opposite(BoundaryKind kind) {
    return kind == BoundaryKind::DirichletZero ? BoundaryKind::NeumannZero : BoundaryKind::DirichletZero;
}

/// Upper bands of the 1D wall operators -Lap and -D D, built column by column
/// from their stencils so the ghost rules are reproduced exactly.
void wall_bands(int N, double h, BoundaryKind kind, std::vector<double>& lap, std::vector<double>& wide) {
    const auto n = static_cast<std::size_t>(N);
    lap.assign(n * kBands, 0.0);
    wide.assign(n * kBands, 0.0);
    std::vector<double> v(n + 2), d(n + 2);  // one ghost each side
    for (std::size_t col = 0; col < n; ++col) {
        std::fill(v.begin(), v.end(), 0.0);
        v[col + 1] = 1.0;
        v[0] = wall_ghost(kind, v[1]);
        v[n + 1] = wall_ghost(kind, v[n]);
        for (std::size_t i = 1; i <= n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        d[0] = wall_ghost(opposite(kind), d[1]);
        d[n + 1] = wall_ghost(opposite(kind), d[n]);
        for (std::size_t row = 0; row < n; ++row) {
            if (col < row || col > row + 2) continue;
            const std::size_t i = row + 1;
            lap[row * kBands + (col - row)] = -(v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
            wide[row * kBands + (col - row)] = -(d[i + 1] - d[i - 1]) / (2.0 * h);
        }
    }
}

}  // namespace

/// LDL^T factors of the z systems of every (x, y) frequency line for one
/// coefficient set; stored as the eliminated upper bands and inverse pivots,
/// indexed [(k * kBands + o) * lines + line] with o = 0 holding 1 / pivot.
struct BandFactor {
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
    int axis = -1;
    int bands = 0;  // upper bands in use: 1 (tridiagonal) or 2
    std::vector<double> a;
};

struct SpectralHelmholtz::Plans {
    double* buf = nullptr;
    TransformPair full;
    TransformPair planar;
    // PCG calls the preconditioner repeatedly with the same coefficients.
    std::array<BandFactor, 4> factors;
    std::size_t next_factor = 0;

    ~Plans() {
        std::lock_guard lock(planner_mutex());
        full.release();
        planar.release();
        if (buf) fftw_free(buf);
    }
};

SpectralHelmholtz::SpectralHelmholtz(const Grid& grid, FieldRole role)
    : grid_(grid), role_(role), plans_(std::make_unique<Plans>()) {
    const int dims = grid.dims();
    std::vector<int> n;
    std::vector<fftw_r2r_kind> fwd, bwd;
    // FFTW is row-major with the last index fastest; x is our fastest axis.
    for (int a = dims - 1; a >= 0; --a) {
        const auto ua = static_cast<std::size_t>(a);
        const int N = grid.cells()[ua];
        const double h = grid.h(a);
        auto& e = eig_[ua];
        auto& w = wide_[ua];
        e.resize(static_cast<std::size_t>(N));
        w.resize(static_cast<std::size_t>(N));
        n.push_back(N);
        double scale = 2.0 * N;
        for (int k = 0; k < N; ++k) {
            const auto uk = static_cast<std::size_t>(k);
            switch (grid.kind(role, a)) {
                case BoundaryKind::NeumannZero:
                    e[uk] = wall_eigenvalue(k, N, h);
                    w[uk] = std::pow(std::sin(pi * k / N) / h, 2);
                    break;
                case BoundaryKind::DirichletZero:
                    e[uk] = wall_eigenvalue(k + 1, N, h);
                    w[uk] = std::pow(std::sin(pi * (k + 1) / N) / h, 2);
                    break;
                case BoundaryKind::Periodic: {
                    const int f = std::min(k, N - k);  // half-complex slot k holds frequency min(k, N - k)
                    e[uk] = std::pow(2.0 * std::sin(pi * f / N) / h, 2);
                    w[uk] = std::pow(std::sin(2.0 * pi * f / N) / h, 2);
                    scale = N;
                    break;
                }
            }
        }
        switch (grid.kind(role, a)) {
            case BoundaryKind::NeumannZero:
                fwd.push_back(FFTW_REDFT10);
                bwd.push_back(FFTW_REDFT01);
                break;
            case BoundaryKind::DirichletZero:
                fwd.push_back(FFTW_RODFT10);
                bwd.push_back(FFTW_RODFT01);
                break;
            case BoundaryKind::Periodic:
                fwd.push_back(FFTW_R2HC);
                bwd.push_back(FFTW_HC2R);
                break;
        }
        norm_full_ *= scale;
        if (a < 2) norm_planar_ *= scale;
    }
    for (int a = dims; a < 3; ++a) {
        eig_[static_cast<std::size_t>(a)] = {0.0};
        wide_[static_cast<std::size_t>(a)] = {0.0};
    }
    planar_ = dims == 3 && !grid.periodic(2);
    if (planar_) wall_bands(grid.cells()[2], grid.h(2), grid.kind(role, 2), lap_z_, wide_z_);

    std::lock_guard lock(planner_mutex());
    plans_->buf = fftw_alloc_real(grid.cell_count());
    if (!plans_->buf) throw std::bad_alloc();
    plans_->full.plan(plans_->buf, n, 1, fwd, bwd);
    if (planar_) {
        // Drop the z transform (first in FFTW order) and batch over z planes.
        const std::vector<int> nxy(n.begin() + 1, n.end());
        plans_->planar.plan(plans_->buf, nxy, grid.cells()[2], {fwd.begin() + 1, fwd.end()},
                            {bwd.begin() + 1, bwd.end()});
    }
}

SpectralHelmholtz::~SpectralHelmholtz() = default;

void SpectralHelmholtz::solve(double alpha, double beta, const ScalarField& rhs, ScalarField& x) const {
    solve(alpha, beta, 0, 0.0, rhs, x);
}

void SpectralHelmholtz::solve(double alpha, double beta, int axis, double gamma, const ScalarField& rhs,
                              ScalarField& x) const {
    if (!(alpha > 0.0) || !(beta >= 0.0) || !(gamma >= 0.0))
        throw DomainError(fmt::format("spectral Helmholtz solve needs alpha > 0 and beta, gamma >= 0 (got {}, {}, {})",
                                      alpha, beta, gamma));
    if (axis < 0 || axis > 2) throw DomainError(fmt::format("no axis {}", axis));
    const Layout& L = grid_.layout();
    require_same_layout(rhs.layout(), L, "SpectralHelmholtz::solve");
    if (x.layout() != L) x = ScalarField(L);
    const auto nx = static_cast<std::size_t>(L.n[0]);
    const auto ny = static_cast<std::size_t>(L.n[1]);
    const auto nz = static_cast<std::size_t>(L.n[2]);

    // Transformed-axis denominators beta e_b + gamma w_b (gamma only on `axis`).
    std::array<std::vector<double>, 3> d;
    for (std::size_t b = 0; b < 3; ++b) {
        const double g = static_cast<int>(b) == axis ? gamma : 0.0;
        d[b].resize(eig_[b].size());
        for (std::size_t k = 0; k < d[b].size(); ++k) d[b][k] = beta * eig_[b][k] + g * wide_[b][k];
    }

    std::lock_guard lock(mutex_);
    double* buf = plans_->buf;
    load_interior(rhs, buf, 1.0 / (planar_ ? norm_planar_ : norm_full_));
    if (!planar_) {
        fftw_execute(plans_->full.forward);
        for (std::size_t k = 0; k < nz; ++k)
            for (std::size_t j = 0; j < ny; ++j) {
                const double shift = alpha + d[1][j] + d[2][k];
                double* row = buf + (k * ny + j) * nx;
                for (std::size_t i = 0; i < nx; ++i) row[i] /= shift + d[0][i];
            }
        fftw_execute(plans_->full.backward);
    } else {
        fftw_execute(plans_->planar.forward);
        const std::size_t nl = nx * ny;
        const double gz = axis == 2 ? gamma : 0.0;
        const BandFactor& f = factor(alpha, beta, axis, gz, d);
        const auto p = static_cast<std::size_t>(f.bands);
        const double* a = f.a.data();
        // Forward elimination and back substitution for all lines at once;
        // lines are contiguous within a plane, so the inner loops vectorise.
        for (std::size_t k = 0; k < nz; ++k) {
            const double* inv = a + (k * kBands) * nl;
            const double* rk = buf + k * nl;
            for (std::size_t r = 1; r <= p && k + r < nz; ++r) {
                const double* up = a + (k * kBands + r) * nl;
                double* rr = buf + (k + r) * nl;
                for (std::size_t l = 0; l < nl; ++l) rr[l] -= up[l] * inv[l] * rk[l];
            }
        }
        for (std::size_t k = nz; k-- > 0;) {
            double* rk = buf + k * nl;
            for (std::size_t o = 1; o <= p && k + o < nz; ++o) {
                const double* up = a + (k * kBands + o) * nl;
                const double* xo = buf + (k + o) * nl;
                for (std::size_t l = 0; l < nl; ++l) rk[l] -= up[l] * xo[l];
            }
            const double* inv = a + (k * kBands) * nl;
            for (std::size_t l = 0; l < nl; ++l) rk[l] *= inv[l];
        }
        fftw_execute(plans_->planar.backward);
    }
    store_interior(buf, x);
    fill_ghosts(x, grid_, role_);
}

const BandFactor& SpectralHelmholtz::factor(double alpha, double beta, int axis, double gamma_z,
                                            const std::array<std::vector<double>, 3>& d) const {
    for (const BandFactor& f : plans_->factors)
        if (!f.a.empty() && f.alpha == alpha && f.beta == beta && f.gamma == gamma_z && f.axis == axis) return f;
    BandFactor& f = plans_->factors[plans_->next_factor];
    plans_->next_factor = (plans_->next_factor + 1) % plans_->factors.size();
    const Layout& L = grid_.layout();
    const auto nx = static_cast<std::size_t>(L.n[0]);
    const auto ny = static_cast<std::size_t>(L.n[1]);
    const auto nz = static_cast<std::size_t>(L.n[2]);
    const std::size_t nl = nx * ny;
    f.alpha = alpha;
    f.beta = beta;
    f.gamma = gamma_z;
    f.axis = axis;
    f.bands = gamma_z > 0.0 ? 2 : 1;
    f.a.assign(nz * kBands * nl, 0.0);
    double* a = f.a.data();
    for (std::size_t k = 0; k < nz; ++k)
        for (std::size_t o = 0; o < kBands; ++o) {
            const double c = beta * lap_z_[k * kBands + o] + gamma_z * wide_z_[k * kBands + o];
            double* ao = a + (k * kBands + o) * nl;
            if (o == 0) {
                for (std::size_t j = 0; j < ny; ++j)
                    for (std::size_t i = 0; i < nx; ++i) ao[j * nx + i] = alpha + d[0][i] + d[1][j] + c;
            } else {
                std::fill(ao, ao + nl, c);
            }
        }
    // Symmetric positive definite, so no pivoting; the lower entry (k + r, k)
    // equals the current upper entry (k, k + r).
    const auto p = static_cast<std::size_t>(f.bands);
    for (std::size_t k = 0; k < nz; ++k) {
        double* piv = a + (k * kBands) * nl;
        for (std::size_t l = 0; l < nl; ++l) piv[l] = 1.0 / piv[l];
        for (std::size_t r = 1; r <= p && k + r < nz; ++r) {
            const double* akr = a + (k * kBands + r) * nl;
            for (std::size_t o = r; o <= p; ++o) {
                const double* ako = a + (k * kBands + o) * nl;
                double* dst = a + ((k + r) * kBands + (o - r)) * nl;
                for (std::size_t l = 0; l < nl; ++l) dst[l] -= akr[l] * piv[l] * ako[l];
            }
        }
    }
    return f;
}

const SpectralHelmholtz& spectral_helmholtz(const Grid& grid, FieldRole role) {
    using Key = std::tuple<int, std::array<int, 3>, std::array<double, 3>, std::array<bool, 3>, int>;
    static std::mutex m;
    static std::map<Key, std::unique_ptr<SpectralHelmholtz>> cache;
    const Key key{grid.dims(), grid.cells(), grid.lengths(), {grid.periodic(0), grid.periodic(1), grid.periodic(2)},
                  static_cast<int>(role)};
    std::lock_guard lock(m);
    auto& slot = cache[key];
    if (!slot) slot = std::make_unique<SpectralHelmholtz>(grid, role);
    return *slot;
}

}  // namespace activelc
