#include "activelc/initial.hpp"

#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <random>
#include <vector>

#include "activelc/errors.hpp"
#include "activelc/io.hpp"

namespace activelc {

namespace {

using std::numbers::pi;

constexpr int kMaxWave = 3;

/// Uniform double in [0, 1) from the top 53 bits, independent of the library's distributions.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

enum class Parity { Even, Odd };  // Even: cos (Neumann-compatible); Odd: sin (vanishes on walls)

/// Per-axis basis value of wave number k at normalised coordinate s in (0, 1).
double basis(const Grid& g, int axis, int k, double s, Parity parity) {
    if (axis >= g.dims()) return 1.0;
    if (g.periodic(axis)) return std::cos(2.0 * pi * k * s);
    return parity == Parity::Even ? std::cos(pi * k * s) : std::sin(pi * k * s);
}

/// Random low-pass field sampled on the interior.
void random_field(ScalarField& f, const Grid& g, std::mt19937_64& rng, Parity parity) {
    const int kmin = (parity == Parity::Odd) ? 1 : 0;
    std::array<int, 3> kmax{};
    for (int a = 0; a < 3; ++a) kmax[static_cast<std::size_t>(a)] = a < g.dims() ? kMaxWave : 0;
    struct Mode {
        std::array<int, 3> k;
        double amp;
    };
    std::vector<Mode> modes;
    for (int kz = 0; kz <= kmax[2]; ++kz)
        for (int ky = 0; ky <= kmax[1]; ++ky)
            for (int kx = 0; kx <= kmax[0]; ++kx) {
                const std::array<int, 3> k{kx, ky, kz};
                bool ok = true;
                for (int a = 0; a < g.dims(); ++a)
                    if (!g.periodic(a) && k[static_cast<std::size_t>(a)] < kmin) ok = false;
                if (!ok) continue;
                const double k2 = double(kx * kx + ky * ky + kz * kz);
                modes.push_back({k, (2.0 * unit(rng) - 1.0) / (1.0 + k2)});
            }
    const auto& n = g.cells();
    const auto& len = g.lengths();
    // table[a][k][i]: axis-a basis function k at cell centre i.
    std::array<std::vector<std::vector<double>>, 3> table;
    for (int a = 0; a < 3; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        for (int k = 0; k <= kmax[ua]; ++k) {
            std::vector<double> row(static_cast<std::size_t>(n[ua]));
            for (int i = 0; i < n[ua]; ++i) row[static_cast<std::size_t>(i)] = basis(g, a, k, g.center(a, i) / len[ua], parity);
            table[ua].push_back(std::move(row));
        }
    }
    for (int kk = 0; kk < n[2]; ++kk)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i) {
                const std::array<std::size_t, 3> idx{static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                                                     static_cast<std::size_t>(kk)};
                double v = 0.0;
                for (const auto& m : modes) {
                    double b = m.amp;
                    for (std::size_t a = 0; a < 3; ++a) b *= table[a][static_cast<std::size_t>(m.k[a])][idx[a]];
                    v += b;
                }
                f(i, j, kk) = v;
            }
}

/// Affine map of the interior range onto [lo, hi]; a constant field maps to the midpoint.
void rescale(ScalarField& f, const Grid& g, double lo, double hi) {
    const double fmin = interior_min(f);
    const double fmax = interior_max(f);
    const auto& n = g.cells();
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i)
                f(i, j, k) = fmax > fmin ? lo + (hi - lo) * (f(i, j, k) - fmin) / (fmax - fmin) : 0.5 * (lo + hi);
}

void scale_interior(ScalarField& f, const Grid& g, double s) {
    const auto& n = g.cells();
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i) f(i, j, k) *= s;
}

void set_momentum(State& s, const VectorField& u, const Grid& g) {
    const auto& n = g.cells();
    for (int a = 0; a < 3; ++a)
        for (int k = 0; k < n[2]; ++k)
            for (int j = 0; j < n[1]; ++j)
                for (int i = 0; i < n[0]; ++i) s.m[a](i, j, k) = s.rho(i, j, k) * u[a](i, j, k);
}

}  // namespace

IcPreset parse_ic_preset(const std::string& name) {
    if (name == "quiescent") return IcPreset::Quiescent;
    if (name == "random-smooth" || name == "random_smooth") return IcPreset::RandomSmooth;
    if (name == "manufactured") return IcPreset::Manufactured;
    if (name == "file") return IcPreset::File;
    throw ConfigError(fmt::format("unknown initial-condition preset '{}' (quiescent, random-smooth, manufactured, file)", name));
}

std::string to_string(IcPreset preset) {
    switch (preset) {
        case IcPreset::Quiescent: return "quiescent";
        case IcPreset::RandomSmooth: return "random-smooth";
        case IcPreset::Manufactured: return "manufactured";
        case IcPreset::File: return "file";
    }
    return "?";
}

State quiescent_state(const Grid& grid, const PhysParams& p) {
    State s(grid.layout());
    s.c.fill(p.c_star);
    s.rho.fill(1.0);
    return s;
}

State random_smooth_state(const Grid& grid, const PhysParams& p, std::uint64_t seed, double u_amplitude,
                          double q_amplitude) {
    std::mt19937_64 rng(seed);
    State s(grid.layout());
    random_field(s.c, grid, rng, Parity::Even);
    rescale(s.c, grid, 0.5 * p.c_star, 1.5 * p.c_star);
    random_field(s.rho, grid, rng, Parity::Even);
    rescale(s.rho, grid, 0.5, 1.5);

    VectorField u(grid.layout());
    const int ncomp = grid.dims();
    for (int a = 0; a < ncomp; ++a) random_field(u[a], grid, rng, Parity::Odd);
    double umax = 0.0;
    for (int a = 0; a < ncomp; ++a) umax = std::max(umax, max_abs(u[a]));
    if (umax > 0.0)
        for (int a = 0; a < ncomp; ++a) scale_interior(u[a], grid, u_amplitude / umax);
    set_momentum(s, u, grid);

    // Q11, Q22, Q12 always; Q13, Q23 only in 3D.
    const int nq = grid.dims() == 3 ? 5 : 3;
    for (int a = 0; a < nq; ++a) random_field(s.Q[a], grid, rng, Parity::Even);
    const double qmax = std::max({max_abs(s.Q[0]), max_abs(s.Q[1]), max_abs(s.Q[2]), max_abs(s.Q[3]), max_abs(s.Q[4])});
    ScalarField q33(grid.layout());
    for (std::size_t i = 0; i < q33.size(); ++i) q33.data()[i] = -(s.Q[0].data()[i] + s.Q[1].data()[i]);
    const double qscale = std::max(qmax, max_abs(q33));
    if (qscale > 0.0)
        for (int a = 0; a < nq; ++a) scale_interior(s.Q[a], grid, q_amplitude / qscale);
    fill_state_ghosts(s, grid);
    return s;
}

State manufactured_state(const Grid& grid, const PhysParams& p) {
    State s(grid.layout());
    const auto& len = grid.lengths();
    auto wave = [&](int axis, double x) {
        if (axis >= grid.dims()) return 1.0;
        const double t = x / len[static_cast<std::size_t>(axis)];
        return grid.periodic(axis) ? std::cos(2.0 * pi * t) : std::cos(pi * t);
    };
    auto bubble = [&](int axis, double x) {
        if (axis >= grid.dims()) return 1.0;
        const double t = x / len[static_cast<std::size_t>(axis)];
        return grid.periodic(axis) ? std::sin(2.0 * pi * t) : 4.0 * t * (1.0 - t);
    };
    VectorField u(grid.layout());
    const auto& n = grid.cells();
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i) {
                const double x = grid.center(0, i), y = grid.center(1, j), z = grid.center(2, k);
                const double w = wave(0, x) * wave(1, y) * wave(2, z);
                const double b = bubble(0, x) * bubble(1, y) * bubble(2, z);
                s.c(i, j, k) = p.c_star * (1.0 + 0.2 * w);
                s.rho(i, j, k) = 1.0 + 0.3 * w;
                u[0](i, j, k) = 0.1 * b * (1.0 + 0.5 * wave(1, y));
                u[1](i, j, k) = -0.05 * b * (1.0 + 0.5 * wave(0, x));
                if (grid.dims() == 3) u[2](i, j, k) = 0.05 * b;
                s.Q[0](i, j, k) = 0.1 * w;
                s.Q[1](i, j, k) = -0.05 * wave(0, x);
                s.Q[2](i, j, k) = 0.08 * wave(0, x) * wave(1, y);
                if (grid.dims() == 3) {
                    s.Q[3](i, j, k) = 0.04 * wave(2, z);
                    s.Q[4](i, j, k) = 0.03 * wave(1, y) * wave(2, z);
                }
            }
    set_momentum(s, u, grid);
    fill_state_ghosts(s, grid);
    return s;
}

State make_initial_state(const IcSpec& spec, const Grid& grid, const PhysParams& p) {
    switch (spec.preset) {
        case IcPreset::Quiescent: return quiescent_state(grid, p);
        case IcPreset::RandomSmooth: return random_smooth_state(grid, p, spec.seed, spec.u_amplitude, spec.q_amplitude);
        case IcPreset::Manufactured: return manufactured_state(grid, p);
        case IcPreset::File: {
            if (spec.path.empty()) throw ConfigError("initial preset 'file' requires [initial] path");
            State s = read_checkpoint(spec.path, grid).state;
            fill_state_ghosts(s, grid);
            return s;
        }
    }
    throw ConfigError("unknown initial-condition preset");
}

void validate_initial_state(const State& s, const Grid& grid, double c_lower, double c_upper) {
    if (!(c_lower > 0.0) || !(c_upper >= c_lower))
        throw ConfigError(fmt::format("concentration bounds must satisfy 0 < c_lower <= c_upper (got {}, {})", c_lower, c_upper));
    if (!all_finite(s.c) || !all_finite(s.rho) || !all_finite(s.m[0]) || !all_finite(s.m[1]) || !all_finite(s.m[2]))
        throw ConfigError("initial data contains non-finite values");
    for (int a = 0; a < 5; ++a)
        if (!all_finite(s.Q[a])) throw ConfigError("initial Q contains non-finite values");
    const double cmin = interior_min(s.c), cmax = interior_max(s.c);
    if (cmin < c_lower || cmax > c_upper)
        throw ConfigError(fmt::format("initial concentration range [{}, {}] violates c_lower <= c0 <= c_upper = [{}, {}]",
                                      cmin, cmax, c_lower, c_upper));
    const double rmin = interior_min(s.rho);
    if (rmin < 0.0) throw ConfigError(fmt::format("compatibility violated: rho0 >= 0 required (min rho0 = {})", rmin));
    const auto& n = grid.cells();
    double kinetic = 0.0;
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i) {
                const double r = s.rho(i, j, k);
                const double m2 = s.m[0](i, j, k) * s.m[0](i, j, k) + s.m[1](i, j, k) * s.m[1](i, j, k) +
                                  s.m[2](i, j, k) * s.m[2](i, j, k);
                if (r == 0.0) {
                    if (m2 != 0.0)
                        throw ConfigError(fmt::format("compatibility violated: m0 = 0 required where rho0 = 0 (cell {}, {}, {})", i, j, k));
                    continue;
                }
                kinetic += m2 / r;
            }
    if (!std::isfinite(kinetic)) throw ConfigError("compatibility violated: |m0|^2 / rho0 must be integrable");
}

}  // namespace activelc
