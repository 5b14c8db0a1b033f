#include "activelc/state.hpp"

#include <algorithm>

namespace activelc {

VectorField velocity(const State& s, const Grid& grid, double vacuum_floor) {
    const Layout& L = grid.layout();
    VectorField u(L);
    const auto n = static_cast<std::size_t>(L.n[0]);
    for (int a = 0; a < 3; ++a) {
        for_each_row(L, [&](std::ptrdiff_t o, int, int) {
            const double* m = s.m[a].data() + o;
            const double* r = s.rho.data() + o;
            double* d = u[a].data() + o;
            for (std::size_t i = 0; i < n; ++i) d[i] = m[i] / std::max(r[i], vacuum_floor);
        });
    }
    fill_ghosts(u, grid, FieldRole::Velocity);
    return u;
}

void fill_state_ghosts(State& s, const Grid& grid) {
    fill_ghosts(s.c, grid, FieldRole::Scalar);
    fill_ghosts(s.rho, grid, FieldRole::Scalar);
    fill_ghosts(s.m, grid, FieldRole::Velocity);
    fill_ghosts(s.Q, grid);
}

}  // namespace activelc
