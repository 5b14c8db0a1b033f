#pragma once

#include "activelc/grid.hpp"

namespace activelc {

/// Conserved unknowns (c, rho, m = rho u, Q) at time t.
struct State {
    double t = 0.0;
    ScalarField c;
    ScalarField rho;
    VectorField m;
    QField Q;

    State() = default;
    explicit State(const Layout& L) : c(L), rho(L), m(L), Q(L) {}

    friend bool operator==(const State&, const State&) = default;
};

/// u = m / max(rho, floor), with DirichletZero ghosts filled.
[[nodiscard]] VectorField velocity(const State& s, const Grid& grid, double vacuum_floor);

/// Refills ghosts of every field according to its role.
void fill_state_ghosts(State& s, const Grid& grid);

}  // namespace activelc
