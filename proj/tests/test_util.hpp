#pragma once

#include <cmath>
#include <random>

#include "activelc/grid.hpp"

namespace testutil {

using activelc::Grid;
using activelc::ScalarField;

template <class Fn>
void set_interior(ScalarField& f, const Grid& g, Fn fn) {
    const auto& n = g.cells();
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i) f(i, j, k) = fn(g.center(0, i), g.center(1, j), g.center(2, k));
}

/// Values on ghosts as well, from an analytic extension.
template <class Fn>
void set_everywhere(ScalarField& f, const Grid& g, Fn fn) {
    const auto& L = g.layout();
    for (int k = -L.g[2]; k < L.n[2] + L.g[2]; ++k)
        for (int j = -L.g[1]; j < L.n[1] + L.g[1]; ++j)
            for (int i = -L.g[0]; i < L.n[0] + L.g[0]; ++i)
                f(i, j, k) = fn(g.center(0, i), g.center(1, j), g.center(2, k));
}

inline void randomize(ScalarField& f, const Grid& g, unsigned seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(lo, hi);
    set_interior(f, g, [&](double, double, double) { return d(rng); });
}

template <class Fn>
double max_interior_error(const ScalarField& f, const Grid& g, Fn exact) {
    double e = 0.0;
    const auto& n = g.cells();
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i)
                e = std::max(e, std::abs(f(i, j, k) - exact(g.center(0, i), g.center(1, j), g.center(2, k))));
    return e;
}

}  // namespace testutil
