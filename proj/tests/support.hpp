#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include <cklab/cklab.hpp>

namespace cklab::test {

inline double rel_err(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

/// Interior states with a, b, c in [lo, hi] and alpha in [0.1, hi].
inline std::vector<State> random_states(std::size_t n, std::uint64_t seed, double lo = 0.2, double hi = 3.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi), al(0.1, hi);
    std::vector<State> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({0.0, u(rng), u(rng), u(rng), al(rng)});
    return out;
}

inline std::vector<GroupSpec> studied_groups() {
    return {GroupSpec::heisenberg(), GroupSpec::su2(1.0), GroupSpec::su2(0.3), GroupSpec::e2()};
}

inline Trajectory unstable_run(const GroupSpec& g, Family fam, double q, double eps = 1e-6) {
    SeedOptions so;
    so.epsilon = eps;
    return unstable_curve_run(g, fam, q, so);
}

}  // namespace cklab::test
