#pragma once

#include <string_view>
#include <vector>

#include "core.hpp"

namespace cklab {

/// Independent variable of a sampled solution.
///   T   : the system's own time t
///   Tau : d tau = sqrt2 abc dt
///   R   : geodesic distance, dr = abc dt
///   Q   : dq = a^2 dt
enum class Chart { T, Tau, R, Q };

enum class EndKind { Infinite, FiniteBlowup, EquilibriumCapture, UserLimit };

inline std::string_view to_string(Chart c) {
    switch (c) {
        case Chart::T: return "t";
        case Chart::Tau: return "tau";
        case Chart::R: return "r";
        case Chart::Q: return "q";
    }
    return "t";
}

inline std::string_view to_string(EndKind k) {
    switch (k) {
        case EndKind::Infinite: return "Infinite";
        case EndKind::FiniteBlowup: return "FiniteBlowup";
        case EndKind::EquilibriumCapture: return "EquilibriumCapture";
        case EndKind::UserLimit: return "UserLimit";
    }
    return "UserLimit";
}

struct Endpoint {
    /// Coordinate of the end in the trajectory's chart. For FiniteBlowup this
    /// is the extrapolated blowup coordinate, not the last sample.
    double value = 0.0;
    EndKind kind = EndKind::UserLimit;
    /// t-chart value of the end, kept across chart changes.
    double t_value = 0.0;
    bool step_underflow = false;
    /// Equilibrium reached, for EquilibriumCapture ends.
    bool has_limit = false;
    State limit;
};

/// Samples are stored with State::t holding the chart coordinate; `t_of`
/// keeps the original t of each sample so charts can be changed again.
struct Trajectory {
    GroupSpec group;
    Chart chart = Chart::T;
    std::vector<State> samples;
    std::vector<double> t_of;
    Endpoint left;
    Endpoint right;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    const State& front() const { return samples.front(); }
    const State& back() const { return samples.back(); }
};

}  // namespace cklab
