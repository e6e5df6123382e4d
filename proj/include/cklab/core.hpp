// Diagonal Bianchi-A Kähler systems: group data, state vectors and the
// right-hand sides of the centrally-flat ODE systems.
//
// The metric is g = (abc)^2 dt^2 + a^2 s1^2 + b^2 s2^2 + c^2 s3^2, with the
// Kähler condition expressed through the Dancer-Strachan function alpha.
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cklab {

enum class ErrorCode {
    NonpositiveState,
    UnsupportedLambda,
    NonpositiveFactor,
    DivisionByZeroAlpha,
    UnsupportedGroup,
    DegenerateParameter,
    NoUnstableDirection,
    SeedLeavesPositiveOrthant,
    InvalidOptions,
    ChartMismatch,
    NonmonotoneChart,
    OutOfRange,
    RecursionObstruction,
    InsufficientOrder,
    UnresolvedEndpoint,
    InsufficientSamples,
    NotCase3,
    InvalidConfig,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonpositiveState: return "NonpositiveState";
        case ErrorCode::UnsupportedLambda: return "UnsupportedLambda";
        case ErrorCode::NonpositiveFactor: return "NonpositiveFactor";
        case ErrorCode::DivisionByZeroAlpha: return "DivisionByZeroAlpha";
        case ErrorCode::UnsupportedGroup: return "UnsupportedGroup";
        case ErrorCode::DegenerateParameter: return "DegenerateParameter";
        case ErrorCode::NoUnstableDirection: return "NoUnstableDirection";
        case ErrorCode::SeedLeavesPositiveOrthant: return "SeedLeavesPositiveOrthant";
        case ErrorCode::InvalidOptions: return "InvalidOptions";
        case ErrorCode::ChartMismatch: return "ChartMismatch";
        case ErrorCode::NonmonotoneChart: return "NonmonotoneChart";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::RecursionObstruction: return "RecursionObstruction";
        case ErrorCode::InsufficientOrder: return "InsufficientOrder";
        case ErrorCode::UnresolvedEndpoint: return "UnresolvedEndpoint";
        case ErrorCode::InsufficientSamples: return "InsufficientSamples";
        case ErrorCode::NotCase3: return "NotCase3";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

enum class GroupTag { Heisenberg, SU2, E2, Custom };

inline std::string_view to_string(GroupTag tag) {
    switch (tag) {
        case GroupTag::Heisenberg: return "heisenberg";
        case GroupTag::SU2: return "su2";
        case GroupTag::E2: return "e2";
        case GroupTag::Custom: return "custom";
    }
    return "custom";
}

/// Structure constants of the unimodular group together with the constants
/// that select a member of the centrally-flat family.
///
/// `exp_neg_A` is the constant e^{-A} = alpha/(ab) of the SU(2) reduction; it
/// is unrelated to the shear-ansatz bracket function A.
struct GroupSpec {
    double p1 = 0.0;
    double p2 = 0.0;
    double p3 = 1.0;
    GroupTag tag = GroupTag::Custom;
    double exp_neg_A = 1.0;
    double lambda = 0.0;
    /// SU(2) only: integrate alpha with its own equation instead of
    /// eliminating it through alpha = e^{-A} ab.
    bool su2_full_system = false;

    static GroupSpec heisenberg(double lambda = 0.0) {
        return {0.0, 0.0, 1.0, GroupTag::Heisenberg, 1.0, lambda, false};
    }
    static GroupSpec su2(double exp_neg_A, double lambda = 0.0) {
        if (!(exp_neg_A >= 0.0) || !std::isfinite(exp_neg_A))
            throw Error(ErrorCode::InvalidOptions, "exp_neg_A must be finite and >= 0");
        return {1.0, 1.0, 1.0, GroupTag::SU2, exp_neg_A, lambda, false};
    }
    static GroupSpec e2(double lambda = 0.0) {
        return {1.0, 0.0, 1.0, GroupTag::E2, 1.0, lambda, false};
    }
    static GroupSpec custom(double p1, double p2, double p3, double lambda = 0.0) {
        return {p1, p2, p3, GroupTag::Custom, 1.0, lambda, false};
    }

    bool uses_reduced_su2() const { return tag == GroupTag::SU2 && !su2_full_system; }
    /// Ricci-flat member: alpha vanishes identically along solutions.
    bool ricci_flat() const { return tag == GroupTag::SU2 && exp_neg_A == 0.0; }
};

/// One point (t; a, b, c, alpha). `t` is the coordinate of whatever chart the
/// owning trajectory uses.
struct State {
    double t = 0.0;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double alpha = 0.0;

    std::array<double, 4> vec() const { return {a, b, c, alpha}; }
    static State from(double t, const std::array<double, 4>& x) { return {t, x[0], x[1], x[2], x[3]}; }
};

struct Derivative {
    double da = 0.0;
    double db = 0.0;
    double dc = 0.0;
    double dalpha = 0.0;

    std::array<double, 4> vec() const { return {da, db, dc, dalpha}; }
};

struct WState {
    double w1 = 0.0;
    double w2 = 0.0;
    double w3 = 0.0;
};

inline bool is_interior(const State& s) {
    return s.a > 0.0 && s.b > 0.0 && s.c > 0.0 && std::isfinite(s.a) && std::isfinite(s.b) &&
           std::isfinite(s.c) && std::isfinite(s.alpha);
}

inline void require_interior(const State& s) {
    if (!is_interior(s))
        throw Error(ErrorCode::NonpositiveState, "a, b, c must be positive and finite");
}

/// The alpha that enters the c-equation: the stored value, or e^{-A} ab when
/// the SU(2) system is used in its reduced form.
template <class T>
T effective_alpha(const GroupSpec& g, const T& a, const T& b, const T& alpha) {
    if (g.uses_reduced_su2()) return g.exp_neg_A * a * b;
    return alpha;
}

inline double effective_alpha(const GroupSpec& g, const State& s) {
    return effective_alpha<double>(g, s.a, s.b, s.alpha);
}

/// Unchecked polynomial vector field (a', b', c', alpha') in the t chart.
///
/// For lambda != 0 the alpha equation is the general central equation solved
/// for alpha', which is singular at alpha = 0; callers validate that.
template <class T>
std::array<T, 4> vector_field(const GroupSpec& g, const T& a, const T& b, const T& c, const T& alpha) {
    const T a2 = a * a;
    const T b2 = b * b;
    const T c2 = c * c;
    const T al = effective_alpha(g, a, b, alpha);
    std::array<T, 4> f{
        0.5 * a * (-g.p1 * a2 + g.p2 * b2 + g.p3 * c2),
        0.5 * b * (g.p1 * a2 - g.p2 * b2 + g.p3 * c2),
        0.5 * c * (g.p1 * a2 + g.p2 * b2 - g.p3 * c2 + 2.0 * al),
        T(0.0),
    };
    if (g.uses_reduced_su2()) {
        // derivative of the eliminated alpha = e^{-A} ab, using (ab)' = p3 ab c^2
        f[3] = g.exp_neg_A * g.p3 * a * b * c2;
    } else if (g.lambda == 0.0) {
        f[3] = g.p3 * c2 * alpha;
    } else {
        const T ab = a * b;
        const T ab4 = ab * ab * ab * ab;
        f[3] = c2 * (g.p3 * alpha + g.lambda * ab4 / (g.p3 * alpha));
    }
    return f;
}

inline std::array<double, 4> vector_field(const GroupSpec& g, const std::array<double, 4>& x) {
    return vector_field<double>(g, x[0], x[1], x[2], x[3]);
}

/// Right-hand side of the system for the group; validates the state and the
/// central-curvature target.
inline Derivative rhs(const GroupSpec& g, const State& s) {
    require_interior(s);
    if (g.lambda != 0.0) {
        const bool allowed = g.tag == GroupTag::Custom && g.p3 != 0.0 && s.alpha > 0.0;
        if (!allowed)
            throw Error(ErrorCode::UnsupportedLambda,
                        "lambda != 0 requires a Custom group with p3 != 0 and alpha > 0");
    }
    const auto f = vector_field<double>(g, s.a, s.b, s.c, s.alpha);
    return {f[0], f[1], f[2], f[3]};
}

/// (w1, w2, w3) = (bc, ac, ab). Boundary states with a zero entry are accepted.
inline WState to_w(const State& s) {
    return {s.b * s.c, s.a * s.c, s.a * s.b};
}

/// Residuals of w1' = p1 w2 w3 + alpha w1, w2' = p2 w1 w3 + alpha w2,
/// w3' = p3 w1 w2 for a state/derivative pair.
inline std::array<double, 3> w_residuals(const GroupSpec& g, const State& s, const Derivative& d) {
    const WState w = to_w(s);
    const double al = effective_alpha(g, s);
    const double dw1 = d.db * s.c + s.b * d.dc;
    const double dw2 = d.da * s.c + s.a * d.dc;
    const double dw3 = d.da * s.b + s.a * d.db;
    return {
        dw1 - g.p1 * w.w2 * w.w3 - al * w.w1,
        dw2 - g.p2 * w.w1 * w.w3 - al * w.w2,
        dw3 - g.p3 * w.w1 * w.w2,
    };
}

/// E(2) scaling symmetry (a, b, c, alpha)(t) -> (k a, b, k c, k^2 alpha)(k^2 t).
/// The returned state sits at time t/k^2 of the scaled solution.
inline State scale_symmetry(const State& s, double k) {
    if (!(k > 0.0) || !std::isfinite(k))
        throw Error(ErrorCode::NonpositiveFactor, "scale factor must be positive");
    return {s.t / (k * k), k * s.a, s.b, k * s.c, k * k * s.alpha};
}

using NamedValue = std::pair<std::string, double>;

/// Constants of motion of the lambda = 0 systems.
inline std::vector<NamedValue> first_integrals(const GroupSpec& g, const State& s) {
    require_interior(s);
    std::vector<NamedValue> out;
    const bool nilpotent = g.p1 == 0.0 && g.p2 == 0.0;
    if (g.tag == GroupTag::Heisenberg || (g.tag == GroupTag::Custom && nilpotent)) {
        out.emplace_back("a/b", s.a / s.b);
        if (s.alpha == 0.0) throw Error(ErrorCode::DivisionByZeroAlpha, "alpha/phi needs alpha != 0 for the ratio test");
        out.emplace_back("alpha/phi", s.alpha / (s.a * s.a));
        if (g.tag == GroupTag::Heisenberg) return out;
    }
    if (s.alpha == 0.0) throw Error(ErrorCode::DivisionByZeroAlpha, "ab/alpha undefined at alpha = 0");
    out.emplace_back("ab/alpha", s.a * s.b / s.alpha);
    return out;
}

inline double norm(const std::array<double, 4>& x) {
    return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3]);
}

}  // namespace cklab
