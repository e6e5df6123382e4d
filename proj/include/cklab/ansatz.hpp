// Shear-ansatz frame functions of a diagonal Bianchi-A Kähler metric and the
// two independent routes to its central curvature.
#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "core.hpp"
#include "trajectory.hpp"

namespace cklab {

/// Forward-mode dual number; `d` carries a directional derivative.
struct Dual {
    double v = 0.0;
    double d = 0.0;

    constexpr Dual() = default;
    constexpr Dual(double value, double deriv = 0.0) : v(value), d(deriv) {}
};

constexpr Dual operator+(Dual x, Dual y) { return {x.v + y.v, x.d + y.d}; }
constexpr Dual operator-(Dual x, Dual y) { return {x.v - y.v, x.d - y.d}; }
constexpr Dual operator-(Dual x) { return {-x.v, -x.d}; }
constexpr Dual operator*(Dual x, Dual y) { return {x.v * y.v, x.d * y.v + x.v * y.d}; }
constexpr Dual operator/(Dual x, Dual y) { return {x.v / y.v, (x.d * y.v - x.v * y.d) / (y.v * y.v)}; }
constexpr Dual operator+(double x, Dual y) { return Dual(x) + y; }
constexpr Dual operator+(Dual x, double y) { return x + Dual(y); }
constexpr Dual operator-(double x, Dual y) { return Dual(x) - y; }
constexpr Dual operator-(Dual x, double y) { return x - Dual(y); }
constexpr Dual operator*(double x, Dual y) { return {x * y.v, x * y.d}; }
constexpr Dual operator*(Dual x, double y) { return {x.v * y, x.d * y}; }
constexpr Dual operator/(Dual x, double y) { return {x.v / y, x.d / y}; }
constexpr Dual operator/(double x, Dual y) { return Dual(x) / y; }

/// Bracket functions of the orthonormal frame (k, t, x, y).
struct AnsatzFrame {
    double A = 0, B = 0, C = 0, D = 0, E = 0, F = 0, G = 0, H = 0, L = 0, N = 0;
};

struct ReducedVars {
    double P = 0, Q = 0, R = 0;
    /// Empty where F + G = 0.
    std::optional<double> S;
    double L = 0, N = 0;
};

/// Components of the Ricci form in the coframe basis.
struct RicciCoefficients {
    double r_alpha = 0, r_beta = 0, r_gamma = 0, r_delta = 0, r_phi = 0, r_psi = 0;
    /// Sum of the magnitudes of the terms making up r_beta, for scaling
    /// residuals that cancel near a singular orbit.
    double r_beta_terms = 0;
};

namespace detail {

template <class T>
struct FrameT {
    T A, B, C, D, L, N;
};

// a', b', c' are passed in so the caller decides where they come from.
template <class T>
FrameT<T> frame_from(const GroupSpec& g, const T& a, const T& b, const T& c, const T& da, const T& db,
                     const T& dc) {
    const double s2 = std::numbers::sqrt2;
    return {
        -da / (s2 * a * a * b * c),
        -(b * g.p2) / (s2 * a * c),
        (a * g.p1) / (s2 * b * c),
        -db / (s2 * a * b * b * c),
        -dc / (s2 * a * b * c * c),
        -(c * g.p3) / (s2 * a * b),
    };
}

// X = 2L + C - H + A - F, the common factor of r_alpha and r_beta.
template <class T>
T bracket_x(const FrameT<T>& f) {
    // H = -D, F = B
    return 2.0 * f.L + f.C + f.D + f.A - f.B;
}

}  // namespace detail

inline AnsatzFrame ansatz_map(const GroupSpec& g, const State& s, const Derivative& d) {
    require_interior(s);
    const auto f = detail::frame_from<double>(g, s.a, s.b, s.c, d.da, d.db, d.dc);
    AnsatzFrame out;
    out.A = f.A;
    out.B = f.B;
    out.C = f.C;
    out.D = f.D;
    out.E = -f.A;
    out.F = f.B;
    out.G = f.C;
    out.H = -f.D;
    out.L = f.L;
    out.N = f.N;
    return out;
}

/// P, Q, R, S from the change of variables applied to a frame.
inline ReducedVars reduced_vars(const AnsatzFrame& f) {
    ReducedVars r;
    r.P = (f.B - f.C) + (f.F - f.G);
    r.Q = (f.B - f.C) - (f.F - f.G);
    r.R = std::hypot(f.B + f.C, f.F + f.G);
    if (f.F + f.G != 0.0) r.S = std::atan((f.B + f.C) / (f.F + f.G));
    r.L = f.L;
    r.N = f.N;
    return r;
}

/// P, Q, R, S from their closed forms in a, b, c.
inline ReducedVars reduced_vars(const GroupSpec& g, const State& s, const Derivative& d) {
    require_interior(s);
    const double abc = s.a * s.b * s.c;
    const double a2p1 = s.a * s.a * g.p1;
    const double b2p2 = s.b * s.b * g.p2;
    const auto frame = ansatz_map(g, s, d);
    ReducedVars r;
    r.P = -std::numbers::sqrt2 * (a2p1 + b2p2) / abc;
    r.Q = 0.0;
    r.R = std::abs(a2p1 - b2p2) / abc;
    if (frame.F + frame.G != 0.0) r.S = std::numbers::pi / 4.0;
    r.L = frame.L;
    r.N = frame.N;
    return r;
}

/// Ricci coefficients of a cohomogeneity-one frame. The derivative arguments
/// are d_{k-t} of L, C - H and A - F; along k - t = grad tau these equal
/// 2 d/dtau, while d_k = d/dtau and d_t = -d/dtau.
inline RicciCoefficients ricci_coefficients(const AnsatzFrame& f, double dL, double dCH, double dAF) {
    const double x = 2.0 * f.L + f.C - f.H + f.A - f.F;
    RicciCoefficients r;
    r.r_alpha = -f.N * x;
    r.r_beta = -f.L * x + dL + 0.5 * dCH + 0.5 * dAF;
    r.r_beta_terms = std::abs(f.L * x) + std::abs(dL) + 0.5 * std::abs(dCH) + 0.5 * std::abs(dAF);
    return r;
}

/// Ricci coefficients with the tau-derivatives taken exactly along the flow.
///
/// The tangent of the curve is (a', b', c') from the vector field and the
/// supplied alpha' (which need not satisfy the central equation).
inline RicciCoefficients ricci_along_flow(const GroupSpec& g, const State& s, double dalpha) {
    require_interior(s);
    GroupSpec gg = g;
    gg.lambda = 0.0;
    const auto f0 = vector_field<double>(gg, s.a, s.b, s.c, s.alpha);
    const Dual a{s.a, f0[0]}, b{s.b, f0[1]}, c{s.c, f0[2]};
    const Dual al = g.uses_reduced_su2() ? g.exp_neg_A * a * b : Dual{s.alpha, dalpha};
    // first derivatives as functions along the curve, then the frame
    const Dual da = 0.5 * a * (-g.p1 * a * a + g.p2 * b * b + g.p3 * c * c);
    const Dual db = 0.5 * b * (g.p1 * a * a - g.p2 * b * b + g.p3 * c * c);
    const Dual dc = 0.5 * c * (g.p1 * a * a + g.p2 * b * b - g.p3 * c * c + 2.0 * al);
    const auto fr = detail::frame_from<Dual>(g, a, b, c, da, db, dc);
    // dual parts are d/dt; convert to d_{k-t} = 2 d/dtau = 2/(sqrt2 abc) d/dt
    const double to_kt = 2.0 / (std::numbers::sqrt2 * s.a * s.b * s.c);
    AnsatzFrame frame;
    frame.A = fr.A.v;
    frame.B = fr.B.v;
    frame.C = fr.C.v;
    frame.D = fr.D.v;
    frame.E = -fr.A.v;
    frame.F = fr.B.v;
    frame.G = fr.C.v;
    frame.H = -fr.D.v;
    frame.L = fr.L.v;
    frame.N = fr.N.v;
    const double dL = fr.L.d * to_kt;
    const double dCH = (fr.C.d + fr.D.d) * to_kt;
    const double dAF = (fr.A.d - fr.B.d) * to_kt;
    return ricci_coefficients(frame, dL, dCH, dAF);
}

/// Central curvature r_alpha r_beta - r_gamma r_psi + r_delta r_phi.
inline double central_curvature(const RicciCoefficients& r) {
    return r.r_alpha * r.r_beta - r.r_gamma * r.r_psi + r.r_delta * r.r_phi;
}

/// p3 (alpha^2)' - 2 c^2 (lambda (ab)^4 + p3^2 alpha^2).
inline double central_residual_reduced(const GroupSpec& g, const State& s, const Derivative& d) {
    const double al = effective_alpha(g, s);
    const double ab = s.a * s.b;
    const double ab4 = ab * ab * ab * ab;
    return g.p3 * 2.0 * al * d.dalpha - 2.0 * s.c * s.c * (g.lambda * ab4 + g.p3 * g.p3 * al * al);
}

/// Value of lambda for which the pair (s, d) satisfies the reduced central
/// equation. Requires c != 0 and ab != 0.
inline double implied_central_value(const GroupSpec& g, const State& s, const Derivative& d) {
    const double al = effective_alpha(g, s);
    const double ab = s.a * s.b;
    const double ab4 = ab * ab * ab * ab;
    return g.p3 * al * (d.dalpha - g.p3 * s.c * s.c * al) / (s.c * s.c * ab4);
}

/// Scale used to normalize the reduced residual: max(1, p3^2 alpha^2 c^2).
inline double central_residual_scale(const GroupSpec& g, const State& s) {
    const double al = effective_alpha(g, s);
    return std::max(1.0, g.p3 * g.p3 * al * al * s.c * s.c);
}

struct OnevarSample {
    double tau = 0.0;
    double residual = 0.0;
};

/// The one-variable central equation -N X (-L X + X_tau) - lambda evaluated on
/// a tau-chart window, with X = 2L + N - P/2 from the frame at each sample and
/// X_tau by three-point centered differences (second order on any mesh).
/// Returns one value per interior sample.
inline std::vector<OnevarSample> central_residual_onevar(const Trajectory& traj) {
    if (traj.chart != Chart::Tau) throw Error(ErrorCode::ChartMismatch, "onevar residual needs the tau chart");
    const auto& g = traj.group;
    const std::size_t n = traj.samples.size();
    std::vector<OnevarSample> out;
    if (n < 3) return out;
    std::vector<double> x(n), L(n), N(n);
    for (std::size_t i = 0; i < n; ++i) {
        const State& s = traj.samples[i];
        GroupSpec gg = g;
        gg.lambda = 0.0;
        const auto f = vector_field<double>(gg, s.a, s.b, s.c, s.alpha);
        const auto frame = ansatz_map(g, s, {f[0], f[1], f[2], f[3]});
        const auto rv = reduced_vars(frame);
        x[i] = 2.0 * frame.L + frame.N - rv.P / 2.0;
        L[i] = frame.L;
        N[i] = frame.N;
    }
    out.reserve(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = traj.samples[i].t - traj.samples[i - 1].t;
        const double h1 = traj.samples[i + 1].t - traj.samples[i].t;
        const double dx = (-h1 / (h0 * (h0 + h1))) * x[i - 1] + ((h1 - h0) / (h0 * h1)) * x[i] +
                          (h0 / (h1 * (h0 + h1))) * x[i + 1];
        const double res = -N[i] * x[i] * (-L[i] * x[i] + dx) - g.lambda;
        out.push_back({traj.samples[i].t, res});
    }
    return out;
}

}  // namespace cklab
