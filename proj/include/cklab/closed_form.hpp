// Explicit solutions: the Heisenberg metric with phi = C sqrt(e^{2q} + c1^2)
// and the biaxial SU(2) family in the q chart.
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "ansatz.hpp"
#include "core.hpp"
#include "series.hpp"
#include "trajectory.hpp"

namespace cklab {

struct HeisenbergSolution {
    double c1 = 1.0;
    double C = 1.0;

    double B() const { return c1 * c1; }
    void validate() const {
        if (!(c1 > 0.0) || !(C > 0.0)) throw Error(ErrorCode::InvalidOptions, "c1 and C must be positive");
    }
};

struct HeisenbergValues {
    double phi = 0.0;
    double phi_prime = 0.0;
    double phi_second = 0.0;
    /// Coefficients of s1^2 + s2^2, of s3^2 and of dq^2.
    double g_sigma12 = 0.0;
    double g_sigma3 = 0.0;
    double g_qq = 0.0;
};

inline HeisenbergValues heis_eval(const HeisenbergSolution& sol, double q) {
    sol.validate();
    const double e = std::exp(2.0 * q);
    const double root = std::sqrt(e + sol.B());
    HeisenbergValues v;
    v.phi = sol.C * root;
    v.phi_prime = sol.C * e / root;
    // d/dq of e / root = (2e root - e * e / root) / root^2
    v.phi_second = sol.C * e * (e + 2.0 * sol.B()) / (root * root * root);
    v.g_sigma12 = v.phi;
    v.g_sigma3 = v.phi_prime;
    v.g_qq = v.phi_prime;
    return v;
}

/// t along the explicit solution, with dq = a^2 dt = phi dt and t -> 0 as
/// q -> +inf. Valid for C = 1 up to the factor 1/C.
inline double heis_time(const HeisenbergSolution& sol, double q) {
    const double E = std::exp(2.0 * q);
    const double u = std::sqrt(E + sol.B());
    const double sb = std::sqrt(sol.B());
    // u - sb = E/(u + sb) avoids cancellation for very negative q
    return std::log(E / ((u + sb) * (u + sb))) / (2.0 * sb * sol.C);
}

/// Point of the Heisenberg system: a = b = sqrt(phi), c = sqrt(phi'), alpha = phi.
inline State heis_state(const HeisenbergSolution& sol, double q) {
    const auto v = heis_eval(sol, q);
    return {heis_time(sol, q), std::sqrt(v.phi), std::sqrt(v.phi), std::sqrt(v.phi_prime), v.phi};
}

/// A profile (phi, alpha) in the q chart with first and second derivatives;
/// lets the verifier run on corrupted inputs too.
struct HeisProfile {
    std::function<double(double)> phi, dphi, ddphi, alpha, dalpha;
};

/// The explicit profile. `rate` replaces the 2 in e^{2q}; any value other than 2
/// is a corruption used as a negative control.
inline HeisProfile heis_profile(const HeisenbergSolution& sol, double rate = 2.0) {
    const double B = sol.B(), C = sol.C;
    HeisProfile p;
    p.phi = [=](double q) { return C * std::sqrt(std::exp(rate * q) + B); };
    p.dphi = [=](double q) {
        const double e = std::exp(rate * q);
        return C * 0.5 * rate * e / std::sqrt(e + B);
    };
    p.ddphi = [=](double q) {
        const double e = std::exp(rate * q);
        const double u = e + B;
        return C * (0.5 * rate * rate * e / std::sqrt(u) - 0.25 * rate * rate * e * e / (u * std::sqrt(u)));
    };
    p.alpha = p.phi;
    p.dalpha = p.dphi;
    return p;
}

struct HeisVerifyReport {
    double max_heis1 = 0.0;
    double max_heis2 = 0.0;
    /// Reduced central residual divided by max(1, p3^2 alpha^2 c^2).
    double max_central = 0.0;
    /// Largest |w_residuals| relative to the size of the w' terms.
    double max_w = 0.0;
    /// alpha vanished on the grid: the first equation degenerates and is not tested.
    bool ricci_flat_branch = false;
    /// alpha differs from 0 somewhere, so the metric is not Ricci flat.
    bool non_ricci_flat = false;
    std::size_t samples = 0;
};

/// Residuals of (phi^2)''/(phi^2)' = 2 alpha/phi and
/// alpha' = (phi'/phi)(alpha + lambda phi^4/alpha) on a uniform q grid, plus
/// the central and w residuals of the corresponding t-chart state.
inline HeisVerifyReport heis_verify(const HeisProfile& p, std::size_t samples = 1000, double Q = 10.0,
                                    double lambda = 0.0) {
    HeisVerifyReport rep;
    rep.samples = samples;
    double max_alpha = 0.0;
    const GroupSpec g = GroupSpec::heisenberg();
    for (std::size_t i = 0; i < samples; ++i) {
        const double q = samples == 1 ? 0.0 : -Q + 2.0 * Q * static_cast<double>(i) / static_cast<double>(samples - 1);
        const double f = p.phi(q), df = p.dphi(q), ddf = p.ddphi(q);
        const double al = p.alpha(q), dal = p.dalpha(q);
        max_alpha = std::max(max_alpha, std::abs(al));
        // (phi^2)' = 2 f f', (phi^2)'' = 2 f'^2 + 2 f f''
        const double ratio = (df * df + f * ddf) / (f * df);
        if (al != 0.0) {
            rep.max_heis1 = std::max(rep.max_heis1, std::abs(ratio - 2.0 * al / f) / std::max(1.0, std::abs(ratio)));
            const double rhs2 = (df / f) * (al + lambda * f * f * f * f / al);
            rep.max_heis2 = std::max(rep.max_heis2, std::abs(dal - rhs2) / std::max({1.0, std::abs(dal), std::abs(rhs2)}));
        }
        // t-chart state: d/dt = phi d/dq
        const State s{0.0, std::sqrt(f), std::sqrt(f), std::sqrt(df), al};
        const double da = f * df / (2.0 * std::sqrt(f));
        const double dc = f * ddf / (2.0 * std::sqrt(df));
        const Derivative d{da, da, dc, f * dal};
        GroupSpec gl = g;
        gl.lambda = lambda;
        rep.max_central = std::max(rep.max_central, std::abs(central_residual_reduced(gl, s, d)) / central_residual_scale(gl, s));
        const auto w = w_residuals(g, s, d);
        const double wscale = std::max({1.0, std::abs(al * s.b * s.c), std::abs(s.a * s.b * s.c * s.c)});
        for (double r : w) rep.max_w = std::max(rep.max_w, std::abs(r) / wscale);
    }
    rep.ricci_flat_branch = max_alpha == 0.0;
    rep.non_ricci_flat = max_alpha > 0.0;
    return rep;
}

inline HeisVerifyReport heis_verify(const HeisenbergSolution& sol, std::size_t samples = 1000, double Q = 10.0) {
    return heis_verify(heis_profile(sol), samples, Q);
}

/// Explicit solution sampled on a q mesh, in the Q chart, with t_of filled.
/// End kinds describe the solution itself, not the extent of the mesh.
inline Trajectory heis_trajectory(const HeisenbergSolution& sol, const std::vector<double>& q_mesh) {
    Trajectory tr;
    tr.group = GroupSpec::heisenberg();
    tr.chart = Chart::Q;
    for (double q : q_mesh) {
        State s = heis_state(sol, q);
        tr.t_of.push_back(s.t);
        s.t = q;
        tr.samples.push_back(s);
    }
    // q -> -inf is t -> -inf; q -> +inf is reached at t = 0 with a, b blowing up
    const double inf = std::numeric_limits<double>::infinity();
    tr.left.value = -inf;
    tr.left.kind = EndKind::Infinite;
    tr.left.t_value = -inf;
    tr.right.value = inf;
    tr.right.kind = EndKind::FiniteBlowup;
    tr.right.t_value = 0.0;
    return tr;
}

/// Sample of a curve (x(s), y(s), z(s), q(s)) in the coordinates of the
/// Heisenberg quotient.
struct CurvePoint {
    double s = 0.0;
    double x = 0.0, y = 0.0, z = 0.0, q = 0.0;
};

struct LengthBounds {
    double from_x = 0.0;
    double from_y = 0.0;
    double from_q = 0.0;
    /// The curve reaches q = +inf, which needs infinite length.
    bool escape_needs_infinite_length = false;

    double best() const { return std::max({from_x, from_y, from_q}); }
};

namespace detail {

// integral of sqrt(phi') over [q0, q1] by composite Simpson
inline double sqrt_dphi_integral(const HeisenbergSolution& sol, double q0, double q1, int panels = 256) {
    const double h = (q1 - q0) / panels;
    const auto f = [&](double q) { return std::sqrt(heis_eval(sol, q).phi_prime); };
    double acc = f(q0) + f(q1);
    for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(q0 + i * h);
    return acc * h / 3.0;
}

}  // namespace detail

/// Lower bounds on the length of a piecewise-linear curve:
/// inf sqrt(phi) |int x'|, inf sqrt(phi) |int y'| and |int sqrt(phi'(q)) q'|.
inline LengthBounds heis_length_bounds(const HeisenbergSolution& sol, const std::vector<CurvePoint>& curve) {
    LengthBounds lb;
    if (curve.size() < 2) return lb;
    double inf_phi = std::numeric_limits<double>::infinity();
    for (const auto& p : curve)
        if (std::isfinite(p.q)) inf_phi = std::min(inf_phi, heis_eval(sol, p.q).phi);
    const auto& first = curve.front();
    const auto& last = curve.back();
    if (std::isinf(last.q) && last.q > 0) {
        lb.escape_needs_infinite_length = true;
        lb.from_q = std::numeric_limits<double>::infinity();
    } else {
        double acc = 0.0;
        for (std::size_t i = 1; i < curve.size(); ++i) acc += detail::sqrt_dphi_integral(sol, curve[i - 1].q, curve[i].q);
        lb.from_q = std::abs(acc);
    }
    // phi is increasing in q, so inf over the curve is attained at its sampled minimum
    lb.from_x = std::sqrt(inf_phi) * std::abs(last.x - first.x);
    lb.from_y = std::sqrt(inf_phi) * std::abs(last.y - first.y);
    return lb;
}

/// Coefficients of the s3^2 term c^2 of the explicit Heisenberg metric as a
/// power series in the geodesic distance r from the bolt, by series
/// reversion of the exact r(phi). Index k holds the r^k coefficient.
inline Coeffs heis_sigma3_expansion(double c1, int order = 10) {
    // with phi = c1 + w^2: dr/dw = 2 sqrt((c1 + w^2)/(2 c1 + w^2)),
    // c^2 = w^2 (2 c1 + w^2)/(c1 + w^2)
    const std::size_t n = static_cast<std::size_t>(order) + 2;
    const auto sqrt_series = [&](const Coeffs& x) {
        Coeffs y(n, 0.0);
        y[0] = std::sqrt(x[0]);
        for (std::size_t k = 1; k < n; ++k) {
            double acc = k < x.size() ? x[k] : 0.0;
            for (std::size_t j = 1; j < k; ++j) acc -= y[j] * y[k - j];
            y[k] = acc / (2.0 * y[0]);
        }
        return y;
    };
    const auto inv_series = [&](const Coeffs& x) {
        Coeffs y(n, 0.0);
        y[0] = 1.0 / x[0];
        for (std::size_t k = 1; k < n; ++k) {
            double acc = 0.0;
            for (std::size_t j = 1; j <= k && j < x.size(); ++j) acc += x[j] * y[k - j];
            y[k] = -acc / x[0];
        }
        return y;
    };
    Coeffs num(n, 0.0), den(n, 0.0);
    num[0] = c1;
    num[2] = 1.0;
    den[0] = 2.0 * c1;
    den[2] = 1.0;
    const Coeffs integrand = poly::scale(sqrt_series(poly::mul(num, inv_series(den), n)), 2.0);
    Coeffs r_of_w(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) r_of_w[k + 1] = integrand[k] / static_cast<double>(k + 1);
    // reversion: w = (r - sum_{k>=2} r_k w^k) / r_1
    Coeffs w(n, 0.0);
    w[1] = 1.0 / r_of_w[1];
    for (std::size_t it = 0; it < n; ++it) {
        Coeffs acc(n, 0.0);
        Coeffs pw = w;
        for (std::size_t k = 2; k < n; ++k) {
            pw = poly::mul(pw, w, n);
            acc = poly::add(acc, poly::scale(pw, r_of_w[k]));
        }
        Coeffs next(n, 0.0);
        next[1] = 1.0;
        next = poly::add(next, acc, -1.0);
        w = poly::scale(next, 1.0 / r_of_w[1]);
        w.resize(n);
    }
    const Coeffs w2 = poly::mul(w, w, n);
    Coeffs two_c1_plus(n, 0.0), c1_plus(n, 0.0);
    two_c1_plus[0] = 2.0 * c1;
    c1_plus[0] = c1;
    const Coeffs c2 = poly::mul(poly::mul(w2, poly::add(two_c1_plus, w2), n), inv_series(poly::add(c1_plus, w2)), n);
    return Coeffs(c2.begin(), c2.begin() + order + 1);
}

/// Biaxial SU(2) family in the q chart (dq = a^2 dt): the printed profile
/// phi(q) = e^k/(2 gamma) e^{2 gamma q} + B is a^4, so a^2 = sqrt(phi).
struct SU2BiaxialSolution {
    double gamma = 2.0;
    double k = 0.0;
    double B = 0.0;

    void validate() const {
        if (!(gamma > 1.0) || !(B >= 0.0) || !std::isfinite(k))
            throw Error(ErrorCode::InvalidOptions, "need gamma > 1, B >= 0 and finite k");
    }
    double exp_neg_A() const { return gamma - 1.0; }
};

struct SU2BiaxialValues {
    double phi = 0.0;
    double phi_prime = 0.0;
    double a = 0.0;
    double c = 0.0;
    /// Residual of d(c^2)/dq = c^2 (2 gamma - c^2/a^2), relative to its terms.
    double residual = 0.0;
};

inline SU2BiaxialValues su2_biaxial_eval(const SU2BiaxialSolution& sol, double q) {
    sol.validate();
    const double K = std::exp(sol.k) / (2.0 * sol.gamma);
    const double E = K * std::exp(2.0 * sol.gamma * q);
    SU2BiaxialValues v;
    v.phi = E + sol.B;
    v.phi_prime = 2.0 * sol.gamma * E;
    const double phi2 = 4.0 * sol.gamma * sol.gamma * E;
    const double psi = std::sqrt(v.phi);  // a^2
    const double dpsi = v.phi_prime / (2.0 * psi);
    const double ddpsi = phi2 / (2.0 * psi) - v.phi_prime * v.phi_prime / (4.0 * v.phi * psi);
    v.a = std::sqrt(psi);
    v.c = std::sqrt(dpsi);
    const double rhs = dpsi * (2.0 * sol.gamma - dpsi / psi);
    v.residual = std::abs(ddpsi - rhs) / std::max({1e-300, std::abs(ddpsi), std::abs(rhs)});
    return v;
}

/// t(q) with t -> 0 as q -> +inf; for B = 0 it is -1/(gamma a^2).
inline double su2_biaxial_time(const SU2BiaxialSolution& sol, double q) {
    const auto v = su2_biaxial_eval(sol, q);
    const double u = std::sqrt(v.phi);
    if (sol.B == 0.0) return -1.0 / (sol.gamma * u);
    const double sb = std::sqrt(sol.B);
    const double E = v.phi - sol.B;
    return std::log(E / ((u + sb) * (u + sb))) / (2.0 * sol.gamma * sb);
}

/// t-chart state (a, a, c, e^{-A} a^2) with its t-derivative.
inline std::pair<State, Derivative> su2_biaxial_state(const SU2BiaxialSolution& sol, double q) {
    const auto v = su2_biaxial_eval(sol, q);
    const double e = sol.exp_neg_A();
    const State s{su2_biaxial_time(sol, q), v.a, v.a, v.c, e * v.a * v.a};
    // d/dt = a^2 d/dq
    const double a2 = v.a * v.a;
    const double psi = a2;
    const double dpsi = v.c * v.c;
    const double ddpsi = dpsi * (2.0 * sol.gamma - dpsi / psi);
    const double da = a2 * dpsi / (2.0 * v.a);
    const double dc = a2 * ddpsi / (2.0 * v.c);
    return {s, {da, da, dc, e * a2 * dpsi}};
}

/// Explicit solution on a q mesh, in the T chart. As q -> +inf, t -> 0 with
/// a blowing up.
inline Trajectory su2_biaxial_trajectory(const SU2BiaxialSolution& sol, const std::vector<double>& q_mesh) {
    Trajectory tr;
    tr.group = GroupSpec::su2(sol.exp_neg_A());
    tr.chart = Chart::T;
    for (double q : q_mesh) {
        const State s = su2_biaxial_state(sol, q).first;
        tr.samples.push_back(s);
        tr.t_of.push_back(s.t);
    }
    const double inf = std::numeric_limits<double>::infinity();
    tr.left.value = -inf;
    tr.left.kind = EndKind::Infinite;
    tr.left.t_value = -inf;
    tr.right.value = 0.0;
    tr.right.kind = EndKind::FiniteBlowup;
    tr.right.t_value = 0.0;
    return tr;
}

}  // namespace cklab
