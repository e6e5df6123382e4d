// Adaptive integration of the systems, endpoint detection and chart changes.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "ansatz.hpp"
#include "core.hpp"
#include "trajectory.hpp"

namespace cklab {

enum class Direction { Forward, Backward };

struct IntegratorOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 1e-4;
    double blowup_threshold = 1e8;
    /// Relative capture radius: capture when the distance to an equilibrium
    /// family is below capture_radius * (1 + |point|).
    double capture_radius = 1e-9;
    /// Relative radius for a near miss: a run whose distance to an equilibrium
    /// family fell by kApproachDrop to below this and then grows again is
    /// captured at its closest sample. Backward runs along an unstable curve
    /// end this way when the stable rate exceeds the unstable one, since step
    /// errors along the stable direction grow faster than the approach.
    double approach_radius = 1e-6;
    std::size_t max_samples = 1'000'000;
    /// Largest coordinate span integrated before stopping with UserLimit.
    double max_span = 1e3;
    /// Chart of the independent variable used for stepping and sampling.
    Chart chart = Chart::T;
    /// If non-empty, integrate exactly to these chart coordinates (in the
    /// direction of integration) and record only them plus the start.
    std::vector<double> stops;

    void validate() const {
        const bool ok = rel_tol > 0 && abs_tol > 0 && max_step > 0 && initial_step > 0 && blowup_threshold > 0 &&
                        capture_radius > 0 && approach_radius >= capture_radius && max_samples > 1 && max_span > 0;
        if (!ok) throw Error(ErrorCode::InvalidOptions, "integrator options must be positive");
    }
};

/// dsigma/dt for each chart.
template <class T>
T chart_rate(Chart c, const T& a, const T& b, const T& cc) {
    switch (c) {
        case Chart::T: return T(1.0);
        case Chart::Tau: return std::numbers::sqrt2 * a * b * cc;
        case Chart::R: return a * b * cc;
        case Chart::Q: return a * a;
    }
    return T(1.0);
}

/// Distance from x to the nearest equilibrium of the group, with that point.
struct FamilyDistance {
    double distance = std::numeric_limits<double>::infinity();
    State nearest;
};

inline FamilyDistance nearest_equilibrium(const GroupSpec& g, const State& s) {
    FamilyDistance best;
    auto consider = [&](double d2, State p) {
        const double d = std::sqrt(std::max(0.0, d2));
        if (d < best.distance) {
            best.distance = d;
            best.nearest = p;
        }
    };
    const double a = s.a, b = s.b, c = s.c, al = s.alpha;
    if (g.tag == GroupTag::SU2) {
        const double e = g.exp_neg_A;
        // alpha is slaved to ab, so only (a, b, c) enter the distance
        double q = (a + b) / 2;
        consider((a - b) * (a - b) / 2 + c * c, {0, q, q, 0, e * q * q});
        q = (b + c) / 2;
        consider(a * a + (b - c) * (b - c) / 2, {0, 0, q, q, 0});
        q = (a + c) / 2;
        consider(b * b + (a - c) * (a - c) / 2, {0, q, 0, q, 0});
    } else if (g.tag == GroupTag::E2) {
        const double q = (a + c) / 2;
        consider((a - c) * (a - c) / 2 + b * b + al * al, {0, q, 0, q, 0});
        consider(a * a + c * c, {0, 0, b, 0, al});
    } else if (g.tag == GroupTag::Heisenberg) {
        consider(c * c, {0, a, b, 0, al});
    }
    return best;
}

namespace detail {

using Vec5 = std::array<double, 5>;

// y = (a, b, c, alpha, t) as a function of the chart coordinate.
inline Vec5 chart_field(const GroupSpec& g, Chart chart, const Vec5& y) {
    const auto f = vector_field<double>(g, y[0], y[1], y[2], y[3]);
    const double inv = 1.0 / chart_rate<double>(chart, y[0], y[1], y[2]);
    return {f[0] * inv, f[1] * inv, f[2] * inv, f[3] * inv, inv};
}

inline double state_norm(const Vec5& y) { return std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3]); }

inline Vec5 axpy(const Vec5& y, double h, std::initializer_list<std::pair<double, const Vec5*>> terms) {
    Vec5 out = y;
    for (const auto& [c, k] : terms)
        if (c != 0.0)
            for (int i = 0; i < 5; ++i) out[i] += h * c * (*k)[i];
    return out;
}

struct StepResult {
    Vec5 y;
    Vec5 err;
    Vec5 f_end;
};

// Dormand-Prince 5(4), FSAL.
inline StepResult dopri_step(const GroupSpec& g, Chart chart, double sign, const Vec5& y, const Vec5& k1, double h) {
    auto F = [&](const Vec5& v) {
        Vec5 f = chart_field(g, chart, v);
        for (double& x : f) x *= sign;
        return f;
    };
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;
    const Vec5 k2 = F(axpy(y, h, {{a21, &k1}}));
    const Vec5 k3 = F(axpy(y, h, {{a31, &k1}, {a32, &k2}}));
    const Vec5 k4 = F(axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const Vec5 k5 = F(axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const Vec5 k6 = F(axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    StepResult r;
    r.y = axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    r.f_end = F(r.y);
    for (int i = 0; i < 5; ++i)
        r.err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * r.f_end[i]);
    return r;
}

// Blowup coordinate from the last samples: near a power-law blowup
// |x|^2 / (x . x') is linear in the coordinate and vanishes at the end.
inline double extrapolate_blowup(const std::vector<double>& u, const std::vector<Vec5>& ys,
                                 const std::vector<Vec5>& fs) {
    const std::size_t n = u.size();
    const std::size_t m = std::min<std::size_t>(3, n);
    if (m < 2) return u.back();
    // centred on the last sample: the steps are far below the size of u
    double su = 0, sg = 0, suu = 0, sug = 0;
    for (std::size_t i = n - m; i < n; ++i) {
        const auto& y = ys[i];
        const auto& f = fs[i];
        const double dot = y[0] * f[0] + y[1] * f[1] + y[2] * f[2] + y[3] * f[3];
        const double gval = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3]) / dot;
        const double du = u[i] - u.back();
        su += du;
        sg += gval;
        suu += du * du;
        sug += du * gval;
    }
    const double md = static_cast<double>(m);
    const double den = md * suu - su * su;
    if (den == 0.0) return u.back();
    const double slope = (md * sug - su * sg) / den;
    const double icept = (sg - slope * su) / md;
    if (!(slope < 0.0)) return u.back();
    const double root = -icept / slope;
    return u.back() + std::max(root, 0.0);
}

}  // namespace detail

/// Integrates from s0 (whose t field is the starting chart coordinate) in one
/// direction until blowup, equilibrium capture or a user limit.
///
/// For SU(2) in reduced form alpha is carried along with alpha' = e^{-A} ab c^2
/// so that its drift from e^{-A} ab measures the integration error.
/// Factor by which the distance to an equilibrium must have fallen before a
/// near miss counts as capture.
inline constexpr double kApproachDrop = 1e-3;

inline Trajectory integrate(const GroupSpec& g, const State& s0, Direction dir, const IntegratorOptions& opt = {}) {
    opt.validate();
    require_interior(s0);
    if (g.lambda != 0.0) throw Error(ErrorCode::UnsupportedLambda, "integration requires lambda = 0");
    using detail::Vec5;
    const double sign = dir == Direction::Forward ? 1.0 : -1.0;
    const Chart chart = opt.chart;

    // u >= 0 is the integration variable, sigma = sigma0 + sign * u
    const double sigma0 = s0.t;
    const double t0 = chart == Chart::T ? s0.t : 0.0;
    Vec5 y{s0.a, s0.b, s0.c, s0.alpha, t0};
    auto F = [&](const Vec5& v) {
        Vec5 f = detail::chart_field(g, chart, v);
        for (double& x : f) x *= sign;
        return f;
    };

    std::vector<double> stops_u;
    for (double s : opt.stops) {
        const double u = sign * (s - sigma0);
        if (u > 0.0) stops_u.push_back(u);
    }
    std::sort(stops_u.begin(), stops_u.end());
    const bool mesh_mode = !opt.stops.empty();

    std::vector<double> us{0.0};
    std::vector<Vec5> ys{y};
    std::vector<Vec5> fs{F(y)};
    // full step history is needed for blowup extrapolation in mesh mode
    std::vector<double> hist_u{0.0};
    std::vector<Vec5> hist_y{y}, hist_f{fs.front()};

    const double norm0 = detail::state_norm(y);
    const bool started_inside = [&] {
        const auto nd = nearest_equilibrium(g, s0);
        return nd.distance < opt.capture_radius * (1.0 + norm(nd.nearest.vec()));
    }();

    // closest approach so far, for near-miss capture
    const double d_start = nearest_equilibrium(g, s0).distance;
    double d_min = d_start;
    std::size_t i_min = 0;
    State p_min{};

    Endpoint end;
    end.kind = EndKind::UserLimit;
    State limit_point{};
    bool captured = false;

    double u = 0.0;
    double h = std::min(opt.initial_step, opt.max_step);
    double err_prev = 1e-4;
    Vec5 k1 = fs.front();
    std::size_t next_stop = 0;
    const double u_limit = mesh_mode ? (stops_u.empty() ? 0.0 : stops_u.back()) : opt.max_span;

    while (u < u_limit) {
        if (us.size() >= opt.max_samples) break;
        const double h_prop = h;
        double h_try = std::min({h, opt.max_step, u_limit - u});
        bool hits_stop = false;
        if (mesh_mode && next_stop < stops_u.size() && u + h_try >= stops_u[next_stop]) {
            h_try = stops_u[next_stop] - u;
            hits_stop = true;
        }
        if (h_try < 1e-14 * std::max(1.0, std::abs(sigma0 + sign * u))) {
            end.step_underflow = true;
            end.kind = detail::state_norm(y) > 1e3 * (1.0 + norm0) ? EndKind::FiniteBlowup : EndKind::UserLimit;
            break;
        }
        const auto step = detail::dopri_step(g, chart, sign, y, k1, h_try);
        double err = 0.0;
        bool finite = true;
        for (int i = 0; i < 5; ++i) {
            const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(step.y[i]));
            err += (step.err[i] / sc) * (step.err[i] / sc);
            finite = finite && std::isfinite(step.y[i]) && std::isfinite(step.f_end[i]);
        }
        err = std::sqrt(err / 5.0);
        const bool positive = step.y[0] > 0 && step.y[1] > 0 && step.y[2] > 0;
        if (!finite || !positive || err > 1.0) {
            const double fac = (!finite || !positive) ? 0.25 : std::max(0.2, 0.9 * std::pow(err, -0.2));
            h = h_try * fac;
            continue;
        }
        u += h_try;
        if (hits_stop) u = stops_u[next_stop++];
        y = step.y;
        k1 = step.f_end;
        // PI controller
        const double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
        h = h_try * std::clamp(fac, 0.2, 5.0);
        // a step shortened to land on a stop says nothing about the next one
        if (hits_stop) h = std::max(h, h_prop);
        err_prev = std::max(err, 1e-4);

        hist_u.push_back(u);
        hist_y.push_back(y);
        hist_f.push_back(k1);
        if (!mesh_mode || hits_stop) {
            us.push_back(u);
            ys.push_back(y);
            fs.push_back(k1);
        }

        if (detail::state_norm(y) > opt.blowup_threshold) {
            end.kind = EndKind::FiniteBlowup;
            break;
        }
        if (!started_inside) {
            const State cur = State::from(0.0, {y[0], y[1], y[2], y[3]});
            const auto nd = nearest_equilibrium(g, cur);
            const double pn = norm(nd.nearest.vec());
            if (nd.distance < opt.capture_radius * (1.0 + pn)) {
                const auto f = vector_field<double>(g, y[0], y[1], y[2], y[3]);
                if (norm(f) < 10.0 * opt.capture_radius * (1.0 + pn) * (1.0 + pn) * (1.0 + pn)) {
                    end.kind = EndKind::EquilibriumCapture;
                    captured = true;
                    limit_point = nd.nearest;
                    break;
                }
            }
            if (nd.distance < d_min) {
                d_min = nd.distance;
                i_min = hist_u.size() - 1;
                p_min = nd.nearest;
            } else if (nd.distance > 4.0 * d_min && d_min < kApproachDrop * d_start &&
                       d_min < opt.approach_radius * (1.0 + norm(p_min.vec()))) {
                hist_u.resize(i_min + 1);
                hist_y.resize(i_min + 1);
                hist_f.resize(i_min + 1);
                u = hist_u.back();
                while (us.back() > u) {
                    us.pop_back();
                    ys.pop_back();
                    fs.pop_back();
                }
                end.kind = EndKind::EquilibriumCapture;
                captured = true;
                limit_point = p_min;
                break;
            }
        }
    }
    // in mesh mode an event between stops still records the last state
    if (mesh_mode && us.back() != hist_u.back() && end.kind != EndKind::UserLimit) {
        us.push_back(hist_u.back());
        ys.push_back(hist_y.back());
        fs.push_back(hist_f.back());
    }

    double u_end = us.back();
    if (end.kind == EndKind::FiniteBlowup) u_end = detail::extrapolate_blowup(hist_u, hist_y, hist_f);

    Trajectory tr;
    tr.group = g;
    tr.chart = chart;
    const std::size_t n = us.size();
    tr.samples.resize(n);
    tr.t_of.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = dir == Direction::Forward ? i : n - 1 - i;
        const double sigma = sigma0 + sign * us[j];
        tr.samples[i] = {sigma, ys[j][0], ys[j][1], ys[j][2], ys[j][3]};
        // the carried alpha only tracks e^{-A} ab up to step error; store the exact level
        if (g.uses_reduced_su2()) tr.samples[i].alpha = effective_alpha(g, tr.samples[i]);
        tr.t_of[i] = chart == Chart::T ? sigma : ys[j][4];
    }
    Endpoint start;
    start.kind = EndKind::UserLimit;
    start.value = sigma0;
    start.t_value = chart == Chart::T ? sigma0 : t0;
    end.value = sigma0 + sign * u_end;
    end.t_value = chart == Chart::T ? end.value : ys.back()[4];
    if (captured) {
        limit_point.t = end.value;
        end.limit = limit_point;
        end.has_limit = true;
    }
    if (dir == Direction::Forward) {
        tr.left = start;
        tr.right = end;
    } else {
        tr.left = end;
        tr.right = start;
    }
    return tr;
}

/// Full solution through s0: backward and forward halves joined at s0.
inline Trajectory integrate_both(const GroupSpec& g, const State& s0, const IntegratorOptions& opt = {}) {
    Trajectory back = integrate(g, s0, Direction::Backward, opt);
    Trajectory fwd = integrate(g, s0, Direction::Forward, opt);
    Trajectory out = back;
    out.samples.insert(out.samples.end(), fwd.samples.begin() + 1, fwd.samples.end());
    out.t_of.insert(out.t_of.end(), fwd.t_of.begin() + 1, fwd.t_of.end());
    out.right = fwd.right;
    return out;
}

namespace detail {

// dsigma_new/dt and its t-derivative along the flow.
inline std::pair<double, double> rate_and_slope(const GroupSpec& g, Chart c, const State& s) {
    const auto f = vector_field<double>(g, s.a, s.b, s.c, s.alpha);
    const Dual r = chart_rate<Dual>(c, Dual{s.a, f[0]}, Dual{s.b, f[1]}, Dual{s.c, f[2]});
    return {r.v, r.d};
}

}  // namespace detail

/// Recomputes the coordinate of every sample in the target chart by cumulative
/// Hermite quadrature of dsigma/dt over the stored t values.
///
/// The new coordinate is 0 at the left end. When the left end is an
/// equilibrium capture and the target chart degenerates there (tau, r), the
/// exponentially small tail before the first sample is included so that 0 is
/// the singular orbit itself.
inline Trajectory change_chart(const Trajectory& traj, Chart target) {
    if (traj.chart == target) return traj;
    Trajectory out = traj;
    out.chart = target;
    const std::size_t n = traj.size();
    if (target == Chart::T) {
        for (std::size_t i = 0; i < n; ++i) out.samples[i].t = traj.t_of[i];
        out.left.value = traj.left.t_value;
        out.right.value = traj.right.t_value;
        return out;
    }
    std::vector<double> rate(n), slope(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::tie(rate[i], slope[i]) = detail::rate_and_slope(traj.group, target, traj.samples[i]);
        if (!(rate[i] > 0.0)) throw Error(ErrorCode::NonmonotoneChart, "chart rate must stay positive");
    }
    double acc = 0.0;
    if (traj.left.kind == EndKind::EquilibriumCapture && (target == Chart::R || target == Chart::Tau) &&
        slope[0] > 0.0)
        acc = rate[0] * rate[0] / slope[0];
    out.left.value = traj.left.kind == EndKind::EquilibriumCapture ? 0.0 : acc;
    out.samples[0].t = acc;
    for (std::size_t i = 1; i < n; ++i) {
        const double h = traj.t_of[i] - traj.t_of[i - 1];
        acc += h / 2.0 * (rate[i - 1] + rate[i]) + h * h / 12.0 * (slope[i - 1] - slope[i]);
        out.samples[i].t = acc;
    }
    out.right.value = acc;
    return out;
}

/// Cubic Hermite interpolation onto a mesh in the trajectory's chart.
inline Trajectory resample(const Trajectory& traj, const std::vector<double>& mesh) {
    if (traj.empty()) throw Error(ErrorCode::OutOfRange, "empty trajectory");
    const double lo = traj.front().t, hi = traj.back().t;
    Trajectory out = traj;
    out.samples.clear();
    out.t_of.clear();
    const auto deriv = [&](std::size_t i) {
        const State& s = traj.samples[i];
        const auto f = vector_field<double>(traj.group, s.a, s.b, s.c, s.alpha);
        const double inv = 1.0 / chart_rate<double>(traj.chart, s.a, s.b, s.c);
        return std::array<double, 5>{f[0] * inv, f[1] * inv, f[2] * inv, f[3] * inv, inv};
    };
    for (double x : mesh) {
        if (x < lo || x > hi || !std::isfinite(x)) throw Error(ErrorCode::OutOfRange, "mesh point outside trajectory");
        const auto it = std::lower_bound(traj.samples.begin(), traj.samples.end(), x,
                                         [](const State& s, double v) { return s.t < v; });
        std::size_t j = static_cast<std::size_t>(it - traj.samples.begin());
        if (j < traj.size() && traj.samples[j].t == x) {
            out.samples.push_back(traj.samples[j]);
            out.t_of.push_back(traj.t_of[j]);
            continue;
        }
        const std::size_t i = j - 1;
        const State& s0 = traj.samples[i];
        const State& s1 = traj.samples[j];
        const double h = s1.t - s0.t;
        const double th = (x - s0.t) / h;
        const double h00 = (1 + 2 * th) * (1 - th) * (1 - th), h10 = th * (1 - th) * (1 - th);
        const double h01 = th * th * (3 - 2 * th), h11 = th * th * (th - 1);
        const auto d0 = deriv(i), d1 = deriv(j);
        const std::array<double, 5> y0{s0.a, s0.b, s0.c, s0.alpha, traj.t_of[i]};
        const std::array<double, 5> y1{s1.a, s1.b, s1.c, s1.alpha, traj.t_of[j]};
        std::array<double, 5> y{};
        for (int k = 0; k < 5; ++k) y[k] = h00 * y0[k] + h10 * h * d0[k] + h01 * y1[k] + h11 * h * d1[k];
        out.samples.push_back({x, y[0], y[1], y[2], y[3]});
        out.t_of.push_back(traj.chart == Chart::T ? x : y[4]);
    }
    return out;
}

}  // namespace cklab
