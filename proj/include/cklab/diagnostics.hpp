// Completeness diagnostics: distance integrals, endpoint exponent fits,
// invariant-region audits and the per-trajectory verdict.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "closed_form.hpp"
#include "core.hpp"
#include "equilibria.hpp"
#include "flow.hpp"
#include "series.hpp"
#include "trajectory.hpp"

namespace cklab {

enum class End { Left, Right };

inline std::string_view to_string(End e) { return e == End::Left ? "left" : "right"; }

/// Least-squares power law y ~ C x^exponent.
struct ExponentFit {
    std::string variable;
    double exponent = std::numeric_limits<double>::quiet_NaN();
    /// Half-width of the 95% interval on the exponent.
    double stderr95 = std::numeric_limits<double>::quiet_NaN();
    /// Range of the distance-to-end coordinate used.
    double window_lo = 0.0;
    double window_hi = 0.0;
    double r2 = 0.0;
    /// Expected exponent, NaN when there is none.
    double reference = std::numeric_limits<double>::quiet_NaN();
    std::size_t points = 0;

    bool accepted() const { return r2 >= 0.99; }
    bool has_reference() const { return !std::isnan(reference); }
    bool matches_reference(double rel = 0.05) const {
        return has_reference() && std::abs(exponent - reference) <= rel * std::abs(reference);
    }
};

/// y = intercept + slope x, with r^2 and the slope's standard error.
struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r2 = 0.0;
    double slope_se = 0.0;
};

inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 3 || y.size() != n) throw Error(ErrorCode::InsufficientSamples, "need at least 3 points for a fit");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0)) throw Error(ErrorCode::InsufficientSamples, "degenerate abscissae");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        sse += r * r;
    }
    f.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
    f.slope_se = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
    return f;
}

inline ExponentFit power_fit(std::string variable, const std::vector<double>& x, const std::vector<double>& y,
                             double reference = std::numeric_limits<double>::quiet_NaN()) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0 && y[i] > 0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    const auto lf = linear_fit(lx, ly);
    ExponentFit f;
    f.variable = std::move(variable);
    f.exponent = lf.slope;
    f.stderr95 = 1.96 * lf.slope_se;
    f.r2 = lf.r2;
    f.reference = reference;
    f.points = lx.size();
    f.window_lo = *std::min_element(x.begin(), x.end());
    f.window_hi = *std::max_element(x.begin(), x.end());
    return f;
}

enum class DistanceKind { Finite, Divergent, Undetermined };

inline std::string_view to_string(DistanceKind k) {
    switch (k) {
        case DistanceKind::Finite: return "Finite";
        case DistanceKind::Divergent: return "Divergent";
        case DistanceKind::Undetermined: return "Undetermined";
    }
    return "Undetermined";
}

struct DistanceResult {
    DistanceKind kind = DistanceKind::Undetermined;
    /// Distance from the end to the reference sample, tail included. Infinite
    /// when divergent.
    double value = std::numeric_limits<double>::quiet_NaN();
    /// Part of `value` beyond the last sample (geometric or exponential tail).
    double tail = 0.0;
    /// Dyadic window integrals, ordered towards the end.
    std::vector<double> window_sums;
    /// Ratios of consecutive window sums.
    std::vector<double> ratios;
    /// Power law of the integrand abc in the distance to the end.
    ExponentFit integrand;
};

/// Ratio below which dyadic tail sums count as geometrically decreasing.
inline constexpr double kConvergentRatio = 0.9;

namespace detail {

struct Quadrature {
    std::vector<double> t, g, dg, I;

    // I(t) by cubic Hermite on the cumulative integral, whose slope is g
    double at(double x) const {
        if (x <= t.front()) return I.front();
        if (x >= t.back()) return I.back();
        const auto it = std::upper_bound(t.begin(), t.end(), x);
        const std::size_t j = static_cast<std::size_t>(it - t.begin());
        const std::size_t i = j - 1;
        const double h = t[j] - t[i];
        const double th = (x - t[i]) / h;
        const double h00 = (1 + 2 * th) * (1 - th) * (1 - th), h10 = th * (1 - th) * (1 - th);
        const double h01 = th * th * (3 - 2 * th), h11 = th * th * (th - 1);
        return h00 * I[i] + h10 * h * g[i] + h01 * I[j] + h11 * h * g[j];
    }
};

// integrand abc and its t-derivative at each sample, with the running integral
inline Quadrature abc_quadrature(const Trajectory& tr) {
    Quadrature q;
    const std::size_t n = tr.size();
    q.t = tr.t_of;
    q.g.resize(n);
    q.dg.resize(n);
    q.I.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) std::tie(q.g[i], q.dg[i]) = rate_and_slope(tr.group, Chart::R, tr.samples[i]);
    for (std::size_t i = 1; i < n; ++i) {
        const double h = q.t[i] - q.t[i - 1];
        q.I[i] = q.I[i - 1] + h / 2.0 * (q.g[i - 1] + q.g[i]) + h * h / 12.0 * (q.dg[i - 1] - q.dg[i]);
    }
    return q;
}

inline DistanceKind tail_verdict(const std::vector<double>& ratios) {
    if (ratios.size() < 3) return DistanceKind::Undetermined;
    const auto last = ratios.end() - 3;
    if (std::all_of(last, ratios.end(), [](double r) { return r < kConvergentRatio; })) return DistanceKind::Finite;
    if (std::all_of(last, ratios.end(), [](double r) { return r > 1.0; })) return DistanceKind::Divergent;
    return DistanceKind::Undetermined;
}

}  // namespace detail

/// Riemannian distance |int abc dt| from the reference time t_ref to one end
/// of the trajectory. t_ref defaults to 0 when the data cover it (the seed of
/// an integration) and to the middle of the data otherwise.
///
/// Finite ends (blowups) are approached through dyadic windows in |t - xi|
/// and ends at t = -inf or +inf through dyadic windows in |t - t_ref|. An
/// equilibrium capture is a hyperbolic end where abc decays exponentially,
/// so its windows have equal width instead. The verdict comes from the last
/// three window ratios: all below 0.9 is Finite, all above 1 is Divergent. A
/// UserLimit end is the end of the data and its distance is the plain
/// integral.
///
/// The tail beyond the last sample is g^2/g' for a capture and the geometric
/// series of the last ratio otherwise.
inline DistanceResult distance_integral(const Trajectory& traj_in, End end, std::optional<double> t_ref = std::nullopt,
                                        int windows = 10) {
    if (traj_in.size() < 2) throw Error(ErrorCode::UnresolvedEndpoint, "trajectory has fewer than two samples");
    const Trajectory traj = traj_in.chart == Chart::T ? traj_in : change_chart(traj_in, Chart::T);
    const auto q = detail::abc_quadrature(traj);
    const Endpoint& ep = end == End::Left ? traj.left : traj.right;
    const bool left = end == End::Left;
    const std::size_t n = traj.size();
    const double t_near = left ? q.t.front() : q.t.back();
    const double t_far = left ? q.t.back() : q.t.front();
    const double t_lo = q.t.front(), t_hi = q.t.back();
    const double tr0 = t_ref ? *t_ref : (t_lo <= 0.0 && 0.0 <= t_hi ? 0.0 : 0.5 * (t_lo + t_hi));
    if (!(tr0 >= t_lo && tr0 <= t_hi)) throw Error(ErrorCode::OutOfRange, "reference time outside the data");
    DistanceResult res;
    const double data = std::abs(q.at(t_near) - q.at(tr0));

    if (ep.kind == EndKind::UserLimit) {
        res.kind = DistanceKind::Finite;
        res.value = data;
        return res;
    }
    const bool finite_end = ep.kind == EndKind::FiniteBlowup;
    const double xi = ep.t_value;
    if (finite_end && !std::isfinite(xi)) throw Error(ErrorCode::UnresolvedEndpoint, "blowup end has no finite coordinate");

    // x: distance to the end (finite) or from the reference (infinite)
    const auto t_of_x = [&](double x) {
        if (finite_end) return left ? xi + x : xi - x;
        return left ? tr0 - x : tr0 + x;
    };
    const double x_near = finite_end ? std::abs(t_near - xi) : std::abs(t_near - tr0);
    if (!(x_near > 0)) throw Error(ErrorCode::UnresolvedEndpoint, "no data between the reference and the end");
    if (finite_end) {
        const double x_far = std::abs(t_far - xi);
        windows = std::min(windows, static_cast<int>(std::floor(std::log2(x_far / x_near))));
    }
    if (windows < 4) throw Error(ErrorCode::UnresolvedEndpoint, "data cover fewer than four dyadic windows");

    const bool capture = ep.kind == EndKind::EquilibriumCapture;
    // window k (k = 0 farthest from the end) spans [lo, hi] in x
    for (int k = 0; k < windows; ++k) {
        double lo, hi;
        if (capture) {
            lo = x_near * k / windows;
            hi = x_near * (k + 1) / windows;
        } else {
            hi = finite_end ? x_near * std::ldexp(1.0, windows - k) : x_near * std::ldexp(1.0, k + 1 - windows);
            lo = hi / 2.0;
        }
        res.window_sums.push_back(std::abs(q.at(t_of_x(hi)) - q.at(t_of_x(lo))));
    }
    for (std::size_t k = 1; k < res.window_sums.size(); ++k)
        res.ratios.push_back(res.window_sums[k - 1] > 0 ? res.window_sums[k] / res.window_sums[k - 1]
                                                        : std::numeric_limits<double>::infinity());
    res.kind = detail::tail_verdict(res.ratios);

    // integrand power law over the three windows nearest the end
    if (!capture) {
        const double lo = finite_end ? x_near : x_near / 8.0;
        const double hi = finite_end ? x_near * 8.0 : x_near;
        std::vector<double> xs, gs;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = finite_end ? std::abs(q.t[i] - xi) : std::abs(q.t[i] - tr0);
            const bool same_side = left ? q.t[i] <= tr0 : q.t[i] >= tr0;
            if (x >= lo && x <= hi && (finite_end || same_side)) {
                xs.push_back(x);
                gs.push_back(q.g[i]);
            }
        }
        const double ref = res.kind == DistanceKind::Divergent && finite_end ? -1.5 : std::numeric_limits<double>::quiet_NaN();
        if (xs.size() >= 3) res.integrand = power_fit("abc", xs, gs, ref);
    }

    if (res.kind == DistanceKind::Divergent) {
        res.value = std::numeric_limits<double>::infinity();
        return res;
    }
    if (ep.kind == EndKind::EquilibriumCapture) {
        const std::size_t i = left ? 0 : n - 1;
        const double dg = std::abs(q.dg[i]);
        res.tail = dg > 0 ? q.g[i] * q.g[i] / dg : 0.0;
    } else if (res.kind == DistanceKind::Finite) {
        // windows beyond the data keep shrinking by the last ratio
        const double rho = res.ratios.back();
        res.tail = res.window_sums.back() * rho / (1.0 - rho);
    }
    res.value = data + res.tail;
    return res;
}

/// Per-variable power laws |t - xi|^p at a FiniteBlowup end, fitted on the
/// last decade of samples. At a left end the variable that blows up has
/// reference -1/2 and the others +1/2.
inline std::vector<ExponentFit> asymptotic_blowup_fit(const Trajectory& traj_in, End end) {
    const Trajectory traj = traj_in.chart == Chart::T ? traj_in : change_chart(traj_in, Chart::T);
    const Endpoint& ep = end == End::Left ? traj.left : traj.right;
    if (ep.kind != EndKind::FiniteBlowup || !std::isfinite(ep.t_value))
        throw Error(ErrorCode::UnresolvedEndpoint, "end is not a finite blowup");
    const double xi = ep.t_value;
    const std::size_t n = traj.size();
    const std::size_t i_near = end == End::Left ? 0 : n - 1;
    const double x_min = std::abs(traj.t_of[i_near] - xi);
    std::vector<double> xs;
    std::vector<std::array<double, 4>> ys;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::abs(traj.t_of[i] - xi);
        if (x <= 10.0 * x_min) {
            xs.push_back(x);
            const auto& s = traj.samples[i];
            ys.push_back({s.a, s.b, s.c, s.alpha});
        }
    }
    if (xs.size() < 5) throw Error(ErrorCode::InsufficientSamples, "fewer than five samples in the last decade");
    const auto& near = traj.samples[i_near];
    const std::array<double, 3> v{near.a, near.b, near.c};
    const int big = static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
    const std::array<std::string, 4> names{"a", "b", "c", "alpha"};
    std::vector<ExponentFit> fits;
    for (int k = 0; k < 3; ++k) {
        std::vector<double> y;
        for (const auto& row : ys) y.push_back(row[static_cast<std::size_t>(k)]);
        double ref = std::numeric_limits<double>::quiet_NaN();
        if (end == End::Left) ref = k == big ? -0.5 : 0.5;
        fits.push_back(power_fit(names[static_cast<std::size_t>(k)], xs, y, ref));
    }
    return fits;
}

struct MonotoneAudit {
    std::string quantity;
    std::size_t violations = 0;
};

struct AuditReport {
    std::size_t samples = 0;
    /// The region 0 <= c^2 - a^2 <= 2 alpha is only defined for E(2).
    bool region_applicable = false;
    std::size_t region_violations = 0;
    std::vector<MonotoneAudit> monotone;

    bool not_case3() const { return region_applicable && region_violations > 0; }
    std::size_t monotone_violations() const {
        std::size_t n = 0;
        for (const auto& m : monotone) n += m.violations;
        return n;
    }
};

inline constexpr double kAuditSlack = 1e-10;

/// Sample-by-sample check of the E(2) invariant region and of the
/// nondecreasing quantities ab, ac, bc and b, along increasing t.
inline AuditReport invariant_region_audit(const GroupSpec& g, const Trajectory& traj) {
    AuditReport rep;
    rep.samples = traj.size();
    rep.region_applicable = g.tag == GroupTag::E2;
    if (rep.region_applicable) {
        for (const auto& s : traj.samples) {
            const double d = s.c * s.c - s.a * s.a;
            const double slack = kAuditSlack * std::max({1.0, s.c * s.c, s.a * s.a, std::abs(s.alpha)});
            if (d < -slack || d > 2.0 * s.alpha + slack) ++rep.region_violations;
        }
    }
    const std::array<std::string, 4> names{"ab", "ac", "bc", "b"};
    const auto value = [](const State& s, int k) {
        switch (k) {
            case 0: return s.a * s.b;
            case 1: return s.a * s.c;
            case 2: return s.b * s.c;
            default: return s.b;
        }
    };
    // samples are ordered by increasing chart coordinate, which is increasing t
    for (int k = 0; k < 4; ++k) {
        MonotoneAudit m{names[static_cast<std::size_t>(k)], 0};
        for (std::size_t i = 1; i < traj.size(); ++i) {
            const double prev = value(traj.samples[i - 1], k), cur = value(traj.samples[i], k);
            if (cur < prev - kAuditSlack * std::max(1.0, std::abs(prev))) ++m.violations;
        }
        rep.monotone.push_back(m);
    }
    return rep;
}

/// Result of the E(2) right-end analysis in the chart rho = 2 sqrt(ab), where
/// the metric is W^{-1} drho^2 + ... with W = c^2/(ab) and V = a/b.
///
/// V approaches its limit L only slowly (logarithmically along unstable
/// curves), so the tail fit is W = V/2 + k + p rho^{-4}, which is the
/// three-term form with the current V in place of L. r2 is measured on W.
struct WChartResult {
    DistanceKind kind = DistanceKind::Undetermined;
    /// W - V/2 = A + p rho^{-4} on the tail; A estimates k.
    double A = 0.0;
    double p = 0.0;
    double r2 = 0.0;
    /// V at the last sample, an upper bound for L since V decreases.
    double L = 0.0;
    double k_fit = 0.0;
    /// alpha/(ab) along the data, at the last sample.
    double k_data = 0.0;
    double k_rel_error = 0.0;
    /// Increases of V along the data (it should decrease).
    std::size_t v_increases = 0;
    double rho_fit_lo = 0.0;
    double rho_fit_hi = 0.0;
    /// int W^{-1/2} drho over [rho0, 2^j rho0], and its ratio to 2^j rho0.
    std::vector<double> cumulative;
    std::vector<double> growth;
    std::vector<double> window_sums;
    std::vector<double> ratios;
};

/// Core of the W-chart analysis on sampled (rho, W, V, k). k may be empty.
/// The fit uses the samples with rho in the last `fit_decades` decades.
inline WChartResult w_chart_verdict(const std::vector<double>& rho, const std::vector<double>& W,
                                    const std::vector<double>& V, const std::vector<double>& k = {},
                                    double fit_decades = 2.0) {
    const std::size_t n = rho.size();
    if (n < 8 || W.size() != n || V.size() != n) throw Error(ErrorCode::InsufficientSamples, "need at least 8 samples");
    for (std::size_t i = 1; i < n; ++i)
        if (!(rho[i] > rho[i - 1])) throw Error(ErrorCode::NonmonotoneChart, "rho must increase");
    WChartResult res;
    for (std::size_t i = 1; i < n; ++i)
        if (V[i] > V[i - 1] * (1.0 + kAuditSlack)) ++res.v_increases;
    res.L = V.back();
    res.k_data = k.empty() ? std::numeric_limits<double>::quiet_NaN() : k.back();

    const double rho_hi = rho.back();
    const double rho_lo = std::max(rho.front(), rho_hi * std::pow(10.0, -fit_decades));
    std::vector<double> xs, ys, ws, vs;
    for (std::size_t i = 0; i < n; ++i) {
        if (rho[i] >= rho_lo) {
            xs.push_back(std::pow(rho[i], -4.0));
            ys.push_back(W[i] - V[i] / 2.0);
            ws.push_back(W[i]);
            vs.push_back(V[i]);
        }
    }
    const auto lf = linear_fit(xs, ys);
    res.A = lf.intercept;
    res.p = lf.slope;
    {
        double mw = 0;
        for (double w : ws) mw += w;
        mw /= static_cast<double>(ws.size());
        double sse = 0, sst = 0;
        for (std::size_t i = 0; i < ws.size(); ++i) {
            const double pred = vs[i] / 2.0 + res.A + res.p * xs[i];
            sse += (ws[i] - pred) * (ws[i] - pred);
            sst += (ws[i] - mw) * (ws[i] - mw);
        }
        res.r2 = sst > 0 ? 1.0 - sse / sst : 1.0;
    }
    res.rho_fit_lo = rho_lo;
    res.rho_fit_hi = rho_hi;
    res.k_fit = res.A;
    if (!k.empty()) res.k_rel_error = std::abs(res.k_fit - res.k_data) / std::abs(res.k_data);

    // cumulative int W^{-1/2} drho by trapezoid, read at dyadic rho
    std::vector<double> cum(n, 0.0);
    for (std::size_t i = 1; i < n; ++i)
        cum[i] = cum[i - 1] + 0.5 * (rho[i] - rho[i - 1]) * (1.0 / std::sqrt(W[i - 1]) + 1.0 / std::sqrt(W[i]));
    const auto cum_at = [&](double r) {
        const auto it = std::upper_bound(rho.begin(), rho.end(), r);
        if (it == rho.begin()) return cum.front();
        if (it == rho.end()) return cum.back();
        const std::size_t j = static_cast<std::size_t>(it - rho.begin());
        const double th = (r - rho[j - 1]) / (rho[j] - rho[j - 1]);
        return cum[j - 1] + th * (cum[j] - cum[j - 1]);
    };
    const double rho0 = rho.front();
    const double base = cum_at(rho0);
    double prev_window = 0.0;
    for (int j = 1; rho0 * std::ldexp(1.0, j) <= rho_hi; ++j) {
        const double r = rho0 * std::ldexp(1.0, j);
        const double c = cum_at(r) - base;
        res.cumulative.push_back(c);
        res.growth.push_back(c / r);
        const double w = cum_at(r) - cum_at(r / 2.0);
        res.window_sums.push_back(w);
        if (j > 1) res.ratios.push_back(prev_window > 0 ? w / prev_window : std::numeric_limits<double>::infinity());
        prev_window = w;
    }
    res.kind = detail::tail_verdict(res.ratios);
    return res;
}

/// Right-end distance of an E(2) trajectory through the W chart.
inline WChartResult e2_distance_via_W(const Trajectory& traj) {
    if (traj.group.tag != GroupTag::E2) throw Error(ErrorCode::UnsupportedGroup, "the W chart is set up for E(2)");
    const auto audit = invariant_region_audit(traj.group, traj);
    if (audit.not_case3()) throw Error(ErrorCode::NotCase3, "trajectory leaves 0 <= c^2 - a^2 <= 2 alpha");
    std::vector<double> rho, W, V, k;
    for (const auto& s : traj.samples) {
        const double ab = s.a * s.b;
        const double r = 2.0 * std::sqrt(ab);
        // near the bolt rho can stall at rounding level; keep it strictly increasing
        if (!rho.empty() && !(r > rho.back())) continue;
        rho.push_back(r);
        W.push_back(s.c * s.c / ab);
        V.push_back(s.a / s.b);
        k.push_back(s.alpha / ab);
    }
    return w_chart_verdict(rho, W, V, k);
}

// ---------------------------------------------------------------- classify

enum class SeedSource { UnstableCurve, Explicit, ClosedForm };

inline std::string_view to_string(SeedSource s) {
    switch (s) {
        case SeedSource::UnstableCurve: return "unstable_curve";
        case SeedSource::Explicit: return "explicit";
        case SeedSource::ClosedForm: return "closed_form";
    }
    return "explicit";
}

struct SeedSpec {
    SeedSource source = SeedSource::UnstableCurve;
    Family family = Family::SU2_qq0;
    double q = 1.0;
    /// Second parameter of the E(2) family (0, p, 0, r).
    double r = 1.0;
    SeedOptions seed;
    /// Initial state for SeedSource::Explicit.
    State initial;
    /// Bolt value of the explicit Heisenberg family.
    double c1 = 1.0;
    IntegratorOptions integrator;
    int series_order = 8;
};

enum class LeftVerdict { FiniteDistanceBolt, FiniteDistanceNutFail, FiniteDistanceNotSmooth, Incomplete, NotApplicable };
enum class RightVerdict { InfiniteDistance, FiniteDistance, Undetermined, NotApplicable };
enum class Overall { CompleteWithBolt, Incomplete, Excluded, Unknown };

inline std::string_view to_string(LeftVerdict v) {
    switch (v) {
        case LeftVerdict::FiniteDistanceBolt: return "FiniteDistance+Bolt";
        case LeftVerdict::FiniteDistanceNutFail: return "FiniteDistance+NutFail";
        case LeftVerdict::FiniteDistanceNotSmooth: return "FiniteDistance+NotSmooth";
        case LeftVerdict::Incomplete: return "Incomplete";
        case LeftVerdict::NotApplicable: return "NotApplicable";
    }
    return "NotApplicable";
}

inline std::string_view to_string(RightVerdict v) {
    switch (v) {
        case RightVerdict::InfiniteDistance: return "InfiniteDistance";
        case RightVerdict::FiniteDistance: return "FiniteDistance";
        case RightVerdict::Undetermined: return "Undetermined";
        case RightVerdict::NotApplicable: return "NotApplicable";
    }
    return "NotApplicable";
}

inline std::string_view to_string(Overall v) {
    switch (v) {
        case Overall::CompleteWithBolt: return "CompleteWithBolt";
        case Overall::Incomplete: return "Incomplete";
        case Overall::Excluded: return "Excluded";
        case Overall::Unknown: return "Unknown";
    }
    return "Unknown";
}

struct ClassificationReport {
    GroupSpec group;
    SeedSpec spec;
    /// Point the integration started from.
    State seed;
    std::optional<Family> limit_family;
    LeftVerdict left = LeftVerdict::NotApplicable;
    RightVerdict right = RightVerdict::NotApplicable;
    Overall overall = Overall::Unknown;
    /// Empty for CompleteWithBolt; otherwise the first failing step.
    std::string reason;
    Endpoint left_end;
    Endpoint right_end;
    std::optional<DistanceResult> left_distance;
    std::optional<DistanceResult> right_distance;
    std::optional<WChartResult> w_chart;
    std::vector<ExponentFit> left_blowup;
    std::optional<SeriesSolution> series;
    std::optional<SmoothnessReport> smoothness;
    AuditReport audit;
    /// Largest relative drift of the first integrals over the run.
    double first_integral_drift = 0.0;
    bool finite_length_escape = false;
    std::size_t samples = 0;
};

namespace detail {

// 0 when alpha vanishes identically (the Ricci-flat case has no ratio to track)
inline double first_integral_drift(const GroupSpec& g, const Trajectory& tr) {
    if (tr.empty() || tr.samples.front().alpha == 0.0) return 0.0;
    const auto ref = first_integrals(g, tr.samples.front());
    double worst = 0.0;
    for (const auto& s : tr.samples) {
        const auto cur = first_integrals(g, s);
        for (std::size_t k = 0; k < cur.size(); ++k)
            worst = std::max(worst, std::abs(cur[k].second - ref[k].second) / std::max(1e-300, std::abs(ref[k].second)));
    }
    return worst;
}

inline std::optional<Family> family_of_limit(const GroupSpec& g, const State& p) {
    const double tol = 1e-6 * std::max({1.0, p.a, p.b, p.c});
    const bool za = p.a <= tol, zb = p.b <= tol, zc = p.c <= tol;
    if (g.tag == GroupTag::SU2) {
        if (za && zb && zc) return Family::SU2_origin;
        if (zc) return Family::SU2_qq0;
        if (za) return Family::SU2_0qq;
        if (zb) return Family::SU2_q0q;
    } else if (g.tag == GroupTag::E2) {
        if (za && zc) return Family::E2_0p0r;
        if (zb) return Family::E2_q0q0;
    }
    return std::nullopt;
}

// left smoothness verdict from a series about the captured singular orbit
inline void judge_smoothness(ClassificationReport& rep, const SeriesSolution& s) {
    rep.series = s;
    rep.smoothness = vz_check(s);
    if (rep.smoothness->pass()) {
        rep.left = LeftVerdict::FiniteDistanceBolt;
        return;
    }
    if (s.orbit == OrbitKind::Nut) {
        rep.left = LeftVerdict::FiniteDistanceNutFail;
        rep.reason = "NutSlopesFail";
    } else {
        rep.left = LeftVerdict::FiniteDistanceNotSmooth;
        rep.reason = "SmoothExtensionFails";
    }
}

inline void finish(ClassificationReport& rep) {
    if (rep.overall == Overall::Excluded) return;
    const bool complete = rep.left == LeftVerdict::FiniteDistanceBolt && rep.right == RightVerdict::InfiniteDistance &&
                          rep.finite_length_escape;
    if (complete) {
        // only unstable curves and the closed forms are covered by a completeness statement
        if (rep.group.tag == GroupTag::E2 && rep.spec.source != SeedSource::UnstableCurve) {
            rep.overall = Overall::Unknown;
            rep.reason = "NotUnstableCurve";
            return;
        }
        rep.overall = Overall::CompleteWithBolt;
        rep.reason.clear();
        return;
    }
    if (rep.left == LeftVerdict::NotApplicable || rep.right == RightVerdict::Undetermined) {
        rep.overall = Overall::Unknown;
        if (rep.reason.empty()) rep.reason = "Undetermined";
        return;
    }
    rep.overall = Overall::Incomplete;
    if (rep.reason.empty()) rep.reason = rep.right == RightVerdict::FiniteDistance ? "FiniteRightDistance" : "Undetermined";
}

inline RightVerdict right_from(const DistanceResult& d) {
    switch (d.kind) {
        case DistanceKind::Divergent: return RightVerdict::InfiniteDistance;
        case DistanceKind::Finite: return RightVerdict::FiniteDistance;
        default: return RightVerdict::Undetermined;
    }
}

inline void classify_trajectory(ClassificationReport& rep, const Trajectory& tr) {
    const GroupSpec& g = rep.group;
    rep.left_end = tr.left;
    rep.right_end = tr.right;
    rep.samples = tr.size();
    rep.audit = invariant_region_audit(g, tr);
    rep.first_integral_drift = first_integral_drift(g, tr);

    // right end
    if (g.tag == GroupTag::E2 && !rep.audit.not_case3() && tr.right.kind == EndKind::FiniteBlowup) {
        rep.w_chart = e2_distance_via_W(tr);
        rep.right = rep.w_chart->kind == DistanceKind::Divergent ? RightVerdict::InfiniteDistance
                    : rep.w_chart->kind == DistanceKind::Finite  ? RightVerdict::FiniteDistance
                                                                 : RightVerdict::Undetermined;
    } else if (tr.right.kind != EndKind::UserLimit) {
        rep.right_distance = distance_integral(tr, End::Right, rep.seed.t);
        rep.right = right_from(*rep.right_distance);
    } else {
        rep.right = RightVerdict::Undetermined;
    }
    rep.finite_length_escape = rep.right == RightVerdict::InfiniteDistance;

    // left end
    if (tr.left.kind == EndKind::FiniteBlowup) {
        rep.left_distance = distance_integral(tr, End::Left, rep.seed.t);
        try {
            rep.left_blowup = asymptotic_blowup_fit(tr, End::Left);
        } catch (const Error&) {
        }
        rep.left = LeftVerdict::Incomplete;
        rep.reason = "FiniteXi";
        return;
    }
    if (tr.left.kind != EndKind::EquilibriumCapture) {
        rep.left = LeftVerdict::NotApplicable;
        rep.reason = "LeftEndUnresolved";
        return;
    }
    rep.left_distance = distance_integral(tr, End::Left, rep.seed.t);
    if (rep.left_distance->kind != DistanceKind::Finite) {
        rep.left = LeftVerdict::NotApplicable;
        rep.reason = "LeftDistanceUndetermined";
        return;
    }
    rep.limit_family = family_of_limit(g, tr.left.limit);
    if (!rep.limit_family) {
        rep.left = LeftVerdict::NotApplicable;
        rep.reason = "UnknownLimit";
        return;
    }
    if (*rep.limit_family == Family::E2_0p0r) {
        rep.overall = Overall::Excluded;
        rep.reason = "ExcludedFamily";
        return;
    }
    const double qv = *rep.limit_family == Family::SU2_0qq ? tr.left.limit.b : tr.left.limit.a;
    const Equilibrium eq = make_equilibrium(g, *rep.limit_family, qv);
    SeriesOptions so;
    so.order = rep.spec.series_order;
    double alpha1 = 0.0;
    if (*rep.limit_family == Family::E2_q0q0) {
        // alpha = k ab and b ~ r fix the slope of alpha at the bolt
        const State& s = tr.samples.front();
        alpha1 = s.alpha / (s.a * s.b) * eq.point.a;
    }
    judge_smoothness(rep, series_solve(g, eq, so, alpha1));
}

}  // namespace detail

/// Completeness verdict for one solution: integration both ways from the
/// seed, distances to both ends, and the smooth-extension conditions at the
/// singular orbit the left end reaches.
inline ClassificationReport classify(const GroupSpec& g, const SeedSpec& spec) {
    if (g.lambda != 0.0) throw Error(ErrorCode::UnsupportedLambda, "classification requires lambda = 0");
    ClassificationReport rep;
    rep.group = g;
    rep.spec = spec;

    if (spec.source == SeedSource::ClosedForm || (g.tag == GroupTag::Heisenberg && spec.source != SeedSource::Explicit)) {
        if (g.tag != GroupTag::Heisenberg) throw Error(ErrorCode::UnsupportedGroup, "closed-form classification is for the Heisenberg family");
        const HeisenbergSolution sol{spec.c1, 1.0};
        sol.validate();
        rep.spec.source = SeedSource::ClosedForm;
        std::vector<double> mesh;
        for (int i = 0; i <= 4000; ++i) mesh.push_back(-20.0 + 40.0 * i / 4000.0);
        const Trajectory tr = change_chart(heis_trajectory(sol, mesh), Chart::T);
        rep.seed = tr.samples[tr.size() / 2];
        rep.left_end = tr.left;
        rep.right_end = tr.right;
        rep.samples = tr.size();
        rep.audit = invariant_region_audit(g, tr);
        rep.first_integral_drift = detail::first_integral_drift(g, tr);
        rep.left_distance = distance_integral(tr, End::Left, rep.seed.t);
        rep.right_distance = distance_integral(tr, End::Right, rep.seed.t);
        rep.right = detail::right_from(*rep.right_distance);
        // escaping curves must reach q = +inf, which the length bound in q forbids
        const double inf = std::numeric_limits<double>::infinity();
        const auto lb = heis_length_bounds(sol, {{0, 0, 0, 0, 0}, {1, 0, 0, 0, inf}});
        rep.finite_length_escape = lb.escape_needs_infinite_length && rep.right == RightVerdict::InfiniteDistance;
        if (rep.left_distance->kind != DistanceKind::Finite) {
            rep.left = LeftVerdict::NotApplicable;
            rep.reason = "LeftDistanceUndetermined";
        } else {
            SeriesOptions so;
            so.order = spec.series_order;
            detail::judge_smoothness(rep, series_solve(g, heisenberg_bolt_base(spec.c1), so));
        }
        detail::finish(rep);
        return rep;
    }

    if (spec.source == SeedSource::Explicit) {
        if (g.tag == GroupTag::Heisenberg || g.tag == GroupTag::Custom) {
            rep.seed = spec.initial;
            rep.overall = Overall::Unknown;
            rep.reason = "NoClassificationForGroup";
            return rep;
        }
        rep.seed = spec.initial;
        rep.seed.t = 0.0;
        // the reduced SU(2) system lives on the level alpha = e^{-A} ab
        if (g.uses_reduced_su2()) rep.seed.alpha = g.exp_neg_A * rep.seed.a * rep.seed.b;
        const Trajectory tr = integrate_both(g, rep.seed, spec.integrator);
        detail::classify_trajectory(rep, tr);
        detail::finish(rep);
        return rep;
    }

    // unstable curve of an equilibrium
    require_studied(g);
    if (spec.family == Family::E2_0p0r) {
        rep.overall = Overall::Excluded;
        rep.reason = "ExcludedFamily";
        return rep;
    }
    if (spec.family == Family::SU2_origin) {
        // the origin has no unstable direction; its solutions are the explicit
        // biaxial family with B = 0
        const SU2BiaxialSolution sol{1.0 + g.exp_neg_A, 0.0, 0.0};
        std::vector<double> mesh;
        for (int i = 0; i <= 4000; ++i) mesh.push_back(-20.0 + 40.0 * i / 4000.0);
        const Trajectory tr = su2_biaxial_trajectory(sol, mesh);
        rep.seed = tr.samples[tr.size() / 2];
        rep.left_end = tr.left;
        rep.right_end = tr.right;
        rep.samples = tr.size();
        rep.audit = invariant_region_audit(g, tr);
        rep.first_integral_drift = detail::first_integral_drift(g, tr);
        rep.left_distance = distance_integral(tr, End::Left, rep.seed.t);
        rep.right_distance = distance_integral(tr, End::Right, rep.seed.t);
        rep.right = detail::right_from(*rep.right_distance);
        rep.finite_length_escape = rep.right == RightVerdict::InfiniteDistance;
        rep.limit_family = Family::SU2_origin;
        if (rep.left_distance->kind != DistanceKind::Finite) {
            rep.left = LeftVerdict::NotApplicable;
            rep.reason = "LeftDistanceUndetermined";
        } else {
            SeriesOptions so;
            so.order = spec.series_order;
            detail::judge_smoothness(rep, series_solve(g, make_equilibrium(g, Family::SU2_origin, 0.0), so));
        }
        detail::finish(rep);
        return rep;
    }
    if (!(spec.q > 0.0)) {
        rep.overall = Overall::Excluded;
        rep.reason = "ExcludedFamily";
        return rep;
    }
    const Equilibrium eq = make_equilibrium(g, spec.family, spec.q, spec.r);
    const auto lin = linearize(g, eq);
    rep.seed = unstable_seed(g, eq, lin, spec.seed);
    const Trajectory tr = integrate_both(g, rep.seed, spec.integrator);
    detail::classify_trajectory(rep, tr);
    detail::finish(rep);
    return rep;
}

/// Plain-text summary of a report.
inline std::string to_text(const ClassificationReport& r) {
    std::string out;
    char buf[256];
    const auto line = [&](const char* key, const std::string& val) {
        std::snprintf(buf, sizeof buf, "%-22s %s\n", key, val.c_str());
        out += buf;
    };
    const auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return std::string(buf);
    };
    line("group", std::string(to_string(r.group.tag)));
    if (r.group.tag == GroupTag::SU2) line("exp_neg_A", num(r.group.exp_neg_A));
    line("source", std::string(to_string(r.spec.source)));
    if (r.spec.source == SeedSource::UnstableCurve) {
        line("family", std::string(to_string(r.spec.family)));
        line("q", num(r.spec.q));
        line("epsilon", num(r.spec.seed.epsilon));
    }
    if (r.spec.source == SeedSource::ClosedForm) line("c1", num(r.spec.c1));
    line("left end", std::string(to_string(r.left_end.kind)));
    line("right end", std::string(to_string(r.right_end.kind)));
    if (r.left_distance) {
        std::string s(to_string(r.left_distance->kind));
        if (std::isfinite(r.left_distance->value)) s += " " + num(r.left_distance->value);
        if (!r.left_distance->ratios.empty()) s += " (tail ratio " + num(r.left_distance->ratios.back()) + ")";
        line("left distance", s);
    }
    if (r.right_distance) {
        std::string s(to_string(r.right_distance->kind));
        if (r.right_distance->integrand.points > 0)
            s += " (integrand exponent " + num(r.right_distance->integrand.exponent) + ", r2 " +
                 num(r.right_distance->integrand.r2) + ")";
        line("right distance", s);
    }
    if (r.w_chart) {
        line("right distance (W)", std::string(to_string(r.w_chart->kind)) + " (W = " + num(r.w_chart->A) + " + " +
                                       num(r.w_chart->p) + "/rho^4, r2 " + num(r.w_chart->r2) + ", k " +
                                       num(r.w_chart->k_fit) + " vs " + num(r.w_chart->k_data) + ")");
    }
    for (const auto& f : r.left_blowup)
        line(("blowup exponent " + f.variable).c_str(), num(f.exponent) + " (reference " + num(f.reference) + ")");
    if (r.smoothness) {
        line("orbit", std::string(to_string(r.smoothness->orbit_kind)));
        for (const auto& c : r.smoothness->metric_conditions)
            line(("  " + c.name).c_str(), std::string(c.pass ? "pass" : "FAIL") + " (" + num(c.observed) + ")");
        for (const auto& c : r.smoothness->kahler_conditions)
            line(("  " + c.name).c_str(), std::string(c.pass ? "pass" : "FAIL") + " (" + num(c.observed) + ")");
        if (!r.smoothness->integrality_phrasings.empty())
            line("  integrality", std::string(r.smoothness->integrality ? "pass" : "FAIL") + " (" +
                                      num(r.smoothness->integrality_value) + ")");
    }
    line("first integral drift", num(r.first_integral_drift));
    line("left verdict", std::string(to_string(r.left)));
    line("right verdict", std::string(to_string(r.right)));
    line("overall", std::string(to_string(r.overall)));
    if (!r.reason.empty()) line("reason", r.reason);
    return out;
}

}  // namespace cklab
