#pragma once

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ansatz.hpp"
#include "closed_form.hpp"
#include "diagnostics.hpp"
#include "equilibria.hpp"
#include "flow.hpp"
#include "series.hpp"

namespace cklab {

/// One line of the residual report. Negative controls are expected to fail.
struct Check {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
    bool control = false;
};

inline std::string fmt_short(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline Check make_check(std::string name, double value, double threshold, bool control = false) {
    return {std::move(name), value, threshold, std::isfinite(value) && value <= threshold, control};
}

struct VerifyOptions {
    int order = 8;
    bool inject_error = false;
    std::size_t heis_samples = 1000;
    std::size_t random_states = 100;
    std::uint64_t rng_seed = 20240607;
};

struct VerifyReport {
    std::vector<Check> checks;

    bool passed() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

inline constexpr double kClosedFormTol = 1e-10;
inline constexpr double kSeriesTol = 1e-10;
inline constexpr double kCrossCheckTol = 1e-8;
inline constexpr double kCentralTol = 1e-9;
inline constexpr double kDriftTol = 1e-8;

/// Unstable-curve run from an equilibrium, both halves joined at the seed.
inline Trajectory unstable_curve_run(const GroupSpec& g, Family fam, double q, const SeedOptions& so = {},
                                     const IntegratorOptions& io = {}, double r = 1.0) {
    const auto e = make_equilibrium(g, fam, q, r);
    const auto lin = linearize(g, e);
    return integrate_both(g, unstable_seed(g, e, lin, so), io);
}

inline double heis_worst(const HeisVerifyReport& r) {
    return std::max({r.max_heis1, r.max_heis2, r.max_central, r.max_w});
}

/// Largest scaled reduced central residual and the largest central
/// curvature from the Ricci coefficients, relative to the size of its terms.
struct CentralAlongRun {
    double reduced = 0.0;
    double ricci = 0.0;
    std::size_t ricci_samples = 0;
};

inline constexpr double kRicciConditioning = 1e-3;

inline CentralAlongRun central_along_run(const Trajectory& tr) {
    CentralAlongRun out;
    const GroupSpec& g = tr.group;
    for (const auto& s : tr.samples) {
        if (!is_interior(s)) continue;
        const Derivative d = rhs(g, s);
        out.reduced = std::max(out.reduced, std::abs(central_residual_reduced(g, s, d)) / central_residual_scale(g, s));
        // the frame derivatives cancel like eps (max/min)^3 next to a singular orbit
        if (std::min({s.a, s.b, s.c}) < kRicciConditioning * std::max({s.a, s.b, s.c})) continue;
        ++out.ricci_samples;
        const auto rc = ricci_along_flow(g, s, d.dalpha);
        const double size = std::max({1.0, std::abs(rc.r_alpha) * rc.r_beta_terms, std::abs(rc.r_gamma * rc.r_psi),
                                      std::abs(rc.r_delta * rc.r_phi)});
        out.ricci = std::max(out.ricci, std::abs(central_curvature(rc)) / size);
    }
    return out;
}

/// Ricci-coefficient central curvature against the reduced implied value at
/// random admissible states. `dalpha_shift` corrupts the alpha' handed to
/// the Ricci side only.
inline double ricci_cross_check(std::size_t count, std::uint64_t seed, double dalpha_shift = 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(0.2, 3.0), sgn(-2.0, 2.0);
    GroupSpec su2 = GroupSpec::su2(1.0);
    su2.su2_full_system = true;
    const std::vector<GroupSpec> groups{GroupSpec::heisenberg(), GroupSpec::e2(), su2,
                                        GroupSpec::custom(1.0, -1.0, 1.0)};
    double worst = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const GroupSpec& g = groups[i % groups.size()];
        State s{0.0, pos(rng), pos(rng), pos(rng), sgn(rng)};
        if (std::abs(s.alpha) < 0.05) s.alpha = 0.05;
        const auto f = vector_field<double>(g, s.a, s.b, s.c, s.alpha);
        const double dal = sgn(rng);
        const double implied = implied_central_value(g, s, {f[0], f[1], f[2], dal});
        const double curv = central_curvature(ricci_along_flow(g, s, dal + dalpha_shift));
        worst = std::max(worst, std::abs(curv - implied) / std::max(1.0, std::abs(implied)));
    }
    return worst;
}

struct OnevarStudy {
    std::vector<double> steps;
    std::vector<double> max_residual;
    /// log2 of successive residual ratios.
    std::vector<double> orders;
};

/// Finite-difference residual of the one-variable central equation on tau
/// meshes of width h, h/2, ... over [0, window] starting from `start`.
inline OnevarStudy onevar_order_study(const GroupSpec& g, const State& start, double window, int cells = 16,
                                      int levels = 4) {
    OnevarStudy out;
    IntegratorOptions io;
    io.chart = Chart::Tau;
    io.rel_tol = 1e-13;
    io.abs_tol = 1e-15;
    State s0 = start;
    s0.t = 0.0;
    for (int l = 0; l < levels; ++l) {
        const int n = cells << l;
        const double h = window / n;
        io.stops.clear();
        for (int k = 1; k <= n; ++k) io.stops.push_back(h * k);
        const Trajectory tr = integrate(g, s0, Direction::Forward, io);
        double worst = 0.0;
        for (const auto& r : central_residual_onevar(tr)) worst = std::max(worst, std::abs(r.residual));
        out.steps.push_back(h);
        out.max_residual.push_back(worst);
    }
    for (std::size_t i = 1; i < out.max_residual.size(); ++i)
        out.orders.push_back(std::log2(out.max_residual[i - 1] / out.max_residual[i]));
    return out;
}

/// State along the run a fixed t-distance after the seed, used to start the
/// one-variable study away from both ends.
inline State interior_state(const Trajectory& tr, double t_after_seed, double t_seed) {
    for (std::size_t i = 0; i < tr.size(); ++i)
        if (tr.t_of[i] >= t_seed + t_after_seed) return tr.samples[i];
    return tr.samples[tr.size() / 2];
}

/// Consolidated residual report over closed forms, series and cross-checks.
inline VerifyReport run_verify(const VerifyOptions& opt = {}) {
    VerifyReport rep;
    auto& out = rep.checks;

    for (double c1 : {0.5, 1.0, 2.0}) {
        const HeisenbergSolution sol{c1, 1.0};
        out.push_back(make_check("heisenberg_closed_form c1=" + fmt_short(c1), heis_worst(heis_verify(sol, opt.heis_samples)),
                                 kClosedFormTol));
    }

    SeriesOptions so;
    so.order = opt.order;
    const GroupSpec su2 = GroupSpec::su2(1.0);
    const GroupSpec e2 = GroupSpec::e2();
    const GroupSpec heis = GroupSpec::heisenberg();
    const auto su2_bolt = series_solve(su2, make_equilibrium(su2, Family::SU2_qq0, 1.0), so);
    out.push_back(make_check("series su2_bolt", series_residual(su2_bolt), kSeriesTol));
    const auto su2_nut = series_solve(GroupSpec::su2(1.0), make_equilibrium(su2, Family::SU2_origin, 0.0), so);
    out.push_back(make_check("series su2_nut", series_residual(su2_nut), kSeriesTol));
    for (double a1 : {0.0, 0.8}) {
        const auto s = series_solve(e2, make_equilibrium(e2, Family::E2_q0q0, 1.0), so, a1);
        out.push_back(make_check("series e2_bolt alpha1=" + fmt_short(a1), series_residual(s), kSeriesTol));
    }
    const auto heis_bolt = series_solve(heis, heisenberg_bolt_base(1.0), so);
    out.push_back(make_check("series heisenberg_bolt", series_residual(heis_bolt), kSeriesTol));
    {
        // sigma3^2 = c^2 from the recursion against the closed-form expansion
        const int n = std::min(opt.order, 8);
        const auto c2 = poly::mul(heis_bolt.coeffs[2], heis_bolt.coeffs[2], static_cast<std::size_t>(n) + 1);
        const auto ref = heis_sigma3_expansion(1.0, n);
        double worst = 0.0;
        for (std::size_t k = 0; k < std::min(c2.size(), ref.size()); ++k) worst = std::max(worst, std::abs(c2[k] - ref[k]));
        out.push_back(make_check("heisenberg_sigma3 series_vs_closed_form", worst, kCrossCheckTol));
    }

    out.push_back(make_check("ricci_vs_implied random_states", ricci_cross_check(opt.random_states, opt.rng_seed),
                             kCrossCheckTol));

    const struct {
        const char* name;
        GroupSpec g;
        Family fam;
    } runs[] = {{"su2", su2, Family::SU2_qq0}, {"e2", e2, Family::E2_q0q0}};
    for (const auto& r : runs) {
        const auto tr = unstable_curve_run(r.g, r.fam, 1.0);
        const auto cr = central_along_run(tr);
        out.push_back(make_check(std::string("central_reduced ") + r.name + "_run", cr.reduced, kCentralTol));
        out.push_back(make_check(std::string("central_ricci ") + r.name + "_run", cr.ricci, kCentralTol));
        out.push_back(make_check(std::string("first_integral_drift ") + r.name + "_run",
                                 detail::first_integral_drift(r.g, tr), kDriftTol));
    }

    if (opt.inject_error) {
        const HeisenbergSolution sol{1.0, 1.0};
        out.push_back(make_check("control heisenberg_rate_2.1", heis_worst(heis_verify(heis_profile(sol, 2.1), opt.heis_samples)),
                                 kClosedFormTol, true));
        auto bad = su2_bolt;
        if (bad.coeffs[1].size() > 2) bad.coeffs[1][2] += 0.1;
        out.push_back(make_check("control series_b2_shift", series_residual(bad), kSeriesTol, true));
        out.push_back(make_check("control ricci_dalpha_shift", ricci_cross_check(opt.random_states, opt.rng_seed, 0.1),
                                 kCrossCheckTol, true));
    }
    return rep;
}

}  // namespace cklab
