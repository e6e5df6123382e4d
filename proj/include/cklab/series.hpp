// Power series of solutions in the geodesic coordinate r about a singular
// orbit, and the smooth-extension conditions evaluated on them.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "core.hpp"
#include "equilibria.hpp"

namespace cklab {

using Coeffs = std::vector<double>;

namespace poly {

inline Coeffs mul(const Coeffs& x, const Coeffs& y, std::size_t len) {
    Coeffs out(len, 0.0);
    for (std::size_t i = 0; i < x.size() && i < len; ++i) {
        if (x[i] == 0.0) continue;
        for (std::size_t j = 0; j < y.size() && i + j < len; ++j) out[i + j] += x[i] * y[j];
    }
    return out;
}

inline Coeffs add(const Coeffs& x, const Coeffs& y, double sy = 1.0) {
    Coeffs out(std::max(x.size(), y.size()), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] += x[i];
    for (std::size_t i = 0; i < y.size(); ++i) out[i] += sy * y[i];
    return out;
}

inline Coeffs scale(const Coeffs& x, double s) {
    Coeffs out = x;
    for (double& v : out) v *= s;
    return out;
}

inline Coeffs deriv(const Coeffs& x) {
    if (x.size() < 2) return {0.0};
    Coeffs out(x.size() - 1);
    for (std::size_t i = 1; i < x.size(); ++i) out[i - 1] = static_cast<double>(i) * x[i];
    return out;
}

/// Multiplication by r^k.
inline Coeffs shift(const Coeffs& x, std::size_t k) {
    Coeffs out(x.size() + k, 0.0);
    std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>(k));
    return out;
}

inline double eval(const Coeffs& x, double r) {
    double acc = 0.0;
    for (std::size_t i = x.size(); i-- > 0;) acc = acc * r + x[i];
    return acc;
}

inline double max_abs(const Coeffs& x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace poly

enum class Parity { Even, Odd, Mixed };
enum class OrbitKind { Bolt, Nut };

inline std::string_view to_string(Parity p) {
    switch (p) {
        case Parity::Even: return "Even";
        case Parity::Odd: return "Odd";
        case Parity::Mixed: return "Mixed";
    }
    return "Mixed";
}

inline std::string_view to_string(OrbitKind k) { return k == OrbitKind::Bolt ? "Bolt" : "Nut"; }

/// Largest coefficient of the wrong parity relative to the largest coefficient.
inline double parity_defect(const Coeffs& x, Parity want) {
    const double m = poly::max_abs(x);
    if (m == 0.0) return 0.0;
    double worst = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const bool odd = k % 2 == 1;
        const bool wrong = want == Parity::Even ? odd : !odd;
        if (wrong) worst = std::max(worst, std::abs(x[k]) / m);
    }
    return worst;
}

inline Parity classify_parity(const Coeffs& x, double tol = 1e-12) {
    if (parity_defect(x, Parity::Even) <= tol) return Parity::Even;
    if (parity_defect(x, Parity::Odd) <= tol) return Parity::Odd;
    return Parity::Mixed;
}

/// First power with a coefficient above tol relative to the largest one, or
/// nullopt for the zero series.
inline std::optional<std::size_t> leading_power(const Coeffs& x, double tol = 1e-12) {
    const double m = poly::max_abs(x);
    if (m == 0.0) return std::nullopt;
    for (std::size_t k = 0; k < x.size(); ++k)
        if (std::abs(x[k]) > tol * m) return k;
    return std::nullopt;
}

/// A coefficient that the matching equations leave undetermined.
struct FreeParameter {
    int variable = 0;  // 0..3 for a, b, c, alpha
    int order = 1;
    double value = 0.0;
};

struct SeriesOptions {
    int order = 8;
    /// Values imposed on coefficients; also used to pin free parameters.
    std::vector<FreeParameter> fixed;
    double parity_tol = 1e-12;
};

/// Smallest accepted first-order coefficient of a collapsing variable,
/// relative to the size of the solution.
inline constexpr double kMinCollapsingSlope = 1e-6;

struct SeriesSolution {
    GroupSpec group;
    int order = 0;
    /// a, b, c, alpha in powers of r, each of length order + 1.
    std::array<Coeffs, 4> coeffs;
    std::array<Parity, 4> parity{};
    OrbitKind orbit = OrbitKind::Bolt;
    /// Indices (0..2) of the metric coefficients vanishing at r = 0.
    std::vector<int> collapsing;
    /// Undetermined coefficients met during the recursion, with the value used.
    std::vector<FreeParameter> free_parameters;
    /// Largest matched residual coefficient (cleared form), for the audit.
    double residual = 0.0;

    double value(int var, double r) const { return poly::eval(coeffs[static_cast<std::size_t>(var)], r); }
};

/// dx/dr = f/(abc) for the integrated components (a, b, c, alpha).
inline std::array<double, 4> r_system(const GroupSpec& g, const State& s) {
    const auto f = vector_field<double>(g, s.a, s.b, s.c, s.alpha);
    const double abc = s.a * s.b * s.c;
    return {f[0] / abc, f[1] / abc, f[2] / abc, f[3] / abc};
}

/// The r-system with denominators cleared: D_i x_i' - N_i for each equation,
/// as power series. Rows: a, b, c and, unless alpha is slaved, alpha.
inline std::vector<Coeffs> r_system_cleared(const GroupSpec& g, const std::array<Coeffs, 4>& x, std::size_t len) {
    using namespace poly;
    const auto& a = x[0];
    const auto& b = x[1];
    const auto& c = x[2];
    const auto a2 = mul(a, a, len), b2 = mul(b, b, len), c2 = mul(c, c, len);
    const auto ab = mul(a, b, len), ac = mul(a, c, len), bc = mul(b, c, len);
    const Coeffs al = g.uses_reduced_su2() ? scale(ab, g.exp_neg_A) : x[3];
    std::vector<Coeffs> out;
    const auto term = [&](const Coeffs& D, const Coeffs& xi, const Coeffs& N) {
        auto lhs = mul(D, deriv(xi), len);
        lhs.resize(len, 0.0);
        auto res = add(lhs, N, -1.0);
        res.resize(len, 0.0);
        return res;
    };
    const auto s1 = add(add(scale(a2, -g.p1), scale(b2, g.p2)), scale(c2, g.p3));
    const auto s2 = add(add(scale(a2, g.p1), scale(b2, -g.p2)), scale(c2, g.p3));
    const auto s3 = add(add(add(scale(a2, g.p1), scale(b2, g.p2)), scale(c2, -g.p3)), scale(al, 2.0));
    out.push_back(term(scale(bc, 2.0), a, s1));
    out.push_back(term(scale(ac, 2.0), b, s2));
    out.push_back(term(scale(ab, 2.0), c, s3));
    if (!g.uses_reduced_su2()) out.push_back(term(ab, x[3], scale(mul(c, x[3], len), g.p3)));
    return out;
}

namespace detail {

// Valuation at r = 0 of the cleared denominators D_i (products of two base
// values, each zero factor contributing one power of r).
inline std::vector<int> denominator_valuations(const GroupSpec& g, const State& base) {
    const auto z = [](double v) { return v == 0.0 ? 1 : 0; };
    std::vector<int> v{z(base.b) + z(base.c), z(base.a) + z(base.c), z(base.a) + z(base.b)};
    if (!g.uses_reduced_su2()) v.push_back(z(base.a) + z(base.b));
    return v;
}

}  // namespace detail

/// Largest cleared-system coefficient that the truncated series is supposed
/// to annihilate. Recomputed from the stored coefficients, so it also sees
/// coefficients edited after the solve.
inline double series_residual(const SeriesSolution& sol) {
    const GroupSpec& g = sol.group;
    const State base{0.0, sol.coeffs[0][0], sol.coeffs[1][0], sol.coeffs[2][0], sol.coeffs[3][0]};
    const auto val = detail::denominator_valuations(g, base);
    const std::size_t len = static_cast<std::size_t>(sol.order) + 4;
    const auto res = r_system_cleared(g, sol.coeffs, len);
    double worst = 0.0;
    for (std::size_t i = 0; i < res.size(); ++i)
        for (int k = 0; k <= val[i] + sol.order - 1; ++k)
            worst = std::max(worst, std::abs(res[i][static_cast<std::size_t>(k)]));
    return worst;
}

/// Solves the cleared r-system order by order about `base` (a singular-orbit
/// point with t ignored).
///
/// Order 1 is nonlinear and is solved by Gauss-Newton from 1 for the
/// vanishing components and 0 otherwise. Higher orders are affine in the new
/// coefficients; a singular but consistent system records a free parameter,
/// an inconsistent one raises RecursionObstruction.
inline SeriesSolution series_solve(const GroupSpec& g, const State& base, const SeriesOptions& opt = {}) {
    if (opt.order < 1 || opt.order > 12) throw Error(ErrorCode::InvalidOptions, "series order must be in [1, 12]");
    if (g.tag == GroupTag::Custom) throw Error(ErrorCode::UnsupportedGroup, "series cover SU2, E2 and Heisenberg");
    const int dim = system_dimension(g);
    const auto val = detail::denominator_valuations(g, base);
    const std::size_t len = static_cast<std::size_t>(opt.order) + 4;

    SeriesSolution sol;
    sol.group = g;
    sol.order = opt.order;
    const std::array<double, 4> x0{base.a, base.b, base.c, g.uses_reduced_su2() ? 0.0 : base.alpha};
    for (int i = 0; i < 4; ++i) sol.coeffs[static_cast<std::size_t>(i)] = Coeffs(static_cast<std::size_t>(opt.order) + 1, 0.0);
    for (int i = 0; i < 3; ++i) {
        sol.coeffs[static_cast<std::size_t>(i)][0] = x0[static_cast<std::size_t>(i)];
        if (x0[static_cast<std::size_t>(i)] == 0.0) sol.collapsing.push_back(i);
    }
    if (dim == 4) sol.coeffs[3][0] = x0[3];
    sol.orbit = sol.collapsing.size() >= 2 ? OrbitKind::Nut : OrbitKind::Bolt;
    if (sol.collapsing.empty()) throw Error(ErrorCode::InvalidOptions, "base point is not on a singular orbit");

    const auto fixed_at = [&](int var, int n) -> std::optional<double> {
        for (const auto& f : opt.fixed)
            if (f.variable == var && f.order == n) return f.value;
        return std::nullopt;
    };

    // residual coefficients matched at order n, as a function of the order-n unknowns
    const auto residual_at = [&](int n, const Eigen::VectorXd& xn) {
        auto trial = sol.coeffs;
        for (int i = 0; i < dim; ++i) trial[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)] = xn(i);
        const auto res = r_system_cleared(g, trial, len);
        Eigen::VectorXd out(dim);
        for (int i = 0; i < dim; ++i) out(i) = res[static_cast<std::size_t>(i)][static_cast<std::size_t>(val[static_cast<std::size_t>(i)] + n - 1)];
        return out;
    };

    for (int n = 1; n <= opt.order; ++n) {
        std::vector<int> unknown;
        Eigen::VectorXd xn = Eigen::VectorXd::Zero(dim);
        for (int i = 0; i < dim; ++i) {
            if (auto v = fixed_at(i, n))
                xn(i) = *v;
            else
                unknown.push_back(i);
        }
        if (n == 1)
            for (int i : unknown) xn(i) = x0[static_cast<std::size_t>(i)] == 0.0 ? 1.0 : 0.0;
        const int m = static_cast<int>(unknown.size());
        // columns of the matching system: exact for n > 1, Gauss-Newton for n = 1
        const double h = n == 1 ? 1e-7 : 1.0;
        Eigen::MatrixXd M(dim, m);
        const auto assemble = [&](const Eigen::VectorXd& r0) {
            for (int k = 0; k < m; ++k) {
                Eigen::VectorXd xp = xn;
                xp(unknown[static_cast<std::size_t>(k)]) += h;
                M.col(k) = (residual_at(n, xp) - r0) / h;
            }
        };
        const int iterations = n == 1 ? 60 : 1;
        for (int it = 0; it < iterations; ++it) {
            const Eigen::VectorXd r0 = residual_at(n, xn);
            if (n == 1 && r0.norm() < 1e-15) break;
            assemble(r0);
            Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M);
            cod.setThreshold(1e-10);
            const Eigen::VectorXd step = cod.solve(-r0);
            for (int k = 0; k < m; ++k) xn(unknown[static_cast<std::size_t>(k)]) += step(k);
            if (step.norm() < 1e-15 * std::max(1.0, xn.norm())) break;
        }
        const Eigen::VectorXd rn = residual_at(n, xn);
        if (m > 0) {
            assemble(rn);
            Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
            lu.setThreshold(1e-8);
            if (lu.rank() < m) {
                const Eigen::MatrixXd K = lu.kernel();
                for (int k = 0; k < m; ++k)
                    if (K.row(k).norm() > 1e-8) sol.free_parameters.push_back({unknown[static_cast<std::size_t>(k)], n, 0.0});
            }
        }
        const double size = std::max({1.0, xn.cwiseAbs().maxCoeff(), poly::max_abs(sol.coeffs[0]),
                                      poly::max_abs(sol.coeffs[1]), poly::max_abs(sol.coeffs[2])});
        if (rn.norm() > 1e-9 * size * size * size)
            throw Error(ErrorCode::RecursionObstruction, "matching equations unsolvable at order " + std::to_string(n));
        // a collapsing coefficient needs a positive slope; Gauss-Newton sliding to 0 is no solution
        if (n == 1)
            for (int i : sol.collapsing)
                if (!(xn(i) > kMinCollapsingSlope * size))
                    throw Error(ErrorCode::RecursionObstruction, "no positive first-order solution at order 1");
        for (int i = 0; i < dim; ++i) sol.coeffs[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)] = xn(i);
        for (auto& f : sol.free_parameters)
            if (f.order == n) f.value = xn(f.variable);
    }
    if (dim == 3) sol.coeffs[3] = poly::scale(poly::mul(sol.coeffs[0], sol.coeffs[1], static_cast<std::size_t>(opt.order) + 1), g.exp_neg_A);

    sol.residual = series_residual(sol);
    for (std::size_t i = 0; i < 4; ++i) sol.parity[i] = classify_parity(sol.coeffs[i], opt.parity_tol);
    return sol;
}

/// Series about an equilibrium of the SU(2) or E(2) families. For the E(2)
/// bolt the slope of alpha is not fixed by the equations; `alpha1` sets it
/// unless `opt.fixed` already does (0 gives the Ricci-flat member).
inline SeriesSolution series_solve(const GroupSpec& g, const Equilibrium& e, const SeriesOptions& opt = {},
                                   double alpha1 = 0.0) {
    if (e.family == Family::E2_0p0r) throw Error(ErrorCode::UnsupportedGroup, "no singular orbit at (0,p,0,r)");
    SeriesOptions o = opt;
    if (e.family == Family::E2_q0q0) {
        const bool pinned = std::any_of(o.fixed.begin(), o.fixed.end(),
                                        [](const FreeParameter& f) { return f.variable == 3 && f.order == 1; });
        if (!pinned) o.fixed.push_back({3, 1, alpha1});
    }
    return series_solve(g, e.point, o);
}

/// Heisenberg bolt of the explicit family: phi = c1 on the singular orbit,
/// a = b = sqrt(c1), alpha = c1.
inline State heisenberg_bolt_base(double c1) { return {0.0, std::sqrt(c1), std::sqrt(c1), 0.0, c1}; }

struct Condition {
    std::string name;
    std::string required_form;
    /// The tested quantity: a parity defect, a leading power or a slope.
    double observed = 0.0;
    bool pass = false;
    /// Which series coefficients the test used.
    std::string uses;
};

struct SmoothnessReport {
    OrbitKind orbit_kind = OrbitKind::Bolt;
    double a1 = 0.0;
    double d1 = 0.0;
    bool integrality = true;
    double integrality_value = 0.0;
    /// Both statements of the integrality condition and the single verdict.
    std::vector<std::string> integrality_phrasings;
    std::vector<Condition> metric_conditions;
    std::vector<Condition> kahler_conditions;

    bool metric_pass() const {
        return integrality && std::all_of(metric_conditions.begin(), metric_conditions.end(), [](const auto& c) { return c.pass; });
    }
    bool kahler_pass() const {
        return integrality && std::all_of(kahler_conditions.begin(), kahler_conditions.end(), [](const auto& c) { return c.pass; });
    }
    bool pass() const { return metric_pass() && kahler_pass(); }
};

struct VzWeights {
    double a1 = 0.0;
    double d1 = 0.0;
    bool integral = true;
    /// Value whose integrality is tested, and the closed-form prediction.
    double tested = 0.0;
    double formula = 0.0;
};

namespace detail {

inline std::string coeff_names(std::string_view var, int order) {
    std::string s;
    for (int k = 0; k <= order; ++k) {
        if (k) s += ",";
        s += std::string(var) + std::to_string(k);
    }
    return s;
}

inline Condition parity_condition(std::string name, std::string form, const Coeffs& x, Parity want, double tol,
                                  std::string uses) {
    const double defect = parity_defect(x, want);
    return {std::move(name), std::move(form), defect, defect <= tol, std::move(uses)};
}

inline Condition slope_condition(std::string name, const Coeffs& x, double want, double tol, std::string uses) {
    const double s = x.size() > 1 ? x[1] : 0.0;
    return {std::move(name), "slope " + std::to_string(want).substr(0, 3) + " at r=0", s, std::abs(s - want) <= tol,
            std::move(uses)};
}

// x = r^k phi(r^2) with k >= kmin: tests the leading power and the parity of
// the remainder. The zero series passes; with scale > 0, so does a series
// below tol * scale (a difference of equal functions).
inline Condition power_condition(std::string name, std::string form, const Coeffs& x, std::size_t kmin, double tol,
                                 std::string uses, double scale = 0.0) {
    if (scale > 0.0 && poly::max_abs(x) <= tol * scale) return {std::move(name), std::move(form), 0.0, true, std::move(uses)};
    const auto lead = leading_power(x, tol);
    if (!lead) return {std::move(name), std::move(form), 0.0, true, std::move(uses)};
    const Parity want = kmin % 2 == 0 ? Parity::Even : Parity::Odd;
    const bool ok = *lead >= kmin && parity_defect(x, want) <= tol;
    return {std::move(name), std::move(form), static_cast<double>(*lead), ok, std::move(uses)};
}

inline void require_order(const SeriesSolution& s) {
    if (s.order < 6) throw Error(ErrorCode::InsufficientOrder, "smoothness checks need series order >= 6");
}

}  // namespace detail

/// Weights (a1, d1) of the isotropy action at the singular orbit.
inline VzWeights vz_weights(const SeriesSolution& s) {
    VzWeights w;
    const auto& g = s.group;
    if (g.tag == GroupTag::SU2 && s.orbit == OrbitKind::Bolt && s.collapsing == std::vector<int>{2}) {
        w.a1 = 2.0 * s.coeffs[2].at(1);
        w.d1 = 1.0;
        w.formula = 2.0 * (1.0 + g.exp_neg_A);
        w.tested = w.a1;
        w.integral = std::abs(w.a1 - std::round(w.a1)) <= 1e-9 && std::abs(w.a1 - w.formula) <= 1e-9;
        return w;
    }
    w.a1 = 1.0;
    w.d1 = 1.0;
    w.tested = 1.0;
    w.formula = 1.0;
    return w;
}

/// Metric part of the smooth-extension conditions.
inline SmoothnessReport vz_metric_check(const SeriesSolution& s) {
    detail::require_order(s);
    using namespace detail;
    const auto& g = s.group;
    const auto& [a, b, c, al] = s.coeffs;
    const std::size_t len = a.size();
    const int n = s.order;
    const double tol = 1e-12;
    SmoothnessReport rep;
    rep.orbit_kind = s.orbit;
    const auto w = vz_weights(s);
    rep.a1 = w.a1;
    rep.d1 = w.d1;
    rep.integrality = w.integral;
    rep.integrality_value = w.tested;
    const auto a2 = poly::mul(a, a, len), b2 = poly::mul(b, b, len), c2 = poly::mul(c, c, len);

    if (s.orbit == OrbitKind::Nut) {
        rep.metric_conditions.push_back(slope_condition("a'(0) = 1", a, 1.0, 1e-9, "a1"));
        rep.metric_conditions.push_back(slope_condition("b'(0) = 1", b, 1.0, 1e-9, "b1"));
        rep.metric_conditions.push_back(slope_condition("c'(0) = 1", c, 1.0, 1e-9, "c1"));
        return rep;
    }
    if (g.tag == GroupTag::SU2 && s.collapsing == std::vector<int>{2}) {
        rep.integrality_phrasings = {"2(1+e^{-A}) is an integer", "2e^{-A} is an integer"};
        rep.metric_conditions.push_back(parity_condition("c odd", "c = r phi(r^2)", c, Parity::Odd, tol, coeff_names("c", n)));
        rep.metric_conditions.push_back(
            parity_condition("a^2+b^2 even", "a^2+b^2 = phi1(r^2)", poly::add(a2, b2), Parity::Even, tol, coeff_names("a", n) + "," + coeff_names("b", n)));
        const Coeffs diff = poly::add(a2, b2, -1.0);
        const double expo = 2.0 * w.d1 / w.a1;
        const double rounded = std::round(expo);
        Condition cond;
        if (std::abs(expo - rounded) <= 1e-12 && rounded >= 0) {
            cond = power_condition("a^2-b^2", "a^2-b^2 = r^(2d1/a1) phi2(r^2)", diff, static_cast<std::size_t>(rounded), tol,
                                   coeff_names("a", n) + "," + coeff_names("b", n), std::max(1.0, poly::max_abs(a2)));
        } else {
            // a fractional power is only possible for the zero series
            const double m = poly::max_abs(diff);
            cond = {"a^2-b^2", "a^2-b^2 = r^(2d1/a1) phi2(r^2)", m, m <= tol * std::max(1.0, poly::max_abs(a2)),
                    coeff_names("a", n) + "," + coeff_names("b", n)};
        }
        rep.metric_conditions.push_back(cond);
        return rep;
    }
    if (g.tag == GroupTag::SU2) {
        // (q,0,q) or (0,q,q): the collapsing circle and the two circles that keep length q
        const int k = s.collapsing.front();
        const int o1 = k == 0 ? 1 : 0;
        const std::array<std::string, 3> nm{"a", "b", "c"};
        const auto& x = s.coeffs[static_cast<std::size_t>(k)];
        rep.metric_conditions.push_back(parity_condition(nm[k] + " odd", nm[k] + " = r phi(r^2)", x, Parity::Odd, tol, coeff_names(nm[k], n)));
        rep.metric_conditions.push_back(slope_condition(nm[k] + "'(0) = 1", x, 1.0, 1e-9, nm[k] + "1"));
        rep.metric_conditions.push_back(parity_condition(nm[o1] + " even", nm[o1] + " = phi(r^2)", s.coeffs[static_cast<std::size_t>(o1)], Parity::Even, tol, coeff_names(nm[o1], n)));
        rep.metric_conditions.push_back(parity_condition("c even", "c = phi(r^2) with c(0) = q", c, Parity::Even, tol, coeff_names("c", n)));
        return rep;
    }
    if (g.tag == GroupTag::E2) {
        rep.metric_conditions.push_back(parity_condition("b odd", "b = r phi(r^2)", b, Parity::Odd, tol, coeff_names("b", n)));
        rep.metric_conditions.push_back(slope_condition("b'(0) = 1", b, 1.0, 1e-12, "b1"));
        rep.metric_conditions.push_back(
            parity_condition("a^2+c^2 even", "a^2+c^2 = phi1(r^2)", poly::add(a2, c2), Parity::Even, tol, coeff_names("a", n) + "," + coeff_names("c", n)));
        rep.metric_conditions.push_back(power_condition("a^2-c^2", "a^2-c^2 = r^2 phi2(r^2)", poly::add(a2, c2, -1.0), 2, tol,
                                                        coeff_names("a", n) + "," + coeff_names("c", n),
                                                        std::max(1.0, poly::max_abs(a2))));
        return rep;
    }
    // Heisenberg: c collapses with unit speed
    Condition c2cond = power_condition("c^2", "c^2 = r^2 + r^4 xi(r^2)", c2, 2, tol, coeff_names("c", n));
    const double lead = c2.size() > 2 ? c2[2] : 0.0;
    c2cond.pass = c2cond.pass && std::abs(lead - 1.0) <= 1e-9;
    rep.metric_conditions.push_back(c2cond);
    rep.metric_conditions.push_back(parity_condition("a^2 even", "a^2 = phi(r^2)", a2, Parity::Even, tol, coeff_names("a", n)));
    rep.metric_conditions.push_back(parity_condition("b^2 even", "b^2 = phi(r^2)", b2, Parity::Even, tol, coeff_names("b", n)));
    return rep;
}

/// Kähler-form part of the smooth-extension conditions. The form is
/// c dr ^ s3 + ab s1 ^ s2 in every case.
inline SmoothnessReport vz_kahler_check(const SeriesSolution& s) {
    detail::require_order(s);
    using namespace detail;
    const auto& g = s.group;
    const auto& [a, b, c, al] = s.coeffs;
    const std::size_t len = a.size();
    const int n = s.order;
    const double tol = 1e-12;
    SmoothnessReport rep = vz_metric_check(s);
    rep.metric_conditions.clear();
    const auto ab = poly::mul(a, b, len);
    const std::string uses_abc = coeff_names("a", n) + "," + coeff_names("b", n) + "," + coeff_names("c", n);
    if (s.orbit == OrbitKind::Nut) {
        rep.kahler_conditions.push_back(parity_condition("c odd", "c = r phi(r^2)", c, Parity::Odd, tol, coeff_names("c", n)));
        rep.kahler_conditions.push_back(parity_condition("ab even", "ab = r^2 phi(r^2)", ab, Parity::Even, tol, uses_abc));
        return rep;
    }
    if (g.tag == GroupTag::SU2 && s.collapsing == std::vector<int>{2}) {
        rep.kahler_conditions.push_back(parity_condition("c/r even", "c/r = phi1(r^2)", c, Parity::Odd, tol, coeff_names("c", n)));
        rep.kahler_conditions.push_back(parity_condition("ab even", "a^2 = phi2(r^2)", ab, Parity::Even, tol, coeff_names("a", n) + "," + coeff_names("b", n)));
        return rep;
    }
    if (g.tag == GroupTag::SU2) return rep;
    if (g.tag == GroupTag::E2) {
        const auto cr = poly::shift(c, 1);
        auto plus = poly::add(cr, ab);
        auto minus = poly::add(cr, ab, -1.0);
        plus.resize(len);
        minus.resize(len);
        const double sc = std::max(1.0, poly::max_abs(ab));
        rep.kahler_conditions.push_back(power_condition("cr+ab", "cr+ab = r phi2(r^2)", plus, 1, tol, uses_abc, sc));
        rep.kahler_conditions.push_back(power_condition("cr-ab", "cr-ab = r^3 phi3(r^2)", minus, 3, tol, uses_abc, sc));
        return rep;
    }
    rep.kahler_conditions.push_back(parity_condition("c odd", "c = r phi(r^2)", c, Parity::Odd, tol, coeff_names("c", n)));
    rep.kahler_conditions.push_back(parity_condition("ab even", "ab = phi(r^2)", ab, Parity::Even, tol, uses_abc));
    return rep;
}

/// Metric and Kähler conditions in one report.
inline SmoothnessReport vz_check(const SeriesSolution& s) {
    SmoothnessReport rep = vz_metric_check(s);
    rep.kahler_conditions = vz_kahler_check(s).kahler_conditions;
    return rep;
}

}  // namespace cklab
