// Equilibria of the SU(2) and E(2) systems, their linearizations and seeds on
// the unstable curves leaving them.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "core.hpp"

namespace cklab {

enum class Family { SU2_qq0, SU2_0qq, SU2_q0q, SU2_origin, E2_q0q0, E2_0p0r };

inline std::string_view to_string(Family f) {
    switch (f) {
        case Family::SU2_qq0: return "su2_qq0";
        case Family::SU2_0qq: return "su2_0qq";
        case Family::SU2_q0q: return "su2_q0q";
        case Family::SU2_origin: return "su2_origin";
        case Family::E2_q0q0: return "e2_q0q0";
        case Family::E2_0p0r: return "e2_0p0r";
    }
    return "unknown";
}

struct Equilibrium {
    State point;
    Family family = Family::SU2_qq0;
    /// q, or (p, r) for the E(2) family (0, p, 0, r).
    std::vector<double> parameters;
};

struct LinearizationReport {
    Eigen::MatrixXd jacobian;
    /// Sorted by descending real part, ties by imaginary part.
    std::vector<std::complex<double>> eigenvalues;
    std::vector<Eigen::VectorXd> unstable_directions;
    /// Positive eigenvalue belonging to each entry of unstable_directions.
    std::vector<double> unstable_values;
    bool degenerate = false;
};

inline int system_dimension(const GroupSpec& g) { return g.uses_reduced_su2() ? 3 : 4; }

inline Eigen::VectorXd to_vector(const GroupSpec& g, const State& s) {
    Eigen::VectorXd x(system_dimension(g));
    x(0) = s.a;
    x(1) = s.b;
    x(2) = s.c;
    if (x.size() == 4) x(3) = s.alpha;
    return x;
}

inline State from_vector(const GroupSpec& g, const Eigen::VectorXd& x, double t = 0.0) {
    State s{t, x(0), x(1), x(2), 0.0};
    s.alpha = x.size() == 4 ? x(3) : g.exp_neg_A * s.a * s.b;
    return s;
}

/// Vector field restricted to the integrated components.
inline Eigen::VectorXd field(const GroupSpec& g, const Eigen::VectorXd& x) {
    const State s = from_vector(g, x);
    const auto f = vector_field<double>(g, s.a, s.b, s.c, s.alpha);
    Eigen::VectorXd out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = f[static_cast<std::size_t>(i)];
    return out;
}

/// Hand-differentiated Jacobian of the lambda = 0 vector field.
inline Eigen::MatrixXd jacobian(const GroupSpec& g, const State& s) {
    const double a = s.a, b = s.b, c = s.c;
    const double p1 = g.p1, p2 = g.p2, p3 = g.p3;
    const double s1 = 0.5 * (-p1 * a * a + p2 * b * b + p3 * c * c);
    const double s2 = 0.5 * (p1 * a * a - p2 * b * b + p3 * c * c);
    if (g.uses_reduced_su2()) {
        const double e = g.exp_neg_A;
        const double s3 = 0.5 * (p1 * a * a + p2 * b * b + 2.0 * e * a * b - p3 * c * c);
        Eigen::Matrix3d J;
        J << s1 - p1 * a * a, p2 * a * b, p3 * a * c,
             p1 * a * b, s2 - p2 * b * b, p3 * b * c,
             c * (p1 * a + e * b), c * (p2 * b + e * a), s3 - p3 * c * c;
        return J;
    }
    const double s3 = 0.5 * (p1 * a * a + p2 * b * b - p3 * c * c + 2.0 * s.alpha);
    Eigen::Matrix4d J;
    J << s1 - p1 * a * a, p2 * a * b, p3 * a * c, 0.0,
         p1 * a * b, s2 - p2 * b * b, p3 * b * c, 0.0,
         p1 * a * c, p2 * b * c, s3 - p3 * c * c, c,
         0.0, 0.0, 2.0 * p3 * c * s.alpha, p3 * c * c;
    return J;
}

/// Central-difference Jacobian, used to guard the hand-written one.
inline Eigen::MatrixXd jacobian_fd(const GroupSpec& g, const State& s, double h = 1e-6) {
    const Eigen::VectorXd x = to_vector(g, s);
    Eigen::MatrixXd J(x.size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        Eigen::VectorXd xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        J.col(j) = (field(g, xp) - field(g, xm)) / (2.0 * h);
    }
    return J;
}

inline void require_studied(const GroupSpec& g) {
    if (g.tag != GroupTag::SU2 && g.tag != GroupTag::E2)
        throw Error(ErrorCode::UnsupportedGroup, "equilibrium analysis covers SU2 and E2 only");
}

inline Equilibrium make_equilibrium(const GroupSpec& g, Family fam, double q, double r = 0.0) {
    Equilibrium e;
    e.family = fam;
    switch (fam) {
        case Family::SU2_qq0: e.point = {0, q, q, 0, 0}; break;
        case Family::SU2_0qq: e.point = {0, 0, q, q, 0}; break;
        case Family::SU2_q0q: e.point = {0, q, 0, q, 0}; break;
        case Family::SU2_origin: e.point = {0, 0, 0, 0, 0}; break;
        case Family::E2_q0q0: e.point = {0, q, 0, q, 0}; break;
        case Family::E2_0p0r: e.point = {0, 0, q, 0, r}; break;
    }
    const bool su2_family = fam == Family::SU2_qq0 || fam == Family::SU2_0qq || fam == Family::SU2_q0q ||
                            fam == Family::SU2_origin;
    if (su2_family != (g.tag == GroupTag::SU2))
        throw Error(ErrorCode::UnsupportedGroup, "family does not belong to the group");
    if (su2_family) e.point.alpha = g.exp_neg_A * e.point.a * e.point.b;
    if (fam == Family::E2_0p0r)
        e.parameters = {q, r};
    else if (fam != Family::SU2_origin)
        e.parameters = {q};
    return e;
}

/// Representatives of every equilibrium family for each sampled parameter.
/// For E(2) the (0, p, 0, r) family is sampled with p = q and r in `r_values`.
inline std::vector<Equilibrium> list_equilibria(const GroupSpec& g, const std::vector<double>& q_values,
                                                const std::vector<double>& r_values = {1.0}) {
    require_studied(g);
    std::vector<Equilibrium> out;
    if (g.tag == GroupTag::SU2) {
        for (double q : q_values) {
            out.push_back(make_equilibrium(g, Family::SU2_qq0, q));
            out.push_back(make_equilibrium(g, Family::SU2_0qq, q));
            out.push_back(make_equilibrium(g, Family::SU2_q0q, q));
        }
        out.push_back(make_equilibrium(g, Family::SU2_origin, 0.0));
    } else {
        for (double q : q_values) out.push_back(make_equilibrium(g, Family::E2_q0q0, q));
        for (double p : q_values)
            for (double r : r_values) out.push_back(make_equilibrium(g, Family::E2_0p0r, p, r));
    }
    return out;
}

namespace detail {

// Orthonormal basis of a subspace, built by projecting the coordinate axes in
// order; makes the basis independent of the eigen solver's arbitrary choice.
inline std::vector<Eigen::VectorXd> canonical_basis(const Eigen::MatrixXd& K) {
    const Eigen::Index n = K.rows();
    const Eigen::MatrixXd Qm = K.householderQr().householderQ() * Eigen::MatrixXd::Identity(n, K.cols());
    const Eigen::MatrixXd P = Qm * Qm.transpose();
    std::vector<Eigen::VectorXd> basis;
    for (Eigen::Index i = 0; i < n && static_cast<Eigen::Index>(basis.size()) < K.cols(); ++i) {
        Eigen::VectorXd v = P.col(i);
        for (const auto& u : basis) v -= u.dot(v) * u;
        const double len = v.norm();
        if (len < 1e-8) continue;
        v /= len;
        if (v(i) < 0) v = -v;
        basis.push_back(v);
    }
    return basis;
}

}  // namespace detail

inline LinearizationReport linearize(const GroupSpec& g, const Equilibrium& e) {
    require_studied(g);
    LinearizationReport rep;
    rep.jacobian = jacobian(g, e.point);
    const double scale = std::max(1.0, rep.jacobian.cwiseAbs().maxCoeff());
    if (e.family == Family::SU2_origin || (e.family != Family::E2_0p0r && e.parameters.at(0) == 0.0)) {
        rep.degenerate = true;
        rep.eigenvalues.assign(static_cast<std::size_t>(rep.jacobian.rows()), {0.0, 0.0});
        return rep;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(rep.jacobian, false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        auto z = es.eigenvalues()(i);
        // snap rounding noise so the sort and the printed table are stable
        if (std::abs(z.imag()) < 1e-13 * scale) z.imag(0.0);
        if (std::abs(z.real()) < 1e-13 * scale) z.real(0.0);
        rep.eigenvalues.push_back(z);
    }
    std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(), [](auto x, auto y) {
        if (x.real() != y.real()) return x.real() > y.real();
        return x.imag() > y.imag();
    });
    const Eigen::Index n = rep.jacobian.rows();
    std::vector<double> positive;
    for (auto z : rep.eigenvalues)
        if (z.imag() == 0.0 && z.real() > 0.0) positive.push_back(z.real());
    // group numerically repeated eigenvalues
    std::vector<double> distinct;
    for (double v : positive) {
        bool seen = false;
        for (double d : distinct) seen = seen || std::abs(d - v) <= 1e-9 * std::max(1.0, std::abs(d));
        if (!seen) distinct.push_back(v);
    }
    for (double lam : distinct) {
        const Eigen::MatrixXd shifted = rep.jacobian - lam * Eigen::MatrixXd::Identity(n, n);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(shifted);
        lu.setThreshold(1e-10);
        const Eigen::MatrixXd K = lu.kernel();
        if (K.cols() == 0 || K.norm() == 0.0) continue;
        for (auto& v : detail::canonical_basis(K)) {
            rep.unstable_directions.push_back(v);
            rep.unstable_values.push_back(lam);
        }
    }
    return rep;
}

struct SeedOptions {
    double epsilon = 1e-6;
    /// Weights within the unstable eigenspace, in the order of
    /// LinearizationReport::unstable_directions. Empty means equal weights.
    std::vector<double> weights;
    /// Add the quadratic term of the unstable manifold so the seed lies on it
    /// to O(eps^3) rather than O(eps^2).
    bool second_order = true;
};

/// Point on the unstable curve: p + eps v (+ eps^2 h), with v a unit vector in
/// the unstable eigenspace signed so zero components of p stay nonnegative.
inline State unstable_seed(const GroupSpec& g, const Equilibrium& e, const LinearizationReport& rep,
                           const SeedOptions& opt = {}) {
    if (!(opt.epsilon > 0.0)) throw Error(ErrorCode::InvalidOptions, "epsilon must be positive");
    if (rep.unstable_directions.empty()) throw Error(ErrorCode::NoUnstableDirection, "no positive eigenvalue");
    const std::size_t m = rep.unstable_directions.size();
    std::vector<double> w = opt.weights.empty() ? std::vector<double>(m, 1.0) : opt.weights;
    if (w.size() != m) throw Error(ErrorCode::InvalidOptions, "weight count must match the unstable dimension");
    // only the leading eigenvalue's eigenspace is used when several exist
    const double lam = rep.unstable_values.front();
    Eigen::VectorXd v = Eigen::VectorXd::Zero(rep.jacobian.rows());
    for (std::size_t k = 0; k < m; ++k)
        if (std::abs(rep.unstable_values[k] - lam) <= 1e-9 * std::max(1.0, lam)) v += w[k] * rep.unstable_directions[k];
    if (v.norm() == 0.0) throw Error(ErrorCode::InvalidOptions, "weights cancel to the zero vector");
    v.normalize();

    const Eigen::VectorXd p = to_vector(g, e.point);
    const auto admissible = [&](const Eigen::VectorXd& dir) {
        for (Eigen::Index i = 0; i < p.size(); ++i)
            if (p(i) == 0.0 && dir(i) < -1e-14) return false;
        return true;
    };
    if (!admissible(v)) v = -v;
    if (!admissible(v)) throw Error(ErrorCode::SeedLeavesPositiveOrthant, "no sign keeps the seed admissible");

    const double eps = opt.epsilon * std::max(1.0, p.cwiseAbs().maxCoeff());
    Eigen::VectorXd x = p + eps * v;
    if (opt.second_order) {
        // F cubic: F(p + v) + F(p - v) = 2 F(p) + 2 Q(v) exactly
        const Eigen::VectorXd qv = 0.5 * (field(g, p + v) + field(g, p - v)) - field(g, p);
        const Eigen::Index n = p.size();
        const Eigen::MatrixXd M = 2.0 * lam * Eigen::MatrixXd::Identity(n, n) - rep.jacobian;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
        if (lu.isInvertible()) {
            const Eigen::VectorXd h = lu.solve(qv);
            const Eigen::VectorXd corrected = x + eps * eps * h;
            if ((corrected.array() >= 0.0).all()) x = corrected;
        }
    }
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x(i) < 0.0) throw Error(ErrorCode::SeedLeavesPositiveOrthant, "seed has a negative component");
    return from_vector(g, x);
}

}  // namespace cklab
