#include <algorithm>

#include "support.hpp"

using namespace cklab;

namespace {

std::vector<double> real_parts(const LinearizationReport& r) {
    std::vector<double> v;
    for (auto z : r.eigenvalues) {
        EXPECT_EQ(z.imag(), 0.0);
        v.push_back(z.real());
    }
    std::sort(v.begin(), v.end());
    return v;
}

void expect_spectrum(const LinearizationReport& r, std::vector<double> want, double tol = 1e-10) {
    std::sort(want.begin(), want.end());
    const auto got = real_parts(r);
    ASSERT_EQ(got.size(), want.size());
    const double scale = std::max(1.0, std::abs(want.front()) + std::abs(want.back()));
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_LE(std::abs(got[i] - want[i]) / scale, tol) << i;
}

}  // namespace

TEST(ListEquilibria, Su2UnitParameter) {
    const GroupSpec g = GroupSpec::su2(1.0);
    const auto eqs = list_equilibria(g, {1.0});
    ASSERT_EQ(eqs.size(), 4u);
    EXPECT_EQ(eqs[0].point.vec(), (std::array<double, 4>{1, 1, 0, 1}));
    EXPECT_EQ(eqs[1].point.vec(), (std::array<double, 4>{0, 1, 1, 0}));
    EXPECT_EQ(eqs[2].point.vec(), (std::array<double, 4>{1, 0, 1, 0}));
    EXPECT_EQ(eqs[3].family, Family::SU2_origin);
}

TEST(ListEquilibria, E2Families) {
    const auto eqs = list_equilibria(GroupSpec::e2(), {1.0, 2.0}, {0.5, -0.5});
    std::size_t bolts = 0, others = 0;
    for (const auto& e : eqs) (e.family == Family::E2_q0q0 ? bolts : others)++;
    EXPECT_EQ(bolts, 2u);
    EXPECT_EQ(others, 4u);
}

TEST(ListEquilibria, VectorFieldVanishes) {
    for (const auto& g : {GroupSpec::su2(0.3), GroupSpec::su2(2.0), GroupSpec::e2()})
        for (const auto& e : list_equilibria(g, {0.5, 1.0, 2.0}, {0.7, -1.0}))
            for (double v : vector_field(g, e.point.vec())) EXPECT_EQ(v, 0.0);
}

TEST(ListEquilibria, UnsupportedGroups) {
    for (const auto& g : {GroupSpec::heisenberg(), GroupSpec::custom(1, 2, 3)}) {
        try {
            list_equilibria(g, {1.0});
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::UnsupportedGroup);
        }
    }
}

TEST(Linearize, Su2BoltUnit) {
    const GroupSpec g = GroupSpec::su2(1.0);
    expect_spectrum(linearize(g, make_equilibrium(g, Family::SU2_qq0, 1.0)), {0, -2, 2});
}

TEST(Linearize, E2BoltUnit) {
    const GroupSpec g = GroupSpec::e2();
    expect_spectrum(linearize(g, make_equilibrium(g, Family::E2_q0q0, 1.0)), {1, 1, 0, -2});
}

TEST(Linearize, E2SecondFamilyHasSignOfR) {
    const GroupSpec g = GroupSpec::e2();
    for (double r : {0.7, -1.3}) expect_spectrum(linearize(g, make_equilibrium(g, Family::E2_0p0r, 1.5, r)), {0, 0, 0, r});
}

TEST(Linearize, AnalyticSpectraOverParameters) {
    for (double e : {0.3, 1.0, 2.0}) {
        const GroupSpec g = GroupSpec::su2(e);
        for (double q : {0.25, 0.5, 1.0, 2.0, 3.5}) {
            const double q2 = q * q;
            expect_spectrum(linearize(g, make_equilibrium(g, Family::SU2_qq0, q)), {0, -2 * q2, q2 * (1 + e)});
            expect_spectrum(linearize(g, make_equilibrium(g, Family::SU2_0qq, q)), {q2, 0, -2 * q2});
            expect_spectrum(linearize(g, make_equilibrium(g, Family::SU2_q0q, q)), {0, q2, -2 * q2});
        }
    }
    const GroupSpec e2 = GroupSpec::e2();
    for (double q : {0.25, 0.5, 1.0, 2.0, 3.5})
        expect_spectrum(linearize(e2, make_equilibrium(e2, Family::E2_q0q0, q)), {q * q, q * q, 0, -2 * q * q});
}

TEST(Linearize, EigenvectorResiduals) {
    for (const auto& g : {GroupSpec::su2(1.0), GroupSpec::su2(0.3), GroupSpec::e2()})
        for (const auto& e : list_equilibria(g, {0.5, 1.0, 2.0})) {
            const auto rep = linearize(g, e);
            for (std::size_t k = 0; k < rep.unstable_directions.size(); ++k) {
                const auto& v = rep.unstable_directions[k];
                EXPECT_LE((rep.jacobian * v - rep.unstable_values[k] * v).norm(), 1e-10 * v.norm());
            }
        }
}

TEST(Linearize, AnalyticJacobianMatchesFiniteDifferences) {
    for (const auto& g : cklab::test::studied_groups())
        for (const auto& s : cklab::test::random_states(20, 17)) {
            const Eigen::MatrixXd J = jacobian(g, s), Jfd = jacobian_fd(g, s, 1e-6);
            EXPECT_LE((J - Jfd).cwiseAbs().maxCoeff(), 1e-6 * std::max(1.0, J.cwiseAbs().maxCoeff()));
        }
}

TEST(Linearize, ZeroParameterIsFlaggedDegenerate) {
    const GroupSpec g = GroupSpec::su2(1.0);
    const auto rep = linearize(g, make_equilibrium(g, Family::SU2_qq0, 0.0));
    EXPECT_TRUE(rep.degenerate);
    for (auto z : rep.eigenvalues) EXPECT_EQ(std::abs(z), 0.0);
    EXPECT_TRUE(linearize(g, make_equilibrium(g, Family::SU2_origin, 0.0)).degenerate);
}

TEST(UnstableSeed, Su2BoltSeed) {
    const GroupSpec g = GroupSpec::su2(1.0);
    const auto e = make_equilibrium(g, Family::SU2_qq0, 1.0);
    const auto s = unstable_seed(g, e, linearize(g, e));
    EXPECT_GT(s.c, 0.0);
    // the unstable eigenspace is spanned by e_c alone
    EXPECT_NEAR(s.c, 1e-6, 1e-15);
    EXPECT_NEAR(s.a, 1.0, 1e-11);
    EXPECT_NEAR(s.b, 1.0, 1e-11);
}

TEST(UnstableSeed, RejectsNonpositiveEpsilon) {
    const GroupSpec g = GroupSpec::su2(1.0);
    const auto e = make_equilibrium(g, Family::SU2_qq0, 1.0);
    SeedOptions so;
    so.epsilon = 0.0;
    EXPECT_THROW(unstable_seed(g, e, linearize(g, e), so), Error);
}

TEST(UnstableSeed, NoUnstableDirectionAtOrigin) {
    const GroupSpec g = GroupSpec::su2(1.0);
    const auto e = make_equilibrium(g, Family::SU2_origin, 0.0);
    try {
        unstable_seed(g, e, linearize(g, e));
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), ErrorCode::NoUnstableDirection);
    }
}

TEST(UnstableSeed, E2SeedLiesInUnstableEigenspace) {
    // the q^2 eigenspace of the printed linearization is span{e_b, (1,0,2,3q)}
    const GroupSpec g = GroupSpec::e2();
    for (double q : {0.5, 1.0, 2.0}) {
        const auto e = make_equilibrium(g, Family::E2_q0q0, q);
        const auto lin = linearize(g, e);
        ASSERT_EQ(lin.unstable_directions.size(), 2u);
        SeedOptions so;
        so.second_order = false;
        const auto s = unstable_seed(g, e, lin, so);
        const double eps = 1e-6 * std::max(1.0, q);
        Eigen::VectorXd d = to_vector(g, s) - to_vector(g, e.point);
        // d is a difference of O(q) numbers, so only roundoff of that size survives
        const double roundoff = 64 * std::numeric_limits<double>::epsilon() * lin.jacobian.norm() *
                                (1 + to_vector(g, e.point).norm());
        EXPECT_LE((lin.jacobian * d - q * q * d).norm(), roundoff);
        EXPECT_NEAR(s.b, eps / std::sqrt(2.0), 1e-12 * eps);
        const double third = 3 * q / std::sqrt(5 + 9 * q * q);
        EXPECT_NEAR(s.alpha, eps * third / std::sqrt(2.0), 1e-9 * eps);
    }
}

TEST(UnstableSeed, BackwardRunReturnsToEquilibriumAtUnstableRate) {
    for (double eps : {1e-5, 1e-6, 1e-7}) {
        const GroupSpec g = GroupSpec::su2(1.0);
        const auto e = make_equilibrium(g, Family::SU2_qq0, 1.0);
        SeedOptions so;
        so.epsilon = eps;
        const auto s = unstable_seed(g, e, linearize(g, e), so);
        const auto tr = integrate(g, s, Direction::Backward);
        EXPECT_EQ(tr.left.kind, EndKind::EquilibriumCapture);
        // samples run forward in t, so the distance grows with the index;
        // near the equilibrium it behaves like exp(2 t)
        std::vector<double> t, ld;
        double prev = 0.0;
        for (std::size_t i = 0; i < tr.size(); ++i) {
            const auto& x = tr.samples[i];
            const double d = std::sqrt(std::pow(x.a - 1, 2) + std::pow(x.b - 1, 2) + x.c * x.c);
            if (d >= 10 * eps) break;
            EXPECT_GE(d, prev * (1 - 1e-9));
            prev = d;
            if (d > 1e-3 * eps) {
                t.push_back(tr.t_of[i]);
                ld.push_back(std::log(d));
            }
        }
        ASSERT_GT(t.size(), 5u);
        const auto fit = linear_fit(t, ld);
        EXPECT_NEAR(fit.slope, 2.0, 0.1);
    }
}
