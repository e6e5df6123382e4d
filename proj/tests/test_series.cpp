#include "support.hpp"

using namespace cklab;

namespace {

SeriesSolution bolt(const GroupSpec& g, Family f, double q, int order = 8, double alpha1 = 0.0) {
    SeriesOptions so;
    so.order = order;
    return series_solve(g, make_equilibrium(g, f, q), so, alpha1);
}

}  // namespace

TEST(RSystem, E2SlopeOfBIsOneWhenAEqualsC) {
    const GroupSpec g = GroupSpec::e2();
    for (double q : {0.5, 1.3, 4.0})
        for (double b : {0.1, 0.7})
            EXPECT_NEAR(r_system(g, {0, q, b, q, 0.7})[1], 1.0, 1e-14);
    EXPECT_NEAR(r_system(g, {0, 1.3, 0.3, 0.9, 0.7})[1], 0.5 * (1.3 / 0.9 + 0.9 / 1.3), 1e-14);
}

TEST(RSystem, Su2BiaxialSlopeOfCAtTheBolt) {
    for (double e : {0.3, 1.0, 2.0}) {
        const GroupSpec g = GroupSpec::su2(e);
        EXPECT_NEAR(r_system(g, {0, 1.0, 1.0, 1e-9, e})[2], 1 + e, 1e-8);
        // the printed pair: da/dr = c/(2a), dc/dr = 1 + e - c^2/(2a^2)
        const double a = 1.4, c = 0.6;
        const auto r = r_system(g, {0, a, a, c, e * a * a});
        EXPECT_NEAR(r[0], c / (2 * a), 1e-14);
        EXPECT_NEAR(r[2], 1 + e - c * c / (2 * a * a), 1e-14);
    }
}

TEST(RSystem, TimesAbcIsTheVectorField) {
    std::vector<GroupSpec> groups = cklab::test::studied_groups();
    groups.push_back(GroupSpec::custom(1, -1, 1));
    for (const auto& g : groups)
        for (State s : cklab::test::random_states(20, 17)) {
            s.alpha = effective_alpha(g, s);
            const auto r = r_system(g, s);
            const auto f = vector_field<double>(g, s.a, s.b, s.c, s.alpha);
            const double abc = s.a * s.b * s.c;
            for (int k = 0; k < 4; ++k) EXPECT_LE(cklab::test::rel_err(r[k] * abc, f[k]), 1e-12);
        }
}

TEST(SeriesSolve, E2BoltSlopeOfB) {
    const auto s = bolt(GroupSpec::e2(), Family::E2_q0q0, 1.0, 6);
    EXPECT_NEAR(s.coeffs[1][1], 1.0, 1e-12);
    for (std::size_t k = 0; k < s.coeffs[1].size(); k += 2) EXPECT_LE(std::abs(s.coeffs[1][k]), 1e-12);
}

TEST(SeriesSolve, Su2NutSlopes) {
    const GroupSpec g = GroupSpec::su2(1.0);
    const auto s = series_solve(g, make_equilibrium(g, Family::SU2_origin, 0.0));
    EXPECT_EQ(s.orbit, OrbitKind::Nut);
    EXPECT_NEAR(s.coeffs[0][1], std::sqrt(2.0) / 2, 1e-10);
    EXPECT_NEAR(s.coeffs[1][1], std::sqrt(2.0) / 2, 1e-10);
    EXPECT_NEAR(s.coeffs[2][1], 1.0, 1e-10);
    for (double e : {0.3, 3.0}) {
        const GroupSpec h = GroupSpec::su2(e);
        const double gamma = 1 + e;
        const auto n = series_solve(h, make_equilibrium(h, Family::SU2_origin, 0.0));
        EXPECT_NEAR(n.coeffs[0][1], std::sqrt(gamma) / 2, 1e-10);
        EXPECT_NEAR(n.coeffs[2][1], gamma / 2, 1e-10);
    }
}

TEST(SeriesSolve, Su2BoltLeadingCoefficientAndParity) {
    const auto s = bolt(GroupSpec::su2(1.0), Family::SU2_qq0, 1.0);
    EXPECT_NEAR(s.coeffs[2][1], 2.0, 1e-12);
    EXPECT_EQ(s.parity[0], Parity::Even);
    EXPECT_EQ(s.parity[1], Parity::Even);
    EXPECT_EQ(s.parity[2], Parity::Odd);
    EXPECT_EQ(s.parity[3], Parity::Even);
}

TEST(SeriesSolve, ResidualVanishesThroughTheOrder) {
    std::vector<SeriesSolution> all;
    for (double e : {0.3, 1.0, 2.0}) {
        const GroupSpec g = GroupSpec::su2(e);
        for (double q : {0.5, 1.0, 2.0}) all.push_back(bolt(g, Family::SU2_qq0, q));
        all.push_back(series_solve(g, make_equilibrium(g, Family::SU2_origin, 0.0)));
    }
    for (double q : {0.5, 1.0, 2.0})
        for (double a1 : {0.0, 0.8}) all.push_back(bolt(GroupSpec::e2(), Family::E2_q0q0, q, 8, a1));
    for (double c1 : {0.5, 1.0, 2.0}) all.push_back(series_solve(GroupSpec::heisenberg(), heisenberg_bolt_base(c1)));
    for (const auto& s : all) {
        EXPECT_LE(s.residual, 1e-12);
        EXPECT_EQ(s.residual, series_residual(s));
    }
}

TEST(SeriesSolve, ParityOfTheStudiedBolts) {
    const auto e2 = bolt(GroupSpec::e2(), Family::E2_q0q0, 1.0);
    EXPECT_EQ(e2.parity[0], Parity::Even);
    EXPECT_EQ(e2.parity[1], Parity::Odd);
    EXPECT_EQ(e2.parity[2], Parity::Even);
    EXPECT_EQ(e2.parity[3], Parity::Even);
    for (double c1 : {0.5, 2.0}) {
        const auto h = series_solve(GroupSpec::heisenberg(), heisenberg_bolt_base(c1));
        const auto a2 = poly::mul(h.coeffs[0], h.coeffs[0], 9);
        const auto c2 = poly::mul(h.coeffs[2], h.coeffs[2], 9);
        EXPECT_EQ(classify_parity(a2), Parity::Even);
        EXPECT_EQ(classify_parity(c2), Parity::Even);
    }
}

TEST(SeriesSolve, E2BoltWithAlphaSlopeIsNotParityClean) {
    // the alpha slope left free by the equations couples into even powers of b
    const auto s = bolt(GroupSpec::e2(), Family::E2_q0q0, 1.0, 8, 0.8);
    EXPECT_EQ(s.parity[1], Parity::Mixed);
    EXPECT_GT(parity_defect(s.coeffs[1], Parity::Odd), 1e-4);
    EXPECT_LE(s.residual, 1e-12);
}

TEST(SeriesSolve, Errors) {
    const GroupSpec su2 = GroupSpec::su2(1.0);
    SeriesOptions so;
    so.order = 13;
    EXPECT_THROW(series_solve(su2, make_equilibrium(su2, Family::SU2_qq0, 1.0), so), Error);
    EXPECT_THROW(series_solve(GroupSpec::custom(1, 1, 1), State{0, 1, 1, 0, 1}), Error);
    EXPECT_THROW(series_solve(su2, State{0, 1, 1, 1, 1}), Error);
    try {
        series_solve(GroupSpec::e2(), State{0, 0, 0, 0, 0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RecursionObstruction);
    }
}

TEST(SeriesSolve, AgreesWithIntegration) {
    const struct {
        GroupSpec g;
        Family f;
        double a1;
    } cases[] = {{GroupSpec::su2(1.0), Family::SU2_qq0, 0.0}, {GroupSpec::su2(0.3), Family::SU2_qq0, 0.0},
                 {GroupSpec::e2(), Family::E2_q0q0, 0.8}};
    for (const auto& c : cases)
        for (double q : {1.0, 2.0}) {
            const auto s6 = bolt(c.g, c.f, q, 6, c.a1);
            const auto s12 = bolt(c.g, c.f, q, 12, c.a1);
            double tail = 0;
            for (std::size_t v = 0; v < 4; ++v)
                for (std::size_t k = 7; k <= 8; ++k) tail = std::max(tail, std::abs(s12.coeffs[v][k]));
            const double r0 = 1e-3 * q;
            IntegratorOptions io;
            io.chart = Chart::R;
            io.rel_tol = 1e-12;
            io.abs_tol = 1e-14;
            for (int k = 1; k <= 10; ++k) io.stops.push_back(r0 + (0.1 * q - r0) * k / 10.0);
            const State seed{r0, s12.value(0, r0), s12.value(1, r0), s12.value(2, r0), s12.value(3, r0)};
            const auto tr = integrate(c.g, seed, Direction::Forward, io);
            ASSERT_EQ(tr.size(), 11u);
            for (const auto& x : tr.samples) {
                const double r = x.t;
                const double bound = 2 * tail * std::pow(r, 7) + 1e-9;
                EXPECT_NEAR(x.a, s6.value(0, r), bound);
                EXPECT_NEAR(x.b, s6.value(1, r), bound);
                EXPECT_NEAR(x.c, s6.value(2, r), bound);
                EXPECT_NEAR(x.alpha, s6.value(3, r), bound);
            }
        }
}

TEST(VzWeights, Values) {
    const auto w1 = vz_weights(bolt(GroupSpec::su2(1.0), Family::SU2_qq0, 1.0));
    EXPECT_NEAR(w1.a1, 4.0, 1e-12);
    EXPECT_EQ(w1.d1, 1.0);
    EXPECT_TRUE(w1.integral);
    const auto w3 = vz_weights(bolt(GroupSpec::su2(0.3), Family::SU2_qq0, 1.0));
    EXPECT_NEAR(w3.a1, 2.6, 1e-12);
    EXPECT_FALSE(w3.integral);
    const auto we = vz_weights(bolt(GroupSpec::e2(), Family::E2_q0q0, 1.0));
    EXPECT_EQ(we.a1, 1.0);
    EXPECT_EQ(we.d1, 1.0);
}

TEST(VzMetric, E2BoltPasses) {
    const auto rep = vz_metric_check(bolt(GroupSpec::e2(), Family::E2_q0q0, 1.0));
    EXPECT_TRUE(rep.metric_pass());
    for (const auto& c : rep.metric_conditions) EXPECT_FALSE(c.uses.empty()) << c.name;
}

TEST(VzMetric, Su2NutFailsForEveryExponent) {
    for (double e : {0.3, 1.0, 3.0}) {
        const GroupSpec g = GroupSpec::su2(e);
        const auto rep = vz_metric_check(series_solve(g, make_equilibrium(g, Family::SU2_origin, 0.0)));
        EXPECT_FALSE(rep.metric_pass());
        bool a_slope = false, c_slope = false;
        for (const auto& c : rep.metric_conditions) {
            if (c.name == "a'(0) = 1") a_slope = true;
            if (c.name == "c'(0) = 1") c_slope = true;
        }
        EXPECT_TRUE(a_slope && c_slope);
    }
}

TEST(VzMetric, Su2BoltIntegrality) {
    EXPECT_TRUE(vz_check(bolt(GroupSpec::su2(1.0), Family::SU2_qq0, 1.0)).pass());
    const auto rep = vz_check(bolt(GroupSpec::su2(0.3), Family::SU2_qq0, 1.0));
    EXPECT_FALSE(rep.integrality);
    EXPECT_FALSE(rep.pass());
    EXPECT_EQ(rep.integrality_phrasings.size(), 2u);
}

TEST(VzMetric, InsufficientOrder) {
    try {
        vz_check(bolt(GroupSpec::su2(1.0), Family::SU2_qq0, 1.0, 4));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InsufficientOrder);
    }
}

TEST(VzMetric, HeisenbergSigma3Expansion) {
    // c^2 = phi' in the geodesic coordinate: r^2 - r^4/(3 c1) + O(r^6), by hand reversion
    for (double c1 : {0.5, 1.0, 2.0}) {
        const auto ref = heis_sigma3_expansion(c1, 8);
        EXPECT_NEAR(ref[2], 1.0, 1e-12);
        EXPECT_NEAR(ref[4], -1.0 / (3 * c1), 1e-12);
        const auto s = series_solve(GroupSpec::heisenberg(), heisenberg_bolt_base(c1));
        const auto c2 = poly::mul(s.coeffs[2], s.coeffs[2], 9);
        for (std::size_t k = 0; k < 9; ++k) EXPECT_NEAR(c2[k], ref[k], 1e-10) << "k=" << k;
        EXPECT_TRUE(vz_check(s).pass());
    }
}

TEST(VzKahler, BoltsPass) {
    EXPECT_TRUE(vz_kahler_check(bolt(GroupSpec::su2(1.0), Family::SU2_qq0, 1.0)).kahler_pass());
    EXPECT_TRUE(vz_kahler_check(bolt(GroupSpec::e2(), Family::E2_q0q0, 1.0)).kahler_pass());
}

TEST(VzKahler, CorruptedSeriesFails) {
    auto s = bolt(GroupSpec::e2(), Family::E2_q0q0, 1.0);
    s.coeffs[1][2] += 0.1;
    const auto rep = vz_kahler_check(s);
    EXPECT_FALSE(rep.kahler_pass());
    EXPECT_GT(series_residual(s), 1e-3);
}
