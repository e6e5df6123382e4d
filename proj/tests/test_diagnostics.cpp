#include "support.hpp"

using namespace cklab;

namespace {

SeedSpec unstable(Family f, double q = 1.0) {
    SeedSpec s;
    s.family = f;
    s.q = q;
    return s;
}

SeedSpec explicit_seed(State x) {
    SeedSpec s;
    s.source = SeedSource::Explicit;
    s.initial = x;
    return s;
}

// a = (t - xi)^{-1/2}, b = c = (t - xi)^{1/2} on a log mesh to the right of xi
Trajectory synthetic_blowup(double xi) {
    Trajectory tr;
    tr.group = GroupSpec::e2();
    for (int i = 0; i <= 60; ++i) {
        const double x = std::pow(10.0, -6.0 + 0.1 * i);
        const double t = xi + x;
        tr.samples.push_back({t, 1 / std::sqrt(x), std::sqrt(x), std::sqrt(x), 1.0});
        tr.t_of.push_back(t);
    }
    tr.left.kind = EndKind::FiniteBlowup;
    tr.left.value = tr.left.t_value = xi;
    tr.right.value = tr.right.t_value = tr.back().t;
    return tr;
}

}  // namespace

TEST(DistanceIntegral, ConstantTrajectory) {
    IntegratorOptions io;
    io.max_span = 1.0;
    const auto tr = integrate(GroupSpec::custom(0, 0, 0), {0, 1, 1, 1, 0}, Direction::Forward, io);
    const auto r = distance_integral(tr, End::Right);
    EXPECT_EQ(r.kind, DistanceKind::Finite);
    EXPECT_NEAR(r.value, 1.0, 1e-12);
    EXPECT_NEAR(distance_integral(tr, End::Left, 1.0).value, 1.0, 1e-12);
}

TEST(DistanceIntegral, Su2OriginBranchLeftEndIsFinite) {
    // abc = (-t)^{-3/2}/gamma as t -> -inf
    const SU2BiaxialSolution sol{2.0, 0.0, 0.0};
    std::vector<double> qs;
    for (int i = 0; i <= 4000; ++i) qs.push_back(-20.0 + 40.0 * i / 4000.0);
    const auto tr = su2_biaxial_trajectory(sol, qs);
    const double t_ref = tr.samples[2000].t;
    const auto r = distance_integral(tr, End::Left, t_ref);
    EXPECT_EQ(r.kind, DistanceKind::Finite);
    for (double rho : r.ratios) EXPECT_LT(rho, kConvergentRatio);
    EXPECT_NEAR(r.integrand.exponent, -1.5, 0.01);
    // int_{-inf}^{t_ref} (-t)^{-3/2}/gamma dt = 2 (-t_ref)^{-1/2}/gamma
    EXPECT_NEAR(r.value, 2 / std::sqrt(-t_ref) / 2.0, 1e-3 * r.value);
}

TEST(DistanceIntegral, Su2RightEndDiverges) {
    for (double e : {0.0, 1.0}) {
        const auto tr = cklab::test::unstable_run(GroupSpec::su2(e), Family::SU2_qq0, 1.0);
        const auto r = distance_integral(tr, End::Right);
        ASSERT_EQ(r.kind, DistanceKind::Divergent);
        EXPECT_TRUE(std::isinf(r.value));
        EXPECT_TRUE(r.integrand.accepted());
        EXPECT_TRUE(r.integrand.matches_reference(0.05)) << r.integrand.exponent;
    }
}

TEST(DistanceIntegral, BoltEndsConverge) {
    const struct {
        GroupSpec g;
        Family f;
    } cases[] = {{GroupSpec::su2(0.0), Family::SU2_qq0}, {GroupSpec::su2(1.0), Family::SU2_qq0}, {GroupSpec::e2(), Family::E2_q0q0}};
    for (const auto& c : cases)
        for (double q : {0.5, 1.0, 2.0}) {
            const auto tr = cklab::test::unstable_run(c.g, c.f, q);
            const auto r = distance_integral(tr, End::Left);
            ASSERT_EQ(r.kind, DistanceKind::Finite);
            for (std::size_t k = r.ratios.size() - 3; k < r.ratios.size(); ++k) EXPECT_LT(r.ratios[k], kConvergentRatio);
            EXPECT_TRUE(std::isfinite(r.value));
        }
}

TEST(DistanceIntegral, Errors) {
    Trajectory one;
    one.samples = {{0, 1, 1, 1, 1}};
    one.t_of = {0};
    EXPECT_THROW(distance_integral(one, End::Left), Error);
    auto tr = synthetic_blowup(0.0);
    tr.left.t_value = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(distance_integral(tr, End::Left), Error);
}

TEST(WChart, SyntheticInverseQuartic) {
    std::vector<double> rho, W, V;
    for (int i = 0; i <= 400; ++i) {
        const double r = std::pow(10.0, -1.0 + 4.0 * i / 400.0);
        rho.push_back(r);
        W.push_back(1 + std::pow(r, -4));
        V.push_back(0.0);
    }
    const auto res = w_chart_verdict(rho, W, V);
    EXPECT_EQ(res.kind, DistanceKind::Divergent);
    EXPECT_NEAR(res.A, 1.0, 1e-9);
    EXPECT_GE(res.r2, 0.99);
    // int W^{-1/2} grows like rho
    EXPECT_NEAR(res.growth.back(), 1.0, 0.01);
    EXPECT_THROW(w_chart_verdict({1, 2, 3}, {1, 1, 1}, {0, 0, 0}), Error);
}

TEST(WChart, E2UnstableCurve) {
    const auto tr = cklab::test::unstable_run(GroupSpec::e2(), Family::E2_q0q0, 1.0);
    const auto res = e2_distance_via_W(tr);
    EXPECT_EQ(res.kind, DistanceKind::Divergent);
    EXPECT_GE(res.r2, 0.99);
    EXPECT_LE(res.k_rel_error, 0.01);
    EXPECT_EQ(res.v_increases, 0u);
    EXPECT_GE(res.L, 0.0);
    const std::size_t n = res.growth.size();
    ASSERT_GE(n, 4u);
    EXPECT_NEAR(res.growth[n - 1] / res.growth[n - 2], 1.0, 0.05);
}

TEST(WChart, RejectsCaseOne) {
    const auto tr = integrate_both(GroupSpec::e2(), {0, 2, 1, 1, 1});
    try {
        e2_distance_via_W(tr);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotCase3);
    }
}

TEST(BlowupFit, SyntheticPowerLaw) {
    const auto fits = asymptotic_blowup_fit(synthetic_blowup(0.25), End::Left);
    ASSERT_EQ(fits.size(), 3u);
    EXPECT_NEAR(fits[0].exponent, -0.5, 1e-6);
    EXPECT_NEAR(fits[1].exponent, 0.5, 1e-6);
    EXPECT_NEAR(fits[2].exponent, 0.5, 1e-6);
    EXPECT_EQ(fits[0].reference, -0.5);
    EXPECT_THROW(asymptotic_blowup_fit(synthetic_blowup(0.25), End::Right), Error);
}

TEST(BlowupFit, E2CasesOneAndTwo) {
    const struct {
        State s;
        std::array<double, 3> want;
    } cases[] = {{{0, 2, 1, 1, 1}, {-0.5, 0.5, 0.5}}, {{0, 1, 1, 2, 0.2}, {0.5, 0.5, -0.5}}};
    for (const auto& c : cases) {
        const auto tr = integrate(GroupSpec::e2(), c.s, Direction::Backward);
        ASSERT_EQ(tr.left.kind, EndKind::FiniteBlowup);
        const auto fits = asymptotic_blowup_fit(tr, End::Left);
        for (int k = 0; k < 3; ++k) {
            EXPECT_NEAR(fits[k].exponent, c.want[k], 0.025) << fits[k].variable;
            EXPECT_TRUE(fits[k].accepted());
            EXPECT_TRUE(fits[k].matches_reference());
        }
        EXPECT_EQ(distance_integral(tr, End::Left).kind, DistanceKind::Finite);
    }
}

TEST(Audit, Examples) {
    const auto e2run = cklab::test::unstable_run(GroupSpec::e2(), Family::E2_q0q0, 1.0);
    const auto a = invariant_region_audit(GroupSpec::e2(), e2run);
    EXPECT_TRUE(a.region_applicable);
    EXPECT_EQ(a.region_violations, 0u);
    EXPECT_FALSE(a.not_case3());

    const auto case1 = integrate_both(GroupSpec::e2(), {0, 2, 1, 1, 1});
    EXPECT_TRUE(invariant_region_audit(GroupSpec::e2(), case1).not_case3());

    Trajectory eq;
    eq.group = GroupSpec::e2();
    eq.samples = {{0, 1, 0, 1, 0}, {1, 1, 0, 1, 0}};
    eq.t_of = {0, 1};
    const auto ae = invariant_region_audit(GroupSpec::e2(), eq);
    EXPECT_EQ(ae.region_violations, 0u);
    EXPECT_EQ(ae.monotone_violations(), 0u);

    EXPECT_FALSE(invariant_region_audit(GroupSpec::su2(1.0), e2run).region_applicable);
}

TEST(Classify, VerdictTable) {
    const auto su2 = [](double e, Family f) { return classify(GroupSpec::su2(e), unstable(f)); };
    for (double e : {0.0, 1.0}) {
        const auto r = su2(e, Family::SU2_qq0);
        EXPECT_EQ(r.overall, Overall::CompleteWithBolt) << e;
        EXPECT_EQ(r.left, LeftVerdict::FiniteDistanceBolt);
        EXPECT_EQ(r.right, RightVerdict::InfiniteDistance);
        EXPECT_TRUE(r.reason.empty());
    }
    const auto frac = su2(0.3, Family::SU2_qq0);
    EXPECT_EQ(frac.overall, Overall::Incomplete);
    EXPECT_EQ(frac.reason, "SmoothExtensionFails");

    EXPECT_EQ(su2(1.0, Family::SU2_q0q).overall, Overall::Incomplete);

    const auto nut = su2(1.0, Family::SU2_origin);
    EXPECT_EQ(nut.overall, Overall::Incomplete);
    EXPECT_EQ(nut.left, LeftVerdict::FiniteDistanceNutFail);
    ASSERT_TRUE(nut.smoothness.has_value());
    int slopes = 0;
    for (const auto& c : nut.smoothness->metric_conditions)
        if (c.name == "a'(0) = 1" || c.name == "c'(0) = 1") ++slopes;
    EXPECT_EQ(slopes, 2);

    SeedSpec h;
    h.c1 = 1.0;
    const auto heis = classify(GroupSpec::heisenberg(), h);
    EXPECT_EQ(heis.overall, Overall::CompleteWithBolt);
    EXPECT_EQ(heis.spec.source, SeedSource::ClosedForm);

    const auto caseii = classify(GroupSpec::su2(1.0), explicit_seed({0, 1, 1, 3, 1}));
    EXPECT_EQ(caseii.overall, Overall::Incomplete);
    EXPECT_EQ(caseii.reason, "FiniteXi");
    EXPECT_TRUE(std::isfinite(caseii.left_end.t_value));
    EXPECT_LE(caseii.first_integral_drift, 1e-12);

    EXPECT_EQ(classify(GroupSpec::e2(), unstable(Family::E2_0p0r)).overall, Overall::Excluded);
    EXPECT_EQ(classify(GroupSpec::e2(), unstable(Family::E2_q0q0, 0.0)).overall, Overall::Excluded);
    EXPECT_EQ(classify(GroupSpec::custom(1, 1, 0), explicit_seed({0, 1, 1, 1, 1})).overall, Overall::Unknown);
    EXPECT_THROW(classify(GroupSpec::su2(1.0, 0.5), unstable(Family::SU2_qq0)), Error);
}

TEST(Classify, E2UnstableCurveEnds) {
    const auto r = classify(GroupSpec::e2(), unstable(Family::E2_q0q0));
    ASSERT_TRUE(r.left_distance.has_value());
    EXPECT_EQ(r.left_distance->kind, DistanceKind::Finite);
    EXPECT_EQ(r.right, RightVerdict::InfiniteDistance);
    ASSERT_TRUE(r.w_chart.has_value());
    EXPECT_GE(r.w_chart->r2, 0.99);
    EXPECT_EQ(r.limit_family, Family::E2_q0q0);
    EXPECT_LE(r.first_integral_drift, 1e-8);
}

TEST(Classify, InvariantUnderSeedAndTolerance) {
    const struct {
        GroupSpec g;
        Family f;
    } cases[] = {{GroupSpec::su2(1.0), Family::SU2_qq0}, {GroupSpec::su2(0.3), Family::SU2_qq0},
                 {GroupSpec::su2(1.0), Family::SU2_q0q}, {GroupSpec::e2(), Family::E2_q0q0}};
    for (const auto& c : cases) {
        const auto base = classify(c.g, unstable(c.f));
        for (double eps : {1e-5, 1e-7}) {
            auto spec = unstable(c.f);
            spec.seed.epsilon = eps;
            const auto r = classify(c.g, spec);
            EXPECT_EQ(r.overall, base.overall) << to_string(c.f) << " eps=" << eps;
            EXPECT_EQ(r.left, base.left);
            EXPECT_EQ(r.right, base.right);
        }
        auto tight = unstable(c.f);
        tight.integrator.rel_tol /= 10;
        tight.integrator.abs_tol /= 10;
        const auto r = classify(c.g, tight);
        EXPECT_EQ(r.overall, base.overall) << to_string(c.f);
        EXPECT_EQ(r.reason, base.reason);
    }
}

TEST(Classify, E2ScalingSymmetry) {
    const GroupSpec g = GroupSpec::e2();
    const State s0{0, 1, 0.5, 1.2, 0.4};
    IntegratorOptions io;
    io.max_span = 2.0;
    const auto tr = integrate(g, s0, Direction::Forward, io);
    for (double k : {0.5, 2.0}) {
        // near the blowup the relative error grows like (error in xi)/(xi - t), so compare before it
        std::size_t n = 1;
        while (n < tr.size() && norm(tr.samples[n].vec()) <= 100) ++n;
        ASSERT_GT(tr.samples[n - 1].t, 0.9 * tr.right.value);
        IntegratorOptions so;
        for (std::size_t i = 1; i < n; ++i) so.stops.push_back(tr.samples[i].t / (k * k));
        const auto scaled = integrate(g, scale_symmetry(s0, k), Direction::Forward, so);
        ASSERT_EQ(scaled.size(), n);
        for (std::size_t i = 0; i < n; ++i) {
            const State want = scale_symmetry(tr.samples[i], k);
            const auto& got = scaled.samples[i];
            EXPECT_LE(cklab::test::rel_err(got.a, want.a), 1e-6);
            EXPECT_LE(cklab::test::rel_err(got.b, want.b), 1e-6);
            EXPECT_LE(cklab::test::rel_err(got.c, want.c), 1e-6);
            EXPECT_LE(cklab::test::rel_err(got.alpha, want.alpha), 1e-6);
        }
        const auto base = classify(g, unstable(Family::E2_q0q0, 1.0));
        const auto r = classify(g, unstable(Family::E2_q0q0, k));
        EXPECT_EQ(r.overall, base.overall);
        EXPECT_EQ(r.left, base.left);
        EXPECT_EQ(r.right, base.right);
        const auto c1 = classify(g, explicit_seed({0, 2, 1, 1, 1}));
        const auto ck = classify(g, explicit_seed(scale_symmetry({0, 2, 1, 1, 1}, k)));
        EXPECT_EQ(ck.overall, c1.overall);
        EXPECT_EQ(ck.reason, c1.reason);
    }
}

TEST(Classify, TextSummaryNamesTheVerdicts) {
    const auto r = classify(GroupSpec::su2(1.0), unstable(Family::SU2_qq0));
    const auto text = to_text(r);
    EXPECT_NE(text.find("CompleteWithBolt"), std::string::npos);
    EXPECT_NE(text.find("InfiniteDistance"), std::string::npos);
}
