#include <gtest/gtest.h>

#include <cmath>

#include "smms/classify.hpp"
#include "smms/errors.hpp"

using namespace smms;

namespace {

ConditionReport report_for(const FamilyInstance& inst, int k = 7) {
    return condition_report(inst.chart(), inst.sample_points(k));
}

WarpedSMMS example12_with_m(double m) {
    WarpedSMMS w = build_family(FamilyId::Example12).warped();
    w.m = m;
    return w;
}

}  // namespace

TEST(Integrator, HarmonicOscillator) {
    const OdeTrajectory tr = integrate_ode(
        [](const OdeState& y, OdeState& d, double) {
            d[0] = y[1];
            d[1] = -y[0];
        },
        {1.0, 0.0}, 0.0, 2 * M_PI);
    EXPECT_NEAR(tr.final_time, 2 * M_PI, 1e-15);
    EXPECT_NEAR(tr.final_state[0], 1.0, 1e-8);
    EXPECT_NEAR(tr.final_state[1], 0.0, 1e-8);
}

TEST(Integrator, Exponential) {
    OdeOptions o;
    o.output_times = {0.25, 0.5};
    const OdeTrajectory tr =
        integrate_ode([](const OdeState& y, OdeState& d, double) { d[0] = y[0]; }, {1.0}, 0.0, 1.0, o);
    EXPECT_NEAR(tr.final_state[0], std::exp(1.0), 1e-9);
    ASSERT_EQ(tr.output.size(), 2u);
    EXPECT_NEAR(tr.output[0][0], std::exp(0.25), 1e-10);
    EXPECT_NEAR(tr.output[1][0], std::exp(0.5), 1e-10);
}

TEST(Integrator, EventStopsAtFirstReturn) {
    const double lambda = 2.0, s = std::sqrt(2 * lambda);
    OdeOptions o;
    o.event = [](double, const OdeState& y) { return y[1]; };
    const OdeTrajectory tr = integrate_ode(
        [s](const OdeState& y, OdeState& d, double) {
            d[0] = y[1];
            d[1] = -s * s * y[0];
        },
        {1.0, 0.0}, 0.0, 10.0, o);
    ASSERT_TRUE(tr.event_time.has_value());
    EXPECT_NEAR(*tr.event_time, M_PI / s, 1e-10);
    EXPECT_DOUBLE_EQ(tr.final_time, *tr.event_time);
}

TEST(Integrator, FiniteTimeBlowupIsReported) {
    bool raised = false;
    try {
        integrate_ode([](const OdeState& y, OdeState& d, double) { d[0] = y[0] * y[0]; }, {1.0}, 0.0, 2.0);
    } catch (const StepSizeUnderflow&) {
        raised = true;
    } catch (const NonFiniteState&) {
        raised = true;
    }
    EXPECT_TRUE(raised);
}

TEST(Obata, RejectsDegenerateData) {
    EXPECT_THROW(solve_obata_ivp({0.5, 3.0, 3.0}, 3), InvalidProblem);
    EXPECT_THROW(solve_obata_ivp({0.0, 0.0, 1.0}, 3), InvalidProblem);
}

TEST(Obata, SphereCaseClosedForm) {
    const ObataSolution sol = solve_obata_ivp({0.5, 2.0, 3.0}, 3);
    ASSERT_TRUE(sol.T().has_value());
    EXPECT_NEAR(*sol.T(), M_PI, 1e-8);
    for (double t = 0.0; t <= *sol.T(); t += 0.01) {
        EXPECT_NEAR(sol.u(t), 2 + std::cos(t), 1e-8);
        EXPECT_NEAR(sol.du(t), -std::sin(t), 1e-8);
    }
    EXPECT_GT(sol.warp(0.5), 0.0);
}

TEST(Obata, FlatCaseIsUnbounded) {
    const ObataSolution sol = solve_obata_ivp({0.0, 2.0, 1.0}, 3);
    EXPECT_FALSE(sol.T().has_value());
    for (double t : {0.5, 2.0, 7.5}) EXPECT_NEAR(sol.u(t), 1 + t * t, 1e-8 * (1 + t * t));
}

TEST(Obata, HyperbolicCaseClosedForm) {
    const double lambda = -0.5, xi = 1.0, kappa = 2 * lambda * xi + 1;
    const ObataSolution sol = solve_obata_ivp({lambda, kappa, xi}, 3, {.t_max = 4.0});
    const double c = kappa / (2 * lambda);
    for (double t : {0.3, 1.7, 3.9}) EXPECT_NEAR(sol.u(t), c + (xi - c) * std::cosh(t), 1e-8 * std::cosh(t));
}

TEST(Obata, ChartMatchesWeightedSphere) {
    const ObataSolution sol = solve_obata_ivp({0.5, 2.0, 3.0}, 3);
    const FamilyInstance inst = build_family(FamilyId::WeightedSphere);
    const SMMSChart s = inst.chart();
    const ChartMetric c = sol.chart();
    const RealFunction v = density_v(inst.warped());
    for (const Point& p : inst.sample_points(9)) {
        EXPECT_LE((c.metric(p) - s.chart().metric(p)).cwiseAbs().maxCoeff(), 1e-6);
        EXPECT_NEAR(sol.u(p[0]), v(p[0]), 1e-6);
    }
    const auto rows = sol.table(11);
    ASSERT_EQ(rows.size(), 11u);
    EXPECT_DOUBLE_EQ(rows.front()[0], 0.0);
    EXPECT_DOUBLE_EQ(rows.back()[0], *sol.T());
}

TEST(Obata, ResidualOnSpaceForms) {
    const FamilyInstance sphere = build_family(FamilyId::WeightedSphere);
    EXPECT_LE(obata_residual(sphere.chart(), 0.5, 2.0, sphere.sample_points(5)), 1e-5);
    const FamilyInstance euclid = build_family(FamilyId::WeightedEuclidean);
    EXPECT_LE(obata_residual(euclid.chart(), 0.0, 2.0, euclid.sample_points(5)), 1e-5);
    const FamilyInstance hyper = build_family(FamilyId::WeightedHyperbolic);
    EXPECT_LE(obata_residual(hyper.chart(), -0.5, -1.0, hyper.sample_points(5)), 1e-5);
    // Wrong scale is visible.
    EXPECT_GT(obata_residual(sphere.chart(), 0.5, 2.5, sphere.sample_points(5)), 0.1);
}

TEST(Obata, CounterexampleFailsPrecondition) {
    const FamilyInstance ce = build_family(FamilyId::Counterexample31);
    EXPECT_THROW(obata_residual(ce.chart(), 0.0, 0.0, ce.sample_points(5)), PreconditionFailed);
}

TEST(ClassifyBranch, EinsteinFamilies) {
    for (FamilyId id : {FamilyId::Thm41Positive, FamilyId::Thm41Zero, FamilyId::Thm41Negative, FamilyId::Example43,
                        FamilyId::Thm14_3b}) {
        const FamilyInstance inst = build_family(id);
        const BranchVerdict v = classify_branch(inst.warped(), inst.sample_ts(9));
        EXPECT_EQ(v.branch, Branch::Einstein) << family_key(id) << " " << v.reason;
        EXPECT_LE(v.ricci_deviation, 1e-9);
    }
}

TEST(ClassifyBranch, NonEinsteinExampleFit) {
    FamilyParams p;
    p.A = 1.3;
    p.B = 0.7;
    const FamilyInstance inst = build_family(FamilyId::Example12, p);
    const BranchVerdict v = classify_branch(inst.warped(), inst.sample_ts(9));
    ASSERT_EQ(v.branch, Branch::NonEinsteinExample12) << v.reason;
    EXPECT_NEAR(*v.A, 1.3, 1e-6);
    EXPECT_NEAR(*v.B, 0.7, 1e-6);
    EXPECT_LE(v.fit_residual, 1e-12);
}

TEST(ClassifyBranch, InvalidHalfIntegerReplacement) {
    const FamilyInstance inst = build_family(FamilyId::Example12);
    const BranchVerdict v = classify_branch(example12_with_m(0.75), inst.sample_ts(9));
    EXPECT_EQ(v.branch, Branch::Indeterminate);
    EXPECT_GT(v.ode_residual, 1e-8);
    EXPECT_GT(v.defects.einstein_defect, 0.0);
    EXPECT_THROW(classify_branch(inst.warped(), {1.0, 2.0}), InsufficientSamples);
}

// No catalog family carries both branch evidences; the unused defect sits far above tolerance.
TEST(ClassifyBranch, DefectSeparation) {
    const double tol = 1e-8;
    for (FamilyId id : all_families()) {
        const FamilyInstance inst = build_family(id);
        if (!inst.is_warped()) continue;
        const BranchVerdict v = classify_branch(inst.warped(), inst.sample_ts(9), tol);
        EXPECT_NE(v.branch, Branch::Indeterminate) << family_key(id);
        EXPECT_GE(std::max(v.defects.einstein_defect, v.defects.branch2_defect), 1e3 * tol) << family_key(id);
    }
}

TEST(Blowup, NonEinsteinRate) {
    const FamilyInstance inst = build_family(FamilyId::Example12);
    EXPECT_NEAR(warped_curvature_closed(inst.warped(), 0.1).ricci_tt, 200.0 / 3.0, 1e-9);
    const BlowupResult r =
        blowup_probe(inst.warped(), Endpoint::Left, approach_samples(inst.warped(), Endpoint::Left));
    EXPECT_TRUE(r.diverges);
    EXPECT_NEAR(r.rate_exponent, 2.0, 1e-2);
    EXPECT_NEAR(r.coefficient, 2.0 / 3.0, 1e-2);
    EXPECT_THROW(blowup_probe(inst.warped(), Endpoint::Right, {1.0, 2.0, 3.0}), DomainError);
}

TEST(Blowup, SmoothEndpoints) {
    FamilyParams p;
    p.c2 = 0.0;
    const FamilyInstance neg = build_family(FamilyId::Thm41Negative, p);
    WarpedSMMS w = neg.warped();
    w.interval = {0.0, 5.0};
    EXPECT_FALSE(blowup_probe(w, Endpoint::Left, approach_samples(w, Endpoint::Left)).diverges);

    WarpedSMMS flat;
    flat.n = 3;
    flat.interval = {0.0, 2.0};
    flat.phi = RealFunction{[](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
    flat.f = RealFunction{[](double t) { return t; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
    flat.fiber = FiberSpec::flat(2);
    const BlowupResult r = blowup_probe(flat, Endpoint::Left, approach_samples(flat, Endpoint::Left));
    EXPECT_FALSE(r.diverges);
    EXPECT_NEAR(r.coefficient, 0.0, 1e-12);
}

TEST(CriticalPoints, CatalogCounts) {
    EXPECT_EQ(critical_points(build_family(FamilyId::WeightedSphere).warped()).size(), 2u);
    EXPECT_EQ(critical_points(build_family(FamilyId::WeightedEuclidean).warped()).size(), 1u);
    EXPECT_EQ(critical_points(build_family(FamilyId::WeightedHyperbolic).warped()).size(), 1u);
    EXPECT_EQ(critical_points(build_family(FamilyId::Thm14_3b).warped()).size(), 0u);
    const auto sphere = critical_points(build_family(FamilyId::WeightedSphere).warped());
    EXPECT_NEAR(sphere.front(), 0.0, 1e-12);
    EXPECT_NEAR(sphere.back(), M_PI, 1e-12);
}

TEST(MatchGlobal, SpaceForms) {
    const FamilyInstance sphere = build_family(FamilyId::WeightedSphere);
    const GlobalVerdict s = match_global(sphere.warped(), report_for(sphere));
    EXPECT_EQ(s.kind, GlobalCase::Sphere) << s.reason;
    EXPECT_NEAR(*s.fitted.A, 2.0, 1e-6);
    EXPECT_NEAR(*s.fitted.B, 1.0, 1e-6);

    const FamilyInstance euclid = build_family(FamilyId::WeightedEuclidean);
    EXPECT_EQ(match_global(euclid.warped(), report_for(euclid)).kind, GlobalCase::Euclidean);

    FamilyParams qe;
    qe.A = 0.0;
    qe.B = 1.0;
    const FamilyInstance hyper = build_family(FamilyId::WeightedHyperbolic, qe);
    const GlobalVerdict h = match_global(hyper.warped(), report_for(hyper));
    EXPECT_EQ(h.kind, GlobalCase::Hyperbolic) << h.reason;
    EXPECT_TRUE(h.quasi_einstein);
    EXPECT_NEAR(*h.fitted.A, 0.0, 1e-6);
}

TEST(MatchGlobal, WarpedRicciFlat) {
    const FamilyInstance inst = build_family(FamilyId::Thm14_3b);
    const GlobalVerdict g = match_global(inst.warped(), report_for(inst));
    ASSERT_EQ(g.kind, GlobalCase::WarpedRicciFlat) << g.reason;
    EXPECT_NEAR(*g.fitted.A, 1.0, 1e-6);
    EXPECT_NEAR(*g.fitted.B, 2.0, 1e-6);
    EXPECT_NEAR(*g.fitted.C, 1.0, 1e-6);
    EXPECT_EQ(g.label(), "warped-ricci-flat");
}

TEST(MatchGlobal, WarpedRicciFlatMuFreeForMOne) {
    FamilyParams p;
    p.m = 1.0;
    p.mu = 7.0;
    const FamilyInstance inst = build_family(FamilyId::Thm14_3b, p);
    const GlobalVerdict g = match_global(inst.warped(), report_for(inst));
    EXPECT_EQ(g.kind, GlobalCase::WarpedRicciFlat) << g.reason;
    EXPECT_DOUBLE_EQ(*g.fitted.mu, 7.0);
}

TEST(MatchGlobal, IncompleteAndUnmatched) {
    const FamilyInstance ex = build_family(FamilyId::Example12);
    const GlobalVerdict g = match_global(ex.warped(), report_for(ex));
    EXPECT_EQ(g.kind, GlobalCase::Incomplete);
    EXPECT_EQ(g.label(), "incomplete: ricci-blowup");

    const FamilyInstance ce = build_family(FamilyId::Counterexample31);
    EXPECT_EQ(match_global(ce.chart(), report_for(ce)).kind, GlobalCase::Unmatched);

    const FamilyInstance e43 = build_family(FamilyId::Example43);
    EXPECT_EQ(match_global(e43.warped(), report_for(e43)).kind, GlobalCase::Unmatched);
}

// On the Einstein branch the unweighted Weyl tensor is harmonic and annihilated by grad f.
TEST(EinsteinBranch, WeylHarmonicity) {
    const FamilyInstance inst = build_family(FamilyId::Example43);
    const SMMSChart s = inst.chart();
    const ChartMetric& chart = s.chart();
    const TensorField weyl = [&chart](const Point& p) {
        return weyl_tensor(curvature_bundle(chart, p), chart.metric(p));
    };
    for (const Point& p : inst.sample_points(3)) {
        const Matrix g = chart.metric(p);
        const TensorValue dw = divergence(chart, weyl, p);
        const ScalarCalculus f = scalar_calculus(chart, s.f(), p);
        const TensorValue iw = interior_product(f.grad, weyl(p));
        EXPECT_LE(frame_max_abs(dw, g), 1e-4);
        EXPECT_LE(frame_max_abs(iw, g), 1e-4);
        EXPECT_GE(frame_max_abs(weyl(p), g), 1e-2);
    }
}
