#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "smms/errors.hpp"
#include "smms/tensor_core.hpp"
#include "test_charts.hpp"

using namespace smms;
using namespace smms::testing;

namespace {

Point pt(std::initializer_list<double> xs) {
    Point p(static_cast<Eigen::Index>(xs.size()));
    int i = 0;
    for (double x : xs) p[i++] = x;
    return p;
}

double first_bianchi_defect(const TensorValue& r) {
    const int n = r.dim();
    double worst = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    worst = std::max(worst, std::abs(r(i, j, k, l) + r(j, k, i, l) + r(k, i, j, l)));
    return worst;
}

// delta R(X,Y,Z) - [(nabla_Y rho)(X,Z) - (nabla_Z rho)(X,Y)], max over components.
double divergence_identity_defect(const ChartMetric& chart, const Point& p) {
    const FDConfig cfg;
    auto fields = [&](const Point& q) {
        const CurvatureBundle c = curvature_bundle(chart, q, cfg);
        return std::vector<TensorValue>{c.riemann, c.ricci};
    };
    const auto nab = covariant_derivatives(chart, fields, p, cfg);
    const TensorValue div_r = divergence_from_derivative(nab[0], chart.metric(p));
    const TensorValue& nrho = nab[1];
    const int n = chart.dim();
    double worst = 0;
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            for (int z = 0; z < n; ++z)
                worst = std::max(worst, std::abs(div_r(x, y, z) - (nrho(y, x, z) - nrho(z, x, y))));
    return worst;
}

}  // namespace

TEST(Christoffel, FlatIsZero) {
    const TensorValue gamma = christoffel(flat_chart(3), pt({0.3, -1.0, 2.0}));
    EXPECT_EQ(gamma.max_abs(), 0.0);
}

TEST(Christoffel, RoundTwoSphere) {
    const TensorValue gamma = christoffel(sphere2_chart(), pt({M_PI / 3, 0.4}));
    EXPECT_NEAR(gamma(0, 1, 1), -std::sqrt(3.0) / 4, 1e-10);
    EXPECT_NEAR(gamma(1, 0, 1), 1 / std::sqrt(3.0), 1e-10);
    EXPECT_EQ(gamma(1, 0, 1), gamma(1, 1, 0));
    EXPECT_NEAR(gamma(0, 0, 0), 0.0, 1e-12);
}

TEST(Christoffel, ConformalPowerChart) {
    // g = x1^2 * identity: Gamma^1_22 = -1/x1, Gamma^2_12 = 1/x1.
    const TensorValue gamma = christoffel(conformal_power_chart(4, 1.0), pt({2.0, 0.1, 0.2, 0.3}));
    EXPECT_NEAR(gamma(0, 1, 1), -0.5, 1e-10);
    EXPECT_NEAR(gamma(1, 0, 1), 0.5, 1e-10);
    EXPECT_NEAR(gamma(0, 0, 0), 0.5, 1e-10);
}

TEST(Christoffel, StencilOutsideDomainThrows) {
    EXPECT_THROW(christoffel(sphere2_chart(), pt({1e-4, 0.0})), DomainError);
    EXPECT_THROW(christoffel(sphere2_chart(), pt({-1.0, 0.0})), DomainError);
}

TEST(ChartMetric, SingularMetricCarriesPoint) {
    const ChartMetric bad(coord_names(3), Box::unbounded(3), [](const Point& p) {
        Matrix g = Matrix::Identity(3, 3);
        g(2, 2) = p[0];
        return g;
    });
    try {
        bad.metric(pt({-0.5, 1.0, 2.0}));
        FAIL() << "expected SingularMetric";
    } catch (const SingularMetric& e) {
        ASSERT_EQ(e.point().size(), 3u);
        EXPECT_EQ(e.point()[0], -0.5);
        EXPECT_LT(e.min_eigenvalue(), 0.0);
    }
    EXPECT_THROW(christoffel(bad, pt({0.0005, 0.0, 0.0})), SingularMetric);
}

TEST(ChartMetric, ConstructionChecks) {
    EXPECT_THROW(ChartMetric({"x"}, Box::unbounded(1), [](const Point&) { return Matrix::Identity(1, 1); }),
                 RankMismatch);
    EXPECT_THROW(ChartMetric(coord_names(3), Box::unbounded(2), [](const Point&) { return Matrix::Identity(3, 3); }),
                 RankMismatch);
}

TEST(Curvature, FlatIsZero) {
    const CurvatureBundle c = curvature_bundle(flat_chart(4), pt({0.1, 0.2, 0.3, 0.4}));
    EXPECT_EQ(c.riemann.max_abs(), 0.0);
    EXPECT_EQ(c.ricci.max_abs(), 0.0);
    EXPECT_EQ(c.scalar, 0.0);
}

TEST(Curvature, RoundTwoSphereScalarIsTwo) {
    const CurvatureBundle c = curvature_bundle(sphere2_chart(), pt({1.1, 0.3}));
    EXPECT_NEAR(c.scalar, 2.0, 1e-8);
    EXPECT_GT(c.riemann(0, 1, 0, 1), 0.0);
}

TEST(Curvature, ThreeSphereSpaceFormIdentities) {
    const ChartMetric chart = space_form_chart(3, 1.0);
    const Point p = pt({0.1, 0.0, 0.0});
    const CurvatureBundle c = curvature_bundle(chart, p);
    EXPECT_NEAR(c.scalar, 6.0, 1e-7);
    const TensorValue g = TensorValue::sym2(chart.metric(p));
    EXPECT_LT((c.ricci - g * 2.0).max_abs(), 1e-7);
    EXPECT_LT((c.riemann - kulkarni_nomizu(g, g) * 0.5).max_abs(), 1e-7);
    EXPECT_LT(c.riemann.riemann_symmetry_defect(), 1e-12);
}

TEST(Curvature, PowerWarpScalar) {
    const CurvatureBundle c = curvature_bundle(power_warp_chart(4), pt({1.0, 0.2, -0.1, 0.3}));
    EXPECT_NEAR(c.scalar, 2.0 / 3.0, 1e-7);
    EXPECT_NEAR(c.ricci(0, 0), 2.0 / 3.0, 1e-7);
}

TEST(Curvature, HyperbolicSpaceFormNegativeSectional) {
    const ChartMetric chart = space_form_chart(4, -1.0);
    const Point p = pt({0.2, -0.1, 0.05, 0.1});
    const CurvatureBundle c = curvature_bundle(chart, p);
    const TensorValue g = TensorValue::sym2(chart.metric(p));
    EXPECT_LT((c.riemann + kulkarni_nomizu(g, g) * 0.5).max_abs(), 1e-8);
    EXPECT_NEAR(c.scalar, -12.0, 1e-7);
}

TEST(Curvature, FirstBianchiOnLumpyChart) {
    const CurvatureBundle c = curvature_bundle(lumpy_chart(), pt({0.3, -0.4, 0.7}));
    EXPECT_GT(c.riemann.max_abs(), 1e-3);
    EXPECT_LT(first_bianchi_defect(c.riemann), 1e-8);
}

TEST(Curvature, ConvergenceFactorOnSphereWithoutRichardson) {
    const ChartMetric chart = sphere2_chart();
    const Point p = pt({1.0, 0.5});
    auto err = [&](double step) {
        FDConfig cfg;
        cfg.rel_step = step;
        cfg.richardson = false;
        return std::abs(curvature_bundle(chart, p, cfg).scalar - 2.0);
    };
    EXPECT_GE(err(0.05) / err(0.025), 4.0);
}

TEST(ScalarCalculus, LinearFunctionOnFlatSpace) {
    const ScalarFieldFn s{Box::unbounded(3), [](const Point& p) { return p[0]; }};
    const ScalarCalculus sc = scalar_calculus(flat_chart(3), s, pt({0.5, 1.0, -2.0}));
    EXPECT_NEAR(sc.grad(0), 1.0, 1e-12);
    EXPECT_NEAR(sc.grad(1), 0.0, 1e-12);
    EXPECT_LT(sc.hess.max_abs(), 1e-9);
    EXPECT_NEAR(sc.laplacian, 0.0, 1e-9);
    EXPECT_NEAR(sc.grad_norm_sq, 1.0, 1e-12);
}

TEST(ScalarCalculus, QuadraticOnFlatSpace) {
    const ScalarFieldFn s{Box::unbounded(3), [](const Point& p) { return 0.5 * p[0] * p[0]; }};
    const ScalarCalculus sc = scalar_calculus(flat_chart(3), s, pt({0.7, 0.0, 3.0}));
    EXPECT_NEAR(sc.hess(0, 0), 1.0, 1e-9);
    EXPECT_NEAR(sc.hess(1, 1), 0.0, 1e-9);
    EXPECT_NEAR(sc.hess(0, 2), 0.0, 1e-9);
    EXPECT_NEAR(sc.laplacian, 1.0, 1e-9);
}

TEST(ScalarCalculus, LogDensityOnPowerWarp) {
    std::vector<Interval> sides(4);
    sides[0] = Interval{0.0, 1e3};
    const ScalarFieldFn f{Box(sides), [](const Point& p) { return -std::log(p[0]); }};
    const ScalarCalculus sc = scalar_calculus(power_warp_chart(4), f, pt({2.0, 0.0, 0.0, 0.0}));
    EXPECT_NEAR(sc.df(0), -0.5, 1e-10);
    EXPECT_NEAR(sc.hess(0, 0), 0.25, 1e-9);
    // fiber Hessian coefficient phi' f' / phi in the orthonormal frame
    const double phi2 = std::pow(2.0, 2.0 / 3.0);
    EXPECT_NEAR(sc.hess(1, 1) / phi2, (1.0 / 3.0) / 2.0 * (-0.5), 1e-9);
}

TEST(CovariantDerivative, MetricIsParallel) {
    const ChartMetric chart = lumpy_chart();
    const TensorField g = [&](const Point& q) { return TensorValue::sym2(chart.metric(q)); };
    EXPECT_LT(covariant_derivative(chart, g, pt({0.2, 0.1, -0.3})).max_abs(), 1e-9);
    const ChartMetric s3 = space_form_chart(3, 1.0);
    const TensorField g3 = [&](const Point& q) { return TensorValue::sym2(s3.metric(q)); };
    EXPECT_LT(covariant_derivative(s3, g3, pt({0.1, 0.2, 0.0})).max_abs(), 1e-9);
}

TEST(CovariantDerivative, DifferentialOfQuadraticOnFlat) {
    const ChartMetric chart = flat_chart(3);
    const TensorField df = [](const Point& q) { return TensorValue::vector(Eigen::Vector3d(2 * q[0], 0, 0)); };
    const TensorValue n = covariant_derivative(chart, df, pt({0.4, 0.0, 0.0}));
    EXPECT_NEAR(n(0, 0), 2.0, 1e-9);
    EXPECT_NEAR(n(1, 1), 0.0, 1e-12);
}

TEST(CovariantDerivative, LinearInField) {
    const ChartMetric chart = lumpy_chart();
    const Point p = pt({0.3, 0.2, 0.1});
    const TensorField a = [](const Point& q) { return TensorValue::vector(Eigen::Vector3d(q[1], q[0] * q[2], 1.0)); };
    const TensorField b = [](const Point& q) { return TensorValue::vector(Eigen::Vector3d(std::sin(q[0]), 0.0, q[1])); };
    const TensorField ab = [&](const Point& q) { return a(q) * 3.0 + b(q); };
    const TensorValue lhs = covariant_derivative(chart, ab, p);
    const TensorValue rhs = covariant_derivative(chart, a, p) * 3.0 + covariant_derivative(chart, b, p);
    EXPECT_LT((lhs - rhs).max_abs(), 1e-12);
}

TEST(Divergence, MetricAndFlatCurvatureVanish) {
    const ChartMetric chart = lumpy_chart();
    const TensorField g = [&](const Point& q) { return TensorValue::sym2(chart.metric(q)); };
    EXPECT_LT(divergence(chart, g, pt({0.1, 0.2, 0.3})).max_abs(), 1e-9);
    const ChartMetric flat = flat_chart(3);
    const TensorField r = [&](const Point& q) { return curvature_bundle(flat, q).riemann; };
    EXPECT_EQ(divergence(flat, r, pt({0.0, 0.0, 0.0})).max_abs(), 0.0);
}

TEST(Divergence, FrameOrderIndependent) {
    const ChartMetric chart = lumpy_chart();
    const Point p = pt({0.3, -0.2, 0.4});
    const TensorField ric = [&](const Point& q) { return curvature_bundle(chart, q).ricci; };
    const std::array<int, 3> order{2, 0, 1};
    const TensorValue a = divergence(chart, ric, p);
    const TensorValue b = divergence(chart, ric, p, FDConfig{}, order);
    EXPECT_LT((a - b).max_abs(), 1e-8);
}

TEST(Divergence, ContractedBianchiForRicci) {
    // delta rho = d tau / 2
    const ChartMetric chart = lumpy_chart();
    const Point p = pt({0.3, -0.2, 0.4});
    const FDConfig cfg;
    const TensorValue div = divergence(chart, [&](const Point& q) { return curvature_bundle(chart, q, cfg).ricci; }, p);
    const TensorValue dtau = covariant_derivative(
        chart, [&](const Point& q) { return TensorValue::scalar(curvature_bundle(chart, q, cfg).scalar); }, p);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(div(i), 0.5 * dtau(i), 1e-7);
}

TEST(Divergence, RiemannIdentityOnSeveralCharts) {
    EXPECT_LT(divergence_identity_defect(lumpy_chart(), pt({0.3, -0.2, 0.4})), 1e-6);
    EXPECT_LT(divergence_identity_defect(power_warp_chart(4), pt({1.0, 0.1, 0.2, 0.3})), 1e-6);
    EXPECT_LT(divergence_identity_defect(conformal_power_chart(4, 1.0), pt({1.0, 0.1, 0.2, 0.3})), 1e-6);
}

TEST(FDConfig, RejectsNonPositiveStep) {
    FDConfig cfg;
    cfg.rel_step = 0.0;
    EXPECT_THROW(christoffel(flat_chart(3), pt({0, 0, 0}), cfg), DomainError);
}
