#pragma once

#include <optional>
#include <string>
#include <vector>

#include "smms/tensor_core.hpp"

namespace smms {

/// Chart, density f and parameters (m, mu). mu is never read when m == 1.
class SMMSChart {
public:
    /// Validates m > 0, n >= 3, n + m - 2 > 0 and that f is finite and
    /// non-constant on a handful of interior probe points.
    static SMMSChart make(ChartMetric chart, ScalarFieldFn f, double m, double mu);
    /// Skips validation; for plumbing checks such as constant densities.
    static SMMSChart unchecked(ChartMetric chart, ScalarFieldFn f, double m, double mu);

    const ChartMetric& chart() const noexcept { return chart_; }
    const ScalarFieldFn& f() const noexcept { return f_; }
    double m() const noexcept { return m_; }
    double mu() const noexcept { return mu_; }
    int dim() const noexcept { return chart_.dim(); }

private:
    SMMSChart(ChartMetric chart, ScalarFieldFn f, double m, double mu)
        : chart_(std::move(chart)), f_(std::move(f)), m_(m), mu_(mu) {}

    ChartMetric chart_;
    ScalarFieldFn f_;
    double m_;
    double mu_;
};

struct WeightedScalars {
    double tau_fm = 0.0;
    double J_fm = 0.0;
    double Y_fm = 0.0;
    std::optional<double> alpha;  // (n+m-2) lambda + J when a lambda is attached
};

/// Everything the weighted tensors need at one point.
struct WeightedPoint {
    Matrix g;
    Matrix ginv;
    TensorValue gamma;
    CurvatureBundle curvature;
    ScalarCalculus f;
    TensorValue rho_fm;  // Sym2
    WeightedScalars scalars;
    TensorValue P;  // Sym2
    TensorValue W;  // RiemannLike
};

WeightedPoint evaluate_weighted(const SMMSChart& s, const Point& p, const FDConfig& cfg = {});

/// rho + Hess f - (1/m) df (x) df
TensorValue bakry_emery_ricci(const SMMSChart& s, const Point& p, const FDConfig& cfg = {});
/// tau + 2 Lap f - (m+1)/m |grad f|^2 + m(m-1) mu e^{2f/m}
double weighted_scalar_curvature(const SMMSChart& s, const Point& p, const FDConfig& cfg = {});

struct SchoutenResult {
    TensorValue P;
    WeightedScalars scalars;
};
SchoutenResult weighted_schouten(const SMMSChart& s, const Point& p, const FDConfig& cfg = {});

/// R - P (kn) g
TensorValue weighted_weyl(const SMMSChart& s, const Point& p, const FDConfig& cfg = {});

/// dP(X,Y,Z) = (nabla_X P)(Y,Z) - (nabla_Y P)(X,Z)
TensorValue weighted_cotton(const SMMSChart& s, const Point& p, const FDConfig& cfg = {});

/// delta T - iota_{grad f} T for a covariant field of rank 2..4.
TensorValue weighted_divergence(const SMMSChart& s, const TensorField& field, const Point& p,
                                const FDConfig& cfg = {});

/// Third-order quantities sharing one stencil.
struct WeightedDerivatives {
    TensorValue delta_W;        // delta W_f^m
    TensorValue iota_grad_f_W;  // iota_{grad f} W_f^m
    TensorValue delta_f_W;      // delta_W - iota_grad_f_W
    TensorValue cotton;         // dP_f^m
};
WeightedDerivatives weighted_derivatives(const SMMSChart& s, const Point& p, const FDConfig& cfg = {});

/// Right side of the identity for delta_f W on a weighted Einstein space:
/// (Y/m + lambda)(df(Y) g(X,Z) - df(Z) g(X,Y)) - (1/m)(df(Y) H(X,Z) - df(Z) H(X,Y)).
TensorValue einstein_divergence_rhs(const WeightedPoint& w, double m, double lambda);

enum class Branch { Einstein, NonEinsteinExample12, Indeterminate };
std::string to_string(Branch b);

struct ConditionOptions {
    std::optional<double> lambda;  // overrides the fit
    double tol = 1e-6;
    bool derivatives = true;  // harmonic and Cotton residuals (third derivatives)
};

struct SampleDiagnostics {
    Point point;
    double trace_p_over_n = 0.0;
    double J = 0.0;
    double Y = 0.0;
    double f = 0.0;
    double kappa = 0.0;
    double alpha = 0.0;
    double einstein = 0.0;
    double harmonic = 0.0;
    double cotton = 0.0;
    double ricci_einstein = 0.0;
    std::optional<double> main_expression;
};

struct ConditionReport {
    double lambda_fit = 0.0;
    double einstein_residual = 0.0;
    double harmonic_residual = 0.0;
    double cotton_residual = 0.0;
    double kappa = 0.0;
    double kappa_spread = 0.0;
    double alpha = 0.0;
    double alpha_spread = 0.0;
    /// sup |rho - (tau/n) g| in the orthonormal frame.
    double ricci_einstein_residual = 0.0;
    /// Mismatch between delta_f W and einstein_divergence_rhs, present when
    /// einstein_residual <= tol.
    std::optional<double> main_expression_residual;
    Branch branch = Branch::Indeterminate;
    std::vector<Point> sample_points;
    std::vector<SampleDiagnostics> per_sample;
};

/// Residual report over the samples (at least 3). Residual norms are
/// sup over samples of the max-abs component in the g-orthonormal frame.
ConditionReport condition_report(const SMMSChart& s, const std::vector<Point>& samples, const FDConfig& cfg = {},
                                 const ConditionOptions& opts = {});

/// Chart of M x F with metric g (+) v^2 h(mu), v = e^{-f/m}, F the
/// conformal space-form chart h_ij = delta_ij / (1 + (mu/4)|y|^2)^2
/// (flat line when m_int = 1). Throws NonIntegerM unless s.m() == m_int >= 1.
ChartMetric formal_warped_product(const SMMSChart& s, int m_int);

/// (x, 0, ..., 0) in the product chart.
Point fiber_origin(const Point& x, int m_int);

}  // namespace smms
