#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "smms/tensor_core.hpp"
#include "smms/weighted.hpp"

namespace smms {

/// Function of one variable with optional exact first and second derivatives.
/// Missing derivatives fall back to a 7-point central difference.
struct RealFunction {
    std::function<double(double)> value;
    std::function<double(double)> d1;
    std::function<double(double)> d2;

    static constexpr double kFallbackRelStep = 2e-3;

    double operator()(double t) const { return value(t); }
    /// k in {0, 1, 2}.
    double derivative(int k, double t) const;
};

struct FiberSpec {
    enum class Kind { SpaceForm, Flat, ProductOfSurfaces };

    int dim = 2;
    double beta = 0.0;  // rho^N = beta g^N
    Kind kind = Kind::Flat;
    double curvature = 0.0;  // sectional (SpaceForm) or Gauss (ProductOfSurfaces)

    static FiberSpec space_form(int dim, double sectional);
    static FiberSpec flat(int dim);
    static FiberSpec product_of_surfaces(double gauss);

    /// Throws UnrealizableFiber when beta disagrees with the realization.
    void validate() const;
    Box domain() const;
    Matrix metric(const Eigen::VectorXd& y) const;
};

struct WarpedSMMS {
    int n = 3;
    Interval interval;
    RealFunction phi;
    RealFunction f;
    FiberSpec fiber;
    double m = 1.0;
    double mu = 0.0;
    std::optional<double> lambda_target;

    /// Throws InvalidSMMS / UnrealizableFiber on structural problems.
    void validate() const;
};

/// Chart (t, x1, ..., x_{n-1}) with g = dt^2 + phi(t)^2 g^N and f(t).
SMMSChart warped_chart(const WarpedSMMS& w);

/// Closed-form pieces at t; fiber coefficients are orthonormal-frame values.
struct WarpedCurvature {
    double phi = 0.0, dphi = 0.0, ddphi = 0.0;
    double f = 0.0, df = 0.0, ddf = 0.0;
    double ricci_tt = 0.0;
    double ricci_fiber_coeff = 0.0;
    double hess_tt = 0.0;
    double hess_fiber_coeff = 0.0;
    double J_closed = 0.0;
    double tau = 0.0;
    double P_tt = 0.0;     // weighted Schouten, frame components
    double P_fiber = 0.0;
    double Y = 0.0;
};

/// Throws DomainError outside the interval and NonPositiveWarp when phi(t) <= 0.
WarpedCurvature warped_curvature_closed(const WarpedSMMS& w, double t);

struct OdeResiduals {
    double r1 = 0.0;  // beta - phi'' phi - (n-2) phi'^2 - 2(n-1) lambda phi^2
    double r2 = 0.0;  // f'' - (n-1) phi''/phi - f'^2/m - phi' f'/phi - 2(n-1) lambda
    double r3 = 0.0;  // phi' f'/phi + (n-m) lambda - J

    double max_abs() const;
};

OdeResiduals ode_residuals(const WarpedSMMS& w, double lambda, double t);
/// sup over ts of OdeResiduals::max_abs.
double ode_residual_sup(const WarpedSMMS& w, double lambda, const std::vector<double>& ts);

struct BranchDefects {
    double einstein_defect = 0.0;   // sup|phi'' + 2 lambda phi| / sup|phi|
    double branch2_defect = 0.0;    // sup|phi f' + (n-1) phi'| / max(sup|phi f'|, (n-1) sup|phi'|)
    double fprime_sq_defect = 0.0;  // sup|f'^2 - 2m(f'' - (n-1) lambda)| / sup f'^2
};

/// Needs at least 3 samples (InsufficientSamples).
BranchDefects branch_probe(const WarpedSMMS& w, double lambda, const std::vector<double>& ts);

/// Mean over ts of tr(P)/n from the closed forms, with the sup of |P - lambda g|.
struct LambdaFit {
    double lambda = 0.0;
    double einstein_residual = 0.0;
};
LambdaFit fit_lambda(const WarpedSMMS& w, const std::vector<double>& ts);

}  // namespace smms
