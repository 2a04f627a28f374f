#include "smms/warped_closed.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "smms/errors.hpp"

namespace smms {

double RealFunction::derivative(int k, double t) const {
    if (k == 0) return value(t);
    if (k == 1 && d1) return d1(t);
    if (k == 2 && d2) return d2(t);
    if (k != 1 && k != 2) throw RankMismatch(fmt::format("derivative order {} not supported", k));
    const double h = kFallbackRelStep * std::max(1.0, std::abs(t));
    const double fm3 = value(t - 3 * h), fm2 = value(t - 2 * h), fm1 = value(t - h);
    const double fp1 = value(t + h), fp2 = value(t + 2 * h), fp3 = value(t + 3 * h);
    if (k == 1) return (45 * (fp1 - fm1) - 9 * (fp2 - fm2) + (fp3 - fm3)) / (60 * h);
    const double f0 = value(t);
    return (270 * ((fp1 - f0) + (fm1 - f0)) - 27 * ((fp2 - f0) + (fm2 - f0)) + 2 * ((fp3 - f0) + (fm3 - f0))) /
           (180 * h * h);
}

FiberSpec FiberSpec::space_form(int dim, double sectional) {
    return FiberSpec{dim, (dim - 1) * sectional, Kind::SpaceForm, sectional};
}

FiberSpec FiberSpec::flat(int dim) { return FiberSpec{dim, 0.0, Kind::Flat, 0.0}; }

FiberSpec FiberSpec::product_of_surfaces(double gauss) {
    return FiberSpec{4, gauss, Kind::ProductOfSurfaces, gauss};
}

void FiberSpec::validate() const {
    if (dim < 2) throw UnrealizableFiber(fmt::format("fiber dimension must be at least 2 (got {})", dim));
    const double tol = 1e-12 * (1.0 + std::abs(beta));
    switch (kind) {
        case Kind::SpaceForm:
            if (std::abs(beta - (dim - 1) * curvature) > tol)
                throw UnrealizableFiber(fmt::format(
                    "space-form fiber of sectional curvature {} has beta = {}, not {}", curvature,
                    (dim - 1) * curvature, beta));
            break;
        case Kind::Flat:
            if (beta != 0.0) throw UnrealizableFiber(fmt::format("flat fiber needs beta = 0 (got {})", beta));
            break;
        case Kind::ProductOfSurfaces:
            if (dim != 4) throw UnrealizableFiber("product-of-surfaces fiber must have dimension 4");
            if (std::abs(beta - curvature) > tol)
                throw UnrealizableFiber(fmt::format("product of surfaces of Gauss curvature {} has beta = {}, not {}",
                                                    curvature, curvature, beta));
            break;
    }
}

Box FiberSpec::domain() const {
    double c = 0.0;
    int block = dim;
    if (kind == Kind::SpaceForm) c = curvature;
    if (kind == Kind::ProductOfSurfaces) {
        c = curvature;
        block = 2;
    }
    if (c < 0) {
        const double r = 0.9 * std::sqrt(-4.0 / c) / std::sqrt(static_cast<double>(block));
        return Box(std::vector<Interval>(static_cast<std::size_t>(dim), Interval{-r, r}));
    }
    return Box::unbounded(dim);
}

Matrix FiberSpec::metric(const Eigen::VectorXd& y) const {
    Matrix h = Matrix::Identity(dim, dim);
    auto conformal = [](double c, double r2) {
        const double s = 1.0 + 0.25 * c * r2;
        if (!(s > 0.0)) throw DomainError("fiber point outside the space-form chart");
        return 1.0 / (s * s);
    };
    switch (kind) {
        case Kind::Flat: break;
        case Kind::SpaceForm: h *= conformal(curvature, y.squaredNorm()); break;
        case Kind::ProductOfSurfaces: {
            const double a = conformal(curvature, y[0] * y[0] + y[1] * y[1]);
            const double b = conformal(curvature, y[2] * y[2] + y[3] * y[3]);
            h(0, 0) = h(1, 1) = a;
            h(2, 2) = h(3, 3) = b;
            break;
        }
    }
    return h;
}

void WarpedSMMS::validate() const {
    if (n < 3) throw InvalidSMMS(fmt::format("n must be at least 3 (got {})", n));
    if (!(m > 0.0) || !std::isfinite(m)) throw InvalidSMMS(fmt::format("m must be positive (got {})", m));
    if (!(interval.lo < interval.hi)) throw InvalidSMMS("empty interval");
    if (!phi.value || !f.value) throw InvalidSMMS("warp and density functions are required");
    if (fiber.dim != n - 1)
        throw UnrealizableFiber(fmt::format("fiber dimension {} does not match n - 1 = {}", fiber.dim, n - 1));
    fiber.validate();
}

SMMSChart warped_chart(const WarpedSMMS& w) {
    w.validate();
    const int n = w.n;
    std::vector<std::string> names{"t"};
    for (int i = 1; i < n; ++i) names.push_back(fmt::format("x{}", i));
    const Box box = Box({w.interval}).product(w.fiber.domain());
    const RealFunction phi = w.phi;
    const FiberSpec fiber = w.fiber;
    ChartMetric chart(std::move(names), box, [phi, fiber, n](const Point& q) -> Matrix {
        const double p = phi(q[0]);
        Matrix g = Matrix::Zero(n, n);
        g(0, 0) = 1.0;
        g.bottomRightCorner(n - 1, n - 1) = p * p * fiber.metric(q.tail(n - 1));
        return g;
    });
    const RealFunction f = w.f;
    return SMMSChart::make(std::move(chart), ScalarFieldFn{box, [f](const Point& q) { return f(q[0]); }}, w.m, w.mu);
}

WarpedCurvature warped_curvature_closed(const WarpedSMMS& w, double t) {
    if (!w.interval.contains(t))
        throw DomainError(fmt::format("t = {} outside ({}, {})", t, w.interval.lo, w.interval.hi));
    const double n = w.n, m = w.m, beta = w.fiber.beta;
    WarpedCurvature c;
    c.phi = w.phi.derivative(0, t);
    if (!(c.phi > 0.0)) throw NonPositiveWarp(fmt::format("warp is {} at t = {}", c.phi, t));
    c.dphi = w.phi.derivative(1, t);
    c.ddphi = w.phi.derivative(2, t);
    c.f = w.f.derivative(0, t);
    c.df = w.f.derivative(1, t);
    c.ddf = w.f.derivative(2, t);
    const double phi = c.phi, dphi = c.dphi, ddphi = c.ddphi, df = c.df, ddf = c.ddf;

    c.ricci_tt = -(n - 1) * ddphi / phi;
    c.ricci_fiber_coeff = beta / (phi * phi) - ddphi / phi - (n - 2) * dphi * dphi / (phi * phi);
    c.hess_tt = ddf;
    c.hess_fiber_coeff = dphi * df / phi;
    double two_j = (n - 1) * (beta - (n - 2) * dphi * dphi) / (phi * phi) + 2 * (n - 1) * (dphi * df - ddphi) / phi +
                   2 * ddf - (1 + m) / m * df * df;
    if (m != 1.0) two_j += m * (m - 1) * std::exp(2 * c.f / m) * w.mu;
    c.J_closed = two_j / (2 * (n + m - 1));
    c.tau = c.ricci_tt + (n - 1) * c.ricci_fiber_coeff;
    c.P_tt = (c.ricci_tt + ddf - df * df / m - c.J_closed) / (n + m - 2);
    c.P_fiber = (c.ricci_fiber_coeff + c.hess_fiber_coeff - c.J_closed) / (n + m - 2);
    c.Y = c.J_closed - (c.P_tt + (n - 1) * c.P_fiber);
    return c;
}

double OdeResiduals::max_abs() const { return std::max({std::abs(r1), std::abs(r2), std::abs(r3)}); }

OdeResiduals ode_residuals(const WarpedSMMS& w, double lambda, double t) {
    const WarpedCurvature c = warped_curvature_closed(w, t);
    const double n = w.n, m = w.m;
    OdeResiduals r;
    r.r1 = w.fiber.beta - c.ddphi * c.phi - (n - 2) * c.dphi * c.dphi - 2 * (n - 1) * lambda * c.phi * c.phi;
    r.r2 = c.ddf - (n - 1) * c.ddphi / c.phi - c.df * c.df / m - c.dphi * c.df / c.phi - 2 * (n - 1) * lambda;
    r.r3 = c.dphi * c.df / c.phi + (n - m) * lambda - c.J_closed;
    return r;
}

double ode_residual_sup(const WarpedSMMS& w, double lambda, const std::vector<double>& ts) {
    double sup = 0.0;
    for (double t : ts) sup = std::max(sup, ode_residuals(w, lambda, t).max_abs());
    return sup;
}

BranchDefects branch_probe(const WarpedSMMS& w, double lambda, const std::vector<double>& ts) {
    if (ts.size() < 3) throw InsufficientSamples(fmt::format("branch probe needs at least 3 samples (got {})", ts.size()));
    const double n = w.n, m = w.m;
    double e_num = 0, e_den = 0, b_num = 0, b_phif = 0, b_dphi = 0, q_num = 0, q_den = 0;
    for (double t : ts) {
        const WarpedCurvature c = warped_curvature_closed(w, t);
        e_num = std::max(e_num, std::abs(c.ddphi + 2 * lambda * c.phi));
        e_den = std::max(e_den, std::abs(c.phi));
        b_num = std::max(b_num, std::abs(c.phi * c.df + (n - 1) * c.dphi));
        b_phif = std::max(b_phif, std::abs(c.phi * c.df));
        b_dphi = std::max(b_dphi, (n - 1) * std::abs(c.dphi));
        q_num = std::max(q_num, std::abs(c.df * c.df - 2 * m * (c.ddf - (n - 1) * lambda)));
        q_den = std::max(q_den, c.df * c.df);
    }
    auto ratio = [](double num, double den) { return den > 0 ? num / den : num; };
    return {ratio(e_num, e_den), ratio(b_num, std::max(b_phif, b_dphi)), ratio(q_num, q_den)};
}

LambdaFit fit_lambda(const WarpedSMMS& w, const std::vector<double>& ts) {
    if (ts.empty()) throw InsufficientSamples("lambda fit needs samples");
    const double n = w.n;
    std::vector<WarpedCurvature> cs;
    double sum = 0.0;
    for (double t : ts) {
        cs.push_back(warped_curvature_closed(w, t));
        sum += (cs.back().P_tt + (n - 1) * cs.back().P_fiber) / n;
    }
    LambdaFit fit;
    fit.lambda = sum / static_cast<double>(ts.size());
    for (const auto& c : cs)
        fit.einstein_residual =
            std::max({fit.einstein_residual, std::abs(c.P_tt - fit.lambda), std::abs(c.P_fiber - fit.lambda)});
    return fit;
}

}  // namespace smms
