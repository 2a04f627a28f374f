#include "smms/weighted.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "smms/errors.hpp"

namespace smms {

namespace {

// A few interior coordinates per side, used to probe the density.
std::array<double, 3> probe_coords(const Interval& s) {
    const bool lo_fin = std::isfinite(s.lo), hi_fin = std::isfinite(s.hi);
    if (lo_fin && hi_fin) {
        const double w = s.hi - s.lo;
        return {s.lo + 0.3 * w, s.lo + 0.5 * w, s.lo + 0.7 * w};
    }
    if (lo_fin) return {s.lo + 0.5, s.lo + 1.0, s.lo + 2.0};
    if (hi_fin) return {s.hi - 2.0, s.hi - 1.0, s.hi - 0.5};
    return {-0.5, 0.1, 0.6};
}

std::vector<Point> probe_points(const Box& box) {
    const int n = box.dim();
    std::vector<Point> pts;
    for (int k = 0; k < 3; ++k) {
        Point p(n);
        for (int i = 0; i < n; ++i) p[i] = probe_coords(box.side(i))[(k + i) % 3];
        pts.push_back(p);
    }
    for (int i = 0; i < n; ++i) {
        Point p(n);
        for (int j = 0; j < n; ++j) p[j] = probe_coords(box.side(j))[1];
        p[i] = probe_coords(box.side(i))[0];
        pts.push_back(p);
    }
    return pts;
}

}  // namespace

SMMSChart SMMSChart::make(ChartMetric chart, ScalarFieldFn f, double m, double mu) {
    const int n = chart.dim();
    if (!(m > 0.0) || !std::isfinite(m)) throw InvalidSMMS(fmt::format("m must be positive (got {})", m));
    if (n < 3) throw InvalidSMMS(fmt::format("dimension must be at least 3 (got {})", n));
    if (!(n + m - 2 > 0) || !(n + m - 1 > 0)) throw InvalidSMMS("n + m - 2 must be positive");
    if (!std::isfinite(mu)) throw InvalidSMMS("mu must be finite");
    if (!f.eval) throw InvalidSMMS("density function is empty");
    if (f.domain.dim() != n) throw InvalidSMMS("density domain dimension differs from the chart");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const Point& p : probe_points(chart.domain())) {
        if (!f.domain.contains(p)) continue;
        const double v = f.eval(p);
        if (!std::isfinite(v)) throw InvalidSMMS("density is not finite on the chart domain");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi - lo > 1e-14 * (1.0 + std::abs(hi)))) throw InvalidSMMS("density must be non-constant");
    return SMMSChart(std::move(chart), std::move(f), m, mu);
}

SMMSChart SMMSChart::unchecked(ChartMetric chart, ScalarFieldFn f, double m, double mu) {
    return SMMSChart(std::move(chart), std::move(f), m, mu);
}

WeightedPoint evaluate_weighted(const SMMSChart& s, const Point& p, const FDConfig& cfg) {
    const int n = s.dim();
    const double m = s.m();
    const MetricJet jet = metric_jet(s.chart(), p, cfg, true);

    WeightedPoint w;
    w.g = jet.g;
    w.ginv = jet.ginv;
    w.gamma = christoffel(jet);
    w.curvature = curvature_bundle(jet);
    w.f = scalar_calculus(jet, w.gamma, s.f(), p, cfg);

    const TensorValue g = TensorValue::sym2(jet.g);
    TensorValue dfdf = TensorValue::sym2(outer(w.f.df, w.f.df).to_matrix());
    w.rho_fm = w.curvature.ricci + w.f.hess - dfdf * (1.0 / m);

    double tau = w.curvature.scalar + 2.0 * w.f.laplacian - (m + 1.0) / m * w.f.grad_norm_sq;
    if (m != 1.0) tau += m * (m - 1.0) * s.mu() * std::exp(2.0 * w.f.value / m);
    w.scalars.tau_fm = tau;
    w.scalars.J_fm = tau / (2.0 * (n + m - 1.0));
    w.P = (w.rho_fm - g * w.scalars.J_fm) * (1.0 / (n + m - 2.0));
    w.scalars.Y_fm = w.scalars.J_fm - metric_trace(w.P, 0, 1, jet.ginv)();
    w.W = w.curvature.riemann - kulkarni_nomizu(w.P, g);
    return w;
}

TensorValue bakry_emery_ricci(const SMMSChart& s, const Point& p, const FDConfig& cfg) {
    return evaluate_weighted(s, p, cfg).rho_fm;
}

double weighted_scalar_curvature(const SMMSChart& s, const Point& p, const FDConfig& cfg) {
    return evaluate_weighted(s, p, cfg).scalars.tau_fm;
}

SchoutenResult weighted_schouten(const SMMSChart& s, const Point& p, const FDConfig& cfg) {
    WeightedPoint w = evaluate_weighted(s, p, cfg);
    return {std::move(w.P), w.scalars};
}

TensorValue weighted_weyl(const SMMSChart& s, const Point& p, const FDConfig& cfg) {
    return evaluate_weighted(s, p, cfg).W;
}

namespace {

TensorValue cotton_from(const TensorValue& nabla_p) {
    const int n = nabla_p.dim();
    TensorValue dp(3, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) dp(a, b, c) = nabla_p(a, b, c) - nabla_p(b, a, c);
    return dp;
}

}  // namespace

TensorValue weighted_cotton(const SMMSChart& s, const Point& p, const FDConfig& cfg) {
    const TensorField pf = [&](const Point& q) { return evaluate_weighted(s, q, cfg).P; };
    return cotton_from(covariant_derivative(s.chart(), pf, p, cfg));
}

TensorValue weighted_divergence(const SMMSChart& s, const TensorField& field, const Point& p, const FDConfig& cfg) {
    const TensorValue div = divergence(s.chart(), field, p, cfg);
    const MetricJet jet = metric_jet(s.chart(), p, cfg, false);
    const ScalarCalculus fc = scalar_calculus(jet, christoffel(jet), s.f(), p, cfg);
    return div - interior_product(fc.grad, field(p));
}

WeightedDerivatives weighted_derivatives(const SMMSChart& s, const Point& p, const FDConfig& cfg) {
    auto fields = [&](const Point& q) {
        WeightedPoint w = evaluate_weighted(s, q, cfg);
        return std::vector<TensorValue>{std::move(w.W), std::move(w.P)};
    };
    const auto nab = covariant_derivatives(s.chart(), fields, p, cfg);
    const WeightedPoint w = evaluate_weighted(s, p, cfg);
    WeightedDerivatives out;
    out.delta_W = divergence_from_derivative(nab[0], w.g);
    out.iota_grad_f_W = interior_product(w.f.grad, w.W);
    out.delta_f_W = out.delta_W - out.iota_grad_f_W;
    out.cotton = cotton_from(nab[1]);
    return out;
}

TensorValue einstein_divergence_rhs(const WeightedPoint& w, double m, double lambda) {
    const int n = static_cast<int>(w.g.rows());
    const double c = w.scalars.Y_fm / m + lambda;
    TensorValue out(3, n);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            for (int z = 0; z < n; ++z) {
                const double dy = w.f.df(y), dz = w.f.df(z);
                out(x, y, z) = c * (dy * w.g(x, z) - dz * w.g(x, y)) -
                               (dy * w.f.hess(x, z) - dz * w.f.hess(x, y)) / m;
            }
    return out;
}

std::string to_string(Branch b) {
    switch (b) {
        case Branch::Einstein: return "einstein";
        case Branch::NonEinsteinExample12: return "non-einstein-example-1-2";
        case Branch::Indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

ConditionReport condition_report(const SMMSChart& s, const std::vector<Point>& samples, const FDConfig& cfg,
                                 const ConditionOptions& opts) {
    if (samples.size() < 3)
        throw InsufficientSamples(fmt::format("condition report needs at least 3 samples (got {})", samples.size()));
    const int n = s.dim();
    const double m = s.m();

    std::vector<WeightedPoint> pts;
    pts.reserve(samples.size());
    for (const Point& p : samples) pts.push_back(evaluate_weighted(s, p, cfg));

    ConditionReport rep;
    rep.sample_points = samples;
    double trace_sum = 0.0;
    for (const auto& w : pts) trace_sum += metric_trace(w.P, 0, 1, w.ginv)() / n;
    rep.lambda_fit = opts.lambda.value_or(trace_sum / static_cast<double>(pts.size()));
    const double lambda = rep.lambda_fit;

    for (std::size_t i = 0; i < pts.size(); ++i) {
        const WeightedPoint& w = pts[i];
        SampleDiagnostics d;
        d.point = samples[i];
        d.trace_p_over_n = metric_trace(w.P, 0, 1, w.ginv)() / n;
        d.J = w.scalars.J_fm;
        d.Y = w.scalars.Y_fm;
        d.f = w.f.value;
        d.kappa = ((m + n) * lambda - w.scalars.J_fm) * std::exp(-w.f.value / m) / m;
        d.alpha = (n + m - 2.0) * lambda + w.scalars.J_fm;
        const TensorValue g = TensorValue::sym2(w.g);
        d.einstein = frame_max_abs(w.P - g * lambda, w.g);
        d.ricci_einstein = frame_max_abs(w.curvature.ricci - g * (w.curvature.scalar / n), w.g);
        rep.per_sample.push_back(std::move(d));
    }

    auto sup = [&](auto member) {
        double v = 0.0;
        for (const auto& d : rep.per_sample) v = std::max(v, d.*member);
        return v;
    };
    auto mean_spread = [&](auto member, double& mean, double& spread) {
        mean = 0.0;
        for (const auto& d : rep.per_sample) mean += d.*member;
        mean /= static_cast<double>(rep.per_sample.size());
        spread = 0.0;
        for (const auto& d : rep.per_sample) spread = std::max(spread, std::abs(d.*member - mean));
    };
    rep.einstein_residual = sup(&SampleDiagnostics::einstein);
    rep.ricci_einstein_residual = sup(&SampleDiagnostics::ricci_einstein);
    mean_spread(&SampleDiagnostics::kappa, rep.kappa, rep.kappa_spread);
    mean_spread(&SampleDiagnostics::alpha, rep.alpha, rep.alpha_spread);

    if (opts.derivatives) {
        const bool einstein_ok = rep.einstein_residual <= opts.tol;
        double main_sup = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const WeightedDerivatives wd = weighted_derivatives(s, samples[i], cfg);
            auto& d = rep.per_sample[i];
            d.harmonic = frame_max_abs(wd.delta_f_W, pts[i].g);
            d.cotton = frame_max_abs(wd.cotton, pts[i].g);
            if (einstein_ok) {
                d.main_expression = frame_max_abs(wd.delta_f_W - einstein_divergence_rhs(pts[i], m, lambda), pts[i].g);
                main_sup = std::max(main_sup, *d.main_expression);
            }
        }
        rep.harmonic_residual = sup(&SampleDiagnostics::harmonic);
        rep.cotton_residual = sup(&SampleDiagnostics::cotton);
        if (einstein_ok) rep.main_expression_residual = main_sup;

        if (einstein_ok && rep.harmonic_residual <= opts.tol) {
            if (rep.ricci_einstein_residual <= opts.tol)
                rep.branch = Branch::Einstein;
            else if (m == 0.5 && (s.mu() == 0.0) && std::abs(lambda) <= opts.tol)
                rep.branch = Branch::NonEinsteinExample12;
        }
    }
    return rep;
}

ChartMetric formal_warped_product(const SMMSChart& s, int m_int) {
    if (m_int < 1 || s.m() != static_cast<double>(m_int))
        throw NonIntegerM(fmt::format("formal warped product needs m to be a positive integer equal to the fiber "
                                      "dimension (m = {}, fiber dimension {})",
                                      s.m(), m_int));
    const int n = s.dim();
    const double m = s.m();
    const double mu = m_int == 1 ? 0.0 : s.mu();
    double r = 1.0;
    if (mu < 0) r = 0.9 * std::sqrt(-4.0 / mu) / std::sqrt(static_cast<double>(m_int));
    const Box fiber_box(std::vector<Interval>(static_cast<std::size_t>(m_int), Interval{-r, r}));

    std::vector<std::string> names = s.chart().coord_names();
    for (int i = 1; i <= m_int; ++i) names.push_back(fmt::format("y{}", i));

    const ChartMetric base = s.chart();
    const ScalarFieldFn f = s.f();
    auto metric = [base, f, n, m, m_int, mu](const Point& q) -> Matrix {
        const Point x = q.head(n);
        const Eigen::VectorXd y = q.tail(m_int);
        const double denom = 1.0 + 0.25 * mu * y.squaredNorm();
        if (!(denom > 0.0))
            throw DomainError(fmt::format("fiber point outside the space-form chart (|y|^2 >= {})", -4.0 / mu));
        const double v = std::exp(-f.eval(x) / m);
        Matrix g = Matrix::Zero(n + m_int, n + m_int);
        g.topLeftCorner(n, n) = base.metric(x);
        g.bottomRightCorner(m_int, m_int) = Matrix::Identity(m_int, m_int) * (v * v / (denom * denom));
        return g;
    };
    return ChartMetric(std::move(names), s.chart().domain().product(fiber_box), metric);
}

Point fiber_origin(const Point& x, int m_int) {
    Point q = Point::Zero(x.size() + m_int);
    q.head(x.size()) = x;
    return q;
}

}  // namespace smms
