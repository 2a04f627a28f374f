#include "smms/classify.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

#include "smms/errors.hpp"

namespace smms {

namespace odeint = boost::numeric::odeint;

namespace {

bool all_finite(const OdeState& y) {
    return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

int sign_of(double x) { return (x > 0) - (x < 0); }

}  // namespace

OdeTrajectory integrate_ode(const OdeRhs& rhs, const OdeState& y0, double t0, double t1, const OdeOptions& opts) {
    if (!(t1 > t0)) throw InvalidProblem(fmt::format("empty integration span [{}, {}]", t0, t1));
    if (!all_finite(y0)) throw NonFiniteState("initial state is not finite");

    auto system = [&rhs](const OdeState& y, OdeState& dydt, double t) {
        dydt.resize(y.size());
        rhs(y, dydt, t);
    };
    auto stepper = odeint::make_dense_output(opts.abs_tol, opts.rel_tol, odeint::runge_kutta_dopri5<OdeState>());
    stepper.initialize(y0, t0, std::min(opts.initial_step, t1 - t0));

    OdeTrajectory tr;
    tr.t.push_back(t0);
    tr.y.push_back(y0);
    std::size_t next_out = 0;
    while (next_out < opts.output_times.size() && opts.output_times[next_out] < t0) ++next_out;

    double g_prev = opts.event ? opts.event(t0, y0) : 0.0;
    OdeState tmp(y0.size());
    double t_stop = t1;
    bool done = false;
    while (!done) {
        std::pair<double, double> span;
        try {
            span = stepper.do_step(system);
        } catch (const odeint::step_adjustment_error& e) {
            throw StepSizeUnderflow(fmt::format("step size control failed near t = {}: {}", stepper.current_time(), e.what()));
        }
        const double ta = span.first;
        double tb = span.second;
        if (!all_finite(stepper.current_state()))
            throw NonFiniteState(fmt::format("state became non-finite near t = {}", tb));
        if (tb - ta < opts.min_step && tb < t1)
            throw StepSizeUnderflow(fmt::format("step {} below minimum {} at t = {}", tb - ta, opts.min_step, ta));

        if (opts.event) {
            const double g = opts.event(tb, stepper.current_state());
            if (sign_of(g_prev) != 0 && sign_of(g) == -sign_of(g_prev) && tb > t0) {
                auto g_at = [&](double t) {
                    stepper.calc_state(t, tmp);
                    return opts.event(t, tmp);
                };
                boost::uintmax_t iters = 200;
                const auto root = boost::math::tools::toms748_solve(
                    g_at, ta, tb, g_prev, g,
                    [&](double a, double b) { return std::abs(b - a) <= opts.event_tol * std::max(1.0, std::abs(a)); },
                    iters);
                const double te = 0.5 * (root.first + root.second);
                if (te <= t1) {
                    tr.event_time = te;
                    t_stop = te;
                }
            }
            g_prev = g;
        }
        if (tb >= t_stop) {
            tb = t_stop;
            done = true;
        }
        while (next_out < opts.output_times.size() && opts.output_times[next_out] <= tb) {
            stepper.calc_state(opts.output_times[next_out], tmp);
            tr.output.push_back(tmp);
            ++next_out;
        }
        if (done) {
            stepper.calc_state(tb, tmp);
            tr.t.push_back(tb);
            tr.y.push_back(tmp);
        } else {
            tr.t.push_back(tb);
            tr.y.push_back(stepper.current_state());
        }
    }
    tr.final_time = tr.t.back();
    tr.final_state = tr.y.back();
    return tr;
}

void ObataProblem::validate() const {
    if (!std::isfinite(lambda) || !std::isfinite(kappa) || !std::isfinite(xi))
        throw InvalidProblem("Obata data must be finite");
    if (rhs_value(xi) == 0.0)
        throw InvalidProblem(fmt::format("2 lambda xi - kappa vanishes (lambda = {}, kappa = {}, xi = {})", lambda,
                                         kappa, xi));
}

ObataSolution::ObataSolution(ObataProblem prob, int n, std::vector<double> t, std::vector<double> u,
                             std::vector<double> du, std::optional<double> T, double t_end)
    : prob_(prob), n_(n), t_(std::move(t)), u_(std::move(u)), du_(std::move(du)), T_(T), t_end_(t_end) {}

std::size_t ObataSolution::segment(double t) const {
    if (t < t_.front() || t > t_.back())
        throw DomainError(fmt::format("t = {} outside the integrated range [{}, {}]", t, t_.front(), t_.back()));
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - t_.begin());
    return std::min(k == 0 ? 0 : k - 1, t_.size() - 2);
}

// Quintic Hermite basis on [0, 1]: values, first and second derivatives at both ends.
double ObataSolution::u(double t) const {
    const std::size_t k = segment(t);
    const double h = t_[k + 1] - t_[k], s = (t - t_[k]) / h;
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    const double a0 = -prob_.rhs_value(u_[k]), a1 = -prob_.rhs_value(u_[k + 1]);
    return (1 - 10 * s3 + 15 * s4 - 6 * s5) * u_[k] + h * (s - 6 * s3 + 8 * s4 - 3 * s5) * du_[k] +
           h * h * (0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5) * a0 +
           h * h * (0.5 * s3 - s4 + 0.5 * s5) * a1 + h * (-4 * s3 + 7 * s4 - 3 * s5) * du_[k + 1] +
           (10 * s3 - 15 * s4 + 6 * s5) * u_[k + 1];
}

double ObataSolution::du(double t) const {
    const std::size_t k = segment(t);
    const double h = t_[k + 1] - t_[k], s = (t - t_[k]) / h;
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
    const double a0 = -prob_.rhs_value(u_[k]), a1 = -prob_.rhs_value(u_[k + 1]);
    return ((-30 * s2 + 60 * s3 - 30 * s4) * u_[k] + h * (1 - 18 * s2 + 32 * s3 - 15 * s4) * du_[k] +
            h * h * (s - 4.5 * s2 + 6 * s3 - 2.5 * s4) * a0 + h * h * (1.5 * s2 - 4 * s3 + 2.5 * s4) * a1 +
            h * (-12 * s2 + 28 * s3 - 15 * s4) * du_[k + 1] + (30 * s2 - 60 * s3 + 30 * s4) * u_[k + 1]) /
           h;
}

double ObataSolution::warp(double t) const { return -du(t) / prob_.rhs_value(prob_.xi); }

std::vector<std::array<double, 4>> ObataSolution::table(int rows) const {
    if (rows < 2) throw InsufficientSamples("table needs at least 2 rows");
    std::vector<std::array<double, 4>> out;
    for (int i = 0; i < rows; ++i) {
        const double t = i == rows - 1 ? t_end_ : t_end_ * i / (rows - 1);
        out.push_back({t, u(t), du(t), warp(t)});
    }
    return out;
}

ChartMetric ObataSolution::chart() const {
    const int n = n_;
    std::vector<std::string> names{"t"};
    for (int i = 1; i < n; ++i) names.push_back(fmt::format("x{}", i));
    const FiberSpec fiber = FiberSpec::space_form(n - 1, 1.0);
    const Box box = Box({Interval{0.0, t_end_}}).product(fiber.domain());
    const ObataSolution self = *this;
    return ChartMetric(std::move(names), box, [self, fiber, n](const Point& q) -> Matrix {
        const double w = self.warp(q[0]);
        Matrix g = Matrix::Zero(n, n);
        g(0, 0) = 1.0;
        g.bottomRightCorner(n - 1, n - 1) = w * w * fiber.metric(q.tail(n - 1));
        return g;
    });
}

ObataSolution solve_obata_ivp(const ObataProblem& prob, int n, const ObataOptions& opts) {
    prob.validate();
    if (n < 2) throw InvalidProblem(fmt::format("dimension must be at least 2 (got {})", n));
    OdeOptions o;
    o.abs_tol = o.rel_tol = opts.tol;
    o.initial_step = 1e-4;
    double t1 = opts.t_max;
    if (prob.lambda > 0) {
        // u' returns to zero after half a period; integrate a little past it.
        t1 = 1.1 * M_PI / std::sqrt(2 * prob.lambda);
        o.event = [](double, const OdeState& y) { return y[1]; };
    }
    const OdeRhs rhs = [&prob](const OdeState& y, OdeState& dy, double) {
        dy[0] = y[1];
        dy[1] = -prob.rhs_value(y[0]);
    };
    const OdeTrajectory tr = integrate_ode(rhs, {prob.xi, 0.0}, 0.0, t1, o);
    std::vector<double> u, du;
    for (const auto& y : tr.y) {
        u.push_back(y[0]);
        du.push_back(y[1]);
    }
    return ObataSolution(prob, n, tr.t, std::move(u), std::move(du), tr.event_time, tr.final_time);
}

double obata_residual(const SMMSChart& s, double lambda, double kappa, const std::vector<Point>& samples,
                      const FDConfig& cfg, double precondition_tol) {
    ConditionOptions co;
    co.lambda = lambda;
    co.tol = precondition_tol;
    const ConditionReport rep = condition_report(s, samples, cfg, co);
    if (rep.einstein_residual > precondition_tol || rep.harmonic_residual > precondition_tol)
        throw PreconditionFailed(fmt::format(
            "generalized Obata equation needs a weighted Einstein SMMS with weighted harmonic Weyl tensor "
            "(einstein residual {:.3g}, harmonic residual {:.3g}, tolerance {:.3g})",
            rep.einstein_residual, rep.harmonic_residual, precondition_tol));
    const ScalarFieldFn f = s.f();
    const double m = s.m();
    const ScalarFieldFn v{f.domain, [f, m](const Point& p) { return std::exp(-f(p) / m); }};
    double sup = 0.0;
    for (const Point& p : samples) {
        const ScalarCalculus c = scalar_calculus(s.chart(), v, p, cfg);
        const Matrix g = s.chart().metric(p);
        TensorValue r = c.hess;
        r += TensorValue::sym2(g) * (2 * lambda * c.value - kappa);
        sup = std::max(sup, frame_max_abs(r, g));
    }
    return sup;
}

BranchVerdict classify_branch(const WarpedSMMS& w, const std::vector<double>& ts, double tol) {
    if (ts.size() < 3)
        throw InsufficientSamples(fmt::format("branch classification needs at least 3 samples (got {})", ts.size()));
    BranchVerdict v;
    const LambdaFit fit = fit_lambda(w, ts);
    v.lambda = fit.lambda;
    v.ode_residual = ode_residual_sup(w, v.lambda, ts);
    v.defects = branch_probe(w, v.lambda, ts);
    const double n = w.n;
    for (double t : ts) {
        const WarpedCurvature c = warped_curvature_closed(w, t);
        v.ricci_deviation = std::max({v.ricci_deviation, std::abs(c.ricci_tt - 2 * (n - 1) * v.lambda),
                                      std::abs(c.ricci_fiber_coeff - 2 * (n - 1) * v.lambda)});
    }
    if (v.ode_residual > tol) {
        v.reason = fmt::format("ODE residual {:.3g} above tolerance", v.ode_residual);
        return v;
    }
    if (v.defects.einstein_defect <= tol) {
        v.branch = Branch::Einstein;
        return v;
    }
    if (v.defects.branch2_defect > tol) {
        v.reason = "neither branch equation holds";
        return v;
    }
    // Branch two forces the data of the non-Einstein example.
    std::vector<std::string> broken;
    if (w.m != 0.5) broken.push_back("m=1/2");
    if (w.mu != 0.0) broken.push_back("mu=0");
    if (w.fiber.beta != 0.0) broken.push_back("beta=0");
    if (std::abs(v.lambda) > tol) broken.push_back("lambda=0");
    if (!broken.empty()) {
        v.reason = fmt::format("forced data violated: {}", fmt::join(broken, ", "));
        return v;
    }
    v.lambda = 0.0;  // forced; the fit only agreed to within tol
    // log phi = log A + (log B + log t)/(n-1), -f = log B + log t: linear in (log A, log B).
    double sum_b = 0.0, sum_a = 0.0;
    for (double t : ts) {
        if (!(t > 0)) {
            v.reason = "non-Einstein branch needs t > 0";
            return v;
        }
        sum_b += -w.f(t) - std::log(t);
        sum_a += std::log(w.phi(t)) - std::log(t) / (n - 1);
    }
    const double k = static_cast<double>(ts.size());
    const double log_b = sum_b / k;
    const double log_a = sum_a / k - log_b / (n - 1);
    v.A = std::exp(log_a);
    v.B = std::exp(log_b);
    for (double t : ts) {
        const double phi_fit = *v.A * std::pow(*v.B * t, 1.0 / (n - 1));
        v.fit_residual = std::max({v.fit_residual, std::abs(w.phi(t) - phi_fit) / std::abs(w.phi(t)),
                                   std::abs(w.f(t) + std::log(*v.B * t))});
    }
    v.branch = Branch::NonEinsteinExample12;
    return v;
}

std::vector<double> approach_samples(const WarpedSMMS& w, Endpoint side, int k) {
    const double e = side == Endpoint::Left ? w.interval.lo : w.interval.hi;
    if (!std::isfinite(e)) throw DomainError("cannot approach an infinite endpoint");
    const double other = side == Endpoint::Left ? w.interval.hi : w.interval.lo;
    const double span = std::isfinite(other) ? std::min(1.0, 0.5 * std::abs(other - e)) : 1.0;
    const double dir = side == Endpoint::Left ? 1.0 : -1.0;
    std::vector<double> ts;
    for (int j = 1; j <= k; ++j) ts.push_back(e + dir * span * std::pow(0.5, j));
    return ts;
}

std::optional<double> pole_location(const WarpedSMMS& w, Endpoint side) {
    const double e = side == Endpoint::Left ? w.interval.lo : w.interval.hi;
    if (!std::isfinite(e)) return std::nullopt;
    const double out = side == Endpoint::Left ? -1.0 : 1.0;
    auto positive = [&](double t) { return w.phi(t) > 0.0; };
    const double reach = 4e-3 * std::max(1.0, std::abs(e));
    if (!positive(e)) return e;
    double inside = e, outside = e + out * reach;
    if (positive(outside)) return std::nullopt;
    for (int i = 0; i < 200 && std::abs(outside - inside) > 1e-15 * std::max(1.0, std::abs(e)); ++i) {
        const double mid = 0.5 * (inside + outside);
        (positive(mid) ? inside : outside) = mid;
    }
    return 0.5 * (inside + outside);
}

BlowupResult blowup_probe(const WarpedSMMS& w, Endpoint side, const std::vector<double>& ts, double tol) {
    const double e = side == Endpoint::Left ? w.interval.lo : w.interval.hi;
    if (!std::isfinite(e)) throw DomainError("blowup probe needs a finite endpoint");
    if (ts.size() < 3) throw InsufficientSamples("blowup probe needs at least 3 samples");
    const double boundary = pole_location(w, side).value_or(e);
    BlowupResult r;
    std::vector<double> ds, rhos;
    for (double t : ts) {
        if (!w.interval.contains(t)) throw DomainError(fmt::format("sample t = {} outside the interval", t));
        const double rho = warped_curvature_closed(w, t).ricci_tt;
        ds.push_back(std::abs(t - boundary));
        rhos.push_back(std::abs(rho));
        r.max_abs = std::max(r.max_abs, std::abs(rho));
    }
    if (r.max_abs <= 1e-12) {
        r.coefficient = r.max_abs;
        return r;
    }
    // log|rho| = log c - k log d; zero values are clamped so the fit stays finite.
    const Eigen::Index m = static_cast<Eigen::Index>(ds.size());
    Eigen::MatrixXd X(m, 2);
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = -std::log(ds[static_cast<std::size_t>(i)]);
        y(i) = std::log(std::max(rhos[static_cast<std::size_t>(i)], 1e-300));
    }
    const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
    r.coefficient = std::exp(beta(0));
    r.rate_exponent = beta(1);
    r.diverges = r.rate_exponent >= 1.0 && r.max_abs > 1.0 / tol;
    return r;
}

std::vector<double> critical_points(const WarpedSMMS& w, int scan, double dead_band) {
    const RealFunction v = density_v(w);
    const Interval I = w.interval;
    double a = I.lo, b = I.hi;
    if (!std::isfinite(a) && !std::isfinite(b)) {
        a = -10.0;
        b = 10.0;
    } else if (!std::isfinite(a)) {
        a = b - 20.0;
    } else if (!std::isfinite(b)) {
        b = a + 20.0;
    }
    std::vector<double> ts, dv;
    double scale = 0.0;
    for (int i = 0; i < scan; ++i) {
        const double t = a + (b - a) * (i + 0.5) / scan;
        ts.push_back(t);
        dv.push_back(v.derivative(1, t));
        scale = std::max(scale, std::abs(dv.back()));
    }
    const double band = dead_band * std::max(1.0, scale);
    std::vector<double> out;
    if (auto p = pole_location(w, Endpoint::Left)) {
        const double d = v.derivative(1, *p);
        if (std::isfinite(d) && std::abs(d) <= band) out.push_back(*p);
    }
    int last = 0;
    double last_t = a;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const int sgn = std::abs(dv[i]) <= band ? 0 : sign_of(dv[i]);
        if (sgn == 0) continue;
        if (last != 0 && sgn != last) out.push_back(0.5 * (last_t + ts[i]));
        last = sgn;
        last_t = ts[i];
    }
    if (auto p = pole_location(w, Endpoint::Right)) {
        const double d = v.derivative(1, *p);
        if (std::isfinite(d) && std::abs(d) <= band) out.push_back(*p);
    }
    return out;
}

std::string to_string(GlobalCase c) {
    switch (c) {
        case GlobalCase::Sphere: return "sphere";
        case GlobalCase::Euclidean: return "euclidean";
        case GlobalCase::Hyperbolic: return "hyperbolic";
        case GlobalCase::WarpedRicciFlat: return "warped-ricci-flat";
        case GlobalCase::Incomplete: return "incomplete";
        case GlobalCase::Unmatched: return "unmatched";
    }
    return "unmatched";
}

std::string GlobalVerdict::label() const {
    return reason.empty() ? to_string(kind) : to_string(kind) + ": " + reason;
}

namespace {

GlobalVerdict unmatched(std::string reason) {
    GlobalVerdict g;
    g.kind = GlobalCase::Unmatched;
    g.reason = std::move(reason);
    return g;
}

// Least squares for y ~ c0 + c1 * x.
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const Eigen::Index m = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd X(m, 2);
    Eigen::VectorXd Y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = x[static_cast<std::size_t>(i)];
        Y(i) = y[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd c = X.colPivHouseholderQr().solve(Y);
    return {c(0), c(1)};
}

double sup_rel(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(a[i]));
    }
    return den > 0 ? num / den : num;
}

}  // namespace

GlobalVerdict match_global(const WarpedSMMS& w, const ConditionReport& report, const MatchOptions& opts) {
    if (report.einstein_residual > opts.residual_tol || report.harmonic_residual > opts.residual_tol)
        return unmatched("residuals above tolerance");
    std::vector<double> ts;
    for (const Point& p : report.sample_points) ts.push_back(p[0]);
    if (ts.size() < 3) return unmatched("too few samples");

    for (Endpoint side : {Endpoint::Left, Endpoint::Right}) {
        const double e = side == Endpoint::Left ? w.interval.lo : w.interval.hi;
        if (!std::isfinite(e)) continue;
        if (blowup_probe(w, side, approach_samples(w, side), opts.blowup_tol).diverges) {
            GlobalVerdict g;
            g.kind = GlobalCase::Incomplete;
            g.reason = "ricci-blowup";
            return g;
        }
    }

    const double lambda = std::abs(report.lambda_fit) <= opts.residual_tol ? 0.0 : report.lambda_fit;
    const std::vector<double> crit = critical_points(w);
    GlobalVerdict g;
    g.critical_points = static_cast<int>(crit.size());
    g.quasi_einstein = std::abs(report.kappa) <= opts.residual_tol;
    g.fitted.n = w.n;
    g.fitted.m = w.m;
    g.fitted.lambda = lambda;
    g.fitted.mu = w.mu;

    std::vector<double> phis, vs;
    const RealFunction v = density_v(w);
    for (double t : ts) {
        phis.push_back(w.phi(t));
        vs.push_back(v(t));
    }

    FamilyId id;
    if (!crit.empty()) {
        // A smooth closing at a critical point of v needs the round unit sphere as fiber.
        if (w.fiber.kind != FiberSpec::Kind::SpaceForm || w.fiber.curvature != 1.0)
            return unmatched("critical points of v but the fiber is not the round unit sphere");
        const double t0 = crit.front();
        const double s = std::sqrt(2 * std::abs(lambda));
        std::vector<double> basis, phi_model;
        for (double t : ts) {
            const double tau = t - t0;
            if (lambda > 0) {
                basis.push_back(std::cos(s * tau));
                phi_model.push_back(std::sin(s * tau) / s);
            } else if (lambda < 0) {
                basis.push_back(std::cosh(s * tau));
                phi_model.push_back(std::sinh(s * tau) / s);
            } else {
                basis.push_back(tau * tau);
                phi_model.push_back(tau);
            }
        }
        const auto [A, B] = linear_fit(basis, vs);
        std::vector<double> v_model;
        for (double b : basis) v_model.push_back(A + B * b);
        g.fitted.A = A;
        g.fitted.B = B;
        g.fit_residual = std::max(sup_rel(vs, v_model), sup_rel(phis, phi_model));
        g.kind = lambda > 0 ? GlobalCase::Sphere : lambda < 0 ? GlobalCase::Hyperbolic : GlobalCase::Euclidean;
        id = lambda > 0 ? FamilyId::WeightedSphere
                        : lambda < 0 ? FamilyId::WeightedHyperbolic : FamilyId::WeightedEuclidean;
    } else if (lambda < 0) {
        if (w.fiber.beta != 0.0) return unmatched("no critical points and fiber not Ricci-flat");
        const double s = std::sqrt(-2 * lambda);
        double log_a = 0.0;
        std::vector<double> e;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            log_a += std::log(phis[i]) - s * ts[i];
            e.push_back(std::exp(s * ts[i]));
        }
        const double A = std::exp(log_a / static_cast<double>(ts.size()));
        const auto [p0, p1] = linear_fit(e, vs);
        std::vector<double> phi_model, v_model;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            phi_model.push_back(A * e[i]);
            v_model.push_back(p0 + p1 * e[i]);
        }
        g.fitted.A = A;
        g.fitted.C = p1 / A;
        g.fitted.B = p0 + p1;
        g.fit_residual = std::max(sup_rel(phis, phi_model), sup_rel(vs, v_model));
        g.kind = GlobalCase::WarpedRicciFlat;
        id = FamilyId::Thm14_3b;
        // AC <= B is p0 >= 0; allow fit noise.
        if (p0 < 0 && p0 > -opts.fit_tol * std::max(1.0, std::abs(p1))) g.fitted.B = g.fitted.A.value() * *g.fitted.C;
    } else {
        return unmatched("no critical points of v and lambda >= 0");
    }

    if (g.fit_residual > opts.fit_tol)
        return unmatched(fmt::format("{} fit residual {:.3g}", to_string(g.kind), g.fit_residual));
    // m = 1 leaves mu free; otherwise the fitted constants must reproduce it.
    FamilyParams check = g.fitted;
    if (w.m == 1.0) {
        check.mu = w.mu;
    } else {
        check.mu.reset();
    }
    try {
        const FamilyParams resolved = resolve_params(id, check);
        if (w.m != 1.0 && std::abs(*resolved.mu - w.mu) > opts.fit_tol * std::max(1.0, std::abs(w.mu)))
            return unmatched(fmt::format("mu {} does not match the fitted value {}", w.mu, *resolved.mu));
    } catch (const ParamConstraintViolation& e) {
        return unmatched(fmt::format("fitted constants violate {}", e.clause()));
    }
    return g;
}

GlobalVerdict match_global(const SMMSChart&, const ConditionReport&, const MatchOptions&) {
    return unmatched("chart carries no warped product structure");
}

}  // namespace smms
