#include "smms/catalog.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "smms/errors.hpp"

namespace smms {

namespace {

constexpr double kMargin = 1e-3;  // shrink applied at finite open endpoints
constexpr double kInf = std::numeric_limits<double>::infinity();

struct KeyEntry {
    FamilyId id;
    const char* key;
};

constexpr std::array<KeyEntry, 11> kKeys{{
    {FamilyId::Example12, "example-1-2"},
    {FamilyId::WeightedSphere, "weighted-sphere"},
    {FamilyId::WeightedEuclidean, "weighted-euclidean"},
    {FamilyId::WeightedHyperbolic, "weighted-hyperbolic"},
    {FamilyId::Counterexample31, "counterexample-3-1"},
    {FamilyId::Counterexample32, "counterexample-3-2"},
    {FamilyId::Thm41Positive, "thm-4-1-positive"},
    {FamilyId::Thm41Zero, "thm-4-1-zero"},
    {FamilyId::Thm41Negative, "thm-4-1-negative"},
    {FamilyId::Example43, "example-4-3"},
    {FamilyId::Thm14_3b, "thm-1-4-3b"},
}};

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a) + std::abs(b)); }

// v(t) with exact derivatives.
struct Density {
    std::function<double(double)> v, dv, ddv;
};

RealFunction f_from_v(const Density& d, double m) {
    return RealFunction{
        [d, m](double t) { return -m * std::log(d.v(t)); },
        [d, m](double t) { return -m * d.dv(t) / d.v(t); },
        [d, m](double t) {
            const double v = d.v(t), dv = d.dv(t);
            return -m * (d.ddv(t) * v - dv * dv) / (v * v);
        },
    };
}

// Warp, density and forced constants of the Einstein families, by sign of lambda.
struct Thm41Data {
    RealFunction phi;
    Density v;
    double beta = 0.0, mu = 0.0, kappa = 0.0;
    double cap = 0.0;  // scan limit for the positivity interval
};

Thm41Data thm41_data(int n, double lambda, double c1, double c2, double c3, double c4) {
    Thm41Data d;
    if (lambda > 0) {
        const double s = std::sqrt(2 * lambda);
        d.phi = RealFunction{[=](double t) { return c1 * std::cos(s * t) + c2 * std::sin(s * t); },
                             [=](double t) { return s * (-c1 * std::sin(s * t) + c2 * std::cos(s * t)); },
                             [=](double t) { return -s * s * (c1 * std::cos(s * t) + c2 * std::sin(s * t)); }};
        const RealFunction phi = d.phi;
        d.v = Density{[=](double t) { return c3 + c2 * c4 * (std::cos(s * t) - 1) - c1 * c4 * std::sin(s * t); },
                      [=](double t) { return -c4 * s * phi.value(t); },
                      [=](double t) { return -c4 * s * phi.d1(t); }};
        d.beta = 2 * (c1 * c1 + c2 * c2) * (n - 2) * lambda;
        d.mu = 2 * (c1 * c1 * c4 * c4 + 2 * c2 * c3 * c4 - c3 * c3) * lambda;
        d.kappa = 2 * lambda * (c3 - c2 * c4);
        d.cap = std::numbers::pi / s;
    } else if (lambda < 0) {
        const double s = std::sqrt(-2 * lambda);
        d.phi = RealFunction{[=](double t) { return c1 * std::exp(s * t) + c2 * std::exp(-s * t); },
                             [=](double t) { return s * (c1 * std::exp(s * t) - c2 * std::exp(-s * t)); },
                             [=](double t) { return s * s * (c1 * std::exp(s * t) + c2 * std::exp(-s * t)); }};
        const RealFunction phi = d.phi;
        d.v = Density{[=](double t) {
                          return c3 + c2 * c4 * (std::exp(-s * t) - 1) - c1 * c4 * (std::exp(s * t) - 1);
                      },
                      [=](double t) { return -c4 * s * phi.value(t); },
                      [=](double t) { return -c4 * s * phi.d1(t); }};
        d.beta = 8 * c1 * c2 * (n - 2) * lambda;
        d.mu = -2 * (2 * (c1 - c2) * c3 * c4 + (c1 + c2) * (c1 + c2) * c4 * c4 + c3 * c3) * lambda;
        d.kappa = 2 * lambda * (c3 + c1 * c4 - c2 * c4);
        d.cap = 3.0 / s;
    } else {
        d.phi = RealFunction{[=](double t) { return c1 * t + c2; }, [=](double) { return c1; },
                             [](double) { return 0.0; }};
        d.v = Density{[=](double t) { return c3 - c4 * (c1 * t * t + 2 * c2 * t); },
                      [=](double t) { return -2 * c4 * (c1 * t + c2); }, [=](double) { return -2 * c4 * c1; }};
        d.beta = c1 * c1 * (n - 2);
        d.mu = 4 * c4 * (c1 * c3 + c2 * c2 * c4);
        d.kappa = -2 * c1 * c4;
        d.cap = 3.0;
    }
    return d;
}

// Largest interval around 0 on which ok(t) holds, scanned up to +-cap and
// refined by bisection; edges found this way are pulled in by kMargin.
Interval positive_region(const std::function<bool(double)>& ok, double cap) {
    auto edge = [&](double dir) {
        constexpr int kSteps = 512;
        double inside = 0.0;
        for (int i = 1; i <= kSteps; ++i) {
            const double t = dir * cap * i / kSteps;
            if (!ok(t)) {
                double a = inside, b = t;
                for (int k = 0; k < 60; ++k) {
                    const double mid = 0.5 * (a + b);
                    (ok(mid) ? a : b) = mid;
                }
                return a - dir * kMargin;
            }
            inside = t;
        }
        return dir * cap;
    };
    return {edge(-1.0), edge(1.0)};
}

Interval central_half(const Interval& i) {
    const double w = i.hi - i.lo;
    return {i.lo + 0.25 * w, i.hi - 0.25 * w};
}

double sphere_end(const FamilyParams& p) {
    const double s = std::sqrt(2 * *p.lambda);
    const double ratio = -*p.A / *p.B;
    if (std::abs(ratio) < 1.0) return std::acos(ratio) / s;
    return std::numbers::pi / s;
}

[[noreturn]] void violation(FamilyId id, const std::string& clause) {
    throw ParamConstraintViolation(family_key(id), clause);
}

void require(bool ok, FamilyId id, const std::string& clause) {
    if (!ok) violation(id, clause);
}

// Pins a parameter to a fixed value; a conflicting user value is a violation.
void pin(std::optional<double>& slot, double value, FamilyId id, const std::string& clause) {
    if (slot && !close(*slot, value)) violation(id, clause);
    slot = value;
}

void pin_n(std::optional<int>& slot, int value, FamilyId id) {
    if (slot && *slot != value) violation(id, fmt::format("n={}", value));
    slot = value;
}

// Installs a forced mu (m != 1 only); m = 1 leaves mu free, defaulting to 0.
void install_mu(FamilyParams& r, double forced, FamilyId id) {
    if (*r.m == 1.0) {
        if (!r.mu) r.mu = 0.0;
        return;
    }
    pin(r.mu, forced, id, fmt::format("mu={:.17g}", forced));
}

double forced_mu(FamilyId id, const FamilyParams& r) {
    const double lambda = r.lambda.value_or(0.0);
    switch (id) {
        case FamilyId::WeightedSphere:
        case FamilyId::WeightedHyperbolic: return 2 * lambda * (*r.B * *r.B - *r.A * *r.A);
        case FamilyId::WeightedEuclidean: return -4 * *r.A * *r.B;
        case FamilyId::Thm14_3b: {
            const double d = *r.B - *r.A * *r.C;
            return -2 * d * d * lambda;
        }
        case FamilyId::Thm41Positive:
        case FamilyId::Thm41Zero:
        case FamilyId::Thm41Negative:
        case FamilyId::Example43: return thm41_data(*r.n, lambda, *r.c1, *r.c2, *r.c3, *r.c4).mu;
        default: return 0.0;
    }
}

void fill_thm41_constants(FamilyParams& r, double lambda) {
    if (lambda > 0) {
        if (!r.c1) r.c1 = 1.0;
        if (!r.c2) r.c2 = 0.0;
        if (!r.c3) r.c3 = 2.0;
        if (!r.c4) r.c4 = 1.0;
    } else if (lambda < 0) {
        if (!r.c1) r.c1 = 1.0;
        if (!r.c2) r.c2 = 0.5;
        if (!r.c3) r.c3 = 2.0;
        if (!r.c4) r.c4 = 0.5;
    } else {
        if (!r.c1) r.c1 = 1.0;
        if (!r.c2) r.c2 = 1.0;
        if (!r.c3) r.c3 = 2.0;
        if (!r.c4) r.c4 = 0.1;
    }
}

void check_thm41_constants(const FamilyParams& r, double lambda, FamilyId id) {
    if (lambda > 0) {
        require(*r.c1 > 0, id, "c1>0");
        require(*r.c3 > 0, id, "c3>0");
    } else if (lambda < 0) {
        require(*r.c1 + *r.c2 > 0, id, "c1+c2>0");
        require(*r.c3 > 0, id, "c3>0");
    } else {
        require(*r.c2 > 0, id, "c2>0");
        require(*r.c3 > 0, id, "c3>0");
    }
    require(*r.c4 != 0, id, "c4!=0");
}

FiberSpec round_fiber(int n) { return FiberSpec::space_form(n - 1, 1.0); }

Box chart_box(int n) {
    std::vector<Interval> sides(static_cast<std::size_t>(n));
    sides[0] = Interval{0.0, kInf};
    return Box(std::move(sides));
}

std::vector<std::string> x_names(int n) {
    std::vector<std::string> names;
    for (int i = 1; i <= n; ++i) names.push_back(fmt::format("x{}", i));
    return names;
}

// g = x1^(2e) delta on x1 > 0, f = -c log x1.
SMMSChart power_conformal_chart(int n, double e, double c, double m) {
    ChartMetric chart(x_names(n), chart_box(n), [n, e](const Point& q) -> Matrix {
        return Matrix::Identity(n, n) * std::pow(q[0], 2 * e);
    });
    return SMMSChart::make(std::move(chart), ScalarFieldFn{chart_box(n), [c](const Point& q) { return -c * std::log(q[0]); }},
                           m, 0.0);
}

GoldenComponent golden(std::string name, std::string tensor, std::vector<int> index, Point point, double value,
                       std::string source) {
    return GoldenComponent{std::move(name), std::move(tensor), std::move(index), std::move(point), value,
                           std::move(source)};
}

}  // namespace

std::string family_key(FamilyId id) {
    for (const auto& e : kKeys)
        if (e.id == id) return e.key;
    return "unknown";
}

FamilyId family_from_key(const std::string& key) {
    for (const auto& e : kKeys)
        if (key == e.key) return e.id;
    throw ParamConstraintViolation(key, "unknown family id");
}

const std::vector<FamilyId>& all_families() {
    static const std::vector<FamilyId> ids = [] {
        std::vector<FamilyId> v;
        for (const auto& e : kKeys) v.push_back(e.id);
        return v;
    }();
    return ids;
}

FamilyParams resolve_params(FamilyId id, const FamilyParams& p) {
    FamilyParams r = p;
    auto default_n = [&](int n) {
        if (!r.n) r.n = n;
        require(*r.n >= 3, id, "n>=3");
    };
    auto default_m = [&](double m) {
        if (!r.m) r.m = m;
        require(std::isfinite(*r.m) && *r.m > 0, id, "m>0");
    };
    switch (id) {
        case FamilyId::Example12:
            default_n(4);
            pin(r.m, 0.5, id, "m=1/2");
            pin(r.mu, 0.0, id, "mu=0");
            pin(r.lambda, 0.0, id, "lambda=0");
            if (!r.A) r.A = 1.0;
            if (!r.B) r.B = 1.0;
            require(*r.A > 0, id, "A>0");
            require(*r.B > 0, id, "B>0");
            break;
        case FamilyId::WeightedSphere:
            default_n(3);
            default_m(2.0);
            if (!r.lambda) r.lambda = 0.5;
            if (!r.A) r.A = 2.0;
            if (!r.B) r.B = 1.0;
            require(*r.lambda > 0, id, "lambda>0");
            require(*r.B != 0, id, "B!=0");
            if (r.allow_incomplete) {
                require(*r.A >= 0, id, "A>=0");
                require(*r.A + *r.B > 0, id, "A+B>0");
            } else {
                require(*r.A > 0, id, "A>0");
                require(*r.A > std::abs(*r.B), id, "A>|B|");
            }
            install_mu(r, forced_mu(id, r), id);
            break;
        case FamilyId::WeightedEuclidean:
            default_n(3);
            default_m(2.0);
            pin(r.lambda, 0.0, id, "lambda=0");
            if (!r.A) r.A = 1.0;
            if (!r.B) r.B = 1.0;
            require(*r.A > 0, id, "A>0");
            require(*r.B > 0, id, "B>0");
            install_mu(r, forced_mu(id, r), id);
            break;
        case FamilyId::WeightedHyperbolic:
            default_n(3);
            default_m(2.0);
            if (!r.lambda) r.lambda = -0.5;
            if (!r.A) r.A = 1.0;
            if (!r.B) r.B = 1.0;
            require(*r.lambda < 0, id, "lambda<0");
            require(*r.B > 0, id, "B>0");
            require(*r.A > -*r.B, id, "A>-B");
            install_mu(r, forced_mu(id, r), id);
            break;
        case FamilyId::Counterexample31:
            pin_n(r.n, 4, id);
            default_m(1.0);
            pin(r.mu, 0.0, id, "mu=0");
            pin(r.lambda, 0.0, id, "lambda=0");
            break;
        case FamilyId::Counterexample32:
            pin_n(r.n, 3, id);
            pin(r.m, 0.5, id, "m=1/2");
            pin(r.mu, 0.0, id, "mu=0");
            pin(r.lambda, 0.0, id, "lambda=0");
            break;
        case FamilyId::Thm41Positive:
        case FamilyId::Thm41Zero:
        case FamilyId::Thm41Negative: {
            default_n(4);
            default_m(2.0);
            const double dflt = id == FamilyId::Thm41Positive ? 0.5 : id == FamilyId::Thm41Negative ? -0.5 : 0.0;
            if (id == FamilyId::Thm41Zero)
                pin(r.lambda, 0.0, id, "lambda=0");
            else if (!r.lambda)
                r.lambda = dflt;
            if (id == FamilyId::Thm41Positive) require(*r.lambda > 0, id, "lambda>0");
            if (id == FamilyId::Thm41Negative) require(*r.lambda < 0, id, "lambda<0");
            fill_thm41_constants(r, *r.lambda);
            check_thm41_constants(r, *r.lambda, id);
            install_mu(r, forced_mu(id, r), id);
            break;
        }
        case FamilyId::Example43:
            pin_n(r.n, 5, id);
            default_m(2.0);
            if (!r.lambda) r.lambda = 0.5;
            fill_thm41_constants(r, *r.lambda);
            check_thm41_constants(r, *r.lambda, id);
            require(thm41_data(5, *r.lambda, *r.c1, *r.c2, *r.c3, *r.c4).beta != 0, id, "beta!=0");
            install_mu(r, forced_mu(id, r), id);
            break;
        case FamilyId::Thm14_3b:
            default_n(5);
            default_m(2.0);
            if (!r.lambda) r.lambda = -0.5;
            if (!r.A) r.A = 1.0;
            if (!r.B) r.B = 2.0;
            if (!r.C) r.C = 1.0;
            require(*r.lambda < 0, id, "lambda<0");
            require(*r.A > 0, id, "A>0");
            require(*r.B > 0, id, "B>0");
            require(*r.C > 0, id, "C>0");
            require(*r.A * *r.C <= *r.B, id, "AC<=B");
            install_mu(r, forced_mu(id, r), id);
            break;
    }
    return r;
}

FamilyInstance build_family(FamilyId id, const FamilyParams& p) {
    const FamilyParams r = resolve_params(id, p);
    const int n = r.n.value_or(3);
    const double m = *r.m, mu = *r.mu;
    const double lambda = r.lambda.value_or(0.0);

    auto warped = [&](Interval interval, RealFunction phi, RealFunction f, FiberSpec fiber, Interval window) {
        WarpedSMMS w{n, interval, std::move(phi), std::move(f), std::move(fiber), m, mu, lambda};
        w.validate();
        return FamilyInstance{id, r, std::move(w), window};
    };

    switch (id) {
        case FamilyId::Example12: {
            const double A = *r.A, B = *r.B, e = 1.0 / (n - 1);
            RealFunction phi{[=](double t) { return A * std::pow(B * t, e); },
                             [=](double t) { return A * e * std::pow(B * t, e) / t; },
                             [=](double t) { return A * e * (e - 1) * std::pow(B * t, e) / (t * t); }};
            RealFunction f{[=](double t) { return -std::log(B * t); }, [](double t) { return -1.0 / t; },
                           [](double t) { return 1.0 / (t * t); }};
            return warped({kMargin, kInf}, phi, f, FiberSpec::flat(n - 1), {0.5, 2.0});
        }
        case FamilyId::WeightedSphere: {
            const double s = std::sqrt(2 * lambda), A = *r.A, B = *r.B;
            const double end = sphere_end(r);
            RealFunction phi{[=](double t) { return std::sin(s * t) / s; }, [=](double t) { return std::cos(s * t); },
                             [=](double t) { return -s * std::sin(s * t); }};
            Density v{[=](double t) { return A + B * std::cos(s * t); },
                      [=](double t) { return -B * s * std::sin(s * t); },
                      [=](double t) { return -B * s * s * std::cos(s * t); }};
            return warped({kMargin, end - kMargin}, phi, f_from_v(v, m), round_fiber(n), {0.15 * end, 0.85 * end});
        }
        case FamilyId::WeightedEuclidean: {
            const double A = *r.A, B = *r.B;
            RealFunction phi{[](double t) { return t; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
            Density v{[=](double t) { return A + B * t * t; }, [=](double t) { return 2 * B * t; },
                      [=](double) { return 2 * B; }};
            return warped({kMargin, kInf}, phi, f_from_v(v, m), round_fiber(n), {0.3, 2.0});
        }
        case FamilyId::WeightedHyperbolic: {
            const double s = std::sqrt(-2 * lambda), A = *r.A, B = *r.B;
            RealFunction phi{[=](double t) { return std::sinh(s * t) / s; },
                             [=](double t) { return std::cosh(s * t); },
                             [=](double t) { return s * std::sinh(s * t); }};
            Density v{[=](double t) { return A + B * std::cosh(s * t); },
                      [=](double t) { return B * s * std::sinh(s * t); },
                      [=](double t) { return B * s * s * std::cosh(s * t); }};
            return warped({kMargin, kInf}, phi, f_from_v(v, m), round_fiber(n), {0.3 / s, 2.0 / s});
        }
        case FamilyId::Counterexample31:
            return FamilyInstance{id, r, power_conformal_chart(4, m, 2 * m * (m + 1), m), {0.8, 1.5}};
        case FamilyId::Counterexample32:
            return FamilyInstance{id, r,
                                  power_conformal_chart(3, (3 - std::sqrt(6.0)) / 3, std::sqrt(2.0 / 3.0), 0.5),
                                  {0.8, 1.5}};
        case FamilyId::Thm41Positive:
        case FamilyId::Thm41Zero:
        case FamilyId::Thm41Negative:
        case FamilyId::Example43: {
            const Thm41Data d = thm41_data(n, lambda, *r.c1, *r.c2, *r.c3, *r.c4);
            const Interval interval =
                positive_region([&](double t) { return d.phi(t) > 0 && d.v.v(t) > 0; }, d.cap);
            FiberSpec fiber = id == FamilyId::Example43 ? FiberSpec::product_of_surfaces(d.beta)
                                                        : FiberSpec::space_form(n - 1, d.beta / (n - 2));
            return warped(interval, d.phi, f_from_v(d.v, m), std::move(fiber), central_half(interval));
        }
        case FamilyId::Thm14_3b: {
            const double s = std::sqrt(-2 * lambda), A = *r.A, B = *r.B, C = *r.C;
            RealFunction phi{[=](double t) { return A * std::exp(s * t); },
                             [=](double t) { return A * s * std::exp(s * t); },
                             [=](double t) { return A * s * s * std::exp(s * t); }};
            Density v{[=](double t) { return B + A * C * (std::exp(s * t) - 1); },
                      [=](double t) { return A * C * s * std::exp(s * t); },
                      [=](double t) { return A * C * s * s * std::exp(s * t); }};
            return warped({-kInf, kInf}, phi, f_from_v(v, m), FiberSpec::flat(n - 1), {-1.0 / s, 1.0 / s});
        }
    }
    throw ParamConstraintViolation(family_key(id), "unknown family");
}

FamilyExpected family_expected(FamilyId id, const FamilyParams& p) {
    const FamilyInstance inst = build_family(id, p);
    const FamilyParams& r = inst.params;
    const int n = *r.n;
    const double m = *r.m;
    const double lambda = r.lambda.value_or(0.0);
    FamilyExpected e;
    e.lambda = lambda;
    if (m != 1.0) e.mu_forced = forced_mu(id, r);

    switch (id) {
        case FamilyId::Example12: {
            e.mu_forced = 0.0;
            e.beta_forced = 0.0;
            e.einstein = false;
            e.kappa = 2 * *r.B * *r.B / (n - 1);
            e.markers.push_back("incomplete");
            const double t = 1.0;
            const double phi = inst.warped().phi(t);
            const double den = (n - 1.0) * (n - 1.0) * t * t;
            const Point pt = inst.point_at(t);
            e.goldens.push_back(golden("W_f^m(t,x1,t,x1)", "weighted_weyl", {0, 1, 0, 1}, pt,
                                       (n - 2) * phi * phi / den, "(n-2) phi^2 / ((n-1)^2 t^2)"));
            e.goldens.push_back(golden("W_f^m(x1,x2,x1,x2)", "weighted_weyl", {1, 2, 1, 2}, pt,
                                       -phi * phi * phi * phi / den, "-phi^4 / ((n-1)^2 t^2)"));
            e.goldens.push_back(golden("tau", "scalar", {}, pt, (n - 2) / ((n - 1.0) * t * t),
                                       "(n-2) / ((n-1) t^2)"));
            e.goldens.push_back(golden("rho(t,t)", "ricci", {0, 0}, pt, (n - 2) / ((n - 1.0) * t * t),
                                       "-(n-1) phi''/phi"));
            break;
        }
        case FamilyId::WeightedSphere: {
            const double A = *r.A, B = *r.B;
            e.beta_forced = n - 2.0;
            e.kappa = 2 * lambda * A;
            if (A == 1.0 && B == 1.0) e.markers.push_back("standard-weighted-sphere");
            if (A == 0.0 && B == 1.0) e.markers.push_back("positive-elliptic-gaussian");
            if (!(A > std::abs(B))) e.markers.push_back("incomplete-domain");
            break;
        }
        case FamilyId::WeightedEuclidean:
            e.beta_forced = n - 2.0;
            e.kappa = 2 * *r.B;
            break;
        case FamilyId::WeightedHyperbolic:
            e.beta_forced = n - 2.0;
            e.kappa = 2 * lambda * *r.A;
            break;
        case FamilyId::Counterexample31: {
            e.mu_forced = 0.0;
            e.einstein = false;
            e.weighted_harmonic = m == 0.5;
            const double value = 2 * m * (2 * m * m + m - 1);
            if (value != 0.0) {
                for (int i = 1; i < 4; ++i) {
                    e.goldens.push_back(golden(fmt::format("delta_f W(x{},x1,x{})", i + 1, i + 1), "delta_f_weyl",
                                               {i, 0, i}, Point::Unit(4, 0), value,
                                               "2m(2m^2+m-1) / x1^3"));
                }
            }
            break;
        }
        case FamilyId::Counterexample32: {
            e.mu_forced = 0.0;
            e.einstein = false;
            e.weighted_harmonic = false;
            const double value = 4 * (std::sqrt(6.0) - 3) / 9;
            for (int i = 1; i < 3; ++i) {
                e.goldens.push_back(golden(fmt::format("delta_f W(x{},x1,x{})", i + 1, i + 1), "delta_f_weyl",
                                           {i, 0, i}, Point::Unit(3, 0), value, "4(sqrt(6)-3) / (9 x1^3)"));
            }
            break;
        }
        case FamilyId::Thm41Positive:
        case FamilyId::Thm41Zero:
        case FamilyId::Thm41Negative:
        case FamilyId::Example43: {
            const Thm41Data d = thm41_data(n, lambda, *r.c1, *r.c2, *r.c3, *r.c4);
            e.beta_forced = d.beta;
            e.kappa = d.kappa;
            if (id == FamilyId::Example43) {
                const double t = 0.5 * (inst.window.lo + inst.window.hi);
                const Point pt = inst.point_at(t);
                const double phi = d.phi(t), beta = d.beta;
                const double q12 = 4 + beta * (pt[1] * pt[1] + pt[2] * pt[2]);
                const double q34 = 4 + beta * (pt[3] * pt[3] + pt[4] * pt[4]);
                e.goldens.push_back(golden("W(x1,x2,x1,x2)", "weyl", {1, 2, 1, 2}, pt,
                                           512 * beta * phi * phi / (3 * std::pow(q12, 4)),
                                           "512 beta phi^2 / (3 (4+beta(x1^2+x2^2))^4)"));
                e.goldens.push_back(golden("W(x3,x4,x3,x4)", "weyl", {3, 4, 3, 4}, pt,
                                           512 * beta * phi * phi / (3 * std::pow(q34, 4)),
                                           "512 beta phi^2 / (3 (4+beta(x3^2+x4^2))^4)"));
                e.goldens.push_back(golden("W(x1,x3,x1,x3)", "weyl", {1, 3, 1, 3}, pt,
                                           -256 * beta * phi * phi / (3 * q12 * q12 * q34 * q34),
                                           "-256 beta phi^2 / (3 (4+beta(x1^2+x2^2))^2 (4+beta(x3^2+x4^2))^2)"));
                e.goldens.push_back(golden("rho(t,t)", "ricci", {0, 0}, pt, 2 * (n - 1) * lambda,
                                           "2(n-1) lambda"));
            }
            break;
        }
        case FamilyId::Thm14_3b:
            e.beta_forced = 0.0;
            e.kappa = 2 * lambda * (*r.B - *r.A * *r.C);
            break;
    }
    if (e.kappa && *e.kappa == 0.0) e.markers.push_back("quasi-einstein");
    return e;
}

SMMSChart FamilyInstance::chart() const {
    if (is_warped()) return warped_chart(warped());
    return std::get<SMMSChart>(object);
}

std::vector<double> FamilyInstance::sample_ts(int k) const {
    if (k < 1) throw InsufficientSamples(fmt::format("sample count must be positive (got {})", k));
    if (k == 1) return {0.5 * (window.lo + window.hi)};
    std::vector<double> ts;
    for (int j = 0; j < k; ++j) ts.push_back(window.lo + (window.hi - window.lo) * j / (k - 1));
    return ts;
}

Point FamilyInstance::point_at(double t, int i) const {
    const Box box = is_warped() ? warped().fiber.domain() : Box::unbounded(std::get<SMMSChart>(object).dim() - 1);
    const int d = box.dim();
    Point p(d + 1);
    p[0] = t;
    for (int j = 0; j < d; ++j) {
        const Interval& side = box.side(j);
        const double half = std::min(std::abs(side.lo), std::abs(side.hi));
        const double amp = std::min(0.15, 0.2 * half);
        p[j + 1] = amp * std::cos(1.3 * (i + 1) + 0.7 * (j + 1));
    }
    return p;
}

std::vector<Point> FamilyInstance::sample_points(int k) const {
    std::vector<Point> pts;
    int i = 0;
    for (double t : sample_ts(k)) pts.push_back(point_at(t, i++));
    return pts;
}

double evaluate_golden(const FamilyInstance& inst, const GoldenComponent& golden, const FDConfig& cfg) {
    const SMMSChart s = inst.chart();
    const auto& idx = golden.index;
    if (golden.tensor == "delta_f_weyl") {
        if (idx.size() != 3) throw RankMismatch("delta_f_weyl golden needs 3 indices");
        return weighted_derivatives(s, golden.point, cfg).delta_f_W(idx[0], idx[1], idx[2]);
    }
    const WeightedPoint w = evaluate_weighted(s, golden.point, cfg);
    if (golden.tensor == "scalar") return w.curvature.scalar;
    if (golden.tensor == "ricci") return w.curvature.ricci(idx.at(0), idx.at(1));
    if (golden.tensor == "weighted_schouten") return w.P(idx.at(0), idx.at(1));
    if (idx.size() != 4) throw RankMismatch(fmt::format("{} golden needs 4 indices", golden.tensor));
    if (golden.tensor == "weighted_weyl") return w.W(idx[0], idx[1], idx[2], idx[3]);
    if (golden.tensor == "weyl") return weyl_tensor(w.curvature, w.g)(idx[0], idx[1], idx[2], idx[3]);
    throw RankMismatch(fmt::format("unknown golden tensor '{}'", golden.tensor));
}

RealFunction density_v(const WarpedSMMS& w) {
    const RealFunction f = w.f;
    const double m = w.m;
    return RealFunction{
        [f, m](double t) { return std::exp(-f.derivative(0, t) / m); },
        [f, m](double t) { return -f.derivative(1, t) / m * std::exp(-f.derivative(0, t) / m); },
        [f, m](double t) {
            const double d1 = f.derivative(1, t);
            return (d1 * d1 / (m * m) - f.derivative(2, t) / m) * std::exp(-f.derivative(0, t) / m);
        },
    };
}

}  // namespace smms
