#include "smms/tensor_core.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "smms/errors.hpp"

namespace smms {

namespace {

std::vector<double> to_std(const Point& p) { return {p.data(), p.data() + p.size()}; }

std::string point_str(const Point& p) {
    std::string s = "(";
    for (int i = 0; i < p.size(); ++i) s += fmt::format("{}{:.6g}", i ? ", " : "", p[i]);
    return s + ")";
}

// Central stencils on differences F(p + k h) - F(p); constants cancel exactly.
// First: (8(F1 - F-1) - (F2 - F-2)) / 12h.  Second: (16(F1 + F-1) - (F2 + F-2)) / 12h^2.
constexpr std::array<int, 4> kOff5{-2, -1, 1, 2};
constexpr std::array<double, 4> kFirst5{1.0, -8.0, 8.0, -1.0};
constexpr std::array<double, 4> kSecond5{-1.0, 16.0, 16.0, -1.0};
constexpr double kDen5 = 12.0;
constexpr std::array<int, 2> kOff3{-1, 1};
constexpr std::array<double, 2> kFirst3{-1.0, 1.0};
constexpr std::array<double, 2> kSecond3{1.0, 1.0};

}  // namespace

bool Box::contains(const Point& p) const {
    if (p.size() != dim()) return false;
    for (int i = 0; i < dim(); ++i)
        if (!sides_[i].contains(p[i])) return false;
    return true;
}

bool Box::contains_with_margin(const Point& p, const Eigen::VectorXd& margin) const {
    if (p.size() != dim()) return false;
    for (int i = 0; i < dim(); ++i)
        if (!(sides_[i].lo < p[i] - margin[i] && p[i] + margin[i] < sides_[i].hi)) return false;
    return true;
}

Box Box::product(const Box& other) const {
    std::vector<Interval> s = sides_;
    s.insert(s.end(), other.sides_.begin(), other.sides_.end());
    return Box(std::move(s));
}

ChartMetric::ChartMetric(std::vector<std::string> coord_names, Box domain, MetricFn g)
    : coord_names_(std::move(coord_names)), domain_(std::move(domain)), g_(std::move(g)) {
    if (coord_names_.size() < 2) throw RankMismatch("chart needs at least two coordinates");
    if (domain_.dim() != dim())
        throw RankMismatch(fmt::format("chart has {} coordinates but a {}-dimensional domain", dim(), domain_.dim()));
    if (!g_) throw RankMismatch("chart metric function is empty");
}

Matrix ChartMetric::metric(const Point& p) const {
    if (!domain_.contains(p)) throw DomainError(fmt::format("point {} outside chart domain", point_str(p)));
    Matrix g = g_(p);
    if (g.rows() != dim() || g.cols() != dim())
        throw RankMismatch(fmt::format("metric function returned {}x{} for a {}-chart", g.rows(), g.cols(), dim()));
    g = 0.5 * (g + g.transpose()).eval();
    if (!g.allFinite())
        throw SingularMetric(fmt::format("non-finite metric at {}", point_str(p)), to_std(p),
                             std::numeric_limits<double>::quiet_NaN());
    const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(g, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    if (!(lmin > kEigenvalueFloor))
        throw SingularMetric(fmt::format("metric not positive definite at {} (min eigenvalue {:.3g})", point_str(p), lmin),
                             to_std(p), lmin);
    return g;
}

void FDConfig::validate() const {
    if (!(rel_step > 0.0) || !std::isfinite(rel_step)) throw DomainError("FDConfig.rel_step must be positive");
    if (!(outer_rel_step > 0.0) || !std::isfinite(outer_rel_step))
        throw DomainError("FDConfig.outer_rel_step must be positive");
}

Jet fd_jet(const VectorFn& fn, const Point& p, const Box& domain, const FDConfig& cfg, double rel_step,
           bool second_order) {
    cfg.validate();
    const int n = static_cast<int>(p.size());
    const bool five = cfg.stencil == FDConfig::Stencil::FivePoint;
    Eigen::VectorXd h(n);
    for (int i = 0; i < n; ++i) h[i] = rel_step * std::max(1.0, std::abs(p[i]));
    const Eigen::VectorXd margin = (five ? 2.0 : 1.0) * h;
    if (!domain.contains_with_margin(p, margin))
        throw DomainError(fmt::format("finite-difference stencil at {} leaves the domain", point_str(p)));

    Jet jet;
    jet.value = fn(p);
    const Eigen::VectorXd& f0 = jet.value;

    auto shifted = [&](int a, double sa, int b, double sb) {
        Point q = p;
        q[a] += sa;
        if (b >= 0) q[b] += sb;
        return fn(q);
    };

    auto delta = [&](int a, double sa, int b, double sb) -> Eigen::VectorXd { return shifted(a, sa, b, sb) - f0; };

    auto first = [&](int a, double step) -> Eigen::VectorXd {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(f0.size());
        if (five) {
            for (int k = 0; k < 4; ++k) acc += kFirst5[k] * delta(a, kOff5[k] * step, -1, 0);
            return acc / (kDen5 * step);
        }
        for (int k = 0; k < 2; ++k) acc += kFirst3[k] * delta(a, kOff3[k] * step, -1, 0);
        return acc / (2.0 * step);
    };
    auto second = [&](int a, double step) -> Eigen::VectorXd {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(f0.size());
        if (five) {
            for (int k = 0; k < 4; ++k) acc += kSecond5[k] * delta(a, kOff5[k] * step, -1, 0);
            return acc / (kDen5 * step * step);
        }
        for (int k = 0; k < 2; ++k) acc += kSecond3[k] * delta(a, kOff3[k] * step, -1, 0);
        return acc / (step * step);
    };
    auto mixed = [&](int a, int b, double sa, double sb) -> Eigen::VectorXd {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(f0.size());
        if (five) {
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    acc += (kFirst5[i] * kFirst5[j]) * delta(a, kOff5[i] * sa, b, kOff5[j] * sb);
            return acc / (kDen5 * kDen5 * sa * sb);
        }
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                acc += (kFirst3[i] * kFirst3[j]) * delta(a, kOff3[i] * sa, b, kOff3[j] * sb);
        return acc / (4.0 * sa * sb);
    };

    const double gain = five ? 15.0 : 3.0;  // 2^order - 1
    auto extrapolate = [&](auto&& diff) -> Eigen::VectorXd {
        if (!cfg.richardson) return diff(1.0);
        const Eigen::VectorXd coarse = diff(1.0);
        const Eigen::VectorXd fine = diff(0.5);
        return fine + (fine - coarse) / gain;
    };

    jet.d.resize(n);
    for (int a = 0; a < n; ++a) jet.d[a] = extrapolate([&](double s) { return first(a, s * h[a]); });
    if (second_order) {
        jet.dd.assign(n, std::vector<Eigen::VectorXd>(n));
        for (int a = 0; a < n; ++a) {
            jet.dd[a][a] = extrapolate([&](double s) { return second(a, s * h[a]); });
            for (int b = a + 1; b < n; ++b) {
                jet.dd[a][b] = extrapolate([&](double s) { return mixed(a, b, s * h[a], s * h[b]); });
                jet.dd[b][a] = jet.dd[a][b];
            }
        }
    }
    return jet;
}

MetricJet metric_jet(const ChartMetric& chart, const Point& p, const FDConfig& cfg, bool second_order) {
    const int n = chart.dim();
    if (p.size() != n) throw RankMismatch(fmt::format("point has {} coordinates, chart has {}", p.size(), n));
    auto flat = [&](const Point& q) -> Eigen::VectorXd {
        const Matrix g = chart.metric(q);
        return Eigen::Map<const Eigen::VectorXd>(g.data(), n * n);
    };
    const Jet jet = fd_jet(flat, p, chart.domain(), cfg, cfg.rel_step, second_order);
    auto unflat = [n](const Eigen::VectorXd& v) -> Matrix { return Eigen::Map<const Matrix>(v.data(), n, n); };

    MetricJet out;
    out.g = unflat(jet.value);
    out.ginv = out.g.ldlt().solve(Matrix::Identity(n, n));
    out.ginv = 0.5 * (out.ginv + out.ginv.transpose()).eval();
    out.dg.reserve(n);
    for (const auto& d : jet.d) out.dg.push_back(unflat(d));
    if (second_order) {
        out.ddg.assign(n, std::vector<Matrix>(n));
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) out.ddg[a][b] = unflat(jet.dd[a][b]);
    }
    return out;
}

namespace {

// Gamma_{l,ij} = (d_i g_jl + d_j g_il - d_l g_ij) / 2
double gamma_lower(const MetricJet& j, int l, int i, int k) {
    return 0.5 * (j.dg[i](k, l) + j.dg[k](i, l) - j.dg[l](i, k));
}

}  // namespace

TensorValue christoffel(const MetricJet& jet) {
    const int n = static_cast<int>(jet.g.rows());
    TensorValue gamma(3, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Eigen::VectorXd lower(n);
            for (int l = 0; l < n; ++l) lower[l] = gamma_lower(jet, l, i, j);
            const Eigen::VectorXd upper = jet.ginv * lower;
            for (int k = 0; k < n; ++k) {
                gamma(k, i, j) = upper[k];
                gamma(k, j, i) = upper[k];
            }
        }
    return gamma;
}

TensorValue christoffel(const ChartMetric& chart, const Point& p, const FDConfig& cfg) {
    return christoffel(metric_jet(chart, p, cfg, false));
}

CurvatureBundle curvature_bundle(const MetricJet& jet) {
    if (jet.ddg.empty()) throw RankMismatch("curvature needs a second-order metric jet");
    const int n = static_cast<int>(jet.g.rows());
    const TensorValue gamma = christoffel(jet);
    TensorValue lower(3, n);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) lower(l, i, k) = gamma_lower(jet, l, i, k);

    TensorValue r(4, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    double v = 0.5 * (jet.ddg[b][c](a, d) + jet.ddg[a][d](b, c) - jet.ddg[a][c](b, d) -
                                      jet.ddg[b][d](a, c));
                    for (int f = 0; f < n; ++f) v += lower(f, b, c) * gamma(f, a, d) - lower(f, b, d) * gamma(f, a, c);
                    r(a, b, c, d) = v;
                }
    r.enforce_riemann_symmetries();

    CurvatureBundle out;
    out.ricci = TensorValue::sym2(metric_trace(r, 0, 2, jet.ginv).to_matrix());
    out.scalar = metric_trace(out.ricci, 0, 1, jet.ginv)();
    out.riemann = std::move(r);
    return out;
}

CurvatureBundle curvature_bundle(const ChartMetric& chart, const Point& p, const FDConfig& cfg) {
    return curvature_bundle(metric_jet(chart, p, cfg, true));
}

TensorValue weyl_tensor(const CurvatureBundle& c, const Matrix& g) {
    const int n = static_cast<int>(g.rows());
    if (n < 3) throw RankMismatch("Weyl tensor needs dimension at least 3");
    const TensorValue gt = TensorValue::sym2(g);
    const TensorValue schouten = (c.ricci - gt * (c.scalar / (2.0 * (n - 1)))) * (1.0 / (n - 2));
    return c.riemann - kulkarni_nomizu(schouten, gt);
}

ScalarCalculus scalar_calculus(const MetricJet& jet, const TensorValue& gamma, const ScalarFieldFn& s,
                               const Point& p, const FDConfig& cfg) {
    const int n = static_cast<int>(jet.g.rows());
    auto fn = [&](const Point& q) -> Eigen::VectorXd {
        Eigen::VectorXd v(1);
        v[0] = s.eval(q);
        if (!std::isfinite(v[0])) throw DomainError(fmt::format("scalar field not finite at {}", point_str(q)));
        return v;
    };
    const Jet j = fd_jet(fn, p, s.domain, cfg, cfg.rel_step, true);

    ScalarCalculus out;
    out.value = j.value[0];
    Eigen::VectorXd df(n);
    for (int a = 0; a < n; ++a) df[a] = j.d[a][0];
    out.df = TensorValue::vector(df);
    const Eigen::VectorXd grad = jet.ginv * df;
    out.grad = TensorValue::vector(grad);
    out.hess = TensorValue(2, n, Symmetry::Sym2);
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
            double v = j.dd[a][b][0];
            for (int k = 0; k < n; ++k) v -= gamma(k, a, b) * df[k];
            out.hess(a, b) = v;
        }
    out.laplacian = metric_trace(out.hess, 0, 1, jet.ginv)();
    out.grad_norm_sq = std::max(0.0, df.dot(grad));
    return out;
}

ScalarCalculus scalar_calculus(const ChartMetric& chart, const ScalarFieldFn& s, const Point& p,
                               const FDConfig& cfg) {
    const MetricJet jet = metric_jet(chart, p, cfg, false);
    return scalar_calculus(jet, christoffel(jet), s, p, cfg);
}

std::vector<TensorValue> covariant_derivatives(const ChartMetric& chart,
                                               const std::function<std::vector<TensorValue>(const Point&)>& fields,
                                               const Point& p, const FDConfig& cfg) {
    const int n = chart.dim();
    std::vector<int> ranks;
    auto flat = [&](const Point& q) -> Eigen::VectorXd {
        const std::vector<TensorValue> ts = fields(q);
        std::vector<double> all;
        std::vector<int> rk;
        for (const auto& t : ts) {
            if (t.rank() > 0 && t.dim() != n) throw RankMismatch("tensor field dimension differs from chart dimension");
            if (!t.all_finite()) throw DomainError(fmt::format("tensor field not finite at {}", point_str(q)));
            const auto c = t.components();
            all.insert(all.end(), c.begin(), c.end());
            rk.push_back(t.rank());
        }
        if (ranks.empty()) ranks = rk;
        else if (rk != ranks) throw RankMismatch("tensor field changed rank between stencil points");
        return Eigen::Map<const Eigen::VectorXd>(all.data(), static_cast<Eigen::Index>(all.size()));
    };
    const Jet j = fd_jet(flat, p, chart.domain(), cfg, cfg.outer_rel_step, false);
    const TensorValue gamma = christoffel(chart, p, cfg);

    std::vector<TensorValue> out;
    std::size_t base = 0;
    std::array<int, TensorValue::kMaxRank> idx{};
    for (int r : ranks) {
        if (r + 1 > TensorValue::kMaxRank) throw RankMismatch("covariant derivative of rank > 4 field");
        const std::size_t sz = TensorValue(r, n).size();
        const TensorValue t =
            TensorValue::from_components(r, n, std::span<const double>(j.value.data() + base, sz));
        TensorValue nab(r + 1, n);
        for (std::size_t k = 0; k < nab.size(); ++k) {
            decode_index(k, r + 1, n, idx);
            const int e = idx[0];
            std::span<int> tail(idx.data() + 1, r);
            std::size_t flat_tail = 0;
            for (int s = 0; s < r; ++s) flat_tail = flat_tail * n + tail[s];
            double v = j.d[e][static_cast<Eigen::Index>(base + flat_tail)];
            for (int s = 0; s < r; ++s) {
                const int as = tail[s];
                for (int q = 0; q < n; ++q) {
                    tail[s] = q;
                    v -= gamma(q, e, as) * t.at(std::span<const int>(tail.data(), r));
                }
                tail[s] = as;
            }
            nab.at(std::span<const int>(idx.data(), r + 1)) = v;
        }
        out.push_back(std::move(nab));
        base += sz;
    }
    return out;
}

TensorValue covariant_derivative(const ChartMetric& chart, const TensorField& field, const Point& p,
                                 const FDConfig& cfg) {
    auto many = [&](const Point& q) { return std::vector<TensorValue>{field(q)}; };
    return covariant_derivatives(chart, many, p, cfg).front();
}

TensorValue divergence_from_derivative(const TensorValue& nabla_t, const Matrix& g, std::span<const int> order) {
    if (nabla_t.rank() < 2) throw RankMismatch("divergence needs a field of rank >= 1");
    const Matrix frame = orthonormal_frame(g, order);
    return metric_trace(nabla_t, 0, 1, frame * frame.transpose());
}

TensorValue divergence(const ChartMetric& chart, const TensorField& field, const Point& p, const FDConfig& cfg,
                       std::span<const int> order) {
    const TensorValue nab = covariant_derivative(chart, field, p, cfg);
    if (nab.rank() < 3 || nab.rank() > 5) throw RankMismatch("divergence expects a field of rank 2..4");
    return divergence_from_derivative(nab, chart.metric(p), order);
}

}  // namespace smms
