#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "smms/tensor.hpp"

namespace smms {

/// Open interval (lo, hi); either bound may be infinite.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double x) const noexcept { return lo < x && x < hi; }
};

/// Open axis-aligned box.
class Box {
public:
    Box() = default;
    explicit Box(std::vector<Interval> sides) : sides_(std::move(sides)) {}

    static Box unbounded(int dim) { return Box(std::vector<Interval>(static_cast<std::size_t>(dim))); }

    int dim() const noexcept { return static_cast<int>(sides_.size()); }
    const Interval& side(int i) const { return sides_.at(static_cast<std::size_t>(i)); }
    const std::vector<Interval>& sides() const noexcept { return sides_; }

    bool contains(const Point& p) const;
    /// True when p_i +- margin[i] stays strictly inside every side.
    bool contains_with_margin(const Point& p, const Eigen::VectorXd& margin) const;

    /// Cartesian product (this first).
    Box product(const Box& other) const;

private:
    std::vector<Interval> sides_;
};

struct ScalarFieldFn {
    Box domain;
    std::function<double(const Point&)> eval;

    double operator()(const Point& p) const { return eval(p); }
};

using MetricFn = std::function<Matrix(const Point&)>;
using TensorField = std::function<TensorValue(const Point&)>;

/// Coordinate chart carrying metric components g_ij(p).
class ChartMetric {
public:
    static constexpr double kEigenvalueFloor = 1e-12;

    ChartMetric(std::vector<std::string> coord_names, Box domain, MetricFn g);

    int dim() const noexcept { return static_cast<int>(coord_names_.size()); }
    const std::vector<std::string>& coord_names() const noexcept { return coord_names_; }
    const Box& domain() const noexcept { return domain_; }

    /// Symmetrized g(p). Throws DomainError outside the box and SingularMetric
    /// when the smallest eigenvalue is below the floor.
    Matrix metric(const Point& p) const;

private:
    std::vector<std::string> coord_names_;
    Box domain_;
    MetricFn g_;
};

struct FDConfig {
    enum class Stencil { ThreePoint, FivePoint };

    double rel_step = 1e-3;
    Stencil stencil = Stencil::FivePoint;
    bool richardson = true;
    /// Step for differentiating curvature-level tensor fields (covariant
    /// derivatives, divergences); coarser than rel_step because the inner
    /// values already carry second-difference roundoff.
    double outer_rel_step = 1e-2;

    void validate() const;
};

/// Values and coordinate derivatives of a vector-valued map at a point.
struct Jet {
    Eigen::VectorXd value;
    std::vector<Eigen::VectorXd> d;                 // d[a] = dF/dx^a
    std::vector<std::vector<Eigen::VectorXd>> dd;   // dd[a][b], empty for first-order jets
};

using VectorFn = std::function<Eigen::VectorXd(const Point&)>;

/// Central-difference jet of `fn` at p with per-coordinate step
/// rel_step * max(1, |p_i|). Throws DomainError when a stencil point leaves `domain`.
Jet fd_jet(const VectorFn& fn, const Point& p, const Box& domain, const FDConfig& cfg, double rel_step,
           bool second_order);

struct MetricJet {
    Matrix g;
    Matrix ginv;
    std::vector<Matrix> dg;               // dg[a](i, j) = d_a g_ij
    std::vector<std::vector<Matrix>> ddg; // ddg[a][b](i, j) = d_a d_b g_ij
};

MetricJet metric_jet(const ChartMetric& chart, const Point& p, const FDConfig& cfg, bool second_order);

/// Gamma(k, i, j) = Gamma^k_ij.
TensorValue christoffel(const MetricJet& jet);
TensorValue christoffel(const ChartMetric& chart, const Point& p, const FDConfig& cfg = {});

/// Curvature with R(X,Y,X,Y) = K (|X|^2|Y|^2 - g(X,Y)^2) for sectional curvature K.
struct CurvatureBundle {
    TensorValue riemann;  // rank 4, RiemannLike
    TensorValue ricci;    // Sym2, rho_bd = g^ac R_abcd
    double scalar = 0.0;
};

CurvatureBundle curvature_bundle(const MetricJet& jet);
CurvatureBundle curvature_bundle(const ChartMetric& chart, const Point& p, const FDConfig& cfg = {});

/// Unweighted Weyl tensor R - A (kn) g with A = (rho - tau g / (2(n-1))) / (n-2). Needs n >= 3.
TensorValue weyl_tensor(const CurvatureBundle& c, const Matrix& g);

struct ScalarCalculus {
    double value = 0.0;
    TensorValue df;    // covector
    TensorValue grad;  // raised with g^-1
    TensorValue hess;  // Sym2
    double laplacian = 0.0;
    double grad_norm_sq = 0.0;
};

ScalarCalculus scalar_calculus(const MetricJet& jet, const TensorValue& gamma, const ScalarFieldFn& s,
                               const Point& p, const FDConfig& cfg);
ScalarCalculus scalar_calculus(const ChartMetric& chart, const ScalarFieldFn& s, const Point& p,
                               const FDConfig& cfg = {});

/// (nabla T)_{e a1..ar}, derivative in the first slot. The field is
/// differentiated with cfg.outer_rel_step.
TensorValue covariant_derivative(const ChartMetric& chart, const TensorField& field, const Point& p,
                                 const FDConfig& cfg = {});

/// Same, for several fields sharing one stencil; field(p) returns them in order.
std::vector<TensorValue> covariant_derivatives(const ChartMetric& chart,
                                               const std::function<std::vector<TensorValue>(const Point&)>& fields,
                                               const Point& p, const FDConfig& cfg = {});

/// delta T = sum_i (nabla_{E_i} T)(E_i, ...) for a covariant field of rank 2..4,
/// E the Gram-Schmidt frame built in `order` (identity if empty).
TensorValue divergence(const ChartMetric& chart, const TensorField& field, const Point& p,
                       const FDConfig& cfg = {}, std::span<const int> order = {});

/// Contracts the first two slots of a precomputed nabla T with the frame.
TensorValue divergence_from_derivative(const TensorValue& nabla_t, const Matrix& g,
                                       std::span<const int> order = {});

}  // namespace smms
