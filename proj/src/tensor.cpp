#include "smms/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "smms/errors.hpp"

namespace smms {

namespace {

std::size_t ipow(int base, int exp) {
    std::size_t r = 1;
    for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
    return r;
}

}  // namespace

void decode_index(std::size_t flat, int rank, int dim, std::span<int> out) {
    for (int k = rank - 1; k >= 0; --k) {
        out[k] = static_cast<int>(flat % static_cast<std::size_t>(dim));
        flat /= static_cast<std::size_t>(dim);
    }
}

TensorValue::TensorValue(int rank, int dim, Symmetry symmetry)
    : rank_(rank), dim_(dim), symmetry_(symmetry) {
    if (rank < 0 || rank > kMaxRank) throw RankMismatch(fmt::format("unsupported tensor rank {}", rank));
    if (dim < 1 && rank > 0) throw RankMismatch("tensor dimension must be positive");
    if (symmetry == Symmetry::Sym2 && rank != 2) throw RankMismatch("Sym2 tag requires rank 2");
    if (symmetry == Symmetry::RiemannLike && rank != 4) throw RankMismatch("RiemannLike tag requires rank 4");
    data_.assign(ipow(dim, rank), 0.0);
}

TensorValue TensorValue::scalar(double value) {
    TensorValue t(0, 1);
    t.data_[0] = value;
    return t;
}

TensorValue TensorValue::vector(const Eigen::VectorXd& v) {
    TensorValue t(1, static_cast<int>(v.size()));
    for (int i = 0; i < v.size(); ++i) t.data_[i] = v[i];
    return t;
}

TensorValue TensorValue::sym2(const Matrix& m) {
    if (m.rows() != m.cols()) throw RankMismatch("sym2 requires a square matrix");
    const int n = static_cast<int>(m.rows());
    TensorValue t(2, n, Symmetry::Sym2);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) t(i, j) = 0.5 * (m(i, j) + m(j, i));
    return t;
}

TensorValue TensorValue::matrix(const Matrix& m) {
    if (m.rows() != m.cols()) throw RankMismatch("matrix requires a square matrix");
    const int n = static_cast<int>(m.rows());
    TensorValue t(2, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) t(i, j) = m(i, j);
    return t;
}

TensorValue TensorValue::from_components(int rank, int dim, std::span<const double> values) {
    TensorValue t(rank, dim);
    if (values.size() != t.size())
        throw RankMismatch(fmt::format("from_components: {} values for rank {} dim {}", values.size(), rank, dim));
    std::copy(values.begin(), values.end(), t.data_.begin());
    return t;
}

std::size_t TensorValue::offset(std::span<const int> idx) const {
    if (static_cast<int>(idx.size()) != rank_)
        throw RankMismatch(fmt::format("index of length {} on rank-{} tensor", idx.size(), rank_));
    if (symmetry_ == Symmetry::Sym2) {
        const int i = std::min(idx[0], idx[1]);
        const int j = std::max(idx[0], idx[1]);
        return static_cast<std::size_t>(i) * dim_ + j;
    }
    std::size_t off = 0;
    for (int k : idx) off = off * dim_ + static_cast<std::size_t>(k);
    return off;
}

std::vector<double> TensorValue::components() const {
    std::vector<double> out(data_.size());
    std::array<int, kMaxRank> idx{};
    for (std::size_t k = 0; k < data_.size(); ++k) {
        decode_index(k, rank_, dim_, idx);
        out[k] = at(std::span<const int>(idx.data(), rank_));
    }
    return out;
}

Matrix TensorValue::to_matrix() const {
    if (rank_ != 2) throw RankMismatch("to_matrix requires rank 2");
    Matrix m(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) m(i, j) = (*this)(i, j);
    return m;
}

Eigen::VectorXd TensorValue::to_vector() const {
    if (rank_ != 1) throw RankMismatch("to_vector requires rank 1");
    return Eigen::Map<const Eigen::VectorXd>(data_.data(), dim_);
}

double TensorValue::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

bool TensorValue::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

TensorValue TensorValue::untagged() const {
    if (symmetry_ == Symmetry::None) return *this;
    TensorValue t(rank_, dim_);
    t.data_ = components();
    return t;
}

void TensorValue::enforce_riemann_symmetries() {
    if (rank_ != 4) throw RankMismatch("Riemann symmetries require rank 4");
    const int n = dim_;
    TensorValue src = untagged();
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    const double v = src(a, b, c, d) - src(b, a, c, d) - src(a, b, d, c) + src(b, a, d, c) +
                                     src(c, d, a, b) - src(d, c, a, b) - src(c, d, b, a) + src(d, c, b, a);
                    (*this)(a, b, c, d) = v / 8.0;
                }
    symmetry_ = Symmetry::RiemannLike;
}

double TensorValue::riemann_symmetry_defect() const {
    if (rank_ != 4) throw RankMismatch("Riemann symmetries require rank 4");
    const double scale = std::max(max_abs(), 1e-300);
    double worst = 0.0;
    const int n = dim_;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    const double v = (*this)(a, b, c, d);
                    worst = std::max({worst, std::abs(v + (*this)(b, a, c, d)), std::abs(v + (*this)(a, b, d, c)),
                                      std::abs(v - (*this)(c, d, a, b))});
                }
    return worst / scale;
}

void TensorValue::require_same_shape(const TensorValue& other, const char* op) const {
    if (rank_ != other.rank_ || dim_ != other.dim_)
        throw RankMismatch(fmt::format("{}: shape mismatch (rank {} dim {} vs rank {} dim {})", op, rank_, dim_,
                                       other.rank_, other.dim_));
}

TensorValue& TensorValue::operator+=(const TensorValue& other) {
    require_same_shape(other, "operator+=");
    if (symmetry_ == other.symmetry_) {
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
        return *this;
    }
    *this = untagged();
    const auto rhs = other.components();
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += rhs[k];
    return *this;
}

TensorValue& TensorValue::operator-=(const TensorValue& other) {
    require_same_shape(other, "operator-=");
    if (symmetry_ == other.symmetry_) {
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
        return *this;
    }
    *this = untagged();
    const auto rhs = other.components();
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= rhs[k];
    return *this;
}

TensorValue& TensorValue::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

TensorValue kulkarni_nomizu(const TensorValue& s, const TensorValue& t) {
    if (s.rank() != 2 || t.rank() != 2) throw RankMismatch("Kulkarni-Nomizu product needs two rank-2 tensors");
    if (s.dim() != t.dim()) throw RankMismatch("Kulkarni-Nomizu product: dimension mismatch");
    const int n = s.dim();
    TensorValue out(4, n, Symmetry::RiemannLike);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            for (int z = 0; z < n; ++z)
                for (int u = 0; u < n; ++u)
                    out(x, y, z, u) =
                        t(x, z) * s(y, u) + t(y, u) * s(x, z) - t(x, u) * s(y, z) - t(y, z) * s(x, u);
    return out;
}

TensorValue interior_product(const TensorValue& x, const TensorValue& t) {
    if (x.rank() != 1) throw RankMismatch("interior product needs a vector as first argument");
    if (t.rank() < 1) throw RankMismatch("interior product needs a tensor of rank >= 1");
    if (x.dim() != t.dim()) throw RankMismatch("interior product: dimension mismatch");
    const int n = t.dim();
    const int r = t.rank() - 1;
    TensorValue out(r, n);
    std::array<int, TensorValue::kMaxRank> idx{};
    std::array<int, TensorValue::kMaxRank> full{};
    for (std::size_t k = 0; k < out.size(); ++k) {
        decode_index(k, r, n, idx);
        std::copy_n(idx.begin(), r, full.begin() + 1);
        double acc = 0.0;
        for (int a = 0; a < n; ++a) {
            full[0] = a;
            acc += x(a) * t.at(std::span<const int>(full.data(), r + 1));
        }
        out.at(std::span<const int>(idx.data(), r)) = acc;
    }
    return out;
}

TensorValue metric_trace(const TensorValue& t, int a, int b, const Matrix& ginv) {
    if (a == b || a < 0 || b < 0 || a >= t.rank() || b >= t.rank())
        throw RankMismatch("metric_trace: invalid slot pair");
    const int n = t.dim();
    const int r = t.rank() - 2;
    TensorValue out(r, n);
    std::array<int, TensorValue::kMaxRank> idx{};
    std::array<int, TensorValue::kMaxRank> full{};
    for (std::size_t k = 0; k < out.size(); ++k) {
        decode_index(k, r, n, idx);
        int src = 0;
        for (int s = 0; s < t.rank(); ++s)
            if (s != a && s != b) full[s] = idx[src++];
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (ginv(i, j) == 0.0) continue;
                full[a] = i;
                full[b] = j;
                acc += ginv(i, j) * t.at(std::span<const int>(full.data(), t.rank()));
            }
        out.at(std::span<const int>(idx.data(), r)) = acc;
    }
    return out;
}

TensorValue outer(const TensorValue& a, const TensorValue& b) {
    if (a.rank() != 1 || b.rank() != 1 || a.dim() != b.dim()) throw RankMismatch("outer: need two vectors");
    const int n = a.dim();
    TensorValue out(2, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = a(i) * b(j);
    return out;
}

Matrix orthonormal_frame(const Matrix& g, std::span<const int> order) {
    const int n = static_cast<int>(g.rows());
    std::vector<int> ord(order.begin(), order.end());
    if (ord.empty())
        for (int i = 0; i < n; ++i) ord.push_back(i);
    if (static_cast<int>(ord.size()) != n) throw RankMismatch("orthonormal_frame: order has wrong length");
    Matrix frame = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        Eigen::VectorXd v = Eigen::VectorXd::Unit(n, ord[k]);
        for (int j = 0; j < k; ++j) {
            const Eigen::VectorXd e = frame.col(j);
            v -= (e.dot(g * v)) * e;
        }
        const double norm2 = v.dot(g * v);
        if (!(norm2 > 0.0)) throw RankMismatch("orthonormal_frame: metric not positive definite");
        frame.col(k) = v / std::sqrt(norm2);
    }
    return frame;
}

TensorValue frame_components(const TensorValue& t, const Matrix& frame) {
    const int n = t.dim();
    if (frame.rows() != n || frame.cols() != n) throw RankMismatch("frame_components: frame dimension mismatch");
    TensorValue cur = t.untagged();
    std::array<int, TensorValue::kMaxRank> idx{};
    for (int slot = 0; slot < t.rank(); ++slot) {
        TensorValue next(t.rank(), n);
        for (std::size_t k = 0; k < next.size(); ++k) {
            decode_index(k, t.rank(), n, idx);
            const int target = idx[slot];
            double acc = 0.0;
            for (int a = 0; a < n; ++a) {
                idx[slot] = a;
                acc += cur.at(std::span<const int>(idx.data(), t.rank())) * frame(a, target);
            }
            idx[slot] = target;
            next.at(std::span<const int>(idx.data(), t.rank())) = acc;
        }
        cur = std::move(next);
    }
    return cur;
}

double frame_max_abs(const TensorValue& t, const Matrix& g) {
    return frame_components(t, orthonormal_frame(g)).max_abs();
}

}  // namespace smms
