#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace smms {

using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Symmetry {
    None,
    Sym2,        // T_ij = T_ji, held by canonical (i <= j) storage
    RiemannLike  // T_ijkl = -T_jikl = -T_ijlk = T_klij, imposed at assembly
};

/// Pointwise value of a covariant tensor of rank 0..4 in coordinate components.
///
/// Components are stored densely, row-major in the index tuple. A Sym2 tensor
/// aliases (i, j) and (j, i) to the same slot, so it is symmetric by
/// construction; use components() for an expanded copy.
class TensorValue {
public:
    static constexpr int kMaxRank = 5;

    TensorValue() = default;
    TensorValue(int rank, int dim, Symmetry symmetry = Symmetry::None);

    static TensorValue scalar(double value);
    static TensorValue vector(const Eigen::VectorXd& v);
    /// Symmetrizes `m` as (m + m^T) / 2.
    static TensorValue sym2(const Matrix& m);
    static TensorValue matrix(const Matrix& m);
    /// From expanded row-major components of size dim^rank.
    static TensorValue from_components(int rank, int dim, std::span<const double> values);

    int rank() const noexcept { return rank_; }
    int dim() const noexcept { return dim_; }
    Symmetry symmetry() const noexcept { return symmetry_; }
    std::size_t size() const noexcept { return data_.size(); }

    template <class... I>
    double operator()(I... idx) const {
        const std::array<int, sizeof...(I)> a{static_cast<int>(idx)...};
        return data_[offset(a)];
    }
    template <class... I>
    double& operator()(I... idx) {
        const std::array<int, sizeof...(I)> a{static_cast<int>(idx)...};
        return data_[offset(a)];
    }
    double at(std::span<const int> idx) const { return data_[offset(idx)]; }
    double& at(std::span<const int> idx) { return data_[offset(idx)]; }

    /// Expanded row-major components (size dim^rank).
    std::vector<double> components() const;

    Matrix to_matrix() const;
    Eigen::VectorXd to_vector() const;

    double max_abs() const;
    bool all_finite() const;

    /// Same values with the symmetry tag dropped.
    TensorValue untagged() const;

    /// Projects onto the antisymmetric-pair / pair-exchange symmetric subspace
    /// and tags the result RiemannLike. Rank 4 only.
    void enforce_riemann_symmetries();

    /// max |T_ijkl + T_jikl|, |T_ijkl + T_ijlk|, |T_ijkl - T_klij| over max_abs.
    double riemann_symmetry_defect() const;

    TensorValue& operator+=(const TensorValue& other);
    TensorValue& operator-=(const TensorValue& other);
    TensorValue& operator*=(double s);

    friend TensorValue operator+(TensorValue a, const TensorValue& b) { return a += b; }
    friend TensorValue operator-(TensorValue a, const TensorValue& b) { return a -= b; }
    friend TensorValue operator*(TensorValue a, double s) { return a *= s; }
    friend TensorValue operator*(double s, TensorValue a) { return a *= s; }

private:
    std::size_t offset(std::span<const int> idx) const;
    void require_same_shape(const TensorValue& other, const char* op) const;

    int rank_ = 0;
    int dim_ = 0;
    Symmetry symmetry_ = Symmetry::None;
    std::vector<double> data_{0.0};
};

/// Decodes flat index `flat` into `rank` base-`dim` digits (row-major).
void decode_index(std::size_t flat, int rank, int dim, std::span<int> out);

/// (T kn S)(X,Y,Z,U) = T(X,Z)S(Y,U) + T(Y,U)S(X,Z) - T(X,U)S(Y,Z) - T(Y,Z)S(X,U).
/// Throws RankMismatch unless both are rank-2 of equal dimension.
TensorValue kulkarni_nomizu(const TensorValue& s, const TensorValue& t);

/// (iota_X T)(...) = T(X, ...): contracts the vector X into the first slot.
TensorValue interior_product(const TensorValue& x, const TensorValue& t);

/// Contracts slots `a` and `b` of `t` with the inverse metric.
TensorValue metric_trace(const TensorValue& t, int a, int b, const Matrix& ginv);

/// (a (x) b)_ij = a_i b_j.
TensorValue outer(const TensorValue& a, const TensorValue& b);

/// Gram-Schmidt on the coordinate basis, visiting coordinates in `order`
/// (identity if empty). Column i of the result is E_i in coordinate components.
Matrix orthonormal_frame(const Matrix& g, std::span<const int> order = {});

/// Components T(E_i1, ..., E_ir) in the frame whose columns are given.
TensorValue frame_components(const TensorValue& t, const Matrix& frame);

/// Largest absolute component in the g-orthonormal frame at the point where g was taken.
double frame_max_abs(const TensorValue& t, const Matrix& g);

}  // namespace smms
