#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace m2e {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;

/// Dense third-order tensor of doubles.
///
/// Storage is a single contiguous buffer with the first index varying
/// fastest: element (i, j, k) lives at i + I1 * (j + I2 * k). Indices are
/// 0-based in the C++ API. With this layout every frontal slice (fixed k) is
/// an I1 x I2 column-major block, and the mode-1 unfolding is the raw buffer
/// viewed as an I1 x (I2 * I3) matrix.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(Index d1, Index d2, Index d3);
  Tensor3(std::array<Index, 3> dims, std::vector<double> data);

  const std::array<Index, 3>& dims() const noexcept { return dims_; }
  /// Extent of `mode` (1, 2 or 3).
  Index dim(int mode) const;
  Index size() const noexcept { return static_cast<Index>(data_.size()); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(Index i, Index j, Index k) noexcept {
    return data_[static_cast<std::size_t>(i + dims_[0] * (j + dims_[1] * k))];
  }
  double operator()(Index i, Index j, Index k) const noexcept {
    return data_[static_cast<std::size_t>(i + dims_[0] * (j + dims_[1] * k))];
  }
  /// Bounds-checked access; throws std::out_of_range.
  double at(Index i, Index j, Index k) const;

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  /// Frontal slice k as an I1 x I2 matrix view.
  Eigen::Map<const Matrix> slice(Index k) const;
  Eigen::Map<Matrix> slice(Index k);

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  std::array<Index, 3> dims_{0, 0, 0};
  std::vector<double> data_;
};

/// Factor matrices of a rank-R CP model: factors[m] is I_{m+1} x R.
struct CpFactors {
  std::array<Matrix, 3> factors;

  Index rank() const noexcept { return factors[0].cols(); }
  /// Throws std::invalid_argument unless all three share the column count.
  void validate() const;
};

/// Mode-m unfolding (m in {1,2,3}). Element (i1,i2,i3) lands at row i_m and
/// column sum_{p != m} i_p * J_p, where the lower non-mode index varies
/// fastest.
Matrix matricize(const Tensor3& t, int mode);

/// Inverse of matricize for a tensor of shape `dims`.
Tensor3 refold(const Matrix& unfolded, int mode, const std::array<Index, 3>& dims);

/// Column-wise Kronecker product. Row index is ia * b.rows() + ib, so b's
/// index varies fastest, matching matricize: X_(3) = C (B (.) A)^T.
Matrix khatri_rao(const Matrix& a, const Matrix& b);

Matrix hadamard(const Matrix& a, const Matrix& b);

/// sum_r a_r o b_r o c_r.
Tensor3 cp_reconstruct(const CpFactors& f);

double frobenius_norm(const Tensor3& t);

/// ||t - [[a, b, c]]||_F^2 evaluated slice by slice, without forming the
/// reconstruction.
double cp_residual_squared(const Tensor3& t, const Matrix& a, const Matrix& b, const Matrix& c);

/// Matricized tensor times Khatri-Rao product, X_(m) (upper (.) lower), where
/// `lower` and `upper` are the factors of the two remaining modes in
/// increasing mode order. For mode 1 that is (B, C), for mode 2 (A, C), for
/// mode 3 (A, B). Never materializes the Khatri-Rao product.
Matrix mttkrp(const Tensor3& t, int mode, const Matrix& lower, const Matrix& upper);

struct SymmetryCheck {
  bool symmetric = true;
  double max_asymmetry = 0.0;
  Index worst_slice = 0;
};

/// Checks every frontal slice for |t(i,j,n) - t(j,i,n)| <= tol.
/// Throws std::invalid_argument if the first two dims differ.
SymmetryCheck check_partial_symmetry(const Tensor3& t, double tol);

/// Default tolerance used when validating graph tensors.
inline constexpr double kSymmetryTolerance = 1e-8;
/// Largest asymmetry that loaders repair by averaging with the transpose.
inline constexpr double kLoaderRepairTolerance = 1e-6;

/// One view's N symmetric M x M affinity matrices stacked as an M x M x N
/// tensor. Construction validates squareness, finiteness and slice symmetry.
class GraphViewTensor {
 public:
  /// Throws std::invalid_argument if the tensor is not square in modes 1-2,
  /// has non-finite entries, or a slice is asymmetric beyond `tol`.
  explicit GraphViewTensor(Tensor3 t, double tol = kSymmetryTolerance);

  /// Replaces every slice by (W + W^T) / 2 when its asymmetry is at most
  /// `max_asymmetry`; otherwise throws, naming the offending slice.
  static GraphViewTensor symmetrized(Tensor3 t, double max_asymmetry = kLoaderRepairTolerance);

  const Tensor3& tensor() const noexcept { return tensor_; }
  Index node_count() const noexcept { return tensor_.dims()[0]; }
  Index subject_count() const noexcept { return tensor_.dims()[2]; }
  Eigen::Map<const Matrix> slice(Index n) const { return tensor_.slice(n); }

 private:
  Tensor3 tensor_;
};

}  // namespace m2e
