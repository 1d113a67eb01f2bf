#include "m2e/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace m2e {

namespace {

void require_mode(int mode) {
  if (mode < 1 || mode > 3) {
    throw std::invalid_argument("mode must be 1, 2 or 3 (got " + std::to_string(mode) + ")");
  }
}

std::size_t checked_volume(const std::array<Index, 3>& dims) {
  for (Index d : dims) {
    if (d <= 0) throw std::invalid_argument("tensor dimensions must be positive");
  }
  return static_cast<std::size_t>(dims[0] * dims[1] * dims[2]);
}

}  // namespace

Tensor3::Tensor3(Index d1, Index d2, Index d3) : dims_{d1, d2, d3} {
  data_.assign(checked_volume(dims_), 0.0);
}

Tensor3::Tensor3(std::array<Index, 3> dims, std::vector<double> data)
    : dims_(dims), data_(std::move(data)) {
  if (data_.size() != checked_volume(dims_)) {
    throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                " does not match dims");
  }
}

Index Tensor3::dim(int mode) const {
  require_mode(mode);
  return dims_[static_cast<std::size_t>(mode - 1)];
}

double Tensor3::at(Index i, Index j, Index k) const {
  if (i < 0 || j < 0 || k < 0 || i >= dims_[0] || j >= dims_[1] || k >= dims_[2]) {
    throw std::out_of_range("tensor index (" + std::to_string(i) + ", " + std::to_string(j) +
                            ", " + std::to_string(k) + ") out of range");
  }
  return (*this)(i, j, k);
}

Eigen::Map<const Matrix> Tensor3::slice(Index k) const {
  if (k < 0 || k >= dims_[2]) throw std::out_of_range("slice index out of range");
  return {data_.data() + k * dims_[0] * dims_[1], dims_[0], dims_[1]};
}

Eigen::Map<Matrix> Tensor3::slice(Index k) {
  if (k < 0 || k >= dims_[2]) throw std::out_of_range("slice index out of range");
  return {data_.data() + k * dims_[0] * dims_[1], dims_[0], dims_[1]};
}

void CpFactors::validate() const {
  const Index r = factors[0].cols();
  if (factors[1].cols() != r || factors[2].cols() != r) {
    throw std::invalid_argument("CP factor matrices must share the same column count");
  }
}

Matrix matricize(const Tensor3& t, int mode) {
  require_mode(mode);
  const auto [d1, d2, d3] = t.dims();
  switch (mode) {
    case 1:
      return Eigen::Map<const Matrix>(t.data().data(), d1, d2 * d3);
    case 2: {
      Matrix out(d2, d1 * d3);
      for (Index k = 0; k < d3; ++k) out.middleCols(k * d1, d1) = t.slice(k).transpose();
      return out;
    }
    default: {
      Matrix out(d3, d1 * d2);
      for (Index k = 0; k < d3; ++k) {
        out.row(k) = Eigen::Map<const Eigen::RowVectorXd>(t.slice(k).data(), d1 * d2);
      }
      return out;
    }
  }
}

Tensor3 refold(const Matrix& unfolded, int mode, const std::array<Index, 3>& dims) {
  require_mode(mode);
  Tensor3 t(dims[0], dims[1], dims[2]);
  const auto [d1, d2, d3] = dims;
  const Index rows = dims[static_cast<std::size_t>(mode - 1)];
  if (unfolded.rows() != rows || unfolded.cols() * rows != t.size()) {
    throw std::invalid_argument("unfolded matrix shape does not match target dims");
  }
  for (Index k = 0; k < d3; ++k) {
    for (Index j = 0; j < d2; ++j) {
      for (Index i = 0; i < d1; ++i) {
        switch (mode) {
          case 1: t(i, j, k) = unfolded(i, j + d2 * k); break;
          case 2: t(i, j, k) = unfolded(j, i + d1 * k); break;
          default: t(i, j, k) = unfolded(k, i + d1 * j); break;
        }
      }
    }
  }
  return t;
}

Matrix khatri_rao(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("khatri_rao: column counts differ (" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.cols()) + ")");
  }
  Matrix out(a.rows() * b.rows(), a.cols());
  for (Index r = 0; r < a.cols(); ++r) {
    for (Index ia = 0; ia < a.rows(); ++ia) {
      out.col(r).segment(ia * b.rows(), b.rows()) = a(ia, r) * b.col(r);
    }
  }
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("hadamard: shape mismatch");
  }
  return a.cwiseProduct(b);
}

Tensor3 cp_reconstruct(const CpFactors& f) {
  f.validate();
  const Matrix& a = f.factors[0];
  const Matrix& b = f.factors[1];
  const Matrix& c = f.factors[2];
  Tensor3 t(a.rows(), b.rows(), c.rows());
  for (Index k = 0; k < c.rows(); ++k) {
    t.slice(k) = (a * c.row(k).asDiagonal()) * b.transpose();
  }
  return t;
}

double frobenius_norm(const Tensor3& t) {
  return Eigen::Map<const Eigen::VectorXd>(t.data().data(), t.size()).norm();
}

double cp_residual_squared(const Tensor3& t, const Matrix& a, const Matrix& b, const Matrix& c) {
  const auto [d1, d2, d3] = t.dims();
  if (a.rows() != d1 || b.rows() != d2 || c.rows() != d3 || a.cols() != b.cols() ||
      a.cols() != c.cols()) {
    throw std::invalid_argument("cp_residual_squared: factor shapes do not match tensor");
  }
  double total = 0.0;
  Matrix scaled(d1, a.cols());
  for (Index k = 0; k < d3; ++k) {
    scaled.noalias() = a * c.row(k).asDiagonal();
    total += (t.slice(k) - scaled * b.transpose()).squaredNorm();
  }
  return total;
}

Matrix mttkrp(const Tensor3& t, int mode, const Matrix& lower, const Matrix& upper) {
  require_mode(mode);
  const auto [d1, d2, d3] = t.dims();
  const Index r = lower.cols();
  if (upper.cols() != r) throw std::invalid_argument("mttkrp: factor column counts differ");
  switch (mode) {
    case 1: {
      if (lower.rows() != d2 || upper.rows() != d3) {
        throw std::invalid_argument("mttkrp: mode-1 factor shapes do not match tensor");
      }
      Matrix out = Matrix::Zero(d1, r);
      for (Index k = 0; k < d3; ++k) {
        out.noalias() += (t.slice(k) * lower) * upper.row(k).asDiagonal();
      }
      return out;
    }
    case 2: {
      if (lower.rows() != d1 || upper.rows() != d3) {
        throw std::invalid_argument("mttkrp: mode-2 factor shapes do not match tensor");
      }
      Matrix out = Matrix::Zero(d2, r);
      for (Index k = 0; k < d3; ++k) {
        out.noalias() += (t.slice(k).transpose() * lower) * upper.row(k).asDiagonal();
      }
      return out;
    }
    default: {
      if (lower.rows() != d1 || upper.rows() != d2) {
        throw std::invalid_argument("mttkrp: mode-3 factor shapes do not match tensor");
      }
      Matrix out(d3, r);
      Matrix projected(d2, r);
      for (Index k = 0; k < d3; ++k) {
        projected.noalias() = t.slice(k).transpose() * lower;
        out.row(k) = projected.cwiseProduct(upper).colwise().sum();
      }
      return out;
    }
  }
}

SymmetryCheck check_partial_symmetry(const Tensor3& t, double tol) {
  const auto [d1, d2, d3] = t.dims();
  if (d1 != d2) {
    throw std::invalid_argument("partial symmetry needs square frontal slices (got " +
                                std::to_string(d1) + " x " + std::to_string(d2) + ")");
  }
  SymmetryCheck check;
  for (Index k = 0; k < d3; ++k) {
    const auto s = t.slice(k);
    const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
    if (asym > check.max_asymmetry) {
      check.max_asymmetry = asym;
      check.worst_slice = k;
    }
  }
  check.symmetric = check.max_asymmetry <= tol;
  return check;
}

namespace {

void require_square_finite(const Tensor3& t) {
  if (t.empty()) throw std::invalid_argument("graph tensor is empty");
  if (t.dims()[0] != t.dims()[1]) {
    throw std::invalid_argument("graph tensor slices must be square");
  }
  const auto data = t.data();
  for (std::size_t idx = 0; idx < data.size(); ++idx) {
    if (!std::isfinite(data[idx])) {
      const auto slice_size = static_cast<std::size_t>(t.dims()[0] * t.dims()[1]);
      throw std::invalid_argument("graph tensor has a non-finite entry in slice " +
                                  std::to_string(idx / slice_size));
    }
  }
}

}  // namespace

GraphViewTensor::GraphViewTensor(Tensor3 t, double tol) : tensor_(std::move(t)) {
  require_square_finite(tensor_);
  const SymmetryCheck check = check_partial_symmetry(tensor_, tol);
  if (!check.symmetric) {
    throw std::invalid_argument("slice " + std::to_string(check.worst_slice) +
                                " is not symmetric (max asymmetry " +
                                std::to_string(check.max_asymmetry) + ")");
  }
}

GraphViewTensor GraphViewTensor::symmetrized(Tensor3 t, double max_asymmetry) {
  require_square_finite(t);
  const SymmetryCheck check = check_partial_symmetry(t, max_asymmetry);
  if (!check.symmetric) {
    throw std::invalid_argument("slice " + std::to_string(check.worst_slice) +
                                " asymmetry " + std::to_string(check.max_asymmetry) +
                                " exceeds repair tolerance");
  }
  for (Index k = 0; k < t.dims()[2]; ++k) {
    auto s = t.slice(k);
    const Matrix sym = 0.5 * (s + s.transpose());
    s = sym;
  }
  return GraphViewTensor(std::move(t), 0.0);
}

}  // namespace m2e
