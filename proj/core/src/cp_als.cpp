#include "m2e/cp_als.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "m2e/random.hpp"

namespace m2e {

void AlsOptions::validate() const {
  if (rank < 1) throw std::invalid_argument("ALS rank must be >= 1");
  if (max_iters < 1) throw std::invalid_argument("ALS max_iters must be >= 1");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("ALS rel_tol must be > 0");
  if (!(ridge >= 0.0)) throw std::invalid_argument("ALS ridge must be >= 0");
}

double cp_relative_error(const Tensor3& t, const CpFactors& f) {
  f.validate();
  const double residual = std::sqrt(cp_residual_squared(t, f.factors[0], f.factors[1], f.factors[2]));
  const double norm = frobenius_norm(t);
  return norm > 0.0 ? residual / norm : residual;
}

namespace {

// Solves X * gram = rhs for X with gram symmetric positive (semi)definite.
Matrix solve_gram(const Matrix& gram, const Matrix& rhs) {
  Eigen::LDLT<Matrix> ldlt(gram);
  return ldlt.solve(rhs.transpose()).transpose();
}

void normalize_columns(Matrix& m) {
  for (Index r = 0; r < m.cols(); ++r) {
    const double n = m.col(r).norm();
    if (n > 0.0) m.col(r) /= n;
  }
}

}  // namespace

AlsResult cp_als_fit(const Tensor3& t, const AlsOptions& opts) {
  opts.validate();
  if (t.empty()) throw std::invalid_argument("cp_als_fit: empty tensor");
  for (double v : t.data()) {
    if (!std::isfinite(v)) throw std::invalid_argument("cp_als_fit: tensor has non-finite entries");
  }

  const auto dims = t.dims();
  AlsResult result;
  const double norm = frobenius_norm(t);
  if (norm == 0.0) {
    for (int m = 0; m < 3; ++m) result.factors.factors[m] = Matrix::Zero(dims[m], opts.rank);
    result.error_trace.push_back(0.0);
    result.iterations = 1;
    result.converged = true;
    result.zero_input = true;
    return result;
  }

  Rng rng = make_rng(opts.seed);
  auto& [a, b, c] = result.factors.factors;
  a = standard_normal(dims[0], opts.rank, rng);
  b = standard_normal(dims[1], opts.rank, rng);
  c = standard_normal(dims[2], opts.rank, rng);

  const Matrix ridge = opts.ridge * Matrix::Identity(opts.rank, opts.rank);
  double previous = cp_relative_error(t, result.factors);
  for (int it = 0; it < opts.max_iters; ++it) {
    a = solve_gram((b.transpose() * b).cwiseProduct(c.transpose() * c) + ridge, mttkrp(t, 1, b, c));
    normalize_columns(a);
    b = solve_gram((a.transpose() * a).cwiseProduct(c.transpose() * c) + ridge, mttkrp(t, 2, a, c));
    normalize_columns(b);
    c = solve_gram((a.transpose() * a).cwiseProduct(b.transpose() * b) + ridge, mttkrp(t, 3, a, b));

    const double err = cp_relative_error(t, result.factors);
    if (!std::isfinite(err)) {
      throw std::runtime_error("cp_als_fit: non-finite error at iteration " + std::to_string(it + 1));
    }
    result.error_trace.push_back(err);
    result.iterations = it + 1;
    if (std::abs(previous - err) < opts.rel_tol) {
      result.converged = true;
      break;
    }
    previous = err;
  }
  return result;
}

}  // namespace m2e
