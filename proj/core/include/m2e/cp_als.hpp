#pragma once

#include <cstdint>
#include <vector>

#include "m2e/tensor.hpp"

namespace m2e {

struct AlsOptions {
  Index rank = 1;
  int max_iters = 500;
  /// Stop once the relative error changes by less than this between sweeps.
  double rel_tol = 1e-8;
  std::uint64_t seed = 0;
  /// Ridge added to the R x R Gram matrix before each least-squares solve.
  double ridge = 1e-10;

  void validate() const;
};

struct AlsResult {
  CpFactors factors;
  /// Relative error ||X - [[A,B,C]]||_F / ||X||_F after each sweep.
  std::vector<double> error_trace;
  int iterations = 0;
  bool converged = false;
  /// Set when the input was all zeros; factors are then zero.
  bool zero_input = false;
};

/// Rank-R CP decomposition by alternating least squares. Each sweep solves
/// the three factor blocks exactly (normal equations with the Gram formed as
/// a Hadamard product of the other factors' Grams), normalizing the columns
/// of the first two factors.
///
/// Throws std::invalid_argument on bad options or non-finite input, and
/// std::runtime_error if the iteration produces non-finite values.
AlsResult cp_als_fit(const Tensor3& t, const AlsOptions& opts);

/// ||t - [[f]]||_F / ||t||_F, or the absolute residual norm when t is zero.
double cp_relative_error(const Tensor3& t, const CpFactors& f);

}  // namespace m2e
