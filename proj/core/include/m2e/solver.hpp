#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "m2e/tensor.hpp"

namespace m2e {

/// Settings of the consensus embedding solver.
struct M2eConfig {
  /// One positive weight per view.
  std::vector<double> lambdas;
  Index rank = 2;
  /// ADMM penalty and its geometric schedule mu <- min(mu * mu_growth, mu_max).
  double mu = 10.0;
  double mu_growth = 1.0;
  double mu_max = 1e6;
  /// Proximal gradient steps per block per outer iteration.
  int inner_steps = 1;
  int max_outer_iters = 500;
  double obj_rel_tol = 1e-6;
  double residual_tol = 1e-3;
  std::uint64_t seed = 0;
  /// Optional per-view initialization seeds. When empty, view v draws from
  /// stream v of `seed`.
  std::vector<std::uint64_t> view_seeds;

  /// Throws std::invalid_argument on any violated invariant.
  void validate(std::size_t view_count) const;
};

/// Per-view iterate: node factor H, its auxiliary copy P, the multiplier U
/// (all M x R) and the subject factor F (N x R).
struct ViewState {
  Matrix h;
  Matrix p;
  Matrix u;
  Matrix f;
};

struct M2eState {
  std::vector<ViewState> views;
  /// Consensus embedding F* (N x R).
  Matrix consensus;
  double mu = 10.0;
  int iteration = 0;
};

struct M2eSolution {
  Matrix consensus;
  /// (H + P) / 2 per view.
  std::vector<Matrix> node_factors;
  std::vector<Matrix> subject_factors;
  std::vector<double> objective_trace;
  /// max_v ||H - P||_F / max(1, ||H||_F) per iteration.
  std::vector<double> residual_trace;
  /// Consensus objective re-evaluated with the symmetrized node factors in
  /// both node slots.
  double final_objective = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Convex quadratic block subproblem  min_X tr(X A X^T) - tr(B^T X)  with
/// A symmetric positive definite. Its gradient 2XA - B is Lipschitz with
/// constant equal to the largest eigenvalue of 2A.
struct QuadraticBlock {
  Matrix a;
  Matrix b;
  double lipschitz = 0.0;

  double value(const Matrix& x) const;
  Matrix gradient(const Matrix& x) const;
  /// `steps` iterations of x <- x - (2xA - B) / L.
  Matrix step(const Matrix& x, int steps) const;
};

/// Largest eigenvalue of 2A for a symmetric positive semidefinite R x R
/// matrix. Throws std::invalid_argument if A is not symmetric (relative
/// tolerance 1e-8) and std::runtime_error if the result is not positive.
double lipschitz_of(const Matrix& a);

/// H-subproblem of the augmented Lagrangian with D = F (.) P:
/// A = D^T D + (mu/2) I,  B = 2 X_(1) D + mu P - U.
QuadraticBlock h_block(const GraphViewTensor& x, const ViewState& s, double mu);

/// P-subproblem with E = F (.) H:
/// A = E^T E + (mu/2) I,  B = 2 X_(2) E + mu H + U.
QuadraticBlock p_block(const GraphViewTensor& x, const ViewState& s, double mu);

/// F-subproblem with J = P (.) H:
/// A = J^T J + lambda I,  B = 2 X_(3) J + 2 lambda F*.
/// With lambda == 0 the consensus term drops out.
QuadraticBlock f_block(const GraphViewTensor& x, const ViewState& s, double lambda,
                       const Matrix& consensus);

/// Subject-factor subproblem shared by all views:
/// A = sum_v J_v^T J_v,  B = 2 sum_v X_(3)^v J_v.
QuadraticBlock shared_f_block(std::span<const GraphViewTensor> views,
                              std::span<const ViewState> states);

Matrix update_H(const GraphViewTensor& x, const ViewState& s, double mu, int inner_steps = 1);
Matrix update_P(const GraphViewTensor& x, const ViewState& s, double mu, int inner_steps = 1);
/// U + mu (H - P).
Matrix update_U(const ViewState& s, double mu);
Matrix update_F_view(const GraphViewTensor& x, const ViewState& s, double lambda,
                     const Matrix& consensus, int inner_steps = 1);

/// sum_v lambda_v F_v / sum_v lambda_v. Throws std::invalid_argument on an
/// empty list, mismatched shapes or a non-positive weight.
Matrix update_F_star(std::span<const Matrix> f_views, std::span<const double> lambdas);

/// sum_v ||X_v - [[H_v, P_v, F_v]]||^2 + sum_v lambda_v ||F_v - F*||^2.
double objective_value(std::span<const GraphViewTensor> views, const M2eState& state,
                       std::span<const double> lambdas);

/// max_v ||H_v - P_v||_F / max(1, ||H_v||_F).
double coupling_residual(const M2eState& state);

enum class BlockKind { node_h, node_p, subject_f, shared_f };

std::string_view to_string(BlockKind kind);

/// Sub-objective value of one block before and after its proximal steps.
struct BlockStep {
  BlockKind kind = BlockKind::node_h;
  std::size_t view = 0;
  int iteration = 0;
  double before = 0.0;
  double after = 0.0;
};

/// Optional callbacks. Both run on the calling thread, in view order, after
/// each outer iteration completes.
struct SolverHooks {
  std::function<void(const BlockStep&)> on_block_step;
  std::function<void(const M2eState&)> on_iteration;
};

/// H, F ~ N(0, 1) from each view's stream, P = H, U = 0, F* the weighted
/// mean of the F_v.
M2eState initialize_state(std::span<const GraphViewTensor> views, const M2eConfig& config);

/// Consensus embedding: each view keeps its own subject factor, softly tied
/// to F* through lambda_v.
M2eSolution m2e_fit(std::span<const GraphViewTensor> views, const M2eConfig& config,
                    const SolverHooks& hooks = {});

/// Directly shared variant: one subject factor for all views, no consensus
/// penalty. lambdas are validated but unused.
M2eSolution m2e_ds_fit(std::span<const GraphViewTensor> views, const M2eConfig& config,
                       const SolverHooks& hooks = {});

/// Two-step variant: per-view factorizations without the consensus term,
/// followed by F* = weighted mean of the per-view subject factors.
M2eSolution m2e_ts_fit(std::span<const GraphViewTensor> views, const M2eConfig& config,
                       const SolverHooks& hooks = {});

}  // namespace m2e
