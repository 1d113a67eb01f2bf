#include "m2e/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "m2e/parallel.hpp"
#include "m2e/random.hpp"

namespace m2e {

void M2eConfig::validate(std::size_t view_count) const {
  if (view_count == 0) throw std::invalid_argument("at least one view is required");
  if (lambdas.size() != view_count) {
    throw std::invalid_argument("expected " + std::to_string(view_count) + " lambdas, got " +
                                std::to_string(lambdas.size()));
  }
  for (double l : lambdas) {
    if (!(l > 0.0) || !std::isfinite(l)) throw std::invalid_argument("lambdas must be positive");
  }
  if (rank < 1) throw std::invalid_argument("rank must be >= 1");
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be > 0");
  if (!(mu_growth >= 1.0)) throw std::invalid_argument("mu_growth must be >= 1");
  if (!(mu_max >= mu)) throw std::invalid_argument("mu_max must be >= mu");
  if (inner_steps < 1) throw std::invalid_argument("inner_steps must be >= 1");
  if (max_outer_iters < 1) throw std::invalid_argument("max_outer_iters must be >= 1");
  if (!(obj_rel_tol > 0.0) || !(residual_tol > 0.0)) {
    throw std::invalid_argument("tolerances must be > 0");
  }
  if (!view_seeds.empty() && view_seeds.size() != view_count) {
    throw std::invalid_argument("view_seeds must be empty or have one entry per view");
  }
}

double QuadraticBlock::value(const Matrix& x) const {
  return (x * a).cwiseProduct(x).sum() - b.cwiseProduct(x).sum();
}

Matrix QuadraticBlock::gradient(const Matrix& x) const { return 2.0 * x * a - b; }

Matrix QuadraticBlock::step(const Matrix& x, int steps) const {
  Matrix out = x;
  for (int s = 0; s < steps; ++s) out -= (2.0 * out * a - b) / lipschitz;
  return out;
}

double lipschitz_of(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw std::invalid_argument("lipschitz_of: matrix must be square and non-empty");
  }
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw std::invalid_argument("lipschitz_of: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  const double top = 2.0 * eig.eigenvalues().maxCoeff();
  if (!(top > 0.0) || !std::isfinite(top)) {
    throw std::runtime_error("lipschitz_of: non-positive Lipschitz constant");
  }
  return top;
}

namespace {

QuadraticBlock make_block(Matrix a, Matrix b) {
  QuadraticBlock block{std::move(a), std::move(b), 0.0};
  block.lipschitz = lipschitz_of(block.a);
  return block;
}

Matrix identity(Index r) { return Matrix::Identity(r, r); }

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace

QuadraticBlock h_block(const GraphViewTensor& x, const ViewState& s, double mu) {
  const Index r = s.h.cols();
  Matrix a = (s.f.transpose() * s.f).cwiseProduct(s.p.transpose() * s.p) + 0.5 * mu * identity(r);
  Matrix b = 2.0 * mttkrp(x.tensor(), 1, s.p, s.f) + mu * s.p - s.u;
  return make_block(std::move(a), std::move(b));
}

QuadraticBlock p_block(const GraphViewTensor& x, const ViewState& s, double mu) {
  const Index r = s.h.cols();
  Matrix a = (s.f.transpose() * s.f).cwiseProduct(s.h.transpose() * s.h) + 0.5 * mu * identity(r);
  Matrix b = 2.0 * mttkrp(x.tensor(), 2, s.h, s.f) + mu * s.h + s.u;
  return make_block(std::move(a), std::move(b));
}

QuadraticBlock f_block(const GraphViewTensor& x, const ViewState& s, double lambda,
                       const Matrix& consensus) {
  const Index r = s.h.cols();
  Matrix a = (s.p.transpose() * s.p).cwiseProduct(s.h.transpose() * s.h);
  Matrix b = 2.0 * mttkrp(x.tensor(), 3, s.h, s.p);
  if (lambda != 0.0) {
    a += lambda * identity(r);
    b += 2.0 * lambda * consensus;
  }
  return make_block(std::move(a), std::move(b));
}

QuadraticBlock shared_f_block(std::span<const GraphViewTensor> views,
                              std::span<const ViewState> states) {
  if (views.empty() || views.size() != states.size()) {
    throw std::invalid_argument("shared_f_block: need one state per view");
  }
  const Index r = states[0].h.cols();
  Matrix a = Matrix::Zero(r, r);
  Matrix b = Matrix::Zero(views[0].subject_count(), r);
  for (std::size_t v = 0; v < views.size(); ++v) {
    const ViewState& s = states[v];
    a += (s.p.transpose() * s.p).cwiseProduct(s.h.transpose() * s.h);
    b += 2.0 * mttkrp(views[v].tensor(), 3, s.h, s.p);
  }
  return make_block(std::move(a), std::move(b));
}

Matrix update_H(const GraphViewTensor& x, const ViewState& s, double mu, int inner_steps) {
  return h_block(x, s, mu).step(s.h, inner_steps);
}

Matrix update_P(const GraphViewTensor& x, const ViewState& s, double mu, int inner_steps) {
  return p_block(x, s, mu).step(s.p, inner_steps);
}

Matrix update_U(const ViewState& s, double mu) { return s.u + mu * (s.h - s.p); }

Matrix update_F_view(const GraphViewTensor& x, const ViewState& s, double lambda,
                     const Matrix& consensus, int inner_steps) {
  return f_block(x, s, lambda, consensus).step(s.f, inner_steps);
}

Matrix update_F_star(std::span<const Matrix> f_views, std::span<const double> lambdas) {
  if (f_views.empty()) throw std::invalid_argument("update_F_star: no views");
  if (f_views.size() != lambdas.size()) {
    throw std::invalid_argument("update_F_star: one lambda per view required");
  }
  Matrix sum = Matrix::Zero(f_views[0].rows(), f_views[0].cols());
  double weight = 0.0;
  for (std::size_t v = 0; v < f_views.size(); ++v) {
    if (f_views[v].rows() != sum.rows() || f_views[v].cols() != sum.cols()) {
      throw std::invalid_argument("update_F_star: subject factors differ in shape");
    }
    if (!(lambdas[v] > 0.0)) throw std::invalid_argument("update_F_star: lambdas must be positive");
    sum += lambdas[v] * f_views[v];
    weight += lambdas[v];
  }
  return sum / weight;
}

double objective_value(std::span<const GraphViewTensor> views, const M2eState& state,
                       std::span<const double> lambdas) {
  if (views.size() != state.views.size() || views.size() != lambdas.size()) {
    throw std::invalid_argument("objective_value: views, states and lambdas differ in count");
  }
  std::vector<double> terms(views.size());
  parallel_for(views.size(), [&](std::size_t v) {
    const ViewState& s = state.views[v];
    terms[v] = cp_residual_squared(views[v].tensor(), s.h, s.p, s.f) +
               lambdas[v] * (s.f - state.consensus).squaredNorm();
  });
  return std::accumulate(terms.begin(), terms.end(), 0.0);
}

double coupling_residual(const M2eState& state) {
  double worst = 0.0;
  for (const ViewState& s : state.views) {
    worst = std::max(worst, (s.h - s.p).norm() / std::max(1.0, s.h.norm()));
  }
  return worst;
}

std::string_view to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::node_h: return "H";
    case BlockKind::node_p: return "P";
    case BlockKind::subject_f: return "F";
    case BlockKind::shared_f: return "F_shared";
  }
  return "?";
}

namespace {

void validate_views(std::span<const GraphViewTensor> views) {
  if (views.empty()) throw std::invalid_argument("at least one view is required");
  const Index n = views[0].subject_count();
  for (std::size_t v = 1; v < views.size(); ++v) {
    if (views[v].subject_count() != n) {
      throw std::invalid_argument("view 0 has " + std::to_string(n) + " subjects but view " +
                                  std::to_string(v) + " has " +
                                  std::to_string(views[v].subject_count()));
    }
  }
}

}  // namespace

M2eState initialize_state(std::span<const GraphViewTensor> views, const M2eConfig& config) {
  validate_views(views);
  config.validate(views.size());
  M2eState state;
  state.mu = config.mu;
  state.views.resize(views.size());
  std::vector<Matrix> fs;
  for (std::size_t v = 0; v < views.size(); ++v) {
    Rng rng = config.view_seeds.empty() ? make_rng(config.seed, v)
                                        : make_rng(config.view_seeds[v], 0);
    ViewState& s = state.views[v];
    s.h = standard_normal(views[v].node_count(), config.rank, rng);
    s.f = standard_normal(views[v].subject_count(), config.rank, rng);
    s.p = s.h;
    s.u = Matrix::Zero(s.h.rows(), s.h.cols());
    fs.push_back(s.f);
  }
  state.consensus = update_F_star(fs, config.lambdas);
  return state;
}

namespace {

enum class Variant { consensus, shared, two_step };

struct ViewStepLog {
  std::vector<BlockStep> steps;
};

double final_objective(std::span<const GraphViewTensor> views, const M2eSolution& sol,
                       std::span<const double> lambdas, bool with_consensus) {
  double total = 0.0;
  for (std::size_t v = 0; v < views.size(); ++v) {
    const Matrix& h = sol.node_factors[v];
    total += cp_residual_squared(views[v].tensor(), h, h, sol.subject_factors[v]);
    if (with_consensus) total += lambdas[v] * (sol.subject_factors[v] - sol.consensus).squaredNorm();
  }
  return total;
}

void check_finite(const M2eState& state, int iteration) {
  for (std::size_t v = 0; v < state.views.size(); ++v) {
    const ViewState& s = state.views[v];
    if (!all_finite(s.h) || !all_finite(s.p) || !all_finite(s.u) || !all_finite(s.f)) {
      throw std::runtime_error("non-finite value in view " + std::to_string(v) +
                               " at iteration " + std::to_string(iteration));
    }
  }
  if (!all_finite(state.consensus)) {
    throw std::runtime_error("non-finite consensus embedding at iteration " +
                             std::to_string(iteration));
  }
}

M2eSolution run(std::span<const GraphViewTensor> views, const M2eConfig& config,
                const SolverHooks& hooks, Variant variant) {
  M2eState state = initialize_state(views, config);
  const std::size_t view_count = views.size();

  if (variant == Variant::shared) {
    for (ViewState& s : state.views) s.f = state.views[0].f;
    state.consensus = state.views[0].f;
  }

  // Weights entering the tracked objective: the shared and two-step
  // variants carry no consensus penalty while iterating.
  const std::vector<double> tracked_lambdas =
      variant == Variant::consensus ? config.lambdas : std::vector<double>(view_count, 0.0);
  const bool want_steps = static_cast<bool>(hooks.on_block_step);

  M2eSolution sol;
  double previous = objective_value(views, state, tracked_lambdas);
  for (int it = 1; it <= config.max_outer_iters; ++it) {
    std::vector<ViewStepLog> logs(view_count);
    const Matrix consensus = state.consensus;

    parallel_for(view_count, [&](std::size_t v) {
      ViewState& s = state.views[v];
      const GraphViewTensor& x = views[v];
      auto record = [&](BlockKind kind, const QuadraticBlock& block, const Matrix& before,
                        const Matrix& after) {
        if (want_steps) {
          logs[v].steps.push_back({kind, v, it, block.value(before), block.value(after)});
        }
      };

      {
        const QuadraticBlock block = h_block(x, s, state.mu);
        Matrix next = block.step(s.h, config.inner_steps);
        record(BlockKind::node_h, block, s.h, next);
        s.h = std::move(next);
      }
      {
        const QuadraticBlock block = p_block(x, s, state.mu);
        Matrix next = block.step(s.p, config.inner_steps);
        record(BlockKind::node_p, block, s.p, next);
        s.p = std::move(next);
      }
      s.u = update_U(s, state.mu);
      if (variant != Variant::shared) {
        const double lambda = variant == Variant::consensus ? config.lambdas[v] : 0.0;
        const QuadraticBlock block = f_block(x, s, lambda, consensus);
        Matrix next = block.step(s.f, config.inner_steps);
        record(BlockKind::subject_f, block, s.f, next);
        s.f = std::move(next);
      }
    });

    if (variant == Variant::shared) {
      const QuadraticBlock block = shared_f_block(views, state.views);
      Matrix next = block.step(state.views[0].f, config.inner_steps);
      if (want_steps) {
        logs[0].steps.push_back(
            {BlockKind::shared_f, 0, it, block.value(state.views[0].f), block.value(next)});
      }
      for (ViewState& s : state.views) s.f = next;
      state.consensus = std::move(next);
    } else {
      std::vector<Matrix> fs;
      fs.reserve(view_count);
      for (const ViewState& s : state.views) fs.push_back(s.f);
      state.consensus = update_F_star(fs, config.lambdas);
    }
    state.iteration = it;
    check_finite(state, it);

    const double objective = objective_value(views, state, tracked_lambdas);
    const double residual = coupling_residual(state);
    if (!std::isfinite(objective)) {
      throw std::runtime_error("non-finite objective at iteration " + std::to_string(it));
    }
    sol.objective_trace.push_back(objective);
    sol.residual_trace.push_back(residual);
    sol.iterations = it;

    if (want_steps) {
      for (const ViewStepLog& log : logs) {
        for (const BlockStep& step : log.steps) hooks.on_block_step(step);
      }
    }
    if (hooks.on_iteration) hooks.on_iteration(state);

    const double change =
        std::abs(previous - objective) / std::max(std::abs(previous), std::numeric_limits<double>::min());
    previous = objective;
    if (change < config.obj_rel_tol && residual < config.residual_tol) {
      sol.converged = true;
      break;
    }
    state.mu = std::min(state.mu * config.mu_growth, config.mu_max);
  }

  sol.consensus = state.consensus;
  for (const ViewState& s : state.views) {
    sol.node_factors.push_back(0.5 * (s.h + s.p));
    sol.subject_factors.push_back(s.f);
  }
  sol.final_objective =
      final_objective(views, sol, config.lambdas, variant != Variant::shared);
  return sol;
}

}  // namespace

M2eSolution m2e_fit(std::span<const GraphViewTensor> views, const M2eConfig& config,
                    const SolverHooks& hooks) {
  return run(views, config, hooks, Variant::consensus);
}

M2eSolution m2e_ds_fit(std::span<const GraphViewTensor> views, const M2eConfig& config,
                       const SolverHooks& hooks) {
  return run(views, config, hooks, Variant::shared);
}

M2eSolution m2e_ts_fit(std::span<const GraphViewTensor> views, const M2eConfig& config,
                       const SolverHooks& hooks) {
  return run(views, config, hooks, Variant::two_step);
}

}  // namespace m2e
