#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "m2e/datagen.hpp"
#include "m2e/random.hpp"
#include "m2e/solver.hpp"

using namespace m2e;

namespace {

GraphViewTensor scalar_view(double x) { return GraphViewTensor{Tensor3({1, 1, 1}, {x})}; }

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

ViewState scalar_state(double h, double p, double u, double f) {
  return ViewState{scalar(h), scalar(p), scalar(u), scalar(f)};
}

GraphViewTensor random_symmetric_view(Index m, Index n, Index r, Rng& rng) {
  const Matrix h = standard_normal(m, r, rng);
  return GraphViewTensor{cp_reconstruct(CpFactors{{h, h, standard_normal(n, r, rng)}})};
}

ViewState random_state(Index m, Index n, Index r, Rng& rng) {
  ViewState s;
  s.h = standard_normal(m, r, rng);
  s.p = standard_normal(m, r, rng);
  s.u = standard_normal(m, r, rng);
  s.f = standard_normal(n, r, rng);
  return s;
}

double sum_sq(const Tensor3& t) {
  const double n = frobenius_norm(t);
  return n * n;
}

// Generator-scale data needs a penalty comparable to the data Gram; the
// spec default of 10 is far too weak to tie H to P here.
M2eConfig synthetic_config(std::size_t views, Index rank) {
  M2eConfig c;
  c.lambdas.assign(views, 1.0);
  c.rank = rank;
  c.mu = 1e4;
  return c;
}

}  // namespace

TEST(ConfigTest, Validation) {
  M2eConfig c;
  c.lambdas = {1.0};
  EXPECT_NO_THROW(c.validate(1));
  EXPECT_THROW(c.validate(2), std::invalid_argument);
  c.lambdas = {0.0};
  EXPECT_THROW(c.validate(1), std::invalid_argument);
  c.lambdas = {1.0};
  c.rank = 0;
  EXPECT_THROW(c.validate(1), std::invalid_argument);
  c.rank = 2;
  c.mu = 0.0;
  EXPECT_THROW(c.validate(1), std::invalid_argument);
  c.mu = 10.0;
  c.mu_growth = 0.5;
  EXPECT_THROW(c.validate(1), std::invalid_argument);
  c.mu_growth = 1.0;
  c.obj_rel_tol = 0.0;
  EXPECT_THROW(c.validate(1), std::invalid_argument);
}

TEST(QuadraticBlockTest, ScalarHUpdatePinned) {
  // X = [2], P = F = 1, mu = 2, U = 0, H = 0:
  // A = 1 + 1 = 2, B = 4 + 2 = 6, L = 4, H <- 0 - (0 - 6) / 4 = 1.5.
  const GraphViewTensor x = scalar_view(2.0);
  const ViewState s = scalar_state(0.0, 1.0, 0.0, 1.0);
  const QuadraticBlock block = h_block(x, s, 2.0);
  EXPECT_EQ(block.a(0, 0), 2.0);
  EXPECT_EQ(block.b(0, 0), 6.0);
  EXPECT_EQ(block.lipschitz, 4.0);
  EXPECT_EQ(update_H(x, s, 2.0)(0, 0), 1.5);
}

TEST(QuadraticBlockTest, ScalarFUpdatePinned) {
  // X = [2], H = P = 1, F = 0, lambda = 1, F* = 1:
  // A = 1 + 1 = 2, B = 4 + 2 = 6, L = 4, F <- 1.5.
  const GraphViewTensor x = scalar_view(2.0);
  const ViewState s = scalar_state(1.0, 1.0, 0.0, 0.0);
  const QuadraticBlock block = f_block(x, s, 1.0, scalar(1.0));
  EXPECT_EQ(block.a(0, 0), 2.0);
  EXPECT_EQ(block.b(0, 0), 6.0);
  EXPECT_EQ(update_F_view(x, s, 1.0, scalar(1.0))(0, 0), 1.5);
}

TEST(QuadraticBlockTest, ScalarPUpdatePinned) {
  // X = [2], H = F = 1, U = 1, mu = 2, P = 0:
  // A = 2, B = 4 + 2 + 1 = 7, L = 4, P <- 1.75.
  const ViewState s = scalar_state(1.0, 0.0, 1.0, 1.0);
  EXPECT_EQ(update_P(scalar_view(2.0), s, 2.0)(0, 0), 1.75);
}

TEST(QuadraticBlockTest, StationaryPointUnchanged) {
  Rng rng = make_rng(31);
  const GraphViewTensor x = random_symmetric_view(5, 4, 2, rng);
  ViewState s = random_state(5, 4, 2, rng);
  const QuadraticBlock block = h_block(x, s, 10.0);
  // 2 H A = B.
  s.h = 0.5 * block.b * block.a.inverse();
  const Matrix next = update_H(x, s, 10.0, 3);
  EXPECT_LT((next - s.h).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, s.h.cwiseAbs().maxCoeff()));
}

TEST(QuadraticBlockTest, StepsDoNotIncreaseSubObjective) {
  Rng rng = make_rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    const GraphViewTensor x = random_symmetric_view(6, 5, 3, rng);
    const ViewState s = random_state(6, 5, 3, rng);
    const Matrix consensus = standard_normal(5, 3, rng);
    const double mu = 0.5 + trial;
    const QuadraticBlock blocks[] = {h_block(x, s, mu), p_block(x, s, mu), f_block(x, s, 2.0, consensus)};
    const Matrix* starts[] = {&s.h, &s.p, &s.f};
    for (int b = 0; b < 3; ++b) {
      const double before = blocks[b].value(*starts[b]);
      const double after = blocks[b].value(blocks[b].step(*starts[b], 1 + trial % 3));
      EXPECT_LE(after, before + 1e-9 * std::max(1.0, std::abs(before)));
    }
  }
}

TEST(QuadraticBlockTest, PBlockMirrorsHBlockOnSymmetricData) {
  Rng rng = make_rng(33);
  const GraphViewTensor x = random_symmetric_view(6, 4, 3, rng);
  ViewState s = random_state(6, 4, 3, rng);
  s.p = s.h;
  const QuadraticBlock hb = h_block(x, s, 7.0);
  const QuadraticBlock pb = p_block(x, s, 7.0);
  EXPECT_LT((hb.a - pb.a).cwiseAbs().maxCoeff(), 1e-12 * hb.a.cwiseAbs().maxCoeff());
  ViewState flipped = s;
  flipped.u = -s.u;
  const QuadraticBlock hb_flipped = h_block(x, flipped, 7.0);
  EXPECT_LT((hb_flipped.b - pb.b).cwiseAbs().maxCoeff(), 1e-10 * pb.b.cwiseAbs().maxCoeff());
}

TEST(QuadraticBlockTest, GramUsesHadamardIdentity) {
  Rng rng = make_rng(34);
  const GraphViewTensor x = random_symmetric_view(4, 3, 2, rng);
  const ViewState s = random_state(4, 3, 2, rng);
  const Matrix d = khatri_rao(s.f, s.p);
  const QuadraticBlock block = h_block(x, s, 3.0);
  const Matrix expected_a = d.transpose() * d + 1.5 * Matrix::Identity(2, 2);
  const Matrix expected_b = 2.0 * matricize(x.tensor(), 1) * d + 3.0 * s.p - s.u;
  EXPECT_LT((block.a - expected_a).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((block.b - expected_b).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(UpdateUTest, Examples) {
  ViewState s;
  s.h = Matrix::Ones(2, 2);
  s.p = Matrix::Ones(2, 2);
  s.u = Matrix::Constant(2, 2, 0.5);
  EXPECT_EQ(update_U(s, 10.0), s.u);

  s.p = Matrix::Zero(2, 2);
  s.u = Matrix::Zero(2, 2);
  EXPECT_EQ(update_U(s, 10.0), Matrix::Constant(2, 2, 10.0));

  s.u = update_U(s, 10.0);
  EXPECT_EQ(update_U(s, 10.0), Matrix::Constant(2, 2, 20.0));
}

TEST(UpdateFStarTest, Examples) {
  const std::vector<Matrix> two{scalar(2.0), scalar(4.0)};
  EXPECT_EQ(update_F_star(two, std::vector<double>{1.0, 1.0})(0, 0), 3.0);
  const std::vector<Matrix> weighted{scalar(0.0), scalar(4.0)};
  EXPECT_EQ(update_F_star(weighted, std::vector<double>{1.0, 3.0})(0, 0), 3.0);
  const std::vector<Matrix> one{scalar(-1.25)};
  EXPECT_EQ(update_F_star(one, std::vector<double>{1.0})(0, 0), -1.25);
}

TEST(UpdateFStarTest, Errors) {
  EXPECT_THROW(update_F_star(std::vector<Matrix>{}, std::vector<double>{}), std::invalid_argument);
  const std::vector<Matrix> mixed{Matrix::Zero(2, 2), Matrix::Zero(3, 2)};
  EXPECT_THROW(update_F_star(mixed, std::vector<double>{1.0, 1.0}), std::invalid_argument);
  const std::vector<Matrix> ok{Matrix::Zero(2, 2), Matrix::Zero(2, 2)};
  EXPECT_THROW(update_F_star(ok, std::vector<double>{1.0, 0.0}), std::invalid_argument);
}

TEST(UpdateFStarTest, ScaleCovariance) {
  Rng rng = make_rng(35);
  std::vector<Matrix> fs{standard_normal(5, 3, rng), standard_normal(5, 3, rng), standard_normal(5, 3, rng)};
  const std::vector<double> lambdas{0.5, 2.0, 4.0};
  const Matrix base = update_F_star(fs, lambdas);
  for (Matrix& f : fs) f *= 4.0;  // power of two: exact in floating point
  EXPECT_EQ(update_F_star(fs, lambdas), 4.0 * base);
}

TEST(LipschitzTest, Examples) {
  EXPECT_NEAR(lipschitz_of(Matrix::Identity(3, 3)), 2.0, 1e-12);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 5.0;
  EXPECT_NEAR(lipschitz_of(d), 10.0, 1e-12);
}

TEST(LipschitzTest, MatchesQuadraticFormulaAtRankTwo) {
  Rng rng = make_rng(36);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix g = standard_normal(4, 2, rng);
    const Matrix a = g.transpose() * g + Matrix::Identity(2, 2);
    const double tr = a(0, 0) + a(1, 1);
    const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    const double top = 0.5 * (tr + std::sqrt(tr * tr - 4.0 * det));
    const double l = lipschitz_of(a);
    EXPECT_GE(l, 2.0);
    EXPECT_NEAR(l, 2.0 * top, 1e-6 * 2.0 * top);
  }
}

TEST(LipschitzTest, RejectsAsymmetric) {
  Matrix a = Matrix::Identity(2, 2);
  a(0, 1) = 0.5;
  EXPECT_THROW(lipschitz_of(a), std::invalid_argument);
  EXPECT_THROW(lipschitz_of(Matrix::Zero(2, 2)), std::runtime_error);
}

TEST(ObjectiveTest, ZeroForExactFactorization) {
  Rng rng = make_rng(37);
  const Matrix h = standard_normal(4, 2, rng);
  const Matrix f = standard_normal(3, 2, rng);
  const std::vector<GraphViewTensor> views{GraphViewTensor{cp_reconstruct(CpFactors{{h, h, f}})}};
  M2eState state;
  state.views.push_back(ViewState{h, h, Matrix::Zero(4, 2), f});
  state.consensus = f;
  EXPECT_LT(objective_value(views, state, std::vector<double>{1.0}), 1e-20);
}

TEST(ObjectiveTest, ZeroFactorsGiveTotalEnergy) {
  Rng rng = make_rng(38);
  std::vector<GraphViewTensor> views{random_symmetric_view(4, 3, 2, rng), random_symmetric_view(5, 3, 2, rng)};
  M2eState state;
  for (const GraphViewTensor& v : views) {
    const Index m = v.node_count();
    state.views.push_back(ViewState{Matrix::Zero(m, 2), Matrix::Zero(m, 2), Matrix::Zero(m, 2), Matrix::Zero(3, 2)});
  }
  state.consensus = Matrix::Zero(3, 2);
  const double expected = sum_sq(views[0].tensor()) + sum_sq(views[1].tensor());
  EXPECT_NEAR(objective_value(views, state, std::vector<double>{1.0, 2.0}), expected, 1e-12 * expected);
}

TEST(ObjectiveTest, MatchesModeThreeUnfoldingRoute) {
  Rng rng = make_rng(39);
  std::vector<GraphViewTensor> views{random_symmetric_view(5, 4, 3, rng), random_symmetric_view(6, 4, 3, rng)};
  const std::vector<double> lambdas{0.3, 2.5};
  M2eState state;
  state.views = {random_state(5, 4, 3, rng), random_state(6, 4, 3, rng)};
  state.consensus = standard_normal(4, 3, rng);
  double expected = 0.0;
  for (std::size_t v = 0; v < views.size(); ++v) {
    const ViewState& s = state.views[v];
    const Matrix j = khatri_rao(s.p, s.h);
    expected += (matricize(views[v].tensor(), 3) - s.f * j.transpose()).squaredNorm();
    expected += lambdas[v] * (s.f - state.consensus).squaredNorm();
  }
  EXPECT_NEAR(objective_value(views, state, lambdas), expected, 1e-10 * expected);
}

TEST(ObjectiveTest, ColumnPermutationInvariant) {
  Rng rng = make_rng(40);
  std::vector<GraphViewTensor> views{random_symmetric_view(5, 4, 3, rng)};
  M2eState state;
  state.views = {random_state(5, 4, 3, rng)};
  state.consensus = standard_normal(4, 3, rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(3);
  perm.indices() << 1, 2, 0;
  M2eState permuted = state;
  ViewState& s = permuted.views[0];
  s.h = s.h * perm;
  s.p = s.p * perm;
  s.u = s.u * perm;
  s.f = s.f * perm;
  permuted.consensus = permuted.consensus * perm;
  const std::vector<double> lambdas{1.5};
  const double a = objective_value(views, state, lambdas);
  EXPECT_NEAR(objective_value(views, permuted, lambdas), a, 1e-12 * a);
}

TEST(FStarOptimalityTest, RandomPerturbationIncreasesConsensusSum) {
  Rng rng = make_rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<Matrix> fs{standard_normal(6, 2, rng), standard_normal(6, 2, rng)};
    const std::vector<double> lambdas{0.1 + trial, 3.0};
    const Matrix star = update_F_star(fs, lambdas);
    auto cost = [&](const Matrix& c) {
      return lambdas[0] * (fs[0] - c).squaredNorm() + lambdas[1] * (fs[1] - c).squaredNorm();
    };
    Matrix dir = standard_normal(6, 2, rng);
    dir *= 1e-3 / dir.norm();
    EXPECT_GT(cost(star + dir), cost(star));
  }
}

TEST(M2eFitTest, RecoversSingleViewRankTwo) {
  Rng rng = make_rng(42);
  const Matrix h = standard_normal(10, 2, rng);
  const Matrix f = standard_normal(12, 2, rng);
  const std::vector<GraphViewTensor> views{GraphViewTensor{cp_reconstruct(CpFactors{{h, h, f}})}};
  M2eConfig c;
  c.lambdas = {1.0};
  c.rank = 2;
  c.mu = 1000.0;
  c.inner_steps = 5;
  c.max_outer_iters = 2000;
  c.obj_rel_tol = 1e-9;
  c.residual_tol = 1e-6;
  c.seed = 3;
  const M2eSolution sol = m2e_fit(views, c);
  EXPECT_LT(sol.final_objective / sum_sq(views[0].tensor()), 1e-3);
  EXPECT_LT(sol.residual_trace.back(), 1e-3);
}

TEST(M2eFitTest, TracesHaveIterationLength) {
  const SyntheticDataset data = generate(SyntheticSpec{});
  M2eConfig c = synthetic_config(2, 4);
  c.max_outer_iters = 40;
  const M2eSolution sol = m2e_fit(data.views, c);
  EXPECT_EQ(sol.objective_trace.size(), static_cast<std::size_t>(sol.iterations));
  EXPECT_EQ(sol.residual_trace.size(), static_cast<std::size_t>(sol.iterations));
  EXPECT_EQ(sol.consensus.rows(), 40);
  EXPECT_EQ(sol.consensus.cols(), 4);
  ASSERT_EQ(sol.node_factors.size(), 2u);
  EXPECT_EQ(sol.node_factors[0].rows(), 20);
}

TEST(M2eFitTest, ConvergedImpliesResidualWithinTolerance) {
  SyntheticSpec spec;
  spec.noise_sigma = 0.0;
  const SyntheticDataset data = generate(spec);
  M2eConfig c = synthetic_config(2, 4);
  c.obj_rel_tol = 1e-4;
  c.max_outer_iters = 2000;
  const M2eSolution sol = m2e_fit(data.views, c);
  if (sol.converged) {
    EXPECT_LE(sol.residual_trace.back(), c.residual_tol);
    EXPECT_LT(sol.iterations, c.max_outer_iters + 1);
  }
}

TEST(M2eFitTest, ObjectiveNonIncreasingAfterThirdIteration) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    const SyntheticDataset data = generate(spec);
    M2eConfig c = synthetic_config(2, 4);
    c.seed = seed;
    c.max_outer_iters = 300;
    const M2eSolution sol = m2e_fit(data.views, c);
    for (std::size_t i = 3; i < sol.objective_trace.size(); ++i) {
      EXPECT_LE(sol.objective_trace[i], sol.objective_trace[i - 1] * (1.0 + 1e-6))
          << "seed " << seed << " iteration " << i + 1;
    }
  }
}

TEST(M2eFitTest, BlockStepsDescend) {
  const SyntheticDataset data = generate(SyntheticSpec{});
  M2eConfig c = synthetic_config(2, 4);
  c.mu = 10.0;  // the weak default penalty still gives descent per block
  c.max_outer_iters = 60;
  int steps = 0;
  SolverHooks hooks;
  hooks.on_block_step = [&](const BlockStep& s) {
    ++steps;
    EXPECT_LE(s.after, s.before + 1e-9 * std::max(1.0, std::abs(s.before)))
        << to_string(s.kind) << " view " << s.view << " iteration " << s.iteration;
  };
  m2e_fit(data.views, c, hooks);
  EXPECT_EQ(steps, 60 * 2 * 3);
}

TEST(M2eFitTest, DeterministicTraces) {
  const SyntheticDataset data = generate(SyntheticSpec{});
  M2eConfig c = synthetic_config(2, 3);
  c.max_outer_iters = 50;
  c.seed = 9;
  const M2eSolution a = m2e_fit(data.views, c);
  const M2eSolution b = m2e_fit(data.views, c);
  EXPECT_EQ(a.objective_trace, b.objective_trace);
  EXPECT_EQ(a.residual_trace, b.residual_trace);
  EXPECT_EQ(a.consensus, b.consensus);
}

TEST(M2eFitTest, ThreadCountDoesNotChangeResult) {
  const SyntheticDataset data = generate(SyntheticSpec{});
  M2eConfig c = synthetic_config(2, 3);
  c.max_outer_iters = 30;
  setenv("M2E_NUM_THREADS", "1", 1);
  const M2eSolution serial = m2e_fit(data.views, c);
  setenv("M2E_NUM_THREADS", "4", 1);
  const M2eSolution threaded = m2e_fit(data.views, c);
  unsetenv("M2E_NUM_THREADS");
  EXPECT_EQ(serial.objective_trace, threaded.objective_trace);
  EXPECT_EQ(serial.consensus, threaded.consensus);
}

TEST(M2eFitTest, IdenticalViewsWithIdenticalSeedsStayIdentical) {
  Rng rng = make_rng(43);
  const GraphViewTensor view = random_symmetric_view(6, 8, 2, rng);
  const std::vector<GraphViewTensor> views{view, view};
  M2eConfig c;
  c.lambdas = {1.0, 1.0};
  c.rank = 2;
  c.max_outer_iters = 30;
  c.view_seeds = {5, 5};
  SolverHooks hooks;
  int checked = 0;
  hooks.on_iteration = [&](const M2eState& s) {
    ++checked;
    EXPECT_LT((s.views[0].f - s.views[1].f).cwiseAbs().maxCoeff(), 1e-8);
  };
  m2e_fit(views, c, hooks);
  EXPECT_EQ(checked, 30);
}

TEST(M2eFitTest, RejectsMismatchedSubjects) {
  Rng rng = make_rng(44);
  const std::vector<GraphViewTensor> views{random_symmetric_view(4, 5, 2, rng), random_symmetric_view(4, 6, 2, rng)};
  M2eConfig c;
  c.lambdas = {1.0, 1.0};
  try {
    m2e_fit(views, c);
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("view 1"), std::string::npos);
  }
}

TEST(M2eFitTest, AllowsDifferentNodeCounts) {
  Rng rng = make_rng(45);
  const std::vector<GraphViewTensor> views{random_symmetric_view(4, 5, 2, rng), random_symmetric_view(7, 5, 2, rng)};
  M2eConfig c;
  c.lambdas = {1.0, 1.0};
  c.max_outer_iters = 5;
  const M2eSolution sol = m2e_fit(views, c);
  EXPECT_EQ(sol.node_factors[1].rows(), 7);
}

TEST(M2eFitTest, NonFiniteIterateReportsIteration) {
  Tensor3 t(2, 2, 1);
  t(0, 0, 0) = 1e300;
  t(1, 1, 0) = 1e300;
  const std::vector<GraphViewTensor> views{GraphViewTensor{t}};
  M2eConfig c;
  c.lambdas = {1.0};
  c.rank = 1;
  EXPECT_THROW(m2e_fit(views, c), std::runtime_error);
}

TEST(VariantTest, SharedMatchesConsensusForOneViewWithTinyLambda) {
  const SyntheticDataset data = generate(SyntheticSpec{.views = 1});
  M2eConfig c = synthetic_config(1, 3);
  c.lambdas = {1e-12};
  c.max_outer_iters = 100;
  const M2eSolution m2e = m2e_fit(data.views, c);
  const M2eSolution ds = m2e_ds_fit(data.views, c);
  EXPECT_NEAR(ds.final_objective, m2e.final_objective, 1e-3 * m2e.final_objective);
}

TEST(VariantTest, TwoStepSingleViewConsensusIsViewFactor) {
  const SyntheticDataset data = generate(SyntheticSpec{.views = 1});
  M2eConfig c = synthetic_config(1, 3);
  c.max_outer_iters = 50;
  const M2eSolution ts = m2e_ts_fit(data.views, c);
  EXPECT_EQ(ts.consensus, ts.subject_factors[0]);
}

TEST(VariantTest, TwoStepIdenticalViewsAgree) {
  Rng rng = make_rng(46);
  const GraphViewTensor view = random_symmetric_view(6, 8, 2, rng);
  const std::vector<GraphViewTensor> views{view, view};
  M2eConfig c;
  c.lambdas = {1.0, 1.0};
  c.rank = 2;
  c.max_outer_iters = 40;
  c.view_seeds = {7, 7};
  const M2eSolution ts = m2e_ts_fit(views, c);
  EXPECT_EQ(ts.subject_factors[0], ts.subject_factors[1]);
  EXPECT_EQ(ts.consensus, ts.subject_factors[0]);
}

TEST(VariantTest, SharedRecoversSharedFactorData) {
  Rng rng = make_rng(47);
  const Matrix f = standard_normal(15, 2, rng);
  std::vector<GraphViewTensor> views;
  double energy = 0.0;
  for (int v = 0; v < 2; ++v) {
    const Matrix h = standard_normal(8, 2, rng);
    views.emplace_back(cp_reconstruct(CpFactors{{h, h, f}}));
    energy += sum_sq(views.back().tensor());
  }
  M2eConfig c;
  c.lambdas = {1.0, 1.0};
  c.rank = 2;
  c.mu = 1000.0;
  c.inner_steps = 5;
  c.max_outer_iters = 2000;
  c.obj_rel_tol = 1e-10;
  c.residual_tol = 1e-8;
  c.seed = 2;
  const M2eSolution ds = m2e_ds_fit(views, c);
  EXPECT_LT(ds.final_objective / energy, 1e-3);
  EXPECT_EQ(ds.subject_factors[0], ds.subject_factors[1]);
  EXPECT_EQ(ds.consensus, ds.subject_factors[0]);
}
