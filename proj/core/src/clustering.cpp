#include "m2e/clustering.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "m2e/parallel.hpp"
#include "m2e/random.hpp"

namespace m2e {

void KMeansOptions::validate(Index point_count) const {
  if (k <= 0) throw std::invalid_argument("K must be positive");
  if (k > point_count) {
    throw std::invalid_argument("K = " + std::to_string(k) + " exceeds the number of points " +
                                std::to_string(point_count));
  }
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
}

double inertia_of(const Matrix& points, std::span<const int> labels, const Matrix& centroids) {
  double total = 0.0;
  for (Index i = 0; i < points.rows(); ++i) {
    total += (points.row(i) - centroids.row(labels[static_cast<std::size_t>(i)] - 1)).squaredNorm();
  }
  return total;
}

namespace {

// Returns true if any label changed.
bool assign(const Matrix& points, const Matrix& centroids, std::vector<int>& labels) {
  bool changed = false;
  for (Index i = 0; i < points.rows(); ++i) {
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < centroids.rows(); ++c) {
      const double d = (points.row(i) - centroids.row(c)).squaredNorm();
      if (d < best_dist) {
        best_dist = d;
        best = static_cast<int>(c);
      }
    }
    auto& slot = labels[static_cast<std::size_t>(i)];
    if (slot != best + 1) {
      slot = best + 1;
      changed = true;
    }
  }
  return changed;
}

void update_centroids(const Matrix& points, std::vector<int>& labels, Matrix& centroids) {
  const Index k = centroids.rows();
  for (;;) {
    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < points.rows(); ++i) {
      const int c = labels[static_cast<std::size_t>(i)] - 1;
      sums.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    Index empty = -1;
    for (Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      } else if (empty < 0) {
        empty = c;
      }
    }
    if (empty < 0) return;

    Index farthest = -1;
    double far_dist = 0.0;
    for (Index i = 0; i < points.rows(); ++i) {
      const int c = labels[static_cast<std::size_t>(i)] - 1;
      if (counts[static_cast<std::size_t>(c)] < 2) continue;
      const double d = (points.row(i) - centroids.row(c)).squaredNorm();
      if (d > far_dist) {
        far_dist = d;
        farthest = i;
      }
    }
    if (farthest < 0) return;  // every point coincides with its centroid
    labels[static_cast<std::size_t>(farthest)] = static_cast<int>(empty) + 1;
  }
}

}  // namespace

KMeansRun kmeans_single(const Matrix& points, int k, int max_iters, std::uint64_t seed) {
  KMeansOptions{k, 1, max_iters, seed}.validate(points.rows());
  const Index n = points.rows();

  Rng rng = make_rng(seed);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  // Partial Fisher-Yates: the first k entries are a uniform k-subset.
  for (int c = 0; c < k; ++c) {
    std::uniform_int_distribution<Index> pick(c, n - 1);
    std::swap(order[static_cast<std::size_t>(c)], order[static_cast<std::size_t>(pick(rng))]);
  }

  KMeansRun run;
  run.centroids.resize(k, points.cols());
  for (int c = 0; c < k; ++c) run.centroids.row(c) = points.row(order[static_cast<std::size_t>(c)]);
  run.labels.assign(static_cast<std::size_t>(n), 0);

  for (int it = 0; it < max_iters; ++it) {
    const bool changed = assign(points, run.centroids, run.labels);
    if (!changed && it > 0) break;
    update_centroids(points, run.labels, run.centroids);
    run.inertia_trace.push_back(inertia_of(points, run.labels, run.centroids));
    run.iterations = it + 1;
  }
  run.inertia = inertia_of(points, run.labels, run.centroids);
  return run;
}

KMeansResult kmeans(const Matrix& points, const KMeansOptions& opts) {
  opts.validate(points.rows());
  std::vector<KMeansRun> runs(static_cast<std::size_t>(opts.restarts));
  parallel_for(runs.size(), [&](std::size_t r) {
    std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::uint32_t derived[2];
    seq.generate(derived, derived + 2);
    const std::uint64_t run_seed = (static_cast<std::uint64_t>(derived[0]) << 32) | derived[1];
    runs[r] = kmeans_single(points, opts.k, opts.max_iters, run_seed);
  });

  KMeansResult result;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    result.inertias.push_back(runs[r].inertia);
    if (runs[r].inertia < runs[static_cast<std::size_t>(result.best_restart)].inertia) {
      result.best_restart = static_cast<int>(r);
    }
  }
  auto& best = runs[static_cast<std::size_t>(result.best_restart)];
  result.labels = std::move(best.labels);
  result.centroids = std::move(best.centroids);
  return result;
}

namespace {

void check_labels(std::span<const int> labels, int k, const char* what) {
  for (int l : labels) {
    if (l < 1 || l > k) {
      throw std::invalid_argument(std::string(what) + " label " + std::to_string(l) +
                                  " outside [1, " + std::to_string(k) + "]");
    }
  }
}

// Minimum-cost assignment on a square cost matrix (Jonker-Volgenant style
// potentials). Returns assignment[row] = column.
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n);
  for (int j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

}  // namespace

LabelMatch match_labels(std::span<const int> predicted, std::span<const int> truth, int k) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("match_labels: label vectors differ in length");
  }
  if (k < 1) throw std::invalid_argument("match_labels: K must be positive");
  check_labels(predicted, k, "predicted");
  check_labels(truth, k, "truth");

  // overlap[c][t]: points in predicted cluster c with truth label t.
  std::vector<std::vector<long>> overlap(k, std::vector<long>(k, 0));
  for (std::size_t i = 0; i < predicted.size(); ++i) ++overlap[predicted[i] - 1][truth[i] - 1];

  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  if (k <= 6) {
    long best_agree = -1;
    do {
      long agree = 0;
      for (int c = 0; c < k; ++c) agree += overlap[c][perm[c]];
      if (agree > best_agree) {
        best_agree = agree;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    std::vector<std::vector<double>> cost(k, std::vector<double>(k));
    for (int c = 0; c < k; ++c) {
      for (int t = 0; t < k; ++t) cost[c][t] = -static_cast<double>(overlap[c][t]);
    }
    best = hungarian(cost);
  }

  LabelMatch match;
  match.permutation.resize(k);
  for (int c = 0; c < k; ++c) match.permutation[c] = best[c] + 1;
  long agree = 0;
  match.matched.reserve(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const int mapped = match.permutation[predicted[i] - 1];
    match.matched.push_back(mapped);
    if (mapped == truth[i]) ++agree;
  }
  match.accuracy =
      predicted.empty() ? 0.0 : static_cast<double>(agree) / static_cast<double>(predicted.size());
  return match;
}

BinaryMetrics binary_metrics(std::span<const int> predicted, std::span<const int> truth,
                             int positive_class) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("binary_metrics: label vectors differ in length");
  }
  if (predicted.empty()) throw std::invalid_argument("binary_metrics: no labels");
  long tp = 0, fp = 0, fn = 0, correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool pred_pos = predicted[i] == positive_class;
    const bool true_pos = truth[i] == positive_class;
    if (pred_pos && true_pos) ++tp;
    if (pred_pos && !true_pos) ++fp;
    if (!pred_pos && true_pos) ++fn;
    if (predicted[i] == truth[i]) ++correct;
  }
  BinaryMetrics m;
  m.accuracy = static_cast<double>(correct) / static_cast<double>(predicted.size());
  if (tp + fp > 0) {
    m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  } else {
    m.degenerate = true;
  }
  if (tp + fn > 0) {
    m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  } else {
    m.degenerate = true;
  }
  if (m.precision > 0.0 && m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return m;
}

ClusteringReport cluster_and_score(const Matrix& points, std::span<const int> truth,
                                   const KMeansOptions& opts, int positive_class) {
  if (static_cast<Index>(truth.size()) != points.rows()) {
    throw std::invalid_argument("cluster_and_score: one truth label per point required");
  }
  KMeansResult km = kmeans(points, opts);
  LabelMatch match = match_labels(km.labels, truth, opts.k);
  ClusteringReport report;
  report.metrics = binary_metrics(match.matched, truth, positive_class);
  report.labels = std::move(km.labels);
  report.matched_labels = std::move(match.matched);
  report.inertias = std::move(km.inertias);
  report.best_restart = km.best_restart;
  return report;
}

}  // namespace m2e
