#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "m2e/tensor.hpp"

namespace m2e {

// Cluster labels are 1-based throughout: values in [1, K].

struct KMeansOptions {
  int k = 2;
  int restarts = 20;
  int max_iters = 100;
  std::uint64_t seed = 0;

  void validate(Index point_count) const;
};

/// One Lloyd run from a single initialization.
struct KMeansRun {
  std::vector<int> labels;
  Matrix centroids;
  double inertia = 0.0;
  /// Inertia after every assignment + update sweep.
  std::vector<double> inertia_trace;
  int iterations = 0;
};

struct KMeansResult {
  std::vector<int> labels;
  Matrix centroids;
  /// Final inertia of every restart, in restart order.
  std::vector<double> inertias;
  int best_restart = 0;
};

/// Lloyd's algorithm starting from K distinct data points drawn uniformly.
/// Points go to the nearest centroid (lowest index on ties); an empty
/// cluster is re-seeded with the point farthest from its centroid.
KMeansRun kmeans_single(const Matrix& points, int k, int max_iters, std::uint64_t seed);

/// Best of `restarts` independent runs by inertia (lowest restart index on
/// ties). Restart r uses stream r of `seed`, so the result does not depend
/// on scheduling. Throws std::invalid_argument if K <= 0 or K > N.
KMeansResult kmeans(const Matrix& points, const KMeansOptions& opts);

/// Within-cluster sum of squared distances.
double inertia_of(const Matrix& points, std::span<const int> labels, const Matrix& centroids);

struct LabelMatch {
  /// permutation[c - 1] is the truth label assigned to predicted cluster c.
  std::vector<int> permutation;
  std::vector<int> matched;
  double accuracy = 0.0;
};

/// Relabeling of predicted clusters that maximizes agreement with `truth`.
/// Exhaustive for K <= 6 (first maximum in lexicographic order, so the
/// identity wins ties), Hungarian assignment above.
LabelMatch match_labels(std::span<const int> predicted, std::span<const int> truth, int k);

struct BinaryMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// Set when precision or recall had a zero denominator.
  bool degenerate = false;
};

/// Confusion-matrix metrics with `positive_class` as the positive label.
BinaryMetrics binary_metrics(std::span<const int> predicted, std::span<const int> truth,
                             int positive_class);

struct ClusteringReport {
  std::vector<int> labels;
  std::vector<int> matched_labels;
  BinaryMetrics metrics;
  std::vector<double> inertias;
  int best_restart = 0;
};

/// kmeans + match_labels + binary_metrics.
ClusteringReport cluster_and_score(const Matrix& points, std::span<const int> truth,
                                   const KMeansOptions& opts, int positive_class);

}  // namespace m2e
