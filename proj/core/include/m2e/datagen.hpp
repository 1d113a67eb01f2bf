#pragma once

#include <cstdint>
#include <vector>

#include "m2e/tensor.hpp"

namespace m2e {

/// Planted-cluster multi-view graph generator settings.
///
/// Per view: node factor H (M x R_true) ~ N(0, 1); cluster centroids in
/// subject-factor space sit at pairwise distance `separation` around a
/// N(0, I) base point; subject n gets f_n = centroid(cluster(n)) + N(0,
/// jitter_sigma^2 I); slice W_n = H diag(f_n) H^T + (E + E^T) / 2 with
/// E_ij ~ N(0, noise_sigma^2). Views share cluster membership only.
struct SyntheticSpec {
  int views = 2;
  Index nodes = 20;
  /// One entry per cluster; sums to the subject count.
  std::vector<Index> cluster_sizes{20, 20};
  Index latent_rank = 4;
  double separation = 5.0;
  double jitter_sigma = 1.0;
  double noise_sigma = 0.05;
  std::uint64_t seed = 0;

  Index subjects() const;
  int clusters() const { return static_cast<int>(cluster_sizes.size()); }
  /// Throws std::invalid_argument when counts are non-positive or the
  /// cluster count cannot be placed at equal distance (K > max(R_true, 2)).
  void validate() const;
};

struct SyntheticDataset {
  std::vector<GraphViewTensor> views;
  /// 1-based cluster of every subject; subjects are ordered by cluster.
  std::vector<int> labels;
};

SyntheticDataset generate(const SyntheticSpec& spec);

/// 90 nodes, 35 patients + 35 controls, two views.
SyntheticSpec hiv_shape_preset();
/// 82 nodes, 52 patients + 45 controls, two views.
SyntheticSpec bp_shape_preset();

}  // namespace m2e
