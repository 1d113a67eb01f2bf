#include "m2e/datagen.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "m2e/random.hpp"

namespace m2e {

Index SyntheticSpec::subjects() const {
  return std::accumulate(cluster_sizes.begin(), cluster_sizes.end(), Index{0});
}

void SyntheticSpec::validate() const {
  if (views < 1) throw std::invalid_argument("views must be >= 1");
  if (nodes < 1) throw std::invalid_argument("nodes must be >= 1");
  if (latent_rank < 1) throw std::invalid_argument("latent_rank must be >= 1");
  if (cluster_sizes.empty()) throw std::invalid_argument("at least one cluster is required");
  for (Index s : cluster_sizes) {
    if (s < 1) throw std::invalid_argument("cluster sizes must be positive");
  }
  if (clusters() > std::max<Index>(latent_rank, 2)) {
    throw std::invalid_argument("cannot place more than max(latent_rank, 2) equidistant centroids");
  }
  if (!(separation >= 0.0) || !(jitter_sigma >= 0.0) || !(noise_sigma >= 0.0)) {
    throw std::invalid_argument("separation and noise levels must be >= 0");
  }
}

namespace {

// K x R centroids with pairwise distance `separation`.
Matrix place_centroids(int k, Index r, double separation, Rng& rng) {
  const Eigen::RowVectorXd base = standard_normal(1, r, rng);
  Matrix centroids = base.replicate(k, 1);
  if (k == 1) return centroids;
  if (r == 1) {  // only k == 2 is allowed here
    centroids(0, 0) += 0.5 * separation;
    centroids(1, 0) -= 0.5 * separation;
    return centroids;
  }
  // Orthonormal directions q_1..q_k: |q_a - q_b| = sqrt(2).
  const Matrix gaussian = standard_normal(r, k, rng);
  const Matrix q = Eigen::HouseholderQR<Matrix>(gaussian).householderQ() * Matrix::Identity(r, k);
  centroids += (separation / std::sqrt(2.0)) * q.transpose();
  return centroids;
}

}  // namespace

SyntheticDataset generate(const SyntheticSpec& spec) {
  spec.validate();
  const Index m = spec.nodes;
  const Index n = spec.subjects();
  const Index r = spec.latent_rank;
  const int k = spec.clusters();

  SyntheticDataset out;
  for (int c = 0; c < k; ++c) {
    out.labels.insert(out.labels.end(), static_cast<std::size_t>(spec.cluster_sizes[c]), c + 1);
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  for (int v = 0; v < spec.views; ++v) {
    Rng rng = make_rng(spec.seed, static_cast<std::uint64_t>(v));
    const Matrix h = standard_normal(m, r, rng);
    const Matrix centroids = place_centroids(k, r, spec.separation, rng);

    Tensor3 t(m, m, n);
    for (Index s = 0; s < n; ++s) {
      Eigen::RowVectorXd f = centroids.row(out.labels[static_cast<std::size_t>(s)] - 1);
      for (Index q = 0; q < r; ++q) f(q) += spec.jitter_sigma * normal(rng);

      const Matrix w = (h * f.asDiagonal()) * h.transpose();
      auto slice = t.slice(s);
      // Fill the upper triangle and mirror it so every slice is exactly
      // symmetric in floating point.
      for (Index j = 0; j < m; ++j) {
        for (Index i = 0; i <= j; ++i) {
          double value = w(i, j);
          if (spec.noise_sigma > 0.0) {
            const double e_ij = spec.noise_sigma * normal(rng);
            const double e_ji = i == j ? e_ij : spec.noise_sigma * normal(rng);
            value += 0.5 * (e_ij + e_ji);
          }
          slice(i, j) = value;
          slice(j, i) = value;
        }
      }
    }
    out.views.emplace_back(std::move(t), 0.0);
  }
  return out;
}

SyntheticSpec hiv_shape_preset() {
  SyntheticSpec spec;
  spec.views = 2;
  spec.nodes = 90;
  spec.cluster_sizes = {35, 35};
  return spec;
}

SyntheticSpec bp_shape_preset() {
  SyntheticSpec spec;
  spec.views = 2;
  spec.nodes = 82;
  spec.cluster_sizes = {52, 45};
  return spec;
}

}  // namespace m2e
