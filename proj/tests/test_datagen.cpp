#include <gtest/gtest.h>

#include "m2e/datagen.hpp"

using namespace m2e;

TEST(DatagenTest, DefaultShape) {
  const SyntheticDataset d = generate(SyntheticSpec{});
  ASSERT_EQ(d.views.size(), 2u);
  EXPECT_EQ(d.views[0].node_count(), 20);
  EXPECT_EQ(d.views[0].subject_count(), 40);
  ASSERT_EQ(d.labels.size(), 40u);
  EXPECT_EQ(std::count(d.labels.begin(), d.labels.end(), 1), 20);
  EXPECT_EQ(d.labels.front(), 1);
  EXPECT_EQ(d.labels.back(), 2);
}

TEST(DatagenTest, SlicesExactlySymmetric) {
  SyntheticSpec spec;
  spec.noise_sigma = 0.5;
  for (const GraphViewTensor& v : generate(spec).views) {
    EXPECT_TRUE(check_partial_symmetry(v.tensor(), 0.0).symmetric);
  }
}

TEST(DatagenTest, NoNoiseNoJitterSingleClusterGivesIdenticalSlices) {
  SyntheticSpec spec;
  spec.cluster_sizes = {6};
  spec.noise_sigma = 0.0;
  spec.jitter_sigma = 0.0;
  for (const GraphViewTensor& v : generate(spec).views) {
    for (Index n = 1; n < v.subject_count(); ++n) EXPECT_EQ(v.slice(n), v.slice(0));
  }
}

TEST(DatagenTest, NoiselessViewsHaveExactLowRank) {
  SyntheticSpec spec;
  spec.noise_sigma = 0.0;
  spec.latent_rank = 3;
  const SyntheticDataset d = generate(spec);
  Eigen::JacobiSVD<Matrix> svd(matricize(d.views[0].tensor(), 3));
  const auto& s = svd.singularValues();
  EXPECT_LT(s(3), 1e-9 * s(0));
}

TEST(DatagenTest, Deterministic) {
  SyntheticSpec spec;
  spec.seed = 17;
  const SyntheticDataset a = generate(spec);
  const SyntheticDataset b = generate(spec);
  for (std::size_t v = 0; v < a.views.size(); ++v) EXPECT_EQ(a.views[v].tensor(), b.views[v].tensor());
  spec.seed = 18;
  EXPECT_FALSE(generate(spec).views[0].tensor() == a.views[0].tensor());
}

TEST(DatagenTest, Validation) {
  SyntheticSpec spec;
  spec.cluster_sizes = {};
  EXPECT_THROW(generate(spec), std::invalid_argument);
  spec.cluster_sizes = {5, 0};
  EXPECT_THROW(generate(spec), std::invalid_argument);
  spec.cluster_sizes = {2, 2, 2, 2, 2};
  spec.latent_rank = 4;
  EXPECT_THROW(generate(spec), std::invalid_argument);
  spec.cluster_sizes = {5, 5};
  spec.separation = -1.0;
  EXPECT_THROW(generate(spec), std::invalid_argument);
}

TEST(DatagenTest, CentroidsAtRequestedSeparation) {
  // Zero jitter and noise: subject factors equal the centroids, so the
  // subject-mode unfolding has exactly two distinct rows per view.
  SyntheticSpec spec;
  spec.cluster_sizes = {3, 3};
  spec.jitter_sigma = 0.0;
  spec.noise_sigma = 0.0;
  const SyntheticDataset d = generate(spec);
  const Matrix x3 = matricize(d.views[0].tensor(), 3);
  EXPECT_LT((x3.row(0) - x3.row(2)).norm(), 1e-12 * x3.row(0).norm());
  EXPECT_GT((x3.row(0) - x3.row(3)).norm(), 1e-3 * x3.row(0).norm());
}

TEST(PresetTest, Shapes) {
  const SyntheticSpec hiv = hiv_shape_preset();
  EXPECT_EQ(hiv.nodes, 90);
  EXPECT_EQ(hiv.subjects(), 70);
  EXPECT_EQ(hiv.views, 2);
  EXPECT_EQ(hiv.cluster_sizes, (std::vector<Index>{35, 35}));
  const SyntheticSpec bp = bp_shape_preset();
  EXPECT_EQ(bp.nodes, 82);
  EXPECT_EQ(bp.subjects(), 97);
  EXPECT_EQ(bp.cluster_sizes, (std::vector<Index>{52, 45}));
}
