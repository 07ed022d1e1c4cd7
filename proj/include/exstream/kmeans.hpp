#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "exstream/dataset.hpp"
#include "exstream/random.hpp"

namespace exstream {

struct KMeansOptions {
  std::size_t max_iterations = 100;
  // Stop once no centroid moves farther than this.
  double tolerance = 1e-6;
};

struct KMeansResult {
  std::vector<FeatureVector> centroids;
  // Cluster index of every input point; every cluster has at least one member.
  std::vector<std::size_t> assignment;
  std::size_t iterations = 0;
};

// Lloyd's algorithm from a k-means++ start. Empty clusters are re-seeded with
// the point farthest from its current centroid. Requires 1 <= k <= points.size().
KMeansResult kmeans(std::span<const FeatureVector> points, std::size_t k, Rng& rng,
                    const KMeansOptions& options = {});

}  // namespace exstream
