#include "exstream/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "exstream/errors.hpp"
#include "exstream/vector_ops.hpp"

namespace exstream {

namespace {

std::size_t nearest_centroid(const std::vector<FeatureVector>& centroids,
                             std::span<const double> x, double* dist = nullptr) {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(centroids[c], x);
    if (d < best_dist) {
      best_dist = d;
      best = c;
    }
  }
  if (dist != nullptr) *dist = best_dist;
  return best;
}

std::vector<FeatureVector> plus_plus_seeds(std::span<const FeatureVector> points, std::size_t k,
                                           Rng& rng) {
  std::vector<FeatureVector> seeds;
  seeds.reserve(k);
  std::uniform_int_distribution<std::size_t> first(0, points.size() - 1);
  seeds.push_back(points[first(rng)]);

  std::vector<double> d2(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) d2[i] = squared_distance(points[i], seeds[0]);
  while (seeds.size() < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      const double target = u(rng);
      double acc = 0.0;
      pick = points.size() - 1;
      for (std::size_t i = 0; i < points.size(); ++i) {
        acc += d2[i];
        if (d2[i] > 0.0 && acc >= target) {
          pick = i;
          break;
        }
      }
      // Guard against landing on an already chosen point through rounding.
      while (d2[pick] == 0.0 && pick > 0) --pick;
    }
    seeds.push_back(points[pick]);
    for (std::size_t i = 0; i < points.size(); ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], seeds.back()));
    }
  }
  return seeds;
}

}  // namespace

KMeansResult kmeans(std::span<const FeatureVector> points, std::size_t k, Rng& rng,
                    const KMeansOptions& options) {
  if (k < 1 || k > points.size()) {
    throw UsageError("kmeans: need 1 <= k <= number of points");
  }
  const std::size_t dim = points[0].size();
  KMeansResult result;
  result.centroids = plus_plus_seeds(points, k, rng);
  result.assignment.assign(points.size(), 0);

  std::vector<double> dist(points.size());
  std::vector<std::size_t> sizes(k);
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    result.iterations = iter + 1;
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      result.assignment[i] = nearest_centroid(result.centroids, points[i], &dist[i]);
      ++sizes[result.assignment[i]];
    }
    // Re-seed empty clusters from the farthest point of a multi-member cluster.
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t far = points.size();
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (sizes[result.assignment[i]] < 2) continue;
        if (far == points.size() || dist[i] > dist[far]) far = i;
      }
      --sizes[result.assignment[far]];
      result.assignment[far] = c;
      sizes[c] = 1;
      dist[far] = 0.0;
      result.centroids[c] = points[far];
    }

    std::vector<FeatureVector> next(k, FeatureVector(dim, 0.0));
    for (std::size_t i = 0; i < points.size(); ++i) {
      auto& acc = next[result.assignment[i]];
      for (std::size_t j = 0; j < dim; ++j) acc[j] += points[i][j];
    }
    double max_shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      for (double& v : next[c]) v /= static_cast<double>(sizes[c]);
      max_shift = std::max(max_shift, std::sqrt(squared_distance(next[c], result.centroids[c])));
    }
    result.centroids = std::move(next);
    if (max_shift < options.tolerance) break;
  }
  return result;
}

}  // namespace exstream
