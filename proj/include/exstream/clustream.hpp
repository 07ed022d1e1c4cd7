#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "exstream/dataset.hpp"

namespace exstream {

struct CluStreamParams {
  // Clusters whose relevance stamp is older than `horizon` time units are evicted.
  double horizon = 1000.0;
  // Absorption boundary as a multiple of the cluster's RMS deviation.
  double boundary_factor = 2.0;
  // Staging pool for k-means initialisation holds init_multiplier * capacity points.
  std::size_t init_multiplier = 2;
};

// Cluster feature vector: count, per-dimension linear and squared sums, and
// first/second moments of arrival times.
struct MicroCluster {
  std::size_t n = 0;
  FeatureVector linear_sum;
  FeatureVector squared_sum;
  double timestamp_sum = 0.0;
  double timestamp_sq_sum = 0.0;

  static MicroCluster singleton(std::span<const double> x, double t);

  void absorb(std::span<const double> x, double t);
  void merge(const MicroCluster& other);

  FeatureVector centroid() const;
  // sqrt of the mean squared distance of absorbed points to the centroid.
  double rms_deviation() const;
  // Mean arrival time plus `boundary_factor` standard deviations.
  double relevance_stamp(double boundary_factor) const;
};

class CluStreamBuffer {
 public:
  CluStreamBuffer(std::size_t capacity, const CluStreamParams& params, std::uint64_t seed);

  // Before initialisation points are staged; once init_multiplier * capacity
  // points are staged they are clustered into exactly `capacity` micro-clusters.
  void insert(std::span<const double> x, double t);

  bool initialized() const { return initialized_; }
  std::size_t capacity() const { return capacity_; }
  // Stored entries visible to rehearsal: clusters once initialised, otherwise
  // the most recent min(capacity, staged) staged points.
  std::size_t size() const;
  std::size_t staged_count() const { return staged_.size(); }

  const std::vector<MicroCluster>& clusters() const { return clusters_; }
  // Rehearsal vectors: cluster centroids, or staged points before initialisation.
  std::vector<FeatureVector> prototypes() const;
  // Units of d-vector storage: 2 per cluster, 1 per staged point.
  double memory_cost() const;

  // Builds `capacity` micro-clusters from exactly init_multiplier * capacity staged
  // points with seeded k-means.
  static std::vector<MicroCluster> initialize(std::span<const FeatureVector> staged,
                                              std::span<const double> times,
                                              std::size_t capacity, std::uint64_t seed);

 private:
  std::size_t capacity_;
  CluStreamParams params_;
  std::uint64_t seed_;
  bool initialized_ = false;
  std::vector<FeatureVector> staged_;
  std::vector<double> staged_times_;
  std::vector<MicroCluster> clusters_;
};

}  // namespace exstream
