#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "exstream/dataset.hpp"

namespace exstream {

struct HPStreamParams {
  // lambda in the fade factor 2^(-lambda * dt).
  double decay_rate = 0.5;
  // tau: the limiting radius is tau times the mean projected radius.
  double spread_radius_factor = 2.0;
  // Samples per unit of stream time.
  double speed = 200.0;
  // Dimensions selected per cluster (l). 0 selects ceil(d / 2); values above d are clamped to d.
  std::size_t projected_dims = 0;
};

using BitVector = std::vector<bool>;

// 2^(-lambda * dt)
double fade_factor(double decay_rate, double dt);

// Faded cluster structure with its projected-dimension bit vector.
struct FadedCluster {
  double weight = 0.0;
  FeatureVector linear_sum;
  FeatureVector squared_sum;
  // Time of the last absorbed point; drives replacement of stale clusters.
  double last_update_time = 0.0;
  // Time the sums were last decayed to.
  double faded_to_time = 0.0;
  // Points ever absorbed (not decayed).
  std::size_t points = 0;
  BitVector bits;

  static FadedCluster singleton(std::span<const double> x, double t);

  // Decays weight and both sums from faded_to_time to t.
  void fade_to(double t, double decay_rate);
  void absorb(std::span<const double> x, double t);

  FeatureVector centroid() const;
  // sqrt(max(0, SS_j/W - (LS_j/W)^2)) per dimension.
  std::vector<double> dimension_radii() const;
};

// Sets bits for the k*l (cluster, dimension) pairs of smallest radius, with
// ties resolved by (cluster index, dimension index). A cluster left without
// bits gets its smallest-radius dimension.
std::vector<BitVector> hpstream_assign_dims(std::span<const std::vector<double>> radii,
                                            std::size_t projected_dims);

// sqrt of the mean over set bits of (x_j - c_j)^2.
double projected_distance(std::span<const double> x, std::span<const double> centroid,
                          const BitVector& bits);

class HPStreamBuffer {
 public:
  HPStreamBuffer(std::size_t capacity, const HPStreamParams& params);

  // `sample_time` counts samples; stream time is sample_time / speed.
  void insert(std::span<const double> x, double sample_time);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return clusters_.size(); }
  const std::vector<FadedCluster>& clusters() const { return clusters_; }
  std::vector<FeatureVector> prototypes() const;

 private:
  std::size_t projected_dims(std::size_t dim) const;

  std::size_t capacity_;
  HPStreamParams params_;
  std::vector<FadedCluster> clusters_;
};

}  // namespace exstream
