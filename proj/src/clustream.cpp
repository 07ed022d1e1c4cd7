#include "exstream/clustream.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "exstream/errors.hpp"
#include "exstream/kmeans.hpp"
#include "exstream/random.hpp"
#include "exstream/vector_ops.hpp"

namespace exstream {

MicroCluster MicroCluster::singleton(std::span<const double> x, double t) {
  MicroCluster mc;
  mc.n = 1;
  mc.linear_sum.assign(x.begin(), x.end());
  mc.squared_sum.resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) mc.squared_sum[j] = x[j] * x[j];
  mc.timestamp_sum = t;
  mc.timestamp_sq_sum = t * t;
  return mc;
}

void MicroCluster::absorb(std::span<const double> x, double t) {
  ++n;
  for (std::size_t j = 0; j < x.size(); ++j) {
    linear_sum[j] += x[j];
    squared_sum[j] += x[j] * x[j];
  }
  timestamp_sum += t;
  timestamp_sq_sum += t * t;
}

void MicroCluster::merge(const MicroCluster& other) {
  n += other.n;
  for (std::size_t j = 0; j < linear_sum.size(); ++j) {
    linear_sum[j] += other.linear_sum[j];
    squared_sum[j] += other.squared_sum[j];
  }
  timestamp_sum += other.timestamp_sum;
  timestamp_sq_sum += other.timestamp_sq_sum;
}

FeatureVector MicroCluster::centroid() const {
  FeatureVector c(linear_sum);
  for (double& v : c) v /= static_cast<double>(n);
  return c;
}

double MicroCluster::rms_deviation() const {
  const double count = static_cast<double>(n);
  double total = 0.0;
  for (std::size_t j = 0; j < linear_sum.size(); ++j) {
    const double mean = linear_sum[j] / count;
    total += std::max(0.0, squared_sum[j] / count - mean * mean);
  }
  return std::sqrt(total);
}

double MicroCluster::relevance_stamp(double boundary_factor) const {
  const double count = static_cast<double>(n);
  const double mean = timestamp_sum / count;
  const double var = std::max(0.0, timestamp_sq_sum / count - mean * mean);
  return mean + boundary_factor * std::sqrt(var);
}

CluStreamBuffer::CluStreamBuffer(std::size_t capacity, const CluStreamParams& params,
                                 std::uint64_t seed)
    : capacity_(capacity), params_(params), seed_(seed) {
  if (capacity < 1) throw UsageError("buffer capacity must be >= 1");
  if (!(params.horizon > 0.0) || !(params.boundary_factor > 0.0) || params.init_multiplier < 1) {
    throw ConfigError("clustream parameters must be positive");
  }
}

std::size_t CluStreamBuffer::size() const {
  return initialized_ ? clusters_.size() : std::min(capacity_, staged_.size());
}

std::vector<FeatureVector> CluStreamBuffer::prototypes() const {
  if (initialized_) {
    std::vector<FeatureVector> out;
    out.reserve(clusters_.size());
    for (const auto& mc : clusters_) out.push_back(mc.centroid());
    return out;
  }
  const std::size_t visible = size();
  return {staged_.end() - static_cast<std::ptrdiff_t>(visible), staged_.end()};
}

double CluStreamBuffer::memory_cost() const {
  return initialized_ ? 2.0 * static_cast<double>(clusters_.size())
                      : static_cast<double>(staged_.size());
}

std::vector<MicroCluster> CluStreamBuffer::initialize(std::span<const FeatureVector> staged,
                                                      std::span<const double> times,
                                                      std::size_t capacity, std::uint64_t seed) {
  Rng rng(seed);
  const auto km = kmeans(staged, capacity, rng);
  std::vector<MicroCluster> clusters(capacity);
  for (std::size_t i = 0; i < staged.size(); ++i) {
    auto& mc = clusters[km.assignment[i]];
    if (mc.n == 0) {
      mc = MicroCluster::singleton(staged[i], times[i]);
    } else {
      mc.absorb(staged[i], times[i]);
    }
  }
  return clusters;
}

void CluStreamBuffer::insert(std::span<const double> x, double t) {
  if (!initialized_) {
    staged_.emplace_back(x.begin(), x.end());
    staged_times_.push_back(t);
    if (staged_.size() == params_.init_multiplier * capacity_) {
      clusters_ = initialize(staged_, staged_times_, capacity_, seed_);
      initialized_ = true;
      staged_.clear();
      staged_.shrink_to_fit();
      staged_times_.clear();
    }
    return;
  }

  std::vector<FeatureVector> centroids;
  centroids.reserve(clusters_.size());
  for (const auto& mc : clusters_) centroids.push_back(mc.centroid());

  std::size_t nearest = 0;
  double nearest_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    const double d2 = squared_distance(centroids[i], x);
    if (d2 < nearest_d2) {
      nearest_d2 = d2;
      nearest = i;
    }
  }

  double boundary = std::numeric_limits<double>::infinity();
  if (clusters_[nearest].n > 1) {
    boundary = params_.boundary_factor * clusters_[nearest].rms_deviation();
  } else {
    // Singletons have no spread; use the distance to the closest other centroid.
    for (std::size_t i = 0; i < centroids.size(); ++i) {
      if (i == nearest) continue;
      boundary = std::min(boundary, std::sqrt(squared_distance(centroids[i], centroids[nearest])));
    }
  }
  if (std::sqrt(nearest_d2) <= boundary) {
    clusters_[nearest].absorb(x, t);
    return;
  }

  // Evict the stalest cluster outside the horizon, if any.
  const double threshold = t - params_.horizon;
  std::size_t stale = clusters_.size();
  double stale_stamp = threshold;
  for (std::size_t i = 0; i < clusters_.size(); ++i) {
    const double stamp = clusters_[i].relevance_stamp(params_.boundary_factor);
    if (stamp < stale_stamp) {
      stale_stamp = stamp;
      stale = i;
    }
  }
  if (stale != clusters_.size()) {
    clusters_[stale] = MicroCluster::singleton(x, t);
    return;
  }

  if (clusters_.size() < 2) {
    clusters_[0].merge(MicroCluster::singleton(x, t));
    return;
  }
  std::size_t bi = 0;
  std::size_t bj = 1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    for (std::size_t j = i + 1; j < centroids.size(); ++j) {
      const double d2 = squared_distance(centroids[i], centroids[j]);
      if (d2 < best) {
        best = d2;
        bi = i;
        bj = j;
      }
    }
  }
  clusters_[bi].merge(clusters_[bj]);
  clusters_[bj] = MicroCluster::singleton(x, t);
}

}  // namespace exstream
