#include "exstream/hpstream.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "exstream/errors.hpp"

namespace exstream {

double fade_factor(double decay_rate, double dt) { return std::exp2(-decay_rate * dt); }

FadedCluster FadedCluster::singleton(std::span<const double> x, double t) {
  FadedCluster fc;
  fc.weight = 1.0;
  fc.linear_sum.assign(x.begin(), x.end());
  fc.squared_sum.resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) fc.squared_sum[j] = x[j] * x[j];
  fc.last_update_time = t;
  fc.faded_to_time = t;
  fc.points = 1;
  fc.bits.assign(x.size(), true);
  return fc;
}

void FadedCluster::fade_to(double t, double decay_rate) {
  const double f = fade_factor(decay_rate, t - faded_to_time);
  weight *= f;
  for (double& v : linear_sum) v *= f;
  for (double& v : squared_sum) v *= f;
  faded_to_time = t;
}

void FadedCluster::absorb(std::span<const double> x, double t) {
  weight += 1.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    linear_sum[j] += x[j];
    squared_sum[j] += x[j] * x[j];
  }
  last_update_time = t;
  ++points;
}

FeatureVector FadedCluster::centroid() const {
  FeatureVector c(linear_sum);
  for (double& v : c) v /= weight;
  return c;
}

std::vector<double> FadedCluster::dimension_radii() const {
  std::vector<double> r(linear_sum.size());
  for (std::size_t j = 0; j < r.size(); ++j) {
    const double mean = linear_sum[j] / weight;
    r[j] = std::sqrt(std::max(0.0, squared_sum[j] / weight - mean * mean));
  }
  return r;
}

std::vector<BitVector> hpstream_assign_dims(std::span<const std::vector<double>> radii,
                                            std::size_t projected_dims) {
  if (radii.empty()) throw UsageError("hpstream_assign_dims: no clusters");
  const std::size_t dim = radii[0].size();
  std::vector<BitVector> bits(radii.size(), BitVector(dim, false));

  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  pairs.reserve(radii.size() * dim);
  for (std::size_t c = 0; c < radii.size(); ++c) {
    for (std::size_t j = 0; j < dim; ++j) pairs.emplace_back(radii[c][j], c, j);
  }
  const std::size_t budget = std::min(pairs.size(), radii.size() * projected_dims);
  std::partial_sort(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(budget),
                    pairs.end());
  for (std::size_t p = 0; p < budget; ++p) bits[std::get<1>(pairs[p])][std::get<2>(pairs[p])] = true;

  for (std::size_t c = 0; c < radii.size(); ++c) {
    if (std::find(bits[c].begin(), bits[c].end(), true) != bits[c].end()) continue;
    const auto smallest = std::min_element(radii[c].begin(), radii[c].end());
    bits[c][static_cast<std::size_t>(smallest - radii[c].begin())] = true;
  }
  return bits;
}

double projected_distance(std::span<const double> x, std::span<const double> centroid,
                          const BitVector& bits) {
  double sq = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!bits[j]) continue;
    const double diff = x[j] - centroid[j];
    sq += diff * diff;
    ++count;
  }
  return count == 0 ? 0.0 : std::sqrt(sq / static_cast<double>(count));
}

HPStreamBuffer::HPStreamBuffer(std::size_t capacity, const HPStreamParams& params)
    : capacity_(capacity), params_(params) {
  if (capacity < 1) throw UsageError("buffer capacity must be >= 1");
  if (!(params.decay_rate >= 0.0) || !(params.spread_radius_factor > 0.0) ||
      !(params.speed > 0.0)) {
    throw ConfigError("hpstream parameters: decay_rate >= 0, spread factor and speed > 0");
  }
}

std::size_t HPStreamBuffer::projected_dims(std::size_t dim) const {
  if (params_.projected_dims == 0) return (dim + 1) / 2;
  return std::min(params_.projected_dims, dim);
}

std::vector<FeatureVector> HPStreamBuffer::prototypes() const {
  std::vector<FeatureVector> out;
  out.reserve(clusters_.size());
  for (const auto& fc : clusters_) out.push_back(fc.centroid());
  return out;
}

void HPStreamBuffer::insert(std::span<const double> x, double sample_time) {
  const double t = sample_time / params_.speed;
  if (clusters_.size() < capacity_) {
    clusters_.push_back(FadedCluster::singleton(x, t));
    return;
  }

  for (auto& fc : clusters_) fc.fade_to(t, params_.decay_rate);

  // Clusters with weight <= 1 carry no spread information and compete with radius 0.
  std::vector<std::vector<double>> radii;
  radii.reserve(clusters_.size());
  for (const auto& fc : clusters_) {
    radii.push_back(fc.weight <= 1.0 ? std::vector<double>(x.size(), 0.0) : fc.dimension_radii());
  }
  auto bits = hpstream_assign_dims(radii, projected_dims(x.size()));
  for (std::size_t c = 0; c < clusters_.size(); ++c) clusters_[c].bits = std::move(bits[c]);

  const auto centroids = prototypes();
  std::size_t nearest = 0;
  double nearest_dist = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < clusters_.size(); ++c) {
    const double d = projected_distance(x, centroids[c], clusters_[c].bits);
    if (d < nearest_dist) {
      nearest_dist = d;
      nearest = c;
    }
  }

  const auto& target = clusters_[nearest];
  double limit = std::numeric_limits<double>::infinity();
  if (target.points > 1) {
    const auto r = target.dimension_radii();
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (!target.bits[j]) continue;
      sum += r[j];
      ++count;
    }
    limit = params_.spread_radius_factor * sum / static_cast<double>(count);
  } else {
    // A single point has no radius; use the projected distance to the nearest other cluster.
    for (std::size_t c = 0; c < clusters_.size(); ++c) {
      if (c == nearest) continue;
      limit = std::min(limit, projected_distance(centroids[c], centroids[nearest], target.bits));
    }
  }

  if (nearest_dist <= limit) {
    clusters_[nearest].absorb(x, t);
    return;
  }
  std::size_t oldest = 0;
  for (std::size_t c = 1; c < clusters_.size(); ++c) {
    if (clusters_[c].last_update_time < clusters_[oldest].last_update_time) oldest = c;
  }
  clusters_[oldest] = FadedCluster::singleton(x, t);
}

}  // namespace exstream
