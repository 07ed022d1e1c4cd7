#include "exstream/prototype_buffers.hpp"

#include <algorithm>
#include <limits>

#include "exstream/errors.hpp"
#include "exstream/vector_ops.hpp"

namespace exstream {

namespace {

// Squared distances this close are treated as equal, so ties computed along
// different rounding paths still go to the lowest index.
constexpr double kTieRelTol = 1e-12;

bool within_tie(double d, double best) { return d <= best + kTieRelTol * best; }

void require_capacity(std::size_t capacity) {
  if (capacity < 1) throw UsageError("buffer capacity must be >= 1");
}

std::size_t nearest(const std::vector<Prototype>& prototypes, std::span<const double> x) {
  std::vector<double> dists(prototypes.size());
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < prototypes.size(); ++i) {
    dists[i] = squared_distance(prototypes[i].vector, x);
    best_dist = std::min(best_dist, dists[i]);
  }
  std::size_t best = 0;
  while (!within_tie(dists[best], best_dist)) ++best;
  return best;
}

// w_into <- (c_into * w_into + c_from * w_from) / (c_into + c_from)
void merge_into(Prototype& into, std::span<const double> from, std::size_t from_count) {
  const double ci = static_cast<double>(into.count);
  const double cj = static_cast<double>(from_count);
  const double total = ci + cj;
  for (std::size_t k = 0; k < into.vector.size(); ++k) {
    into.vector[k] = (ci * into.vector[k] + cj * from[k]) / total;
  }
  into.count += from_count;
}

}  // namespace

ExStreamBuffer::ExStreamBuffer(std::size_t capacity) : capacity_(capacity) {
  require_capacity(capacity);
  prototypes_.reserve(capacity);
}

void ExStreamBuffer::insert(std::span<const double> x) {
  if (prototypes_.size() < capacity_) {
    prototypes_.push_back({FeatureVector(x.begin(), x.end()), 1});
    return;
  }
  if (capacity_ == 1) {
    merge_into(prototypes_[0], x, 1);
    return;
  }

  const std::size_t n = prototypes_.size();
  pair_dists_.assign(n * n, 0.0);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = squared_distance(prototypes_[i].vector, prototypes_[j].vector);
      pair_dists_[i * n + j] = d;
      best = std::min(best, d);
    }
  }
  std::size_t bi = 0;
  std::size_t bj = 1;
  while (!within_tie(pair_dists_[bi * n + bj], best)) {
    if (++bj == n) bj = ++bi + 1;
  }
  merge_into(prototypes_[bi], prototypes_[bj].vector, prototypes_[bj].count);
  prototypes_[bj] = {FeatureVector(x.begin(), x.end()), 1};
}

OnlineKMeansBuffer::OnlineKMeansBuffer(std::size_t capacity) : capacity_(capacity) {
  require_capacity(capacity);
  prototypes_.reserve(capacity);
}

void OnlineKMeansBuffer::insert(std::span<const double> x) {
  if (prototypes_.size() < capacity_) {
    prototypes_.push_back({FeatureVector(x.begin(), x.end()), 1});
    return;
  }
  merge_into(prototypes_[nearest(prototypes_, x)], x, 1);
}

ReservoirBuffer::ReservoirBuffer(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(seed) {
  require_capacity(capacity);
}

void ReservoirBuffer::insert(std::span<const double> x) {
  ++seen_;
  if (samples_.size() < capacity_) {
    samples_.emplace_back(x.begin(), x.end());
    return;
  }
  // Slot j uniform on [0, M): replaces with probability b/M, uniformly over slots.
  std::uniform_int_distribution<std::uint64_t> slot(0, seen_ - 1);
  const std::uint64_t j = slot(rng_);
  if (j < capacity_) samples_[j].assign(x.begin(), x.end());
}

QueueBuffer::QueueBuffer(std::size_t capacity) : capacity_(capacity) {
  require_capacity(capacity);
}

void QueueBuffer::insert(std::span<const double> x) {
  if (samples_.size() == capacity_) samples_.pop_front();
  samples_.emplace_back(x.begin(), x.end());
}

}  // namespace exstream
