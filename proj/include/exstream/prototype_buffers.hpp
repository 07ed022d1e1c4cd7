#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "exstream/dataset.hpp"
#include "exstream/random.hpp"

namespace exstream {

// A stored representative vector and the number of points it has absorbed.
struct Prototype {
  FeatureVector vector;
  std::size_t count = 1;

  friend bool operator==(const Prototype&, const Prototype&) = default;
};

// Exemplar streaming. Below capacity, points are stored verbatim. At capacity,
// the two closest prototypes (i, j), i < j, merge into slot i as their
// count-weighted mean and the incoming point takes slot j with count 1.
// Ties in distance go to the lowest (i, j) pair.
//
// With capacity 1 there is no pair to merge, so the incoming point is folded
// into the single prototype as a count-weighted mean.
class ExStreamBuffer {
 public:
  explicit ExStreamBuffer(std::size_t capacity);

  void insert(std::span<const double> x);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return prototypes_.size(); }
  const std::vector<Prototype>& prototypes() const { return prototypes_; }

 private:
  std::size_t capacity_;
  std::vector<Prototype> prototypes_;
  std::vector<double> pair_dists_;  // scratch
};

// Online k-means / LVQ-style running means. At capacity the nearest prototype
// (lowest slot on ties) moves to (c*w + x) / (c + 1).
class OnlineKMeansBuffer {
 public:
  explicit OnlineKMeansBuffer(std::size_t capacity);

  void insert(std::span<const double> x);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return prototypes_.size(); }
  const std::vector<Prototype>& prototypes() const { return prototypes_; }

 private:
  std::size_t capacity_;
  std::vector<Prototype> prototypes_;
};

// Reservoir sampling (Algorithm R). After M inserts each seen item is held
// with probability min(1, b/M).
class ReservoirBuffer {
 public:
  ReservoirBuffer(std::size_t capacity, std::uint64_t seed);

  void insert(std::span<const double> x);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return samples_.size(); }
  std::uint64_t seen_count() const { return seen_; }
  const std::vector<FeatureVector>& samples() const { return samples_; }

 private:
  std::size_t capacity_;
  std::uint64_t seen_ = 0;
  std::vector<FeatureVector> samples_;
  Rng rng_;
};

// First-in first-out; contents are kept in arrival order.
class QueueBuffer {
 public:
  explicit QueueBuffer(std::size_t capacity);

  void insert(std::span<const double> x);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return samples_.size(); }
  const std::deque<FeatureVector>& samples() const { return samples_; }

 private:
  std::size_t capacity_;
  std::deque<FeatureVector> samples_;
};

// Unbounded store used by full rehearsal.
class FullBuffer {
 public:
  void insert(std::span<const double> x) { samples_.emplace_back(x.begin(), x.end()); }

  std::size_t size() const { return samples_.size(); }
  const std::vector<FeatureVector>& samples() const { return samples_; }

 private:
  std::vector<FeatureVector> samples_;
};

}  // namespace exstream
