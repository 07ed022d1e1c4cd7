#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "exstream/clustream.hpp"
#include "exstream/dataset.hpp"
#include "exstream/hpstream.hpp"
#include "exstream/prototype_buffers.hpp"

namespace exstream {

enum class Strategy { kExStream, kOnlineKMeans, kCluStream, kHPStream, kReservoir, kQueue, kFull };

// Accepts exstream, online_kmeans, clustream, hpstream, reservoir, queue, full.
Strategy parse_strategy(std::string_view name);
std::string to_string(Strategy strategy);
bool is_bounded(Strategy strategy);

struct BufferParams {
  CluStreamParams clustream;
  HPStreamParams hpstream;
};

struct LabeledVector {
  FeatureVector features;
  int class_label = 0;
};

using ClassBuffer = std::variant<ExStreamBuffer, OnlineKMeansBuffer, CluStreamBuffer,
                                 HPStreamBuffer, ReservoirBuffer, QueueBuffer, FullBuffer>;

// One strategy-specific buffer per class label.
class BufferManager {
 public:
  // `capacity` is the per-class bound b; ignored for Strategy::kFull.
  BufferManager(Strategy strategy, std::size_t capacity, int num_classes,
                const BufferParams& params = {}, std::uint64_t seed = 0);

  // `t` is the stream time in samples (1 for the first sample of the stream).
  void insert(std::span<const double> x, int class_label, std::uint64_t t);
  void insert(const LabeledSample& sample, std::uint64_t t) {
    insert(sample.features, sample.class_label, t);
  }

  // Every stored prototype with its label, ordered by (class, slot).
  std::vector<LabeledVector> contents() const;
  // d-vector equivalents held: micro-cluster strategies pay 2 per cluster.
  double memory_cost() const;

  std::size_t size(int class_label) const;
  std::size_t total_size() const;

  Strategy strategy() const { return strategy_; }
  std::size_t capacity() const { return capacity_; }
  int num_classes() const { return static_cast<int>(buffers_.size()); }
  const ClassBuffer& buffer(int class_label) const;

 private:
  Strategy strategy_;
  std::size_t capacity_;
  std::vector<ClassBuffer> buffers_;
};

}  // namespace exstream
