#include "exstream/buffer_manager.hpp"

#include "exstream/errors.hpp"
#include "exstream/random.hpp"

namespace exstream {

Strategy parse_strategy(std::string_view name) {
  if (name == "exstream") return Strategy::kExStream;
  if (name == "online_kmeans") return Strategy::kOnlineKMeans;
  if (name == "clustream") return Strategy::kCluStream;
  if (name == "hpstream") return Strategy::kHPStream;
  if (name == "reservoir") return Strategy::kReservoir;
  if (name == "queue") return Strategy::kQueue;
  if (name == "full") return Strategy::kFull;
  throw ConfigError("unknown buffer strategy '" + std::string(name) + "'");
}

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kExStream: return "exstream";
    case Strategy::kOnlineKMeans: return "online_kmeans";
    case Strategy::kCluStream: return "clustream";
    case Strategy::kHPStream: return "hpstream";
    case Strategy::kReservoir: return "reservoir";
    case Strategy::kQueue: return "queue";
    case Strategy::kFull: return "full";
  }
  throw ConfigError("unknown buffer strategy");
}

bool is_bounded(Strategy strategy) { return strategy != Strategy::kFull; }

namespace {

ClassBuffer make_buffer(Strategy strategy, std::size_t capacity, const BufferParams& params,
                        std::uint64_t seed) {
  switch (strategy) {
    case Strategy::kExStream: return ExStreamBuffer(capacity);
    case Strategy::kOnlineKMeans: return OnlineKMeansBuffer(capacity);
    case Strategy::kCluStream: return CluStreamBuffer(capacity, params.clustream, seed);
    case Strategy::kHPStream: return HPStreamBuffer(capacity, params.hpstream);
    case Strategy::kReservoir: return ReservoirBuffer(capacity, seed);
    case Strategy::kQueue: return QueueBuffer(capacity);
    case Strategy::kFull: return FullBuffer();
  }
  throw ConfigError("unknown buffer strategy");
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

BufferManager::BufferManager(Strategy strategy, std::size_t capacity, int num_classes,
                             const BufferParams& params, std::uint64_t seed)
    : strategy_(strategy), capacity_(is_bounded(strategy) ? capacity : 0) {
  if (num_classes < 1) throw UsageError("buffer manager needs at least one class");
  if (is_bounded(strategy) && capacity < 1) {
    throw ConfigError("bounded strategies need buffer size >= 1");
  }
  buffers_.reserve(static_cast<std::size_t>(num_classes));
  for (int c = 0; c < num_classes; ++c) {
    buffers_.push_back(make_buffer(strategy, capacity, params,
                                   derive_seed(seed, static_cast<std::uint64_t>(c))));
  }
}

const ClassBuffer& BufferManager::buffer(int class_label) const {
  if (class_label < 0 || class_label >= num_classes()) {
    throw UsageError("class label " + std::to_string(class_label) + " out of range");
  }
  return buffers_[static_cast<std::size_t>(class_label)];
}

void BufferManager::insert(std::span<const double> x, int class_label, std::uint64_t t) {
  buffer(class_label);  // range check
  const double time = static_cast<double>(t);
  std::visit(Overloaded{
                 [&](CluStreamBuffer& b) { b.insert(x, time); },
                 [&](HPStreamBuffer& b) { b.insert(x, time); },
                 [&](auto& b) { b.insert(x); },
             },
             buffers_[static_cast<std::size_t>(class_label)]);
}

std::vector<LabeledVector> BufferManager::contents() const {
  std::vector<LabeledVector> out;
  for (int c = 0; c < num_classes(); ++c) {
    const auto emit = [&](const FeatureVector& v) { out.push_back({v, c}); };
    std::visit(Overloaded{
                   [&](const ExStreamBuffer& b) {
                     for (const auto& p : b.prototypes()) emit(p.vector);
                   },
                   [&](const OnlineKMeansBuffer& b) {
                     for (const auto& p : b.prototypes()) emit(p.vector);
                   },
                   [&](const CluStreamBuffer& b) {
                     for (const auto& v : b.prototypes()) emit(v);
                   },
                   [&](const HPStreamBuffer& b) {
                     for (const auto& v : b.prototypes()) emit(v);
                   },
                   [&](const auto& b) {
                     for (const auto& v : b.samples()) emit(v);
                   },
               },
               buffers_[static_cast<std::size_t>(c)]);
  }
  return out;
}

double BufferManager::memory_cost() const {
  double units = 0.0;
  for (const auto& b : buffers_) {
    units += std::visit(Overloaded{
                            [](const CluStreamBuffer& cb) { return cb.memory_cost(); },
                            [](const HPStreamBuffer& hb) { return 2.0 * static_cast<double>(hb.size()); },
                            [](const auto& other) { return static_cast<double>(other.size()); },
                        },
                        b);
  }
  return units;
}

std::size_t BufferManager::size(int class_label) const {
  return std::visit([](const auto& b) { return b.size(); }, buffer(class_label));
}

std::size_t BufferManager::total_size() const {
  std::size_t total = 0;
  for (int c = 0; c < num_classes(); ++c) total += size(c);
  return total;
}

}  // namespace exstream
