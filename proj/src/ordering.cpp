#include "exstream/ordering.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "exstream/errors.hpp"
#include "exstream/random.hpp"

namespace exstream {

OrderingKind parse_ordering_kind(std::string_view name) {
  if (name == "iid") return OrderingKind::kIid;
  if (name == "class_iid") return OrderingKind::kClassIid;
  if (name == "instance") return OrderingKind::kInstance;
  if (name == "class_instance") return OrderingKind::kClassInstance;
  throw ConfigError("unknown ordering '" + std::string(name) +
                    "' (expected iid, class_iid, instance or class_instance)");
}

std::string to_string(OrderingKind kind) {
  switch (kind) {
    case OrderingKind::kIid: return "iid";
    case OrderingKind::kClassIid: return "class_iid";
    case OrderingKind::kInstance: return "instance";
    case OrderingKind::kClassInstance: return "class_instance";
  }
  throw ConfigError("unknown ordering kind");
}

namespace {

using Clip = std::vector<std::size_t>;

// Train indices grouped by (class, instance), frames ascending within a clip.
std::map<std::pair<int, std::int64_t>, Clip> clips_of(const Dataset& dataset) {
  std::map<std::pair<int, std::int64_t>, Clip> clips;
  for (std::size_t i = 0; i < dataset.train.size(); ++i) {
    const auto& s = dataset.train[i];
    clips[{s.class_label, s.instance_id}].push_back(i);
  }
  for (auto& [key, idx] : clips) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return dataset.train[a].frame_index < dataset.train[b].frame_index;
    });
  }
  return clips;
}

std::vector<int> shuffled_classes(const Dataset& dataset, Rng& rng) {
  std::vector<int> present;
  std::vector<bool> seen(static_cast<std::size_t>(dataset.num_classes), false);
  for (const auto& s : dataset.train) {
    seen[static_cast<std::size_t>(s.class_label)] = true;
  }
  for (int c = 0; c < dataset.num_classes; ++c) {
    if (seen[static_cast<std::size_t>(c)]) present.push_back(c);
  }
  std::shuffle(present.begin(), present.end(), rng);
  return present;
}

}  // namespace

std::vector<std::size_t> order_stream(const Dataset& dataset, const StreamOrdering& ordering) {
  if (dataset.train.empty()) throw UsageError("order_stream: empty train set");
  Rng rng(ordering.seed);
  std::vector<std::size_t> order;
  order.reserve(dataset.train.size());

  switch (ordering.kind) {
    case OrderingKind::kIid: {
      order.resize(dataset.train.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::shuffle(order.begin(), order.end(), rng);
      break;
    }
    case OrderingKind::kClassIid: {
      std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(dataset.num_classes));
      for (std::size_t i = 0; i < dataset.train.size(); ++i) {
        by_class[static_cast<std::size_t>(dataset.train[i].class_label)].push_back(i);
      }
      for (int c : shuffled_classes(dataset, rng)) {
        auto& members = by_class[static_cast<std::size_t>(c)];
        std::shuffle(members.begin(), members.end(), rng);
        order.insert(order.end(), members.begin(), members.end());
      }
      break;
    }
    case OrderingKind::kInstance: {
      auto clips = clips_of(dataset);
      std::vector<const Clip*> sequence;
      for (const auto& [key, clip] : clips) sequence.push_back(&clip);
      std::shuffle(sequence.begin(), sequence.end(), rng);
      for (const Clip* clip : sequence) order.insert(order.end(), clip->begin(), clip->end());
      break;
    }
    case OrderingKind::kClassInstance: {
      auto clips = clips_of(dataset);
      for (int c : shuffled_classes(dataset, rng)) {
        std::vector<const Clip*> sequence;
        for (const auto& [key, clip] : clips) {
          if (key.first == c) sequence.push_back(&clip);
        }
        std::shuffle(sequence.begin(), sequence.end(), rng);
        for (const Clip* clip : sequence) order.insert(order.end(), clip->begin(), clip->end());
      }
      break;
    }
  }
  return order;
}

}  // namespace exstream
