#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "exstream/dataset.hpp"

namespace exstream {

enum class OrderingKind { kIid, kClassIid, kInstance, kClassInstance };

struct StreamOrdering {
  OrderingKind kind = OrderingKind::kIid;
  std::uint64_t seed = 0;
};

// Accepts "iid", "class_iid", "instance", "class_instance"; throws ConfigError otherwise.
OrderingKind parse_ordering_kind(std::string_view name);
std::string to_string(OrderingKind kind);

// Permutation of train indices realising one of the four stream regimes:
//   iid            uniform shuffle
//   class_iid      classes in seeded order, samples shuffled within a class
//   instance       (class, instance) clips in seeded order, frames ascending
//   class_instance classes in seeded order, then clips, then frames ascending
std::vector<std::size_t> order_stream(const Dataset& dataset, const StreamOrdering& ordering);

}  // namespace exstream
