#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace exstream {

using FeatureVector = std::vector<double>;

enum class Split { kTrain, kTest };

struct LabeledSample {
  FeatureVector features;
  int class_label = 0;
  std::int64_t instance_id = 0;
  std::int64_t frame_index = 0;
  Split split = Split::kTrain;
};

struct Dataset {
  std::string name;
  std::vector<LabeledSample> train;
  std::vector<LabeledSample> test;
  int num_classes = 0;
  std::size_t dim = 0;
};

// Throws DataError when the dataset violates its invariants: shared dim,
// finite values, labels in [0, K), unique (class, instance, frame) per split,
// every test class present in train.
void validate_dataset(const Dataset& dataset);

// Unit-length copy of `v`; vectors with norm below 1e-12 pass through unchanged.
FeatureVector l2_normalize(std::span<const double> v);

void l2_normalize_in_place(Dataset& dataset);

}  // namespace exstream
