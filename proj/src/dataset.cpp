#include "exstream/dataset.hpp"

#include <cmath>
#include <set>
#include <tuple>

#include "exstream/errors.hpp"

namespace exstream {

namespace {

void validate_split(const std::vector<LabeledSample>& samples, const Dataset& dataset,
                    const char* split_name) {
  std::set<std::tuple<int, std::int64_t, std::int64_t>> keys;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const std::string where = std::string(split_name) + " sample " + std::to_string(i);
    if (s.features.size() != dataset.dim) {
      throw DataError(where + ": dimension " + std::to_string(s.features.size()) +
                      " != " + std::to_string(dataset.dim));
    }
    for (double v : s.features) {
      if (!std::isfinite(v)) throw DataError(where + ": non-finite feature value");
    }
    if (s.class_label < 0 || s.class_label >= dataset.num_classes) {
      throw DataError(where + ": class label " + std::to_string(s.class_label) +
                      " outside [0, " + std::to_string(dataset.num_classes) + ")");
    }
    if (s.frame_index < 0) throw DataError(where + ": negative frame index");
    if (!keys.emplace(s.class_label, s.instance_id, s.frame_index).second) {
      throw DataError(where + ": duplicate (class, instance, frame) key");
    }
  }
}

}  // namespace

void validate_dataset(const Dataset& dataset) {
  validate_split(dataset.train, dataset, "train");
  validate_split(dataset.test, dataset, "test");
  std::vector<bool> in_train(static_cast<std::size_t>(dataset.num_classes), false);
  for (const auto& s : dataset.train) in_train[static_cast<std::size_t>(s.class_label)] = true;
  for (const auto& s : dataset.test) {
    if (!in_train[static_cast<std::size_t>(s.class_label)]) {
      throw DataError("class " + std::to_string(s.class_label) +
                      " appears in test but not in train");
    }
  }
}

FeatureVector l2_normalize(std::span<const double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double norm = std::sqrt(sq);
  FeatureVector out(v.begin(), v.end());
  if (norm < 1e-12) return out;
  for (double& x : out) x /= norm;
  return out;
}

void l2_normalize_in_place(Dataset& dataset) {
  for (auto* split : {&dataset.train, &dataset.test}) {
    for (auto& s : *split) s.features = l2_normalize(s.features);
  }
}

}  // namespace exstream
