#pragma once

#include <filesystem>
#include <string>

#include "exstream/dataset.hpp"
#include "exstream/feature_io.hpp"

namespace exstream {

struct ManifestOptions {
  // Scale every feature vector to unit length while loading.
  bool normalize = true;
  // Dataset name; the manifest file stem is used when empty.
  std::string name;
};

// CSV with header: sample_id,row,split,class_label,instance_id,frame_index.
// Integer labels must densely cover [0, K). Non-integer labels are mapped to
// dense ids in lexicographic order.
Dataset load_manifest(const std::filesystem::path& path, const FeatureMatrix& features,
                      const ManifestOptions& options = {});

// Writes `dataset` as a feature file plus manifest; train rows come first.
void write_dataset(const Dataset& dataset, const std::filesystem::path& features_path,
                   const std::filesystem::path& manifest_path);

}  // namespace exstream
