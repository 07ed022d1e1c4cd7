#include "exstream/synth.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "exstream/errors.hpp"
#include "exstream/random.hpp"

namespace exstream {

void validate_synth_spec(const SynthSpec& spec) {
  if (spec.num_classes < 1 || spec.dim < 1 || spec.samples_per_class_train < 1 ||
      spec.samples_per_class_test < 1 || spec.instances_per_class < 1) {
    throw ConfigError("synth spec: all counts must be >= 1");
  }
  if (!(spec.noise_std > 0.0)) throw ConfigError("synth spec: noise_std must be > 0");
  if (!(spec.class_mean_separation >= 0.0)) {
    throw ConfigError("synth spec: class_mean_separation must be >= 0");
  }
  if (!(spec.instance_spread >= 0.0)) throw ConfigError("synth spec: instance_spread must be >= 0");
  if (!(spec.shared_mean_norm >= 0.0)) throw ConfigError("synth spec: shared_mean_norm must be >= 0");
}

namespace {

double distance(const FeatureVector& a, const FeatureVector& b) {
  double sq = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sq += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(sq);
}

std::vector<FeatureVector> class_means(const SynthSpec& spec, Rng& rng) {
  const auto k = static_cast<std::size_t>(spec.num_classes);
  std::vector<FeatureVector> means(k, FeatureVector(spec.dim, 0.0));
  if (spec.class_mean_separation == 0.0) return means;
  if (k <= spec.dim) {
    // Scaled basis vectors: every pair sits exactly `separation` apart.
    const double scale = spec.class_mean_separation / std::sqrt(2.0);
    for (std::size_t c = 0; c < k; ++c) means[c][c] = scale;
    return means;
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& m : means) {
    for (double& v : m) v = gauss(rng);
  }
  double min_dist = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) min_dist = std::min(min_dist, distance(means[a], means[b]));
  }
  const double scale = spec.class_mean_separation / min_dist;
  for (auto& m : means) {
    for (double& v : m) v *= scale;
  }
  return means;
}

}  // namespace

Dataset synth_gaussian(const SynthSpec& spec) {
  validate_synth_spec(spec);
  Rng rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Dataset dataset;
  dataset.name = "synth";
  dataset.num_classes = spec.num_classes;
  dataset.dim = spec.dim;

  auto means = class_means(spec, rng);
  const double shared = spec.shared_mean_norm / std::sqrt(static_cast<double>(spec.dim));
  for (auto& m : means) {
    for (double& v : m) v += shared;
  }
  const std::size_t m = spec.instances_per_class;
  for (int c = 0; c < spec.num_classes; ++c) {
    std::vector<FeatureVector> instance_means(m, means[static_cast<std::size_t>(c)]);
    for (auto& im : instance_means) {
      for (double& v : im) v += spec.instance_spread * gauss(rng);
    }
    for (Split split : {Split::kTrain, Split::kTest}) {
      const std::size_t count =
          split == Split::kTrain ? spec.samples_per_class_train : spec.samples_per_class_test;
      std::vector<std::int64_t> next_frame(m, 0);
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t inst = i % m;
        LabeledSample s;
        s.features = instance_means[inst];
        for (double& v : s.features) v += spec.noise_std * gauss(rng);
        s.class_label = c;
        s.instance_id = static_cast<std::int64_t>(inst);
        s.frame_index = next_frame[inst]++;
        s.split = split;
        (split == Split::kTrain ? dataset.train : dataset.test).push_back(std::move(s));
      }
    }
  }
  return dataset;
}

}  // namespace exstream
