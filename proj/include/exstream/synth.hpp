#pragma once

#include <cstdint>

#include "exstream/dataset.hpp"

namespace exstream {

// Gaussian class/instance mixture used as a desk-scale stand-in for
// pre-extracted CNN embeddings.
struct SynthSpec {
  int num_classes = 2;
  std::size_t dim = 10;
  std::size_t samples_per_class_train = 200;
  std::size_t samples_per_class_test = 100;
  std::size_t instances_per_class = 4;
  // Minimum pairwise distance between class means.
  double class_mean_separation = 10.0;
  // Per-dimension std-dev of the isotropic sample noise around an instance mean.
  double noise_std = 1.0;
  // Per-dimension std-dev of an instance mean around its class mean.
  double instance_spread = 0.5;
  // Norm of a component shared by every class mean (along the all-ones
  // direction). Pairwise separations are unaffected.
  double shared_mean_norm = 30.0;
  std::uint64_t seed = 0;
};

// Throws ConfigError on a spec with zero counts or non-positive noise.
void validate_synth_spec(const SynthSpec& spec);

// Deterministic in `spec.seed`. Train and test share instances; frame indices
// count up within each (instance, split).
Dataset synth_gaussian(const SynthSpec& spec);

}  // namespace exstream
