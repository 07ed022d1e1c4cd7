#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "exstream/protocol.hpp"

namespace exstream {

struct OmegaResult {
  std::size_t buffer_size = 0;
  double omega = 0.0;
  std::size_t num_events = 0;
};

struct MuTotalResult {
  std::vector<std::size_t> buffer_sizes;
  double mu = 0.0;
};

// Mean over test events of alpha_t / alpha_offline_t. Values above 1 are kept.
// Throws AlignmentError when the event times differ and DataError when an
// offline accuracy is not positive.
OmegaResult omega_b(const AccuracyCurve& stream, const AccuracyCurve& offline,
                    std::size_t buffer_size = 0);

// Arithmetic mean of omega over distinct buffer sizes.
MuTotalResult mu_total(std::span<const OmegaResult> omegas);

}  // namespace exstream
