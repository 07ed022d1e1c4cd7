#include "exstream/metrics.hpp"

#include <set>

#include "exstream/errors.hpp"

namespace exstream {

OmegaResult omega_b(const AccuracyCurve& stream, const AccuracyCurve& offline,
                    std::size_t buffer_size) {
  if (stream.size() != offline.size()) {
    throw AlignmentError("omega: curves have " + std::to_string(stream.size()) + " and " +
                         std::to_string(offline.size()) + " events");
  }
  if (stream.size() == 0) throw AlignmentError("omega: empty curves");
  // Extended precision keeps means of identical ratios exact.
  long double sum = 0.0L;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const auto& s = stream.events[i];
    const auto& o = offline.events[i];
    if (s.t != o.t) {
      throw AlignmentError("omega: event " + std::to_string(i) + " at t=" + std::to_string(s.t) +
                           " vs offline t=" + std::to_string(o.t));
    }
    if (!(o.alpha > 0.0)) {
      throw DataError("omega: offline accuracy is zero at t=" + std::to_string(o.t));
    }
    sum += static_cast<long double>(s.alpha) / o.alpha;
  }
  return {buffer_size, static_cast<double>(sum / static_cast<long double>(stream.size())),
          stream.size()};
}

MuTotalResult mu_total(std::span<const OmegaResult> omegas) {
  if (omegas.empty()) throw UsageError("mu_total: no omega values");
  MuTotalResult result;
  std::set<std::size_t> sizes;
  long double sum = 0.0L;
  for (const auto& o : omegas) {
    if (!sizes.insert(o.buffer_size).second) {
      throw UsageError("mu_total: duplicate buffer size " + std::to_string(o.buffer_size));
    }
    result.buffer_sizes.push_back(o.buffer_size);
    sum += o.omega;
  }
  result.mu = static_cast<double>(sum / static_cast<long double>(omegas.size()));
  return result;
}

}  // namespace exstream
