#pragma once

#include <cstddef>
#include <span>

namespace exstream {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sq = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    sq += diff * diff;
  }
  return sq;
}

}  // namespace exstream
