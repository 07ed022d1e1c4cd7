#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace exstream {

// Dense row-major n x d matrix of feature rows.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * cols_, cols_};
  }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

  const std::vector<double>& values() const { return values_; }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// Binary layout: "FEAT", u32 version = 1, u64 n, u64 d, then n*d float32,
// all little-endian, row-major. Values are narrowed to float32 on write.
void write_feature_matrix(const std::filesystem::path& path, const FeatureMatrix& matrix);

// Throws FormatError on bad magic/version, LengthError on a payload whose size
// disagrees with the header, DataError on NaN/Inf.
FeatureMatrix load_feature_matrix(const std::filesystem::path& path);

}  // namespace exstream
