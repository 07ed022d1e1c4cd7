#include "exstream/feature_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "exstream/errors.hpp"

namespace exstream {

namespace {

constexpr std::array<char, 4> kMagic = {'F', 'E', 'A', 'T'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 4 + 8 + 8;

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian hosts are not supported");

template <typename T>
void put_le(std::vector<char>& out, T value) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  out.insert(out.end(), bytes.begin(), bytes.end());
}

template <typename T>
T get_le(const char* data) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), data, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void write_feature_matrix(const std::filesystem::path& path, const FeatureMatrix& matrix) {
  std::vector<char> buf;
  buf.reserve(kHeaderBytes + matrix.values().size() * sizeof(float));
  buf.insert(buf.end(), kMagic.begin(), kMagic.end());
  put_le<std::uint32_t>(buf, kVersion);
  put_le<std::uint64_t>(buf, matrix.rows());
  put_le<std::uint64_t>(buf, matrix.cols());
  for (double v : matrix.values()) put_le<float>(buf, static_cast<float>(v));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

FeatureMatrix load_feature_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open feature file " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (buf.size() < kHeaderBytes) {
    if (buf.size() >= 4 && std::memcmp(buf.data(), kMagic.data(), 4) != 0) {
      throw FormatError(path.string() + ": bad magic");
    }
    throw LengthError(path.string() + ": truncated header");
  }
  if (std::memcmp(buf.data(), kMagic.data(), 4) != 0) {
    throw FormatError(path.string() + ": bad magic");
  }
  const auto version = get_le<std::uint32_t>(buf.data() + 4);
  if (version != kVersion) {
    throw FormatError(path.string() + ": unsupported version " + std::to_string(version));
  }
  const auto n = get_le<std::uint64_t>(buf.data() + 8);
  const auto d = get_le<std::uint64_t>(buf.data() + 16);
  const std::size_t payload = buf.size() - kHeaderBytes;
  if (d != 0 && n > payload / sizeof(float) / d) {
    throw LengthError(path.string() + ": payload holds fewer than n*d values");
  }
  if (payload != n * d * sizeof(float)) {
    throw LengthError(path.string() + ": payload is " + std::to_string(payload) +
                      " bytes, header implies " + std::to_string(n * d * sizeof(float)));
  }

  FeatureMatrix matrix(n, d);
  const char* p = buf.data() + kHeaderBytes;
  for (std::size_t i = 0; i < n; ++i) {
    auto row = matrix.row(i);
    for (std::size_t j = 0; j < d; ++j, p += sizeof(float)) {
      const float v = get_le<float>(p);
      if (!std::isfinite(v)) {
        throw DataError(path.string() + ": non-finite value at row " + std::to_string(i) +
                        ", column " + std::to_string(j));
      }
      row[j] = v;
    }
  }
  return matrix;
}

}  // namespace exstream
