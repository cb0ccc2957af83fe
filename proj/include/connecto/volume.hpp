#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "connecto/error.hpp"
#include "connecto/extent.hpp"

namespace connecto {

/// Dense scalar voxel grid over an extent. Samples are stored x-fastest, then
/// y, then z, so each z-slice is one contiguous row-major image.
template <class T>
class Volume {
 public:
  using value_type = T;

  Volume() = default;

  /// Zero-filled volume. Throws kInvalidExtent on a bad box.
  explicit Volume(const Extent3D& extent) : extent_(extent) {
    validate(extent_);
    data_.assign(static_cast<std::size_t>(extent_.count()), T{});
  }

  Volume(const Extent3D& extent, std::vector<T> data)
      : extent_(extent), data_(std::move(data)) {
    validate(extent_);
    if (data_.size() != extent_.count()) {
      throw Error(ErrorKind::kInvalidParameter,
                  "voxel array length " + std::to_string(data_.size()) +
                      " does not match extent " + to_string(extent_));
    }
  }

  const Extent3D& extent() const { return extent_; }
  std::uint64_t size() const { return data_.size(); }

  T& at(std::int64_t x, std::int64_t y, std::int64_t z) {
    return data_[extent_.index(x, y, z)];
  }
  const T& at(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return data_[extent_.index(x, y, z)];
  }

  T& operator[](std::uint64_t i) { return data_[i]; }
  const T& operator[](std::uint64_t i) const { return data_[i]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  Extent3D extent_;
  std::vector<T> data_;
};

using Volume3D = Volume<std::uint8_t>;
using FloatVolume3D = Volume<double>;

/// One z-slice, row-major.
struct SliceImage {
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::vector<std::uint8_t> pixels;

  friend bool operator==(const SliceImage&, const SliceImage&) = default;
};

/// Population statistics (divisor N).
struct VolumeStats {
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
};

Volume3D make_constant(const Extent3D& extent, std::uint8_t value);

SliceImage extract_slice(const Volume3D& v, std::int64_t z);

VolumeStats stats(std::span<const double> values);
VolumeStats stats(const FloatVolume3D& v);
VolumeStats stats(const Volume3D& v);

}  // namespace connecto
