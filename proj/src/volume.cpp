#include "connecto/volume.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace connecto {

Volume3D make_constant(const Extent3D& extent, std::uint8_t value) {
  validate(extent);
  return Volume3D(extent, std::vector<std::uint8_t>(extent.count(), value));
}

SliceImage extract_slice(const Volume3D& v, std::int64_t z) {
  const Extent3D& e = v.extent();
  if (z < e.z0 || z >= e.z1) {
    throw Error(ErrorKind::kOutOfRange,
                "slice z=" + std::to_string(z) + " outside extent " + to_string(e));
  }
  SliceImage img;
  img.width = e.width();
  img.height = e.height();
  const auto plane = static_cast<std::size_t>(img.width * img.height);
  const auto first = v.data().begin() + static_cast<std::ptrdiff_t>(e.index(e.x0, e.y0, z));
  img.pixels.assign(first, first + static_cast<std::ptrdiff_t>(plane));
  return img;
}

VolumeStats stats(std::span<const double> values) {
  if (values.empty()) {
    throw Error(ErrorKind::kInvalidParameter, "stats of an empty volume");
  }
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  double lo = values.front();
  double hi = values.front();
  for (double x : values) {
    sum += x;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : values) {
    ss += (x - mean) * (x - mean);
  }
  VolumeStats s;
  // Rounding can push the mean a hair outside [min, max] for constant data.
  s.mean = std::clamp(mean, lo, hi);
  s.stddev = std::sqrt(ss / n);
  s.min = lo;
  s.max = hi;
  return s;
}

VolumeStats stats(const FloatVolume3D& v) { return stats(v.data()); }

VolumeStats stats(const Volume3D& v) {
  // Integer samples: exact sums.
  if (v.size() == 0) {
    throw Error(ErrorKind::kInvalidParameter, "stats of an empty volume");
  }
  std::uint64_t sum = 0;
  std::uint8_t lo = 255, hi = 0;
  for (std::uint8_t x : v.data()) {
    sum += x;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  const auto n = static_cast<double>(v.size());
  const double mean = static_cast<double>(sum) / n;
  double ss = 0.0;
  for (std::uint8_t x : v.data()) {
    const double d = x - mean;
    ss += d * d;
  }
  return VolumeStats{mean, std::sqrt(ss / n), static_cast<double>(lo), static_cast<double>(hi)};
}

}  // namespace connecto
