#pragma once

#include <cstdint>
#include <string>

namespace connecto {

/// Half-open voxel box [x0,x1) x [y0,y1) x [z0,z1).
struct Extent3D {
  std::int64_t x0 = 0, x1 = 0;
  std::int64_t y0 = 0, y1 = 0;
  std::int64_t z0 = 0, z1 = 0;

  std::int64_t width() const { return x1 - x0; }
  std::int64_t height() const { return y1 - y0; }
  std::int64_t depth() const { return z1 - z0; }

  bool empty() const { return x0 >= x1 || y0 >= y1 || z0 >= z1; }

  /// Voxel count. Only meaningful for a validated extent.
  std::uint64_t count() const {
    return static_cast<std::uint64_t>(width()) *
           static_cast<std::uint64_t>(height()) *
           static_cast<std::uint64_t>(depth());
  }

  bool contains(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return x >= x0 && x < x1 && y >= y0 && y < y1 && z >= z0 && z < z1;
  }

  bool contains(const Extent3D& o) const {
    return o.x0 >= x0 && o.x1 <= x1 && o.y0 >= y0 && o.y1 <= y1 &&
           o.z0 >= z0 && o.z1 <= z1;
  }

  /// Flat index, x fastest, z slowest.
  std::uint64_t index(std::int64_t x, std::int64_t y, std::int64_t z) const {
    const auto w = static_cast<std::uint64_t>(width());
    const auto h = static_cast<std::uint64_t>(height());
    return static_cast<std::uint64_t>(z - z0) * h * w +
           static_cast<std::uint64_t>(y - y0) * w +
           static_cast<std::uint64_t>(x - x0);
  }

  friend bool operator==(const Extent3D&, const Extent3D&) = default;
};

/// Throws kInvalidExtent if the box is empty, has negative coordinates, or
/// its voxel count does not fit in 64 bits.
void validate(const Extent3D& e);

bool overlaps(const Extent3D& a, const Extent3D& b);

std::string to_string(const Extent3D& e);

}  // namespace connecto
