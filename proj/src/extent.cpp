#include "connecto/extent.hpp"

#include <limits>

#include "connecto/error.hpp"

namespace connecto {

void validate(const Extent3D& e) {
  if (e.x0 < 0 || e.y0 < 0 || e.z0 < 0) {
    throw Error(ErrorKind::kInvalidExtent, "negative origin in extent " + to_string(e));
  }
  if (e.empty()) {
    throw Error(ErrorKind::kInvalidExtent, "empty extent " + to_string(e));
  }
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  const auto w = static_cast<std::uint64_t>(e.width());
  const auto h = static_cast<std::uint64_t>(e.height());
  const auto d = static_cast<std::uint64_t>(e.depth());
  if (w > kMax / h || w * h > kMax / d) {
    throw Error(ErrorKind::kInvalidExtent, "voxel count overflows in extent " + to_string(e));
  }
}

bool overlaps(const Extent3D& a, const Extent3D& b) {
  return a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1 &&
         a.z0 < b.z1 && b.z0 < a.z1;
}

std::string to_string(const Extent3D& e) {
  return "(" + std::to_string(e.x0) + "," + std::to_string(e.x1) + "," +
         std::to_string(e.y0) + "," + std::to_string(e.y1) + "," +
         std::to_string(e.z0) + "," + std::to_string(e.z1) + ")";
}

}  // namespace connecto
