#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

#include "connecto/volume.hpp"

namespace connecto {

enum class Axis { kX = 0, kY = 1, kZ = 2 };

/// 3x3x3 directional derivative kernel. Offsets run over {-1,0,1}.
struct SobelKernel3D {
  Axis axis = Axis::kX;
  std::array<std::int64_t, 27> weights{};

  std::int64_t at(int dz, int dy, int dx) const {
    return weights[static_cast<std::size_t>((dz + 1) * 9 + (dy + 1) * 3 + (dx + 1))];
  }
  std::int64_t& at(int dz, int dy, int dx) {
    return weights[static_cast<std::size_t>((dz + 1) * 9 + (dy + 1) * 3 + (dx + 1))];
  }
};

/// Differencing along `axis`, smoothing across the other two. The X kernel's
/// dz = -1, 0, +1 planes are
///
///   -1 0 1     -3 0 3     -1 0 1
///   -3 0 3     -6 0 6     -3 0 3
///   -1 0 1     -3 0 3     -1 0 1
///
/// (rows dy = -1..1, columns dx = -1..1). Y and Z swap the differentiation
/// offset with dy or dz respectively.
SobelKernel3D sobel_kernel(Axis axis);

/// Clamp-to-edge correlation of `v` with `k`, exact in 64-bit integers.
/// `threads` > 1 splits the work across z-slabs; the result does not depend
/// on it.
std::vector<std::int64_t> convolve3d(const Volume3D& v, const SobelKernel3D& k,
                                     unsigned threads = 1);

struct GradientField {
  Extent3D extent;
  std::vector<std::int64_t> gx, gy, gz;

  friend bool operator==(const GradientField&, const GradientField&) = default;
};

GradientField gradient(const Volume3D& v, unsigned threads = 1);

inline constexpr double kInfNorm = std::numeric_limits<double>::infinity();

/// Per-voxel (|gx|^p + |gy|^p + |gz|^p)^(1/p); p = kInfNorm gives the max.
FloatVolume3D magnitude_lp(const GradientField& g, double p);

enum class Polarity { kAbove, kBelow };

struct BinaryVolume {
  Extent3D extent;
  std::vector<std::uint8_t> bits;  // 0 or 1

  std::uint64_t foreground_count() const;

  friend bool operator==(const BinaryVolume&, const BinaryVolume&) = default;
};

/// Foreground iff m > mean + k*stddev (kAbove) or m < threshold (kBelow).
BinaryVolume binarize(const FloatVolume3D& m, double k,
                      Polarity polarity = Polarity::kAbove);

double binarize_threshold(const FloatVolume3D& m, double k);

// Serialization through the raw+sidecar format.
void write_gradient(const GradientField& g, const std::filesystem::path& path);
GradientField read_gradient(const std::filesystem::path& path);

/// Stored as a u8 volume with foreground 255.
Volume3D to_volume(const BinaryVolume& b);
/// Any nonzero sample is foreground.
BinaryVolume to_binary(const Volume3D& v);

}  // namespace connecto
