#include "connecto/gradient.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "bytes.hpp"
#include "connecto/error.hpp"
#include "connecto/volume_io.hpp"

namespace connecto {

namespace {

int sign(int d) { return (d > 0) - (d < 0); }

// X kernel: difference along dx, smoothing profile over (dz, dy).
std::int64_t x_weight(int dz, int dy, int dx) {
  const std::int64_t smooth = dz == 0 ? (dy == 0 ? 6 : 3) : (dy == 0 ? 3 : 1);
  return sign(dx) * smooth;
}

}  // namespace

SobelKernel3D sobel_kernel(Axis axis) {
  SobelKernel3D k;
  k.axis = axis;
  for (int dz = -1; dz <= 1; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        switch (axis) {
          case Axis::kX: k.at(dz, dy, dx) = x_weight(dz, dy, dx); break;
          case Axis::kY: k.at(dz, dy, dx) = x_weight(dz, dx, dy); break;
          case Axis::kZ: k.at(dz, dy, dx) = x_weight(dx, dy, dz); break;
        }
      }
    }
  }
  return k;
}

std::vector<std::int64_t> convolve3d(const Volume3D& v, const SobelKernel3D& k,
                                     unsigned threads) {
  const Extent3D& e = v.extent();
  const std::int64_t nx = e.width(), ny = e.height(), nz = e.depth();
  std::vector<std::int64_t> out(v.size(), 0);
  const std::uint8_t* src = v.data().data();

  // Non-zero taps only; the centre column of every kernel is zero.
  struct Tap {
    int dz, dy, dx;
    std::int64_t w;
  };
  std::vector<Tap> taps;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        if (k.at(dz, dy, dx) != 0) taps.push_back({dz, dy, dx, k.at(dz, dy, dx)});

  auto clamp = [](std::int64_t i, std::int64_t n) { return std::clamp<std::int64_t>(i, 0, n - 1); };

  auto run_slab = [&](std::int64_t zbegin, std::int64_t zend) {
    for (std::int64_t z = zbegin; z < zend; ++z) {
      for (std::int64_t y = 0; y < ny; ++y) {
        for (std::int64_t x = 0; x < nx; ++x) {
          std::int64_t acc = 0;
          for (const Tap& t : taps) {
            const std::int64_t sz = clamp(z + t.dz, nz);
            const std::int64_t sy = clamp(y + t.dy, ny);
            const std::int64_t sx = clamp(x + t.dx, nx);
            acc += t.w * src[(sz * ny + sy) * nx + sx];
          }
          out[static_cast<std::size_t>((z * ny + y) * nx + x)] = acc;
        }
      }
    }
  };

  const auto workers = static_cast<std::int64_t>(
      std::clamp<std::int64_t>(threads, 1, std::max<std::int64_t>(nz, 1)));
  if (workers == 1) {
    run_slab(0, nz);
    return out;
  }
  {
    std::vector<std::jthread> pool;
    for (std::int64_t w = 0; w < workers; ++w) {
      pool.emplace_back(run_slab, nz * w / workers, nz * (w + 1) / workers);
    }
  }
  return out;
}

GradientField gradient(const Volume3D& v, unsigned threads) {
  return GradientField{v.extent(), convolve3d(v, sobel_kernel(Axis::kX), threads),
                       convolve3d(v, sobel_kernel(Axis::kY), threads),
                       convolve3d(v, sobel_kernel(Axis::kZ), threads)};
}

FloatVolume3D magnitude_lp(const GradientField& g, double p) {
  if (std::isnan(p) || p < 1.0) {
    throw Error(ErrorKind::kInvalidParameter,
                "norm order p must be >= 1 or infinity, got " + std::to_string(p));
  }
  FloatVolume3D m(g.extent);
  for (std::size_t i = 0; i < g.gx.size(); ++i) {
    const double a[3] = {std::abs(static_cast<double>(g.gx[i])),
                         std::abs(static_cast<double>(g.gy[i])),
                         std::abs(static_cast<double>(g.gz[i]))};
    const double hi = std::max({a[0], a[1], a[2]});
    if (hi == 0.0 || std::isinf(p)) {
      m[i] = hi;
    } else if (p == 1.0) {
      m[i] = a[0] + a[1] + a[2];
    } else {
      // Scale by the largest component so |g|^p cannot overflow for large p.
      double s = 0.0;
      for (double c : a) s += std::pow(c / hi, p);
      m[i] = hi * std::pow(s, 1.0 / p);
    }
  }
  return m;
}

std::uint64_t BinaryVolume::foreground_count() const {
  return static_cast<std::uint64_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

double binarize_threshold(const FloatVolume3D& m, double k) {
  if (!std::isfinite(k)) {
    throw Error(ErrorKind::kInvalidParameter, "threshold multiplier must be finite");
  }
  const VolumeStats s = stats(m);
  return s.mean + k * s.stddev;
}

BinaryVolume binarize(const FloatVolume3D& m, double k, Polarity polarity) {
  const double t = binarize_threshold(m, k);
  BinaryVolume b{m.extent(), std::vector<std::uint8_t>(m.size(), 0)};
  for (std::size_t i = 0; i < m.size(); ++i) {
    const bool fg = polarity == Polarity::kAbove ? m[i] > t : m[i] < t;
    b.bits[i] = fg ? 1 : 0;
  }
  return b;
}

void write_gradient(const GradientField& g, const std::filesystem::path& path) {
  std::string payload;
  payload.reserve(g.gx.size() * 24);
  for (const auto* comp : {&g.gx, &g.gy, &g.gz}) {
    for (std::int64_t x : *comp) detail::append_i64(payload, x);
  }
  write_raw_bytes(path, g.extent, "i64x3", payload);
}

GradientField read_gradient(const std::filesystem::path& path) {
  const RawHeader h = read_raw_header(path);
  if (h.dtype != "i64x3") {
    throw Error(ErrorKind::kFormat,
                path.string() + ": dtype is '" + h.dtype + "', expected 'i64x3'");
  }
  const std::string payload = read_file(path);
  const std::uint64_t n = h.extent.count();
  if (payload.size() != n * 24) {
    throw Error(ErrorKind::kFormat, path.string() + ": payload length does not match sidecar");
  }
  GradientField g{h.extent, {}, {}, {}};
  std::size_t off = 0;
  for (auto* comp : {&g.gx, &g.gy, &g.gz}) {
    comp->resize(n);
    for (auto& x : *comp) {
      x = detail::load_i64(payload.data() + off);
      off += 8;
    }
  }
  return g;
}

Volume3D to_volume(const BinaryVolume& b) {
  std::vector<std::uint8_t> data(b.bits.size());
  std::transform(b.bits.begin(), b.bits.end(), data.begin(),
                 [](std::uint8_t bit) -> std::uint8_t { return bit ? 255 : 0; });
  return Volume3D(b.extent, std::move(data));
}

BinaryVolume to_binary(const Volume3D& v) {
  BinaryVolume b{v.extent(), std::vector<std::uint8_t>(v.size())};
  std::transform(v.data().begin(), v.data().end(), b.bits.begin(),
                 [](std::uint8_t s) -> std::uint8_t { return s ? 1 : 0; });
  return b;
}

}  // namespace connecto
