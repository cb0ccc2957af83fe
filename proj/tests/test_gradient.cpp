#include <cmath>
#include <random>

#include "connecto/gradient.hpp"
#include "connecto/volume_io.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace connecto;
namespace ct = connecto::testing;

namespace {

// Value of the interior ramp response, computed with ct::naive_convolve on a
// 5^3 ramp and frozen here.
constexpr std::int64_t kRampResponse = 44;

Volume3D ramp(Axis axis, std::int64_t n = 5) {
  Volume3D v({0, n, 0, n, 0, n});
  for (std::int64_t z = 0; z < n; ++z)
    for (std::int64_t y = 0; y < n; ++y)
      for (std::int64_t x = 0; x < n; ++x)
        v.at(x, y, z) = static_cast<std::uint8_t>(axis == Axis::kX ? x : axis == Axis::kY ? y : z);
  return v;
}

bool interior(const Extent3D& e, std::int64_t x, std::int64_t y, std::int64_t z) {
  return x > e.x0 && x < e.x1 - 1 && y > e.y0 && y < e.y1 - 1 && z > e.z0 && z < e.z1 - 1;
}

}  // namespace

TEST_CASE("x kernel planes") {
  const SobelKernel3D k = sobel_kernel(Axis::kX);
  const int k0[3][3] = {{-3, 0, 3}, {-6, 0, 6}, {-3, 0, 3}};
  const int km[3][3] = {{-1, 0, 1}, {-3, 0, 3}, {-1, 0, 1}};
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      CHECK(k.at(0, dy, dx) == k0[dy + 1][dx + 1]);
      CHECK(k.at(-1, dy, dx) == km[dy + 1][dx + 1]);
      CHECK(k.at(1, dy, dx) == km[dy + 1][dx + 1]);
    }
}

TEST_CASE("kernel algebra holds for every axis") {
  for (Axis a : {Axis::kX, Axis::kY, Axis::kZ}) {
    const SobelKernel3D k = sobel_kernel(a);
    CHECK(k.axis == a);
    std::int64_t sum = 0, abs_sum = 0;
    for (auto w : k.weights) {
      sum += w;
      abs_sum += std::abs(w);
    }
    CHECK(sum == 0);
    CHECK(abs_sum == 44);
    const ct::KernelCube lit = ct::literal_kernel(a);
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          CHECK(k.at(dz, dy, dx) == lit[dz + 1][dy + 1][dx + 1]);
          const std::int64_t mirrored = a == Axis::kX   ? k.at(dz, dy, -dx)
                                        : a == Axis::kY ? k.at(dz, -dy, dx)
                                                        : k.at(-dz, dy, dx);
          CHECK(mirrored == -k.at(dz, dy, dx));
        }
  }
}

TEST_CASE("ramp oracle value") {
  // Freeze check: the brute-force oracle itself gives 44 in the interior.
  const auto g = ct::naive_convolve(ramp(Axis::kX), ct::literal_x_kernel());
  const Extent3D e{0, 5, 0, 5, 0, 5};
  CHECK(g[e.index(2, 2, 2)] == kRampResponse);
  CHECK(g[e.index(1, 3, 2)] == kRampResponse);
}

TEST_CASE("convolve3d") {
  SUBCASE("constant volumes give zero everywhere, borders included") {
    for (Axis a : {Axis::kX, Axis::kY, Axis::kZ}) {
      for (int c : {0, 1, 200, 255}) {
        const auto r = convolve3d(make_constant({2, 9, 0, 4, 1, 7}, static_cast<std::uint8_t>(c)),
                                  sobel_kernel(a));
        CHECK(std::all_of(r.begin(), r.end(), [](auto x) { return x == 0; }));
      }
    }
  }
  SUBCASE("ramp along x") {
    const Volume3D v = ramp(Axis::kX);
    const auto r = convolve3d(v, sobel_kernel(Axis::kX));
    const Extent3D& e = v.extent();
    for (std::int64_t z = 0; z < 5; ++z)
      for (std::int64_t y = 0; y < 5; ++y)
        for (std::int64_t x = 0; x < 5; ++x)
          if (interior(e, x, y, z)) CHECK(r[e.index(x, y, z)] == kRampResponse);
  }
  SUBCASE("single bright voxel: centre tap is zero") {
    Volume3D v({0, 3, 0, 3, 0, 3});
    v.at(1, 1, 1) = 255;
    const auto r = convolve3d(v, sobel_kernel(Axis::kX));
    CHECK(r[v.extent().index(1, 1, 1)] == 0);
    CHECK(r[v.extent().index(0, 1, 1)] == 6 * 255);
    CHECK(r[v.extent().index(2, 1, 1)] == -6 * 255);
  }
  SUBCASE("matches the naive reference on random volumes") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 20; ++trial) {
      const Volume3D v = ct::random_volume(rng, ct::random_extent(rng, 9));
      for (Axis a : {Axis::kX, Axis::kY, Axis::kZ}) {
        REQUIRE(convolve3d(v, sobel_kernel(a)) == ct::naive_convolve(v, ct::literal_kernel(a)));
      }
    }
  }
  SUBCASE("thread count does not change the output") {
    std::mt19937_64 rng(99);
    const Volume3D v = ct::random_volume(rng, {0, 13, 0, 11, 0, 17});
    const auto one = convolve3d(v, sobel_kernel(Axis::kZ), 1);
    for (unsigned t : {2u, 3u, 8u, 64u}) CHECK(convolve3d(v, sobel_kernel(Axis::kZ), t) == one);
  }
  SUBCASE("largest response is 255 times the positive weight sum") {
    Volume3D v({0, 3, 0, 3, 0, 3});
    for (std::int64_t z = 0; z < 3; ++z)
      for (std::int64_t y = 0; y < 3; ++y) v.at(2, y, z) = 255;
    const auto r = convolve3d(v, sobel_kernel(Axis::kX));
    CHECK(r[v.extent().index(1, 1, 1)] == 255 * 22);
  }
}

TEST_CASE("linearity on interior voxels") {
  std::mt19937_64 rng(77);
  const Extent3D e{0, 8, 0, 7, 0, 6};
  // Keep a*V + b*W inside 0..255 so it is still a u8 volume.
  std::uniform_int_distribution<int> small(0, 50);
  Volume3D v(e), w(e), combo(e);
  const int a = 2, b = 3;
  for (std::uint64_t i = 0; i < v.size(); ++i) {
    v[i] = static_cast<std::uint8_t>(small(rng));
    w[i] = static_cast<std::uint8_t>(small(rng));
    combo[i] = static_cast<std::uint8_t>(a * v[i] + b * w[i]);
  }
  for (Axis ax : {Axis::kX, Axis::kY, Axis::kZ}) {
    const auto rv = convolve3d(v, sobel_kernel(ax));
    const auto rw = convolve3d(w, sobel_kernel(ax));
    const auto rc = convolve3d(combo, sobel_kernel(ax));
    const auto oc = ct::naive_convolve(combo, ct::literal_kernel(ax));
    for (std::int64_t z = 0; z < 6; ++z)
      for (std::int64_t y = 0; y < 7; ++y)
        for (std::int64_t x = 0; x < 8; ++x) {
          if (!interior(e, x, y, z)) continue;
          const auto i = e.index(x, y, z);
          CHECK(rc[i] == a * rv[i] + b * rw[i]);
          CHECK(rc[i] == oc[i]);
        }
  }
}

TEST_CASE("gradient") {
  SUBCASE("constant volume gives a zero field") {
    const GradientField g = gradient(make_constant({0, 4, 0, 4, 0, 4}, 17));
    for (const auto* c : {&g.gx, &g.gy, &g.gz})
      CHECK(std::all_of(c->begin(), c->end(), [](auto x) { return x == 0; }));
  }
  SUBCASE("ramp along each axis responds only in that component") {
    for (Axis a : {Axis::kX, Axis::kY, Axis::kZ}) {
      const Volume3D v = ramp(a);
      const GradientField g = gradient(v);
      const std::vector<std::int64_t>* comps[] = {&g.gx, &g.gy, &g.gz};
      const Extent3D& e = v.extent();
      for (std::int64_t z = 0; z < 5; ++z)
        for (std::int64_t y = 0; y < 5; ++y)
          for (std::int64_t x = 0; x < 5; ++x) {
            if (!interior(e, x, y, z)) continue;
            const auto i = e.index(x, y, z);
            for (int c = 0; c < 3; ++c) {
              CHECK((*comps[c])[i] == (c == static_cast<int>(a) ? kRampResponse : 0));
            }
          }
    }
  }
  SUBCASE("gradient file round-trip") {
    ct::TempDir dir;
    std::mt19937_64 rng(3);
    const GradientField g = gradient(ct::random_volume(rng, {0, 6, 0, 5, 0, 4}));
    write_gradient(g, dir / "g.raw");
    CHECK(std::filesystem::file_size(dir / "g.raw") == 6 * 5 * 4 * 24);
    CHECK(read_gradient(dir / "g.raw") == g);
  }
}

TEST_CASE("magnitude_lp") {
  const GradientField g{{0, 2, 0, 1, 0, 1}, {3, -3}, {4, 4}, {0, 0}};
  CHECK(magnitude_lp(g, 2.0)[0] == 5.0);
  CHECK(magnitude_lp(g, 2.0)[1] == 5.0);
  CHECK(magnitude_lp(g, 1.0)[0] == 7.0);
  CHECK(magnitude_lp(g, kInfNorm)[0] == 4.0);

  try {
    magnitude_lp(g, 0.5);
    FAIL("expected invalid-parameter");
  } catch (const Error& ex) {
    CHECK(ex.kind() == ErrorKind::kInvalidParameter);
  }
  CHECK_THROWS_AS(magnitude_lp(g, std::nan("")), Error);

  SUBCASE("huge p stays finite") {
    const GradientField big{{0, 1, 0, 1, 0, 1}, {10000}, {9999}, {10000}};
    const double m = magnitude_lp(big, 1000.0)[0];
    CHECK(std::isfinite(m));
    CHECK(m >= 10000.0);
  }
  SUBCASE("monotone in p") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<std::int64_t> comp(-10000, 10000);
    const std::size_t n = 500;
    GradientField f{{0, static_cast<std::int64_t>(n), 0, 1, 0, 1}, {}, {}, {}};
    for (std::size_t i = 0; i < n; ++i) {
      f.gx.push_back(comp(rng));
      f.gy.push_back(comp(rng));
      f.gz.push_back(comp(rng));
    }
    const double ps[] = {1.0, 1.5, 2.0, 3.0, 4.0, 8.0, 16.0, 64.0, kInfNorm};
    std::vector<FloatVolume3D> ms;
    for (double p : ps) ms.push_back(magnitude_lp(f, p));
    for (std::size_t j = 1; j < ms.size(); ++j)
      for (std::size_t i = 0; i < n; ++i) CHECK(ms[j - 1][i] >= ms[j][i]);
    // max <= L_p <= 3^(1/p) * max
    const double bound = std::pow(3.0, 1.0 / 64.0);
    for (std::size_t i = 0; i < n; ++i) CHECK(ms[7][i] <= bound * ms[8][i] * (1 + 1e-15));
  }
  SUBCASE("p = 64 approaches the max when one component dominates") {
    const GradientField f{{0, 3, 0, 1, 0, 1}, {3, 10000, 0}, {4, 8000, 0}, {0, -2000, 9}};
    const FloatVolume3D m64 = magnitude_lp(f, 64.0);
    const FloatVolume3D minf = magnitude_lp(f, kInfNorm);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(std::abs(m64[i] - minf[i]) <= 1e-6 * minf[i]);
    }
  }
}

TEST_CASE("binarize") {
  const Extent3D e4{0, 4, 0, 1, 0, 1};
  SUBCASE("sigma zero gives empty foreground") {
    const FloatVolume3D m(e4, std::vector<double>(4, 3.5));
    CHECK(binarize(m, 0.0).foreground_count() == 0);
    CHECK(binarize(m, 2.0).foreground_count() == 0);
  }
  SUBCASE("{0,0,4,4}") {
    const FloatVolume3D m(e4, {0.0, 0.0, 4.0, 4.0});
    CHECK(binarize_threshold(m, 0.0) == 2.0);
    CHECK(binarize(m, 0.0).bits == std::vector<std::uint8_t>{0, 0, 1, 1});
    CHECK(binarize_threshold(m, 1.0) == 4.0);
    CHECK(binarize(m, 1.0).foreground_count() == 0);
    CHECK(binarize(m, 0.0, Polarity::kBelow).bits == std::vector<std::uint8_t>{1, 1, 0, 0});
    CHECK(binarize(m, -1.0, Polarity::kBelow).foreground_count() == 0);
  }
  SUBCASE("non-finite k") {
    const FloatVolume3D m(e4, {0.0, 0.0, 4.0, 4.0});
    CHECK_THROWS_AS(binarize(m, std::nan("")), Error);
  }
  SUBCASE("binary volume conversion") {
    const BinaryVolume b{e4, {0, 1, 1, 0}};
    const Volume3D v = to_volume(b);
    CHECK(v.storage() == std::vector<std::uint8_t>{0, 255, 255, 0});
    CHECK(to_binary(v) == b);
  }
}
