#include <functional>
#include <random>

#include "connecto/ingest.hpp"
#include "connecto/volume_io.hpp"
#include "doctest.h"
#include "support/oracles.hpp"
#include "support/stub_server.hpp"

using namespace connecto;
namespace ct = connecto::testing;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& ex) {
    return ex.kind();
  }
  FAIL("no error raised");
  return ErrorKind::kIo;
}

FetchPolicy fast_policy(unsigned parallelism = 1, unsigned retries = 3) {
  FetchPolicy p;
  p.parallelism = parallelism;
  p.max_retries = retries;
  p.backoff_base = 0.001;
  p.timeout = 5.0;
  return p;
}

}  // namespace

TEST_CASE("plan_chunks") {
  SUBCASE("ceiling division, short last slab") {
    const ChunkManifest m = plan_chunks("t", 0, {0, 8, 0, 8, 0, 100}, 16);
    REQUIRE(m.entries.size() == 7);
    CHECK(m.entries.back().extent.depth() == 4);
    CHECK(m.entries[3].extent == Extent3D{0, 8, 0, 8, 48, 64});
    CHECK(m.entries[6].chunk_id == 6);
    check_tiling(m);
  }
  SUBCASE("Kasthuri11 z range") {
    const ChunkManifest m = plan_chunks("kasthuri11", 1, {0, 10752, 0, 13312, 1, 1850}, 16);
    CHECK(m.entries.size() == 116);
    CHECK(m.entries.front().extent.z0 == 1);
    CHECK(m.entries.back().extent.z1 == 1850);
    CHECK(m.entries.back().extent.depth() == 1849 - 115 * 16);
  }
  SUBCASE("identity") {
    const Extent3D e{2, 5, 3, 4, 10, 20};
    const ChunkManifest m = plan_chunks("t", 0, e, 10);
    REQUIRE(m.entries.size() == 1);
    CHECK(m.entries[0].extent == e);
  }
  SUBCASE("bad parameters") {
    CHECK(kind_of([] { plan_chunks("t", 0, {0, 1, 0, 1, 0, 1}, 0); }) ==
          ErrorKind::kInvalidParameter);
    CHECK(kind_of([] { plan_chunks("has space", 0, {0, 1, 0, 1, 0, 1}, 1); }) ==
          ErrorKind::kInvalidParameter);
    CHECK(kind_of([] { plan_chunks("t", 0, {0, 1, 0, 1, 3, 3}, 1); }) == ErrorKind::kInvalidExtent);
  }
  SUBCASE("random extents tile exactly") {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<std::int64_t> slab(1, 12);
    for (int trial = 0; trial < 100; ++trial) {
      const Extent3D e = ct::random_extent(rng, 30, 50);
      const std::int64_t s = slab(rng);
      const ChunkManifest m = plan_chunks("t", 0, e, s);
      CHECK(m.entries.size() == static_cast<std::size_t>((e.depth() + s - 1) / s));
      std::uint64_t total = 0;
      for (const auto& c : m.entries) total += c.extent.count();
      CHECK(total == e.count());
      // Every voxel in exactly one chunk (sampled on a coarse grid).
      for (std::int64_t z = e.z0; z < e.z1; ++z) {
        int hits = 0;
        for (const auto& c : m.entries) hits += c.extent.contains(e.x0, e.y1 - 1, z);
        CHECK(hits == 1);
      }
    }
  }
}

TEST_CASE("check_tiling rejects overlaps, gaps and duplicate ids") {
  ChunkManifest m = plan_chunks("t", 0, {0, 2, 0, 2, 0, 10}, 5);
  ChunkManifest overlap = m;
  overlap.entries[1].extent.z0 = 4;
  overlap.source_extent.z1 = 10;
  CHECK(kind_of([&] { check_tiling(overlap); }) == ErrorKind::kParse);
  ChunkManifest gap = m;
  gap.entries[1].extent.z0 = 6;
  CHECK(kind_of([&] { check_tiling(gap); }) == ErrorKind::kParse);
  ChunkManifest dup = m;
  dup.entries[1].chunk_id = 0;
  CHECK(kind_of([&] { check_tiling(dup); }) == ErrorKind::kParse);
}

TEST_CASE("cutout_url") {
  const CutoutSpec spec{0, "kasthuri11", 1, {0, 512, 0, 512, 1, 17}};
  CHECK(cutout_url(spec, "http://h/ocp/ca/{token}/raw/{res}/{x0},{x1}/{y0},{y1}/{z0},{z1}/") ==
        "http://h/ocp/ca/kasthuri11/raw/1/0,512/0,512/1,17/");
  CHECK(cutout_url(spec, kDefaultCutoutTemplate, {"http://b", "hdf5"}) ==
        "http://b/ocp/ca/kasthuri11/hdf5/1/0,512/0,512/1,17/");
  CHECK(kind_of([&] { cutout_url(spec, "http://h/{token}/{res}/{x0},{x1}/{y0},{y1}/{z0}/"); }) ==
        ErrorKind::kTemplate);
  CHECK(kind_of([&] {
          cutout_url(spec, "http://h/{token}/{token}/{res}/{x0},{x1}/{y0},{y1}/{z0},{z1}/");
        }) == ErrorKind::kTemplate);
  CHECK(kind_of([&] {
          cutout_url(spec, "http://h/{tokn}/{res}/{x0},{x1}/{y0},{y1}/{z0},{z1}/");
        }) == ErrorKind::kTemplate);
  CHECK(kind_of([&] { cutout_url(spec, "http://h/{token"); }) == ErrorKind::kTemplate);
  CHECK(info_url("kasthuri11") == "http://openconnecto.me/ocp/ca/kasthuri11/info/");
}

TEST_CASE("manifest TSV") {
  ct::TempDir dir;
  const ChunkManifest m = plan_chunks("kasthuri11", 1, {0, 8, 0, 8, 0, 100}, 16);
  write_manifest(m, dir / "m.tsv");
  const std::string text = read_file(dir / "m.tsv");
  CHECK(std::count(text.begin(), text.end(), '\n') == 7);
  CHECK(text.substr(0, text.find('\n')) == "0\tkasthuri11\t1\t0\t8\t0\t8\t0\t16");
  CHECK(read_manifest(dir / "m.tsv") == m);

  SUBCASE("8 fields") {
    const std::string bad = "0\tk\t1\t0\t8\t0\t8\t0\t16\n1\tk\t1\t0\t8\t0\t8\t16\n";
    try {
      decode_manifest(bad);
      FAIL("expected parse error");
    } catch (const Error& ex) {
      CHECK(ex.kind() == ErrorKind::kParse);
      CHECK(std::string(ex.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("empty") { CHECK(kind_of([] { decode_manifest(""); }) == ErrorKind::kParse); }
  SUBCASE("non-numeric coordinate") {
    CHECK(kind_of([] { decode_manifest("0\tk\t1\t0\t8\t0\tx\t0\t16\n"); }) == ErrorKind::kParse);
  }
  SUBCASE("random manifests round-trip") {
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<std::int64_t> slab(1, 9);
    for (int trial = 0; trial < 30; ++trial) {
      const ChunkManifest r = plan_chunks("tok" + std::to_string(trial), trial % 4,
                                          ct::random_extent(rng, 40, 100), slab(rng));
      CHECK(decode_manifest(encode_manifest(r)) == r);
    }
  }
}

TEST_CASE("fetch_chunk against the stub server") {
  ct::StubServer stub;
  const UrlContext ctx{stub.base(), "raw"};
  const Extent3D e{0, 2, 0, 2, 0, 2};
  const CutoutSpec spec{0, "t", 0, e};
  const std::string path = ct::cutout_path("t", 0, e);

  SUBCASE("8 bytes become the volume") {
    stub.script(path, {{200, std::string("\x00\x01\x02\x03\x04\x05\x06\x07", 8)}});
    const ChunkFetch f = fetch_chunk(spec, kDefaultCutoutTemplate, fast_policy(), ctx);
    CHECK(f.attempts == 1);
    CHECK(f.volume.storage() == std::vector<std::uint8_t>{0, 1, 2, 3, 4, 5, 6, 7});
    CHECK(f.volume.at(1, 1, 1) == 7);
  }
  SUBCASE("two 500s then success") {
    stub.script(path, {{500, ""}, {503, ""}, {200, std::string(8, '\x05')}});
    const ChunkFetch f = fetch_chunk(spec, kDefaultCutoutTemplate, fast_policy(1, 2), ctx);
    CHECK(f.attempts == 3);
    CHECK(stub.hits(path) == 3);
  }
  SUBCASE("404 is permanent") {
    stub.always(path, 404);
    CHECK(kind_of([&] { fetch_chunk(spec, kDefaultCutoutTemplate, fast_policy(), ctx); }) ==
          ErrorKind::kFetchPermanent);
    CHECK(stub.hits(path) == 1);
  }
  SUBCASE("wrong payload size") {
    stub.script(path, {{200, std::string(9, '\x01')}});
    CHECK(kind_of([&] { fetch_chunk(spec, kDefaultCutoutTemplate, fast_policy(), ctx); }) ==
          ErrorKind::kPayloadSize);
  }
  SUBCASE("retry accounting") {
    for (unsigned retries : {0u, 1u, 3u}) {
      for (unsigned failures = 0; failures <= retries + 1; ++failures) {
        ct::StubServer s;
        std::vector<ct::CannedResponse> script(failures, {500, ""});
        script.push_back({200, std::string(8, '\x01')});
        s.script(path, script);
        const UrlContext c{s.base(), "raw"};
        if (failures <= retries) {
          CHECK(fetch_chunk(spec, kDefaultCutoutTemplate, fast_policy(1, retries), c).attempts ==
                failures + 1);
          CHECK(s.hits(path) == failures + 1);
        } else {
          CHECK(kind_of([&] { fetch_chunk(spec, kDefaultCutoutTemplate, fast_policy(1, retries), c); }) ==
                ErrorKind::kFetchFailed);
          CHECK(s.hits(path) == retries + 1);
        }
      }
    }
  }
  SUBCASE("unreachable host") {
    const UrlContext dead{"http://127.0.0.1:1", "raw"};
    try {
      fetch_chunk(spec, kDefaultCutoutTemplate, fast_policy(1, 1), dead);
      FAIL("expected failure");
    } catch (const Error& ex) {
      CHECK(ex.kind() == ErrorKind::kFetchFailed);
      CHECK(std::string(ex.what()).find("chunk 0") != std::string::npos);
    }
  }
}

TEST_CASE("fetch_all") {
  ct::StubServer stub;
  std::mt19937_64 rng(100);
  const Extent3D e{0, 8, 0, 8, 0, 100};
  const Volume3D served = ct::random_volume(rng, e);
  stub.serve_volume(served);
  const UrlContext ctx{stub.base(), "raw"};
  const ChunkManifest m = plan_chunks("t", 0, e, 16);

  SUBCASE("byte-identical at any parallelism") {
    for (unsigned par : {1u, 2u, 8u}) {
      CHECK(fetch_all(m, kDefaultCutoutTemplate, fast_policy(par), ctx) == served);
    }
  }
  SUBCASE("in-flight requests are bounded") {
    stub.set_delay(std::chrono::milliseconds(30));
    CHECK(fetch_all(m, kDefaultCutoutTemplate, fast_policy(2), ctx) == served);
    CHECK(stub.max_in_flight() <= 2);
  }
  SUBCASE("one failing chunk fails the assembly and is named") {
    stub.always(ct::cutout_path("t", 0, m.entries[3].extent), 404);
    try {
      fetch_all(m, kDefaultCutoutTemplate, fast_policy(4), ctx);
      FAIL("expected assembly failure");
    } catch (const Error& ex) {
      CHECK(ex.kind() == ErrorKind::kAssemblyFailed);
      const std::string msg = ex.what();
      CHECK(msg.find("failed chunk ids: 3\n") != std::string::npos);
    }
  }
  SUBCASE("every failed chunk is listed") {
    stub.always(ct::cutout_path("t", 0, m.entries[1].extent), 500);
    stub.always(ct::cutout_path("t", 0, m.entries[5].extent), 403);
    try {
      fetch_all(m, kDefaultCutoutTemplate, fast_policy(8, 1), ctx);
      FAIL("expected assembly failure");
    } catch (const Error& ex) {
      CHECK(std::string(ex.what()).find("failed chunk ids: 1 5\n") != std::string::npos);
    }
  }
  SUBCASE("shifted source extent") {
    ct::StubServer s2;
    const Extent3D shifted{4, 10, 2, 5, 7, 30};
    const Volume3D v = ct::random_volume(rng, shifted);
    s2.serve_volume(v);
    const ChunkManifest m2 = plan_chunks("t", 0, shifted, 5);
    CHECK(fetch_all(m2, kDefaultCutoutTemplate, fast_policy(3), {s2.base(), "raw"}) == v);
  }
}
