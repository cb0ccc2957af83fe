#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "connecto/volume.hpp"

namespace connecto {

/// One cutout request against a dataset.
struct CutoutSpec {
  std::uint64_t chunk_id = 0;
  std::string token;
  std::int64_t resolution = 0;
  Extent3D extent;

  friend bool operator==(const CutoutSpec&, const CutoutSpec&) = default;
};

/// Ordered cutouts that tile `source_extent` exactly.
struct ChunkManifest {
  std::vector<CutoutSpec> entries;
  Extent3D source_extent;

  friend bool operator==(const ChunkManifest&, const ChunkManifest&) = default;
};

struct FetchPolicy {
  unsigned parallelism = 4;
  unsigned max_retries = 3;
  double backoff_base = 0.5;  // seconds; attempt n sleeps base * 2^n
  double timeout = 30.0;      // seconds per request
};

void validate(const FetchPolicy& p);

inline constexpr unsigned kDefaultSlabDepth = 16;

inline constexpr std::string_view kDefaultCutoutTemplate =
    "{base}/ocp/ca/{token}/{format}/{res}/{x0},{x1}/{y0},{y1}/{z0},{z1}/";
inline constexpr std::string_view kDefaultInfoTemplate = "{base}/ocp/ca/{token}/info/";

/// Splits `extent` into full-x/y slabs of at most `slab_depth` z-slices.
ChunkManifest plan_chunks(const std::string& token, std::int64_t resolution,
                          const Extent3D& extent, std::int64_t slab_depth);

/// Throws kParse unless entries are non-empty, have unique ids, are pairwise
/// disjoint and exactly cover source_extent.
void check_tiling(const ChunkManifest& m);

/// Values for the optional {base} and {format} placeholders.
struct UrlContext {
  std::string base = "http://openconnecto.me";
  std::string format = "raw";
};

/// Literal substitution of {name} placeholders. Unknown names, unbalanced
/// braces, repeated placeholders and any name in `required` that is absent
/// raise kTemplate.
std::string expand_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& values,
                            const std::vector<std::string>& required);

/// {token},{res},{x0},{x1},{y0},{y1},{z0},{z1} must each appear exactly once.
std::string cutout_url(const CutoutSpec& spec, std::string_view tmpl,
                       const UrlContext& ctx = {});

std::string info_url(std::string_view token,
                     std::string_view tmpl = kDefaultInfoTemplate,
                     const UrlContext& ctx = {});

/// Tab-separated, one chunk per line:
///   chunk_id token resolution x0 x1 y0 y1 z0 z1
std::string encode_manifest(const ChunkManifest& m);
ChunkManifest decode_manifest(std::string_view text);

void write_manifest(const ChunkManifest& m, const std::filesystem::path& path);
ChunkManifest read_manifest(const std::filesystem::path& path);

struct ChunkFetch {
  Volume3D volume;
  unsigned attempts = 0;
};

/// GET the cutout and interpret the body as raw voxels. Timeouts, connection
/// errors and 5xx are retried; 4xx and size mismatches are not.
ChunkFetch fetch_chunk(const CutoutSpec& spec, std::string_view tmpl,
                       const FetchPolicy& policy, const UrlContext& ctx = {});

/// Fetches every chunk with at most policy.parallelism requests in flight
/// and assembles them. Either returns the whole volume or throws
/// kAssemblyFailed naming every failed chunk.
Volume3D fetch_all(const ChunkManifest& m, std::string_view tmpl,
                   const FetchPolicy& policy, const UrlContext& ctx = {});

}  // namespace connecto
