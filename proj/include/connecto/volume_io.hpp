#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "connecto/volume.hpp"

namespace connecto {

namespace fs = std::filesystem;

/// Writes bytes to `path` via a sibling temp file and rename, so the target
/// is either absent, the previous content, or the full new content.
void atomic_write(const fs::path& path, std::string_view bytes);

std::string read_file(const fs::path& path);

// --- PGM (binary P5, maxval 255) ---

std::string encode_pgm(const SliceImage& image);
SliceImage decode_pgm(std::string_view bytes, const std::string& origin = {});

void write_pgm(const SliceImage& image, const fs::path& path);
SliceImage read_pgm(const fs::path& path);

/// "slice_0042.pgm"
std::string slice_file_name(std::int64_t z);

/// One P5 file per z-slice, named by absolute z index. Returns the paths in
/// z order.
std::vector<fs::path> write_pgm_stack(const Volume3D& v, const fs::path& dir);
Volume3D read_pgm_stack(const fs::path& dir, const Extent3D& extent);

/// Infers the extent of a stack written by write_pgm_stack: z range from the
/// slice file names, x/y from the first slice header with origin (0,0).
Extent3D infer_pgm_stack_extent(const fs::path& dir);

// --- raw payload + JSON sidecar ---
//
// `name.raw` holds the flat sample array (little-endian for multi-byte types)
// and `name.json` holds {x0,x1,y0,y1,z0,z1,dtype,order}. Supported dtypes:
//   "u8"     Volume3D (also binary volumes, foreground = 255)
//   "f64"    FloatVolume3D
//   "i64x3"  gradient field, three planar arrays gx, gy, gz

inline constexpr std::string_view kVoxelOrder = "zyx-row-major-x-fastest";

fs::path sidecar_path(const fs::path& raw_path);

struct RawHeader {
  Extent3D extent;
  std::string dtype;
};

/// Reads and validates only the sidecar.
RawHeader read_raw_header(const fs::path& raw_path);

void write_raw_bytes(const fs::path& raw_path, const Extent3D& extent,
                     std::string_view dtype, std::string_view payload);

void write_raw(const Volume3D& v, const fs::path& path);
Volume3D read_raw(const fs::path& path);

void write_raw(const FloatVolume3D& v, const fs::path& path);
FloatVolume3D read_raw_f64(const fs::path& path);

}  // namespace connecto
