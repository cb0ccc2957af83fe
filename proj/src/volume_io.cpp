#include "connecto/volume_io.hpp"

#include <unistd.h>

#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "bytes.hpp"
#include "connecto/error.hpp"

namespace connecto {

namespace {

std::atomic<unsigned> temp_counter{0};

[[noreturn]] void format_error(const std::string& origin, const std::string& msg) {
  throw Error(ErrorKind::kFormat, (origin.empty() ? "" : origin + ": ") + msg);
}

// PGM header token reader: skips whitespace and '#' comments.
class HeaderCursor {
 public:
  HeaderCursor(std::string_view bytes, const std::string& origin)
      : bytes_(bytes), origin_(origin) {}

  std::string_view token() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      ++pos_;
    }
    if (start == pos_) format_error(origin_, "truncated PGM header");
    return bytes_.substr(start, pos_ - start);
  }

  std::int64_t number() {
    const std::string_view t = token();
    std::int64_t v = 0;
    for (char c : t) {
      if (!std::isdigit(static_cast<unsigned char>(c)) || v > (1LL << 40)) {
        format_error(origin_, "bad PGM header field '" + std::string(t) + "'");
      }
      v = v * 10 + (c - '0');
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t payload_start() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      format_error(origin_, "missing separator after PGM maxval");
    }
    return pos_ + 1;
  }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view bytes_;
  const std::string& origin_;
  std::size_t pos_ = 0;
};

const std::set<std::string>& known_dtypes() {
  static const std::set<std::string> k{"u8", "f64", "i64x3"};
  return k;
}

std::uint64_t bytes_per_voxel(std::string_view dtype) {
  if (dtype == "u8") return 1;
  if (dtype == "f64") return 8;
  return 24;  // i64x3
}

}  // namespace

void atomic_write(const fs::path& path, std::string_view bytes) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(temp_counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorKind::kIo, "cannot open " + tmp.string() + " for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorKind::kIo, "write failed for " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::kIo, "cannot rename into " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (!fs::exists(path)) {
      throw Error(ErrorKind::kMissingFile, "missing file " + path.string());
    }
    throw Error(ErrorKind::kIo, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::kIo, "read failed for " + path.string());
  return std::move(ss).str();
}

std::string encode_pgm(const SliceImage& image) {
  std::string out = "P5\n" + std::to_string(image.width) + " " +
                    std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
  return out;
}

SliceImage decode_pgm(std::string_view bytes, const std::string& origin) {
  HeaderCursor cur(bytes, origin);
  if (cur.token() != "P5") format_error(origin, "not a binary PGM (expected P5)");
  SliceImage img;
  img.width = cur.number();
  img.height = cur.number();
  const std::int64_t maxval = cur.number();
  if (img.width <= 0 || img.height <= 0) format_error(origin, "zero PGM dimension");
  if (maxval != 255) {
    format_error(origin, "unsupported PGM maxval " + std::to_string(maxval));
  }
  const std::size_t start = cur.payload_start();
  const auto need = static_cast<std::size_t>(img.width * img.height);
  if (bytes.size() - std::min(start, bytes.size()) != need) {
    format_error(origin, "PGM payload is " + std::to_string(bytes.size() - start) +
                             " bytes, expected " + std::to_string(need));
  }
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(start), bytes.end());
  return img;
}

void write_pgm(const SliceImage& image, const fs::path& path) {
  atomic_write(path, encode_pgm(image));
}

SliceImage read_pgm(const fs::path& path) {
  return decode_pgm(read_file(path), path.string());
}

std::string slice_file_name(std::int64_t z) {
  std::string digits = std::to_string(z);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return "slice_" + digits + ".pgm";
}

std::vector<fs::path> write_pgm_stack(const Volume3D& v, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<fs::path> paths;
  const Extent3D& e = v.extent();
  for (std::int64_t z = e.z0; z < e.z1; ++z) {
    paths.push_back(dir / slice_file_name(z));
    write_pgm(extract_slice(v, z), paths.back());
  }
  return paths;
}

Volume3D read_pgm_stack(const fs::path& dir, const Extent3D& extent) {
  Volume3D v(extent);
  const auto plane = static_cast<std::size_t>(extent.width() * extent.height());
  for (std::int64_t z = extent.z0; z < extent.z1; ++z) {
    const fs::path p = dir / slice_file_name(z);
    const SliceImage img = read_pgm(p);
    if (img.width != extent.width() || img.height != extent.height()) {
      format_error(p.string(), "slice is " + std::to_string(img.width) + "x" +
                                   std::to_string(img.height) + ", extent needs " +
                                   std::to_string(extent.width()) + "x" +
                                   std::to_string(extent.height()));
    }
    std::copy(img.pixels.begin(), img.pixels.end(),
              v.storage().begin() + static_cast<std::ptrdiff_t>((z - extent.z0) * plane));
  }
  return v;
}

Extent3D infer_pgm_stack_extent(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorKind::kMissingFile, "missing directory " + dir.string());
  }
  std::set<std::int64_t> zs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() < 11 || !name.starts_with("slice_") || !name.ends_with(".pgm")) continue;
    const std::string digits = name.substr(6, name.size() - 10);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(),
                                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      continue;
    }
    zs.insert(std::stoll(digits));
  }
  if (zs.empty()) {
    throw Error(ErrorKind::kMissingFile, "no slice_NNNN.pgm files in " + dir.string());
  }
  const SliceImage first = read_pgm(dir / slice_file_name(*zs.begin()));
  Extent3D e{0, first.width, 0, first.height, *zs.begin(), *zs.rbegin() + 1};
  validate(e);
  return e;
}

fs::path sidecar_path(const fs::path& raw_path) {
  fs::path p = raw_path;
  p.replace_extension(".json");
  return p;
}

RawHeader read_raw_header(const fs::path& raw_path) {
  const fs::path side = sidecar_path(raw_path);
  const std::string text = read_file(side);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    format_error(side.string(), std::string("bad sidecar JSON: ") + ex.what());
  }
  RawHeader h;
  try {
    h.extent = Extent3D{j.at("x0").get<std::int64_t>(), j.at("x1").get<std::int64_t>(),
                        j.at("y0").get<std::int64_t>(), j.at("y1").get<std::int64_t>(),
                        j.at("z0").get<std::int64_t>(), j.at("z1").get<std::int64_t>()};
    h.dtype = j.at("dtype").get<std::string>();
    if (j.at("order").get<std::string>() != kVoxelOrder) {
      format_error(side.string(), "unsupported voxel order");
    }
  } catch (const nlohmann::json::exception& ex) {
    format_error(side.string(), std::string("bad sidecar field: ") + ex.what());
  }
  if (!known_dtypes().contains(h.dtype)) {
    format_error(side.string(), "unsupported dtype '" + h.dtype + "'");
  }
  try {
    validate(h.extent);
  } catch (const Error& ex) {
    format_error(side.string(), ex.what());
  }
  return h;
}

void write_raw_bytes(const fs::path& raw_path, const Extent3D& extent,
                     std::string_view dtype, std::string_view payload) {
  validate(extent);
  if (!known_dtypes().contains(std::string(dtype))) {
    throw Error(ErrorKind::kInvalidParameter, "unsupported dtype '" + std::string(dtype) + "'");
  }
  if (payload.size() != extent.count() * bytes_per_voxel(dtype)) {
    throw Error(ErrorKind::kInvalidParameter, "payload length does not match extent");
  }
  const nlohmann::json j = {{"x0", extent.x0}, {"x1", extent.x1}, {"y0", extent.y0},
                            {"y1", extent.y1}, {"z0", extent.z0}, {"z1", extent.z1},
                            {"dtype", dtype},  {"order", kVoxelOrder}};
  // Payload first: a sidecar never describes a payload that is not in place.
  atomic_write(raw_path, payload);
  atomic_write(sidecar_path(raw_path), j.dump(2) + "\n");
}

namespace {

std::string read_payload(const fs::path& path, const RawHeader& h) {
  std::string payload = read_file(path);
  const std::uint64_t want = h.extent.count() * bytes_per_voxel(h.dtype);
  if (payload.size() != want) {
    format_error(path.string(), "payload is " + std::to_string(payload.size()) +
                                    " bytes, sidecar implies " + std::to_string(want));
  }
  return payload;
}

RawHeader expect_dtype(const fs::path& path, std::string_view dtype) {
  RawHeader h = read_raw_header(path);
  if (h.dtype != dtype) {
    format_error(path.string(), "dtype is '" + h.dtype + "', expected '" + std::string(dtype) + "'");
  }
  return h;
}

}  // namespace

void write_raw(const Volume3D& v, const fs::path& path) {
  const auto d = v.data();
  write_raw_bytes(path, v.extent(), "u8",
                  std::string_view(reinterpret_cast<const char*>(d.data()), d.size()));
}

Volume3D read_raw(const fs::path& path) {
  const RawHeader h = expect_dtype(path, "u8");
  const std::string payload = read_payload(path, h);
  return Volume3D(h.extent, std::vector<std::uint8_t>(payload.begin(), payload.end()));
}

void write_raw(const FloatVolume3D& v, const fs::path& path) {
  std::string payload;
  payload.reserve(v.size() * 8);
  for (double x : v.data()) detail::append_f64(payload, x);
  write_raw_bytes(path, v.extent(), "f64", payload);
}

FloatVolume3D read_raw_f64(const fs::path& path) {
  const RawHeader h = expect_dtype(path, "f64");
  const std::string payload = read_payload(path, h);
  std::vector<double> values(h.extent.count());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = detail::load_f64(payload.data() + 8 * i);
    if (!std::isfinite(values[i])) format_error(path.string(), "non-finite sample");
  }
  return FloatVolume3D(h.extent, std::move(values));
}

}  // namespace connecto
