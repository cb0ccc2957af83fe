#include "connecto/ingest.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <optional>
#include <thread>

#include "connecto/error.hpp"
#include "connecto/volume_io.hpp"
#include "httplib.h"

namespace connecto {

void validate(const FetchPolicy& p) {
  if (p.parallelism < 1) {
    throw Error(ErrorKind::kInvalidParameter, "parallelism must be >= 1");
  }
  if (!(p.backoff_base > 0.0) || !std::isfinite(p.backoff_base)) {
    throw Error(ErrorKind::kInvalidParameter, "backoff base must be > 0");
  }
  if (!(p.timeout > 0.0) || !std::isfinite(p.timeout)) {
    throw Error(ErrorKind::kInvalidParameter, "timeout must be > 0");
  }
}

namespace {

void validate_token(const std::string& token) {
  if (token.empty() || std::any_of(token.begin(), token.end(), [](char c) {
        return std::isspace(static_cast<unsigned char>(c)) != 0;
      })) {
    throw Error(ErrorKind::kInvalidParameter, "token must be non-empty with no whitespace");
  }
}

}  // namespace

ChunkManifest plan_chunks(const std::string& token, std::int64_t resolution,
                          const Extent3D& extent, std::int64_t slab_depth) {
  if (slab_depth < 1) {
    throw Error(ErrorKind::kInvalidParameter,
                "slab depth must be >= 1, got " + std::to_string(slab_depth));
  }
  if (resolution < 0) {
    throw Error(ErrorKind::kInvalidParameter, "resolution must be >= 0");
  }
  validate_token(token);
  validate(extent);
  ChunkManifest m;
  m.source_extent = extent;
  std::uint64_t id = 0;
  for (std::int64_t z = extent.z0; z < extent.z1; z += slab_depth) {
    Extent3D slab = extent;
    slab.z0 = z;
    slab.z1 = std::min(z + slab_depth, extent.z1);
    m.entries.push_back(CutoutSpec{id++, token, resolution, slab});
  }
  return m;
}

void check_tiling(const ChunkManifest& m) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::kParse, "manifest: " + msg); };
  if (m.entries.empty()) fail("no chunks");
  std::uint64_t covered = 0;
  std::vector<std::uint64_t> ids;
  for (const CutoutSpec& c : m.entries) {
    if (c.extent.empty() || !m.source_extent.contains(c.extent)) {
      fail("chunk " + std::to_string(c.chunk_id) + " lies outside the source extent");
    }
    covered += c.extent.count();
    ids.push_back(c.chunk_id);
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) fail("duplicate chunk id");
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    for (std::size_t j = i + 1; j < m.entries.size(); ++j) {
      if (overlaps(m.entries[i].extent, m.entries[j].extent)) {
        fail("chunks " + std::to_string(m.entries[i].chunk_id) + " and " +
             std::to_string(m.entries[j].chunk_id) + " overlap");
      }
    }
  }
  // Disjoint boxes inside the source whose counts add up cover it exactly.
  if (covered != m.source_extent.count()) fail("chunks do not cover the source extent");
}

std::string expand_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& values,
                            const std::vector<std::string>& required) {
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorKind::kTemplate, "URL template '" + std::string(tmpl) + "': " + msg);
  };
  std::string out;
  std::map<std::string, int> seen;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const char c = tmpl[i];
    if (c == '}') fail("unbalanced '}'");
    if (c != '{') {
      out += c;
      ++i;
      continue;
    }
    const std::size_t close = tmpl.find('}', i);
    if (close == std::string_view::npos) fail("unterminated placeholder");
    const std::string name(tmpl.substr(i + 1, close - i - 1));
    const auto it = values.find(name);
    if (it == values.end()) fail("unknown placeholder {" + name + "}");
    if (++seen[name] > 1) fail("placeholder {" + name + "} repeated");
    out += it->second;
    i = close + 1;
  }
  for (const std::string& name : required) {
    if (!seen.contains(name)) fail("missing placeholder {" + name + "}");
  }
  return out;
}

std::string cutout_url(const CutoutSpec& spec, std::string_view tmpl, const UrlContext& ctx) {
  const Extent3D& e = spec.extent;
  const std::map<std::string, std::string> values{
      {"base", ctx.base},
      {"format", ctx.format},
      {"token", spec.token},
      {"res", std::to_string(spec.resolution)},
      {"x0", std::to_string(e.x0)},
      {"x1", std::to_string(e.x1)},
      {"y0", std::to_string(e.y0)},
      {"y1", std::to_string(e.y1)},
      {"z0", std::to_string(e.z0)},
      {"z1", std::to_string(e.z1)},
  };
  return expand_template(tmpl, values, {"token", "res", "x0", "x1", "y0", "y1", "z0", "z1"});
}

std::string info_url(std::string_view token, std::string_view tmpl, const UrlContext& ctx) {
  return expand_template(tmpl, {{"base", ctx.base}, {"token", std::string(token)}}, {"token"});
}

std::string encode_manifest(const ChunkManifest& m) {
  std::string out;
  for (const CutoutSpec& c : m.entries) {
    const Extent3D& e = c.extent;
    out += std::to_string(c.chunk_id) + '\t' + c.token + '\t' + std::to_string(c.resolution);
    for (std::int64_t v : {e.x0, e.x1, e.y0, e.y1, e.z0, e.z1}) {
      out += '\t' + std::to_string(v);
    }
    out += '\n';
  }
  return out;
}

namespace {

template <class Int>
Int parse_field(std::string_view field, std::size_t line, const char* what) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw Error(ErrorKind::kParse, "manifest line " + std::to_string(line) + ": bad " + what +
                                       " '" + std::string(field) + "'");
  }
  return v;
}

}  // namespace

ChunkManifest decode_manifest(std::string_view text) {
  ChunkManifest m;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    ++line_no;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos
                                                                         : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 9) {
      throw Error(ErrorKind::kParse, "manifest line " + std::to_string(line_no) + ": expected 9 "
                                         "tab-separated fields, got " +
                                         std::to_string(fields.size()));
    }
    CutoutSpec c;
    c.chunk_id = parse_field<std::uint64_t>(fields[0], line_no, "chunk id");
    c.token = std::string(fields[1]);
    if (c.token.empty() || c.token.find_first_of(" \r\v\f") != std::string::npos) {
      throw Error(ErrorKind::kParse, "manifest line " + std::to_string(line_no) + ": bad token");
    }
    c.resolution = parse_field<std::int64_t>(fields[2], line_no, "resolution");
    std::int64_t* coords[] = {&c.extent.x0, &c.extent.x1, &c.extent.y0,
                              &c.extent.y1, &c.extent.z0, &c.extent.z1};
    for (std::size_t k = 0; k < 6; ++k) {
      *coords[k] = parse_field<std::int64_t>(fields[3 + k], line_no, "coordinate");
    }
    try {
      validate(c.extent);
    } catch (const Error& ex) {
      throw Error(ErrorKind::kParse, "manifest line " + std::to_string(line_no) + ": " + ex.what());
    }
    m.entries.push_back(std::move(c));
  }
  if (m.entries.empty()) throw Error(ErrorKind::kParse, "manifest is empty");
  Extent3D box = m.entries.front().extent;
  for (const CutoutSpec& c : m.entries) {
    box.x0 = std::min(box.x0, c.extent.x0);
    box.x1 = std::max(box.x1, c.extent.x1);
    box.y0 = std::min(box.y0, c.extent.y0);
    box.y1 = std::max(box.y1, c.extent.y1);
    box.z0 = std::min(box.z0, c.extent.z0);
    box.z1 = std::max(box.z1, c.extent.z1);
  }
  m.source_extent = box;
  check_tiling(m);
  return m;
}

void write_manifest(const ChunkManifest& m, const std::filesystem::path& path) {
  check_tiling(m);
  atomic_write(path, encode_manifest(m));
}

ChunkManifest read_manifest(const std::filesystem::path& path) {
  try {
    return decode_manifest(read_file(path));
  } catch (const Error& ex) {
    if (ex.kind() != ErrorKind::kParse) throw;
    throw Error(ErrorKind::kParse, path.string() + ": " + ex.what());
  }
}

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.compare(0, scheme_end, "http") != 0) {
    throw Error(ErrorKind::kTemplate, "only http:// URLs are supported: " + url);
  }
  const std::size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

void set_timeouts(httplib::Client& client, double seconds) {
  const auto usec = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(seconds));
  const time_t sec = static_cast<time_t>(usec.count() / 1000000);
  const time_t rem = static_cast<time_t>(usec.count() % 1000000);
  client.set_connection_timeout(sec, rem);
  client.set_read_timeout(sec, rem);
  client.set_write_timeout(sec, rem);
}

std::string chunk_label(const CutoutSpec& spec) {
  return "chunk " + std::to_string(spec.chunk_id) + " " + to_string(spec.extent);
}

}  // namespace

ChunkFetch fetch_chunk(const CutoutSpec& spec, std::string_view tmpl,
                       const FetchPolicy& policy, const UrlContext& ctx) {
  validate(policy);
  validate(spec.extent);
  const std::string url = cutout_url(spec, tmpl, ctx);
  const SplitUrl target = split_url(url);
  const std::uint64_t expected = spec.extent.count();

  std::string last_cause;
  for (unsigned attempt = 0; attempt <= policy.max_retries; ++attempt) {
    if (attempt > 0) {
      const double wait = policy.backoff_base * std::ldexp(1.0, static_cast<int>(attempt - 1));
      std::this_thread::sleep_for(std::chrono::duration<double>(wait));
    }
    httplib::Client client(target.origin);
    set_timeouts(client, policy.timeout);
    const httplib::Result res = client.Get(target.path);
    if (!res) {
      last_cause = "GET " + url + ": " + httplib::to_string(res.error());
      continue;
    }
    const int status = res->status;
    if (status >= 500 && status < 600) {
      last_cause = "GET " + url + ": HTTP " + std::to_string(status);
      continue;
    }
    if (status < 200 || status >= 300) {
      throw Error(ErrorKind::kFetchPermanent, chunk_label(spec) + ": GET " + url + ": HTTP " +
                                                  std::to_string(status));
    }
    if (res->body.size() != expected) {
      throw Error(ErrorKind::kPayloadSize,
                  chunk_label(spec) + ": GET " + url + " returned " +
                      std::to_string(res->body.size()) + " bytes, expected " +
                      std::to_string(expected));
    }
    ChunkFetch out;
    out.volume = Volume3D(spec.extent, std::vector<std::uint8_t>(res->body.begin(), res->body.end()));
    out.attempts = attempt + 1;
    return out;
  }
  throw Error(ErrorKind::kFetchFailed, chunk_label(spec) + ": failed after " +
                                           std::to_string(policy.max_retries + 1) +
                                           " attempts; last error: " + last_cause);
}

namespace {

void paste(Volume3D& dst, const Volume3D& src) {
  const Extent3D& e = src.extent();
  const auto row = static_cast<std::size_t>(e.width());
  const std::uint8_t* from = src.data().data();
  for (std::int64_t z = e.z0; z < e.z1; ++z) {
    for (std::int64_t y = e.y0; y < e.y1; ++y) {
      std::memcpy(&dst.at(e.x0, y, z), from, row);
      from += row;
    }
  }
}

}  // namespace

Volume3D fetch_all(const ChunkManifest& m, std::string_view tmpl, const FetchPolicy& policy,
                   const UrlContext& ctx) {
  validate(policy);
  check_tiling(m);
  for (const CutoutSpec& c : m.entries) cutout_url(c, tmpl, ctx);  // template errors up front

  Volume3D out(m.source_extent);
  std::vector<std::optional<std::string>> failures(m.entries.size());
  std::atomic<std::size_t> next{0};

  // Chunks are disjoint, so workers never write the same voxel.
  auto worker = [&] {
    for (std::size_t i = next++; i < m.entries.size(); i = next++) {
      try {
        paste(out, fetch_chunk(m.entries[i], tmpl, policy, ctx).volume);
      } catch (const std::exception& ex) {
        failures[i] = ex.what();
      }
    }
  };
  {
    const std::size_t n = std::min<std::size_t>(policy.parallelism, m.entries.size());
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }

  std::vector<std::size_t> failed;
  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (failures[i]) failed.push_back(i);
  }
  if (failed.empty()) return out;

  std::sort(failed.begin(), failed.end(), [&](std::size_t a, std::size_t b) {
    return m.entries[a].chunk_id < m.entries[b].chunk_id;
  });
  std::string msg = "assembly failed; failed chunk ids:";
  for (std::size_t i : failed) msg += " " + std::to_string(m.entries[i].chunk_id);
  for (std::size_t i : failed) msg += "\n  " + *failures[i];
  throw Error(ErrorKind::kAssemblyFailed, msg);
}

}  // namespace connecto
