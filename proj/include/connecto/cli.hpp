#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "connecto/extent.hpp"
#include "connecto/gradient.hpp"
#include "connecto/ingest.hpp"

namespace connecto::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct PipelineConfig {
  std::string command;

  std::filesystem::path in;
  std::filesystem::path out;
  std::filesystem::path manifest;

  std::string token = "kasthuri11";
  std::int64_t resolution = 0;
  std::optional<Extent3D> extent;
  std::int64_t slab_depth = kDefaultSlabDepth;

  std::string url_template{kDefaultCutoutTemplate};
  UrlContext url;
  FetchPolicy policy;

  unsigned threads = 1;
  double p = 2.0;
  double k = 1.0;
  Polarity polarity = Polarity::kAbove;
  int connectivity = 6;

  std::int64_t z = 0;
  std::uint64_t u = 0;
  std::uint64_t v = 0;
};

struct ParseOutcome {
  std::optional<PipelineConfig> config;  // set iff the command should run
  int exit_code = kExitOk;
  std::string message;  // usage/help text when config is empty
};

ParseOutcome parse_args(const std::vector<std::string>& args);
ParseOutcome parse_args(int argc, const char* const* argv);

/// Runs a parsed command. JSON summaries go to `out`, progress and errors to
/// `err`. Returns the process exit code.
int run(const PipelineConfig& config, std::ostream& out, std::ostream& err);

}  // namespace connecto::cli
