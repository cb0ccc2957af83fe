#include "connecto/error.hpp"

namespace connecto {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidExtent: return "invalid-extent";
    case ErrorKind::kOutOfRange: return "out-of-range";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kMissingFile: return "missing-file";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kInvalidParameter: return "invalid-parameter";
    case ErrorKind::kUnknownVertex: return "unknown-vertex";
    case ErrorKind::kTemplate: return "template";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kPayloadSize: return "payload-size";
    case ErrorKind::kFetchPermanent: return "fetch-permanent";
    case ErrorKind::kFetchFailed: return "fetch-failed";
    case ErrorKind::kAssemblyFailed: return "assembly-failed";
  }
  return "unknown";
}

}  // namespace connecto
