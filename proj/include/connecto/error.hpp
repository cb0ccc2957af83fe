#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace connecto {

enum class ErrorKind {
  kInvalidExtent,
  kOutOfRange,
  kIo,
  kMissingFile,
  kFormat,
  kInvalidParameter,
  kUnknownVertex,
  kTemplate,
  kParse,
  kPayloadSize,
  kFetchPermanent,
  kFetchFailed,
  kAssemblyFailed,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (and the CLI
// exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace connecto
