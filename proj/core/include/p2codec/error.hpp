#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace p2codec {

enum class ErrorKind {
  kInvalidInput,
  kCorruptStream,
  kCorruptContainer,
  kTokenizerUnsuitable,
  kProviderUnavailable,
  kContextOverflow,
  kCorruptProviderOutput,
  kUnsupportedCheck,
  kConfig,
  kWrongProvider,
  kHarnessFailure,
};

std::string_view ToString(ErrorKind kind);

// Every failure in the library surfaces as a CodecError carrying its kind, so
// callers (and the CLI exit code) can distinguish corruption from misuse.
class CodecError : public std::runtime_error {
 public:
  CodecError(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(ToString(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace p2codec
