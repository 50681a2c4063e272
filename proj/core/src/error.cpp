#include "p2codec/error.hpp"

namespace p2codec {

std::string_view ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kCorruptStream: return "corrupt-stream";
    case ErrorKind::kCorruptContainer: return "corrupt-container";
    case ErrorKind::kTokenizerUnsuitable: return "tokenizer-unsuitable";
    case ErrorKind::kProviderUnavailable: return "provider-unavailable";
    case ErrorKind::kContextOverflow: return "context-overflow";
    case ErrorKind::kCorruptProviderOutput: return "corrupt-provider-output";
    case ErrorKind::kUnsupportedCheck: return "unsupported-check";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kWrongProvider: return "wrong-provider";
    case ErrorKind::kHarnessFailure: return "harness-failure";
  }
  return "unknown";
}

}  // namespace p2codec
