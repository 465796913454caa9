#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace semmask {

enum class Errc {
  invalid_argument,
  shape_mismatch,
  io,
  format,
  config,
  divergence,
  unknown_question,
};

constexpr std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::shape_mismatch: return "shape_mismatch";
    case Errc::io: return "io";
    case Errc::format: return "format";
    case Errc::config: return "config";
    case Errc::divergence: return "divergence";
    case Errc::unknown_question: return "unknown_question";
  }
  return "unknown";
}

// All library failures are reported through this type so the CLI can print
// a single machine-parsable line.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace semmask
