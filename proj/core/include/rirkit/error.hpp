#pragma once

#include <stdexcept>
#include <string>

namespace rirkit {

/// Raised for every violated precondition, malformed input file or
/// inconsistent argument in the library. Messages are single-line.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

[[noreturn]] void throw_error(const std::string& what);

}  // namespace rirkit

#define RIRKIT_REQUIRE(cond, msg)      \
  do {                                 \
    if (!(cond)) {                     \
      ::rirkit::throw_error(msg);      \
    }                                  \
  } while (false)
