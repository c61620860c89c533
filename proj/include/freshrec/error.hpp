#pragma once

#include <stdexcept>
#include <string>

namespace freshrec {

// Recoverable failures surface as Error; the CLI turns them into a one-line
// diagnostic and a nonzero exit code.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

[[noreturn]] inline void fail(const std::string& what) { throw Error(what); }

}  // namespace freshrec
