#pragma once

#include <stdexcept>
#include <string>

namespace cubeclust {

// Exit codes shared by the library and the CLI.
enum ExitCode : int {
  kExitOk = 0,
  kExitParam = 1,
  kExitParse = 2,
  kExitMismatch = 3,
};

struct Error : std::runtime_error {
  int code;
  Error(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

[[noreturn]] inline void fail_param(const std::string& msg) { throw Error(kExitParam, msg); }
[[noreturn]] inline void fail_parse(const std::string& msg) { throw Error(kExitParse, msg); }

}  // namespace cubeclust
