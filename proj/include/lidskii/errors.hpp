#pragma once

#include <stdexcept>
#include <string>

namespace lidskii {

// Error taxonomy: invalid_input -> process exit 2, numerical -> process exit 3.
enum class ErrorKind { invalid_input, numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), kind_(kind), code_(std::move(code)) {}
  ErrorKind kind() const { return kind_; }
  const std::string& code() const { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

[[noreturn]] inline void fail_input(const std::string& code, const std::string& detail) {
  throw Error(ErrorKind::invalid_input, code, detail);
}

[[noreturn]] inline void fail_numerical(const std::string& code, const std::string& detail) {
  throw Error(ErrorKind::numerical, code, detail);
}

}  // namespace lidskii
