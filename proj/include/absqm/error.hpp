#pragma once

#include <stdexcept>
#include <string>

namespace absqm {

enum class ErrorKind {
  contract_violation,
  domain,
  range,
  degenerate_input,
  path_dependence,
  chart_domain,
  stability,
  numerical,
  branch_not_found,
  not_evanescent,
  unwrap_failure,
  insufficient_data,
  config,
  io,
  assertion,
};

const char* to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so callers (and the C
// API) can map it onto status codes without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace absqm
