#pragma once

#include <stdexcept>
#include <string>

namespace mba {

/// Library-wide error type. The kind separates misconfiguration
/// (bad parameters, unknown names) from bad input data; the CLI maps
/// them to distinct exit codes.
class Error : public std::runtime_error {
 public:
  enum class Kind { config, data };

  Error(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

  static Error config(const std::string& message) {
    return Error(Kind::config, message);
  }
  static Error data(const std::string& message) {
    return Error(Kind::data, message);
  }

 private:
  Kind kind_;
};

}  // namespace mba
