#ifndef EDGEMPC_ERRORS_H_
#define EDGEMPC_ERRORS_H_

#include <stdexcept>
#include <string>

namespace edgempc {

// Non-finite or otherwise invalid model inputs.
class ModelDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Operation invoked on a closed or finished resource.
class LifecycleError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Configuration problem. `line` is 1-based, 0 when not tied to a location.
class ConfigError : public std::runtime_error {
 public:
  enum class Kind { kIo, kSyntax, kInvalid };

  ConfigError(Kind kind, const std::string& message, int line = 0)
      : std::runtime_error(Format(kind, message, line)),
        kind_(kind),
        line_(line) {}

  Kind kind() const { return kind_; }
  int line() const { return line_; }

 private:
  static std::string Format(Kind kind, const std::string& message, int line) {
    std::string prefix = kind == Kind::kIo       ? "config I/O error"
                         : kind == Kind::kSyntax ? "config syntax error"
                                                 : "invalid config";
    if (line > 0) prefix += " at line " + std::to_string(line);
    return prefix + ": " + message;
  }

  Kind kind_;
  int line_;
};

}  // namespace edgempc

#endif  // EDGEMPC_ERRORS_H_
