#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace rolekit {

// Base of every error thrown by the library. `module()` names the component
// that raised it so the CLI can report "error [mrd]: ..." style diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

// Malformed input text. `line()` is 1-based, 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("graphio", line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Structurally valid document whose declared shape disagrees with its payload.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error("graphio", what) {}
};

// Invalid parameters (rank too large, negative eps, bad mode, ...).
class ConfigError : public Error {
 public:
  ConfigError(std::string module, const std::string& what)
      : Error(std::move(module), what) {}
};

// Input data violating a precondition (negative entries, mismatched schema).
class InputError : public Error {
 public:
  InputError(std::string module, const std::string& what)
      : Error(std::move(module), what) {}
};

// An explicitly formed matrix would exceed the configured memory budget.
class SizeError : public Error {
 public:
  SizeError(std::string module, const std::string& what)
      : Error(std::move(module), what) {}
};

// Factor shapes do not match the target tensor in a transfer run.
class TransferError : public Error {
 public:
  explicit TransferError(const std::string& what) : Error("mrd", what) {}
};

}  // namespace rolekit
