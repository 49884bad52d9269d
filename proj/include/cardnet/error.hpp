#pragma once

#include <stdexcept>
#include <string>

namespace cardnet {

/// Base for every error raised by the library. `kind()` is a short stable tag
/// used by the CLI in its machine-parsable error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error("parse", what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class LoadError : public Error {
 public:
  explicit LoadError(const std::string& what) : Error("load", what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error("format", what) {}
};

class DecodeError : public Error {
 public:
  explicit DecodeError(const std::string& what) : Error("decode", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error("input", what) {}
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& what) : Error("divergence", what) {}
};

class NetworkError : public Error {
 public:
  explicit NetworkError(const std::string& what) : Error("network", what) {}
};

}  // namespace cardnet
