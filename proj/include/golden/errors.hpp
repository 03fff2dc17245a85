#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace golden {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidMetric : public Error {
 public:
  using Error::Error;
};

class InvalidInvolution : public Error {
 public:
  using Error::Error;
};

class MetricIncompat : public Error {
 public:
  using Error::Error;
};

class InvalidStructure : public Error {
 public:
  using Error::Error;
};

class BadSignature : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Malformed expression text; `offset()` is the byte offset of the offending token.
class SyntaxError : public ParseError {
 public:
  SyntaxError(const std::string& what, std::size_t offset)
      : ParseError(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownIdentifier : public ParseError {
 public:
  UnknownIdentifier(const std::string& name, std::size_t offset)
      : ParseError("unknown identifier '" + name + "' at offset " + std::to_string(offset)),
        name_(name),
        offset_(offset) {}
  const std::string& name() const noexcept { return name_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::string name_;
  std::size_t offset_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class NotInvariant : public Error {
 public:
  using Error::Error;
};

class NotAntiInvariant : public Error {
 public:
  using Error::Error;
};

class NotSlant : public Error {
 public:
  using Error::Error;
};

class LambdaZero : public Error {
 public:
  using Error::Error;
};

class ZeroVector : public Error {
 public:
  using Error::Error;
};

/// Scenario validation failure; `path()` is a JSON-pointer-style location such as "/immersion".
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error("config error at " + path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace golden
