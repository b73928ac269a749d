#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace satcap {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input could not be parsed in its declared format.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line = 0, std::size_t offset = 0)
      : Error(decorate(what, line, offset)), line_(line), offset_(offset) {}

  /// 1-based line number, 0 when unknown.
  std::size_t line() const noexcept { return line_; }
  /// Byte offset within the line (or file for whole-document formats), 0 when unknown.
  std::size_t offset() const noexcept { return offset_; }

 private:
  static std::string decorate(const std::string& what, std::size_t line, std::size_t offset) {
    std::string out = what;
    if (line > 0) out += " (line " + std::to_string(line);
    if (offset > 0) out += (line > 0 ? ", offset " : " (offset ") + std::to_string(offset);
    if (line > 0 || offset > 0) out += ")";
    return out;
  }

  std::size_t line_;
  std::size_t offset_;
};

/// Well-formed input that violates a data-model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Bad rules, keyword tables, flags, or other user configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input for which a metric is undefined (zero words, empty candidate, ...).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class QueryError : public Error {
 public:
  using Error::Error;
};

/// Persisted index written by an incompatible format version.
class IncompatibleVersionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class TranslationError : public Error {
 public:
  using Error::Error;
};

/// A translation failure worth retrying (timeouts, 5xx, rate limits).
class TransientTranslationError : public TranslationError {
 public:
  using TranslationError::TranslationError;
};

/// An operation where every unit of work failed.
class OperationError : public Error {
 public:
  using Error::Error;
};

}  // namespace satcap
