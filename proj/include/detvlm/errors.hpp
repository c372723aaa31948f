#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace detvlm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Bytes were readable but not a decodable image.
class DecodeError : public Error {
 public:
  using Error::Error;
};

class UnsupportedFormatError : public Error {
 public:
  using Error::Error;
};

// A label line was malformed; `line` is 1-based.
class LabelParseError : public Error {
 public:
  LabelParseError(std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A detection source had nothing for the requested image. Distinct from an
// empty detection list, which is a valid answer.
class NoDetectionsError : public Error {
 public:
  using Error::Error;
};

// External detector exited nonzero or printed something unparsable.
class DetectorError : public Error {
 public:
  using Error::Error;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

// Precondition failure in a metric (empty input, zero vector, ...).
class MetricError : public Error {
 public:
  using Error::Error;
};

class EmbeddingError : public Error {
 public:
  using Error::Error;
};

// Plan parse or validation failure. `field` names the offending key path,
// `line` is 1-based or 0 when unknown.
class PlanError : public Error {
 public:
  PlanError(std::string field, const std::string& message, int line = 0)
      : Error(format(field, message, line)), field_(std::move(field)), line_(line) {}
  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& field, const std::string& message, int line) {
    std::string out = field.empty() ? std::string("plan") : field;
    if (line > 0) out += " (line " + std::to_string(line) + ")";
    return out + ": " + message;
  }
  std::string field_;
  int line_;
};

}  // namespace detvlm
