#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace motifcnn {

/// Malformed input text (graph files, motif files, configs, checkpoints).
/// Line 0 means the input has no meaningful line position.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line),
        detail_(what) {}
  std::size_t line() const { return line_; }
  /// The message without the line prefix.
  const std::string& detail() const { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

/// Well-formed input that violates a structural invariant. `record` is the
/// index of the offending record (edge, node, ...) when one applies.
class ValidationError : public std::runtime_error {
 public:
  static constexpr std::size_t kNoRecord = static_cast<std::size_t>(-1);

  explicit ValidationError(const std::string& what, std::size_t record = kNoRecord)
      : std::runtime_error(what), record_(record) {}
  std::size_t record() const { return record_; }

 private:
  std::size_t record_;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A configured resource limit (instance cap, brute-force size cap) was hit.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace motifcnn
