#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rankdnn {

// Precondition or contract violation on an argument.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A pair encoder was requested for a scheme that only exists for triplets.
class UnsupportedForPairs : public InvalidArgument {
 public:
  explicit UnsupportedForPairs(const std::string& scheme);
};

// Bad magic, version or header field in a binary container.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::string field, const std::string& detail);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Payload ended before the header said it would.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(std::size_t expected_bytes, std::size_t actual_bytes);
  std::size_t expected_bytes() const noexcept { return expected_; }
  std::size_t actual_bytes() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

class DegenerateData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite gradient or parameter during an optimizer step.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::size_t layer, const std::string& context);
  std::size_t layer() const noexcept { return layer_; }

 private:
  std::size_t layer_;
};

}  // namespace rankdnn
