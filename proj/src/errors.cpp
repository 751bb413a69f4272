#include "rankdnn/errors.hpp"

namespace rankdnn {

UnsupportedForPairs::UnsupportedForPairs(const std::string& scheme)
    : InvalidArgument("encoding scheme '" + scheme +
                      "' is defined for triplets only, not query-support pairs") {}

FormatError::FormatError(std::string field, const std::string& detail)
    : std::runtime_error("format error in header field '" + field + "': " + detail),
      field_(std::move(field)) {}

TruncationError::TruncationError(std::size_t expected_bytes, std::size_t actual_bytes)
    : std::runtime_error("truncated payload: expected " + std::to_string(expected_bytes) +
                         " bytes, found " + std::to_string(actual_bytes)),
      expected_(expected_bytes),
      actual_(actual_bytes) {}

TrainingDiverged::TrainingDiverged(std::size_t layer, const std::string& context)
    : std::runtime_error("training diverged at layer " + std::to_string(layer) +
                         (context.empty() ? std::string() : " (" + context + ")")),
      layer_(layer) {}

}  // namespace rankdnn
