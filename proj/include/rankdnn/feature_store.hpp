#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "rankdnn/types.hpp"

namespace rankdnn {

/// Labeled collection of fixed-dimension feature vectors, one per row.
///
/// Immutable after construction. Labels are dense class ids; a set read from
/// an unlabeled FVEC file has no labels and an empty class index.
class FeatureSet {
 public:
  FeatureSet() = default;
  FeatureSet(Matrix vectors, std::vector<ClassId> labels);
  static FeatureSet unlabeled(Matrix vectors);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(vectors_.cols()); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(vectors_.rows()); }
  bool has_labels() const noexcept { return has_labels_; }

  const Matrix& vectors() const noexcept { return vectors_; }
  auto row(std::size_t i) const { return vectors_.row(static_cast<Eigen::Index>(i)); }
  const std::vector<ClassId>& labels() const noexcept { return labels_; }
  const std::map<ClassId, std::vector<std::size_t>>& class_index() const noexcept {
    return class_index_;
  }
  std::vector<ClassId> classes() const;
  std::size_t num_classes() const noexcept { return class_index_.size(); }

  // Rows `indices` in order, labels carried along.
  FeatureSet subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const FeatureSet& a, const FeatureSet& b);

 private:
  Matrix vectors_;
  std::vector<ClassId> labels_;
  std::map<ClassId, std::vector<std::size_t>> class_index_;
  bool has_labels_ = false;
};

struct SyntheticSpec {
  std::size_t num_classes = 5;
  std::size_t per_class = 600;
  std::size_t dim = 640;
  double center_scale = 10.0;
  double noise_sigma = 1.0;
  std::uint64_t seed = 0;
};

// Class c draws center_c ~ center_scale * N(0, I) once, then per_class samples
// center_c + noise_sigma * N(0, I). Values are rounded to float32 so the set
// survives an FVEC round trip unchanged. noise_sigma == 0 is accepted as the
// zero-noise limit.
FeatureSet generate_synthetic(const SyntheticSpec& spec);

void write_feature_set(const FeatureSet& set, const std::filesystem::path& path);
FeatureSet read_feature_set(const std::filesystem::path& path);

// Disjoint class split. Each output keeps the original class ids.
std::pair<FeatureSet, FeatureSet> split_by_class(const FeatureSet& set,
                                                 std::span<const ClassId> train_classes,
                                                 std::span<const ClassId> test_classes);

// Rows of `set` belonging to `classes`, in ascending row order.
std::vector<std::size_t> rows_of_classes(const FeatureSet& set, std::span<const ClassId> classes);

}  // namespace rankdnn
