#include "rankdnn/feature_store.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include "rankdnn/binary_io.hpp"
#include "rankdnn/errors.hpp"

namespace rankdnn {

namespace {

constexpr io::Magic kMagic{'R', 'K', 'D', 'N'};
constexpr std::uint32_t kVersion = 1;

void require_finite(const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (!std::isfinite(m(r, c)))
        throw InvalidArgument("feature vector " + std::to_string(r) + " has a non-finite entry at " +
                              std::to_string(c));
}

}  // namespace

FeatureSet::FeatureSet(Matrix vectors, std::vector<ClassId> labels)
    : vectors_(std::move(vectors)), labels_(std::move(labels)), has_labels_(true) {
  if (labels_.size() != size())
    throw InvalidArgument("label count " + std::to_string(labels_.size()) +
                          " does not match vector count " + std::to_string(size()));
  require_finite(vectors_);
  for (std::size_t i = 0; i < labels_.size(); ++i) class_index_[labels_[i]].push_back(i);
}

FeatureSet FeatureSet::unlabeled(Matrix vectors) {
  require_finite(vectors);
  FeatureSet s;
  s.vectors_ = std::move(vectors);
  return s;
}

std::vector<ClassId> FeatureSet::classes() const {
  std::vector<ClassId> out;
  out.reserve(class_index_.size());
  for (const auto& [c, _] : class_index_) out.push_back(c);
  return out;
}

FeatureSet FeatureSet::subset(std::span<const std::size_t> indices) const {
  Matrix rows(static_cast<Eigen::Index>(indices.size()), vectors_.cols());
  std::vector<ClassId> labels;
  labels.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= size()) throw InvalidArgument("row index out of range");
    rows.row(static_cast<Eigen::Index>(k)) = row(indices[k]);
    if (has_labels_) labels.push_back(labels_[indices[k]]);
  }
  if (!has_labels_) return unlabeled(std::move(rows));
  return FeatureSet(std::move(rows), std::move(labels));
}

bool operator==(const FeatureSet& a, const FeatureSet& b) {
  return a.has_labels_ == b.has_labels_ && a.vectors_.rows() == b.vectors_.rows() &&
         a.vectors_.cols() == b.vectors_.cols() && a.vectors_ == b.vectors_ && a.labels_ == b.labels_;
}

FeatureSet generate_synthetic(const SyntheticSpec& spec) {
  if (spec.num_classes == 0 || spec.per_class == 0 || spec.dim == 0)
    throw InvalidArgument("synthetic spec needs positive num_classes, per_class and dim");
  if (!(spec.center_scale > 0.0)) throw InvalidArgument("center_scale must be > 0");
  if (!(spec.noise_sigma >= 0.0)) throw InvalidArgument("noise_sigma must be >= 0");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto dim = static_cast<Eigen::Index>(spec.dim);

  Matrix centers(static_cast<Eigen::Index>(spec.num_classes), dim);
  for (Eigen::Index c = 0; c < centers.rows(); ++c)
    for (Eigen::Index k = 0; k < dim; ++k) centers(c, k) = spec.center_scale * normal(rng);

  Matrix vectors(static_cast<Eigen::Index>(spec.num_classes * spec.per_class), dim);
  std::vector<ClassId> labels;
  labels.reserve(spec.num_classes * spec.per_class);
  Eigen::Index r = 0;
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    for (std::size_t s = 0; s < spec.per_class; ++s, ++r) {
      for (Eigen::Index k = 0; k < dim; ++k) {
        double v = centers(static_cast<Eigen::Index>(c), k) + spec.noise_sigma * normal(rng);
        vectors(r, k) = static_cast<double>(static_cast<float>(v));
      }
      labels.push_back(static_cast<ClassId>(c));
    }
  }
  return FeatureSet(std::move(vectors), std::move(labels));
}

void write_feature_set(const FeatureSet& set, const std::filesystem::path& path) {
  io::ByteWriter w;
  w.magic(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(set.size()));
  w.u32(static_cast<std::uint32_t>(set.dim()));
  w.u32(set.has_labels() ? 1u : 0u);
  const Matrix& m = set.vectors();
  w.f32s(std::span<const double>(m.data(), static_cast<std::size_t>(m.size())));
  if (set.has_labels())
    for (ClassId c : set.labels()) w.u32(c);
  w.save(path);
}

FeatureSet read_feature_set(const std::filesystem::path& path) {
  auto r = io::ByteReader::load(path);
  r.expect_magic(kMagic);
  r.expect_version(kVersion);
  const std::uint32_t count = r.u32("count");
  const std::uint32_t dim = r.u32("dim");
  const std::uint32_t flag = r.u32("label_flag");
  if (dim == 0) throw FormatError("dim", "dimension must be positive");
  if (flag > 1) throw FormatError("label_flag", "must be 0 or 1, found " + std::to_string(flag));

  const std::size_t floats = static_cast<std::size_t>(count) * dim;
  r.require_payload(4 * floats + (flag ? 4 * static_cast<std::size_t>(count) : 0));

  Matrix vectors(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  r.f32s(std::span<double>(vectors.data(), floats));
  if (!flag) return FeatureSet::unlabeled(std::move(vectors));

  std::vector<ClassId> labels(count);
  for (auto& l : labels) l = r.u32("labels");
  return FeatureSet(std::move(vectors), std::move(labels));
}

std::vector<std::size_t> rows_of_classes(const FeatureSet& set, std::span<const ClassId> classes) {
  std::vector<std::size_t> rows;
  for (ClassId c : classes) {
    auto it = set.class_index().find(c);
    if (it == set.class_index().end())
      throw InvalidArgument("unknown class id " + std::to_string(c));
    rows.insert(rows.end(), it->second.begin(), it->second.end());
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

std::pair<FeatureSet, FeatureSet> split_by_class(const FeatureSet& set,
                                                 std::span<const ClassId> train_classes,
                                                 std::span<const ClassId> test_classes) {
  if (!set.has_labels()) throw InvalidArgument("split_by_class needs a labeled set");
  std::set<ClassId> train(train_classes.begin(), train_classes.end());
  std::set<ClassId> test(test_classes.begin(), test_classes.end());
  if (train.size() != train_classes.size() || test.size() != test_classes.size())
    throw InvalidArgument("class lists must not repeat a class id");
  for (ClassId c : test_classes)
    if (train.count(c))
      throw InvalidArgument("class " + std::to_string(c) + " is in both train and test splits");
  auto train_rows = rows_of_classes(set, train_classes);
  auto test_rows = rows_of_classes(set, test_classes);
  return {set.subset(train_rows), set.subset(test_rows)};
}

}  // namespace rankdnn
