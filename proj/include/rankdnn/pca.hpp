#pragma once

#include <cstddef>
#include <filesystem>

#include "rankdnn/feature_store.hpp"
#include "rankdnn/types.hpp"

namespace rankdnn {

/// Frozen principal-component projection.
///
/// `components` holds one unit-norm direction per row, ordered by decreasing
/// explained variance. Each row's entry of largest magnitude is positive.
struct PcaModel {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  Vector mean;
  Matrix components;  // output_dim x input_dim
  Vector explained_variance;
};

inline constexpr std::size_t kDefaultPcaDim = 80;

// Top `output_dim` eigenvectors of the sample covariance (n - 1 denominator).
// Requires >= 2 vectors and output_dim <= min(dim, n - 1); throws DegenerateData
// when every feature has zero variance.
PcaModel fit_pca(const FeatureSet& features, std::size_t output_dim);

Vector pca_transform(const PcaModel& model, const Eigen::Ref<const Vector>& v);
Matrix pca_transform_rows(const PcaModel& model, const Matrix& rows);
FeatureSet pca_transform_set(const PcaModel& model, const FeatureSet& set, bool l2_normalize = false);

// Maps a projected vector back into input space: mean + components^T * y.
Vector pca_reconstruct(const PcaModel& model, const Eigen::Ref<const Vector>& y);

// Row-wise unit-norm scaling; zero rows stay zero.
void l2_normalize_rows(Matrix& rows);

void write_pca(const PcaModel& model, const std::filesystem::path& path);
PcaModel read_pca(const std::filesystem::path& path);

}  // namespace rankdnn
