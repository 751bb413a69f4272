#include "rankdnn/pca.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "rankdnn/binary_io.hpp"
#include "rankdnn/errors.hpp"

namespace rankdnn {

namespace {

constexpr io::Magic kMagic{'R', 'K', 'P', 'C'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

PcaModel fit_pca(const FeatureSet& features, std::size_t output_dim) {
  const std::size_t n = features.size();
  const std::size_t d = features.dim();
  if (n < 2) throw InvalidArgument("PCA needs at least 2 vectors, got " + std::to_string(n));
  if (output_dim == 0 || output_dim > std::min(d, n - 1))
    throw InvalidArgument("PCA output_dim " + std::to_string(output_dim) + " must be in [1, " +
                          std::to_string(std::min(d, n - 1)) + "]");

  const Matrix& x = features.vectors();
  Vector mean = x.colwise().mean().transpose();
  Matrix centered = x.rowwise() - mean.transpose();
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  if (!(cov.trace() > 0.0)) throw DegenerateData("PCA input has zero variance in every feature");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw DegenerateData("covariance eigendecomposition failed");

  // Eigen returns ascending eigenvalues.
  PcaModel model;
  model.input_dim = d;
  model.output_dim = output_dim;
  model.mean = std::move(mean);
  model.components.resize(static_cast<Eigen::Index>(output_dim), static_cast<Eigen::Index>(d));
  model.explained_variance.resize(static_cast<Eigen::Index>(output_dim));
  for (std::size_t k = 0; k < output_dim; ++k) {
    const auto src = static_cast<Eigen::Index>(d - 1 - k);
    Eigen::RowVectorXd row = solver.eigenvectors().col(src).transpose();
    Eigen::Index arg = 0;
    row.cwiseAbs().maxCoeff(&arg);
    if (row(arg) < 0) row = -row;
    model.components.row(static_cast<Eigen::Index>(k)) = row;
    model.explained_variance(static_cast<Eigen::Index>(k)) = std::max(0.0, solver.eigenvalues()(src));
  }
  return model;
}

Vector pca_transform(const PcaModel& model, const Eigen::Ref<const Vector>& v) {
  if (static_cast<std::size_t>(v.size()) != model.input_dim)
    throw InvalidArgument("PCA input has length " + std::to_string(v.size()) + ", expected " +
                          std::to_string(model.input_dim));
  return model.components * (v - model.mean);
}

Matrix pca_transform_rows(const PcaModel& model, const Matrix& rows) {
  if (static_cast<std::size_t>(rows.cols()) != model.input_dim)
    throw InvalidArgument("PCA input has " + std::to_string(rows.cols()) + " columns, expected " +
                          std::to_string(model.input_dim));
  Matrix centered = rows.rowwise() - model.mean.transpose();
  return centered * model.components.transpose();
}

FeatureSet pca_transform_set(const PcaModel& model, const FeatureSet& set, bool l2_normalize) {
  Matrix reduced = pca_transform_rows(model, set.vectors());
  if (l2_normalize) l2_normalize_rows(reduced);
  if (!set.has_labels()) return FeatureSet::unlabeled(std::move(reduced));
  return FeatureSet(std::move(reduced), set.labels());
}

Vector pca_reconstruct(const PcaModel& model, const Eigen::Ref<const Vector>& y) {
  if (static_cast<std::size_t>(y.size()) != model.output_dim)
    throw InvalidArgument("projected vector has wrong length");
  return model.mean + model.components.transpose() * y;
}

void l2_normalize_rows(Matrix& rows) {
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    double norm = rows.row(r).norm();
    if (norm > 0.0) rows.row(r) /= norm;
  }
}

void write_pca(const PcaModel& model, const std::filesystem::path& path) {
  io::ByteWriter w;
  w.magic(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(model.input_dim));
  w.u32(static_cast<std::uint32_t>(model.output_dim));
  w.f32s(std::span<const double>(model.mean.data(), model.input_dim));
  w.f32s(std::span<const double>(model.components.data(), static_cast<std::size_t>(model.components.size())));
  w.f32s(std::span<const double>(model.explained_variance.data(), model.output_dim));
  w.save(path);
}

PcaModel read_pca(const std::filesystem::path& path) {
  auto r = io::ByteReader::load(path);
  r.expect_magic(kMagic);
  r.expect_version(kVersion);
  PcaModel m;
  m.input_dim = r.u32("input_dim");
  m.output_dim = r.u32("output_dim");
  if (m.input_dim == 0) throw FormatError("input_dim", "must be positive");
  if (m.output_dim == 0 || m.output_dim > m.input_dim)
    throw FormatError("output_dim", "must be in [1, input_dim]");
  r.require_payload(4 * (m.input_dim + m.output_dim * m.input_dim + m.output_dim));
  m.mean.resize(static_cast<Eigen::Index>(m.input_dim));
  m.components.resize(static_cast<Eigen::Index>(m.output_dim), static_cast<Eigen::Index>(m.input_dim));
  m.explained_variance.resize(static_cast<Eigen::Index>(m.output_dim));
  r.f32s(std::span<double>(m.mean.data(), m.input_dim));
  r.f32s(std::span<double>(m.components.data(), static_cast<std::size_t>(m.components.size())));
  r.f32s(std::span<double>(m.explained_variance.data(), m.output_dim));
  return m;
}

}  // namespace rankdnn
