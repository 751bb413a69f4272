#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include <unistd.h>

#include "rankdnn/errors.hpp"
#include "rankdnn/feature_store.hpp"
#include "rankdnn/pca.hpp"

using namespace rankdnn;

namespace {

FeatureSet random_set(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(n, d);
  // Distinct per-column scales give well separated eigenvalues.
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) m(r, c) = normal(rng) * (1.0 + double(c));
  std::vector<ClassId> labels(n, 0);
  return FeatureSet(m, labels);
}

// Cyclic Jacobi rotations on a symmetric matrix; returns eigenvalues sorted
// in descending order.
std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (std::size_t k = 0; k < n; ++k) ev[k] = a[k][k];
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

std::vector<std::vector<double>> naive_covariance(const FeatureSet& s) {
  const std::size_t n = s.size(), d = s.dim();
  std::vector<double> mean(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) mean[c] += s.vectors()(r, c) / double(n);
  std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b)
        cov[a][b] += (s.vectors()(r, a) - mean[a]) * (s.vectors()(r, b) - mean[b]) / double(n - 1);
  return cov;
}

}  // namespace

TEST_CASE("collinear points give the diagonal direction") {
  Matrix m(3, 2);
  m << 0, 0, 1, 1, 2, 2;
  PcaModel p = fit_pca(FeatureSet(m, {0, 0, 0}), 1);
  CHECK(p.mean(0) == doctest::Approx(1.0));
  CHECK(p.mean(1) == doctest::Approx(1.0));
  CHECK(p.components(0, 0) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(p.components(0, 1) == doctest::Approx(1 / std::sqrt(2.0)));
  Vector v(2);
  v << 2, 2;
  CHECK(pca_transform(p, v)(0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(pca_transform(p, p.mean).norm() < 1e-15);
}

TEST_CASE("explained variance matches an independent Jacobi eigensolver") {
  FeatureSet s = random_set(50, 10, 3);
  PcaModel p = fit_pca(s, 3);
  auto ev = jacobi_eigenvalues(naive_covariance(s));
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(p.explained_variance(k) - ev[k]) < 1e-8);
}

TEST_CASE("components are orthonormal and sign-fixed") {
  FeatureSet s = random_set(200, 12, 5);
  PcaModel p = fit_pca(s, 8);
  Matrix gram = p.components * p.components.transpose();
  CHECK((gram - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-8);
  for (Eigen::Index r = 0; r < 8; ++r) {
    Eigen::Index arg;
    p.components.row(r).cwiseAbs().maxCoeff(&arg);
    CHECK(p.components(r, arg) > 0);
  }
}

TEST_CASE("projected variances equal explained variance and are non-increasing") {
  FeatureSet s = random_set(120, 9, 8);
  PcaModel p = fit_pca(s, 9);
  Matrix y = pca_transform_rows(p, s.vectors());
  for (Eigen::Index k = 0; k < y.cols(); ++k) {
    double mean = 0, var = 0;
    for (Eigen::Index r = 0; r < y.rows(); ++r) mean += y(r, k) / double(y.rows());
    for (Eigen::Index r = 0; r < y.rows(); ++r) var += (y(r, k) - mean) * (y(r, k) - mean) / double(y.rows() - 1);
    CHECK(std::abs(mean) < 1e-10);
    CHECK(std::abs(var - p.explained_variance(k)) < 1e-8);
    if (k > 0) CHECK(p.explained_variance(k) <= p.explained_variance(k - 1));
  }
}

TEST_CASE("full-rank projection reconstructs exactly") {
  FeatureSet s = random_set(40, 6, 9);
  PcaModel p = fit_pca(s, 6);
  for (std::size_t r = 0; r < s.size(); ++r) {
    Vector x = s.row(r).transpose();
    CHECK((pca_reconstruct(p, pca_transform(p, x)) - x).norm() < 1e-10);
  }
}

TEST_CASE("projection contracts distances") {
  FeatureSet s = random_set(60, 10, 10);
  PcaModel p = fit_pca(s, 4);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int t = 0; t < 200; ++t) {
    Vector u(10), v(10);
    for (int k = 0; k < 10; ++k) u(k) = normal(rng), v(k) = normal(rng);
    CHECK((pca_transform(p, u) - pca_transform(p, v)).norm() <= (u - v).norm() + 1e-8);
  }
}

TEST_CASE("fit_pca preconditions") {
  FeatureSet s = random_set(5, 4, 1);
  CHECK_THROWS_AS(fit_pca(s, 0), InvalidArgument);
  CHECK_THROWS_AS(fit_pca(s, 5), InvalidArgument);
  CHECK_THROWS_AS(fit_pca(random_set(1, 4, 1), 1), InvalidArgument);
  Matrix flat(3, 2);
  flat.setConstant(4.0);
  CHECK_THROWS_AS(fit_pca(FeatureSet(flat, {0, 1, 2}), 1), DegenerateData);
}

TEST_CASE("l2 normalization keeps zero rows") {
  Matrix m(2, 2);
  m << 3, 4, 0, 0;
  l2_normalize_rows(m);
  CHECK(m(0, 0) == doctest::Approx(0.6));
  CHECK(m(0, 1) == doctest::Approx(0.8));
  CHECK(m(1, 0) == 0.0);
  FeatureSet s = random_set(20, 5, 2);
  FeatureSet t = pca_transform_set(fit_pca(s, 3), s, true);
  for (std::size_t r = 0; r < t.size(); ++r) CHECK(t.row(r).norm() == doctest::Approx(1.0));
  CHECK(t.labels() == s.labels());
}

TEST_CASE("RKPC round trip") {
  FeatureSet s = random_set(30, 7, 4);
  PcaModel p = fit_pca(s, 3);
  auto path = std::filesystem::temp_directory_path() / ("rankdnn_pca_" + std::to_string(::getpid()) + ".rkpc");
  write_pca(p, path);
  PcaModel q = read_pca(path);
  CHECK(q.input_dim == 7);
  CHECK(q.output_dim == 3);
  CHECK((q.components - p.components).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((q.mean - p.mean).cwiseAbs().maxCoeff() < 1e-5);
  CHECK(std::filesystem::file_size(path) == 4 + 3 * 4 + 4 * (7 + 21 + 3));
  std::filesystem::resize_file(path, 30);
  CHECK_THROWS_AS(read_pca(path), TruncationError);
  std::filesystem::remove(path);
}
