#include "rankdnn/synthetic_tasks.hpp"

#include <cmath>
#include <random>

#include <Eigen/QR>

#include "rankdnn/errors.hpp"

namespace rankdnn {

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::gaussian: return "gaussian";
    case TaskKind::scalemix: return "scalemix";
    case TaskKind::gated: return "gated";
  }
  return "?";
}

TaskKind parse_task_kind(std::string_view name) {
  for (auto k : {TaskKind::gaussian, TaskKind::scalemix, TaskKind::gated})
    if (name == to_string(k)) return k;
  throw InvalidArgument("unknown task kind '" + std::string(name) +
                        "' (expected gaussian, scalemix or gated)");
}

namespace {

Eigen::MatrixXd random_rotation(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) g(r, c) = normal(rng);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
}

}  // namespace

FeatureSet generate_task(const TaskSpec& spec) {
  if (spec.num_classes == 0 || spec.per_class == 0 || spec.dim == 0)
    throw InvalidArgument("task spec needs positive num_classes, per_class and dim");
  if (spec.kind == TaskKind::gated && spec.dim < 2)
    throw InvalidArgument("gated task needs dim >= 2");
  if (!(spec.center_scale > 0.0)) throw InvalidArgument("center_scale must be > 0");
  if (!(spec.noise_sigma >= 0.0)) throw InvalidArgument("noise_sigma must be >= 0");
  if (!(spec.nuisance >= 0.0)) throw InvalidArgument("nuisance must be >= 0");

  if (spec.kind == TaskKind::gaussian)
    return generate_synthetic(
        SyntheticSpec{spec.num_classes, spec.per_class, spec.dim, spec.center_scale, spec.noise_sigma, spec.seed});

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::normal_distribution<double> log_scale(0.0, spec.nuisance);
  const auto dim = static_cast<Eigen::Index>(spec.dim);
  const Eigen::Index half = dim / 2;

  Eigen::MatrixXd rotation;
  if (spec.kind == TaskKind::gated) rotation = random_rotation(spec.dim, rng);

  Matrix vectors(static_cast<Eigen::Index>(spec.num_classes * spec.per_class), dim);
  std::vector<ClassId> labels;
  labels.reserve(spec.num_classes * spec.per_class);
  Eigen::Index r = 0;
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    const bool first_group = c % 2 == 0;
    Vector center = Vector::Zero(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      const bool informative = spec.kind == TaskKind::scalemix || ((k < half) == first_group);
      if (informative) center(k) = spec.center_scale * normal(rng);
    }
    if (spec.kind == TaskKind::scalemix) {
      const double norm = center.norm();
      if (norm == 0.0) throw DegenerateData("scalemix drew a zero class direction");
      center *= std::sqrt(static_cast<double>(spec.dim)) / norm;
    }

    Vector x(dim);
    for (std::size_t s = 0; s < spec.per_class; ++s, ++r) {
      for (Eigen::Index k = 0; k < dim; ++k) {
        double sd = spec.noise_sigma;
        if (spec.kind == TaskKind::gated && (k < half) != first_group) sd = spec.nuisance;
        x(k) = center(k) + sd * normal(rng);
      }
      if (spec.kind == TaskKind::scalemix) x *= std::exp(log_scale(rng));
      if (spec.kind == TaskKind::gated) x = rotation * x;
      for (Eigen::Index k = 0; k < dim; ++k)
        vectors(r, k) = static_cast<double>(static_cast<float>(x(k)));
      labels.push_back(static_cast<ClassId>(c));
    }
  }
  return FeatureSet(std::move(vectors), std::move(labels));
}

TaskSpec separable_task(std::uint64_t seed) {
  return {TaskKind::gaussian, 84, 60, 64, 5.0, 1.0, 0.0, seed};
}

TaskSpec moderate_task(std::uint64_t seed) {
  return {TaskKind::gaussian, 100, 60, 64, 1.0, 1.0, 0.0, seed};
}

TaskSpec nonlinear_task(std::uint64_t seed) {
  return {TaskKind::scalemix, 100, 60, 16, 1.0, 0.5, 0.5, seed};
}

TaskSpec xor_task(std::uint64_t seed) {
  return {TaskKind::gated, 100, 60, 16, 2.0, 0.5, 2.0, seed};
}

}  // namespace rankdnn
