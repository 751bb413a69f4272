#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "rankdnn/types.hpp"

namespace rankdnn {

struct MlpConfig {
  std::vector<std::size_t> layer_dims;  // input width first, final entry 1
  std::uint64_t seed = 0;
  double learning_rate = 0.0005;
  double momentum = 0.9;
  double weight_decay = 1e-6;
  std::optional<double> clip_norm;  // global gradient-norm clip; off by default
};

// Hidden widths of the reference RankMLP: [6400, 1024, 512, 256, 1] at d = 80.
inline const std::vector<std::size_t> kReferenceHidden{1024, 512, 256};

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;
  Matrix weight_velocity;
  Vector bias_velocity;
};

struct ForwardCache {
  std::vector<Matrix> inputs;  // inputs[l] feeds layer l; rows are samples
  std::vector<Matrix> pre_activations;
  Vector probabilities;
};

struct Gradients {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;
};

// BCE targets from ranking labels: +1 -> 1, -1 -> 0.
inline double bce_target(int rank_label) noexcept { return rank_label > 0 ? 1.0 : 0.0; }

inline constexpr double kProbabilityEpsilon = 1e-12;

/// The ranking classifier: affine + ReLU hidden layers, affine + sigmoid output.
class MlpModel {
 public:
  // Weights ~ U(-sqrt(6/fan_in), +sqrt(6/fan_in)), biases and velocity zero.
  explicit MlpModel(MlpConfig config);

  const MlpConfig& config() const noexcept { return config_; }
  std::size_t input_dim() const noexcept { return config_.layer_dims.front(); }
  std::size_t num_layers() const noexcept { return layers_.size(); }
  std::span<DenseLayer> layers() noexcept { return layers_; }
  std::span<const DenseLayer> layers() const noexcept { return layers_; }

  // Outputs are clamped into [eps, 1 - eps] so they stay strictly inside (0, 1).
  ForwardCache forward(const Matrix& batch) const;
  Vector predict(const Matrix& batch) const;
  double loss(const Matrix& batch, const Vector& targets) const;

  // Gradients of the mean BCE loss (no weight decay term).
  Gradients backward(const ForwardCache& cache, const Vector& targets) const;

  // One SGD-momentum step: v <- mu v + g + wd p; p <- p - lr v. Returns the
  // pre-update loss; throws TrainingDiverged on a non-finite gradient or parameter.
  double train_step(const Matrix& batch, const Vector& targets);

  std::size_t param_count() const noexcept;
  void set_learning_rate(double lr);
  void reset_velocity();

  bool same_parameters(const MlpModel& other) const;

 private:
  MlpModel() = default;
  friend MlpModel load_checkpoint(const std::filesystem::path& path);

  MlpConfig config_;
  std::vector<DenseLayer> layers_;
};

inline MlpModel init_mlp(const MlpConfig& config) { return MlpModel(config); }

// Mean binary cross-entropy with probabilities clamped to [1e-12, 1 - 1e-12].
double bce_loss(const Vector& probabilities, const Vector& targets);

// Sum over layers of out*in + out.
std::size_t param_count(std::span<const std::size_t> layer_dims);

// Parameters only; optimizer state is not persisted. Other config fields are defaulted.
void save_checkpoint(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_checkpoint(const std::filesystem::path& path);

}  // namespace rankdnn
