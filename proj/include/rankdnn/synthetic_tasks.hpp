#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "rankdnn/feature_store.hpp"

namespace rankdnn {

// Benchmark generators beyond the isotropic Gaussian clusters of
// generate_synthetic.
//
//   gaussian  center_c ~ center_scale * N(0, I); x = center_c + noise_sigma * N(0, I).
//   scalemix  unit class direction u_c scaled to sqrt(dim); every sample is
//             (sqrt(dim) u_c + noise_sigma * N(0, I)) * exp(N(0, nuisance)).
//             Class identity lives in the direction, not the norm.
//   gated     classes alternate between two groups. Even classes put their
//             center in the first half of the coordinates and carry noise of
//             scale `nuisance` in the second half; odd classes do the reverse.
//             Which block is informative depends on the group, an XOR between
//             group and block. A seeded random rotation hides the blocks.
enum class TaskKind { gaussian, scalemix, gated };

std::string_view to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view name);

struct TaskSpec {
  TaskKind kind = TaskKind::gaussian;
  std::size_t num_classes = 100;
  std::size_t per_class = 60;
  std::size_t dim = 16;
  double center_scale = 5.0;
  double noise_sigma = 1.0;
  double nuisance = 0.5;
  std::uint64_t seed = 0;
};

FeatureSet generate_task(const TaskSpec& spec);

// Presets used by the acceptance suite and the CLI.
TaskSpec separable_task(std::uint64_t seed = 0);
TaskSpec moderate_task(std::uint64_t seed = 0);
TaskSpec nonlinear_task(std::uint64_t seed = 0);
TaskSpec xor_task(std::uint64_t seed = 0);

}  // namespace rankdnn
