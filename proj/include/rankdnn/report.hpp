#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

namespace rankdnn {

struct Report {
  double mean_accuracy = 0.0;
  double ci95 = 0.0;  // 1.96 * standard error of the per-episode accuracies
  std::size_t episode_count = 0;
  std::vector<double> accuracies;
  std::vector<double> episode_seconds;
  std::size_t triplets_per_query = 0;
  std::string config_hash;
};

Report make_report(std::vector<double> accuracies, std::vector<double> episode_seconds,
                   std::string config_hash);

nlohmann::json to_json(const Report& report, bool include_episodes = false);

// "68.72 +- 0.15" style, in percent.
std::string format_accuracy(const Report& report);

}  // namespace rankdnn
