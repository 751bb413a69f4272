#include "rankdnn/report.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "rankdnn/errors.hpp"

namespace rankdnn {

Report make_report(std::vector<double> accuracies, std::vector<double> episode_seconds,
                   std::string config_hash) {
  if (accuracies.empty()) throw InvalidArgument("report needs at least one episode");
  Report r;
  r.episode_count = accuracies.size();
  const double n = static_cast<double>(accuracies.size());
  r.mean_accuracy = std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / n;
  if (accuracies.size() > 1) {
    double ss = 0.0;
    for (double a : accuracies) ss += (a - r.mean_accuracy) * (a - r.mean_accuracy);
    r.ci95 = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  r.accuracies = std::move(accuracies);
  r.episode_seconds = std::move(episode_seconds);
  r.config_hash = std::move(config_hash);
  return r;
}

nlohmann::json to_json(const Report& report, bool include_episodes) {
  nlohmann::json j{
      {"mean_accuracy", report.mean_accuracy},
      {"ci95", report.ci95},
      {"episodes", report.episode_count},
      {"triplets_per_query", report.triplets_per_query},
      {"config_hash", report.config_hash},
  };
  if (!report.episode_seconds.empty()) {
    j["mean_episode_seconds"] =
        std::accumulate(report.episode_seconds.begin(), report.episode_seconds.end(), 0.0) /
        static_cast<double>(report.episode_seconds.size());
  }
  if (include_episodes) {
    j["per_episode_accuracy"] = report.accuracies;
    j["per_episode_seconds"] = report.episode_seconds;
  }
  return j;
}

std::string format_accuracy(const Report& report) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f +- %.2f", 100.0 * report.mean_accuracy, 100.0 * report.ci95);
  return buf;
}

}  // namespace rankdnn
