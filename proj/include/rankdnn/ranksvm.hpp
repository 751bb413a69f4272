#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>

#include "rankdnn/encoding.hpp"
#include "rankdnn/sampler.hpp"
#include "rankdnn/types.hpp"
#include "rankdnn/voting.hpp"

namespace rankdnn {

/// Linear ranker over encoded triplet differences.
struct SvmModel {
  Vector w;
  double c_param = 1.0;
  std::size_t epochs = 0;
  std::uint64_t seed = 0;
};

// Minimizes (1/2)|w|^2 + C sum max(0, 1 - y w.z) by dual coordinate descent,
// one shuffled pass over the examples per epoch.
SvmModel train_ranksvm(const TripletSet& triplets, EncodingScheme scheme, double c_param,
                       std::size_t epochs, std::uint64_t seed);

// Same solver on pre-encoded rows z with labels y in {+1, -1}.
SvmModel train_ranksvm_encoded(const Matrix& z, std::span<const int> y, double c_param,
                               std::size_t epochs, std::uint64_t seed);

// sign(w.z); zero maps to -1.
int svm_decide(const SvmModel& model, const Eigen::Ref<const Vector>& encoded);

double svm_objective(const Vector& w, const Matrix& z, std::span<const int> y, double c_param);

class SvmRanker final : public TripletClassifier {
 public:
  explicit SvmRanker(const SvmModel& model) : model_(model) {}
  std::size_t input_dim() const override { return static_cast<std::size_t>(model_.w.size()); }
  std::vector<bool> decide(const Matrix& encoded) const override;

 private:
  const SvmModel& model_;
};

void write_svm(const SvmModel& model, const std::filesystem::path& path);
SvmModel read_svm(const std::filesystem::path& path);

}  // namespace rankdnn
