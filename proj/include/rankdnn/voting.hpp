#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rankdnn/encoding.hpp"
#include "rankdnn/mlp.hpp"
#include "rankdnn/sampler.hpp"
#include "rankdnn/types.hpp"

namespace rankdnn {

// Binary decision over encoded triplets: true means the first support ranks
// above the second for the query.
class TripletClassifier {
 public:
  virtual ~TripletClassifier() = default;
  virtual std::size_t input_dim() const = 0;
  virtual std::vector<bool> decide(const Matrix& encoded) const = 0;
};

// Positive iff the sigmoid output exceeds 0.5.
class MlpRanker final : public TripletClassifier {
 public:
  explicit MlpRanker(const MlpModel& model) : model_(model) {}
  std::size_t input_dim() const override { return model_.input_dim(); }
  std::vector<bool> decide(const Matrix& encoded) const override;

 private:
  const MlpModel& model_;
};

struct TripletOutcome {
  std::size_t first = 0;
  std::size_t second = 0;
  bool positive = false;
};

struct VoteResult {
  std::vector<unsigned> scores;  // one per class (way)
  std::size_t predicted = 0;     // argmax of scores, lowest index on ties
  std::size_t triplets_evaluated = 0;
  std::vector<TripletOutcome> outcomes;  // filled only when recording
};

// Per-way mean of the K support features, in way order.
std::vector<Vector> class_prototypes(const Episode& episode);

// Every ordered candidate pair (a, b), a != b, is scored once; a positive
// decision gives one point to the class of candidate a. With prototypes as
// candidates that is N(N-1) triplets per query.
VoteResult rank_vote(const TripletClassifier& classifier, EncodingScheme scheme, const Vector& query,
                     std::span<const Vector> prototypes, bool record = false);

// Same rule over arbitrary candidates; candidate_way maps each candidate to its
// class and class scores sum their members' points.
std::vector<VoteResult> rank_vote_batch(const TripletClassifier& classifier, EncodingScheme scheme,
                                        std::span<const Vector> queries, std::span<const Vector> candidates,
                                        std::span<const std::size_t> candidate_way, std::size_t n_way,
                                        bool record = false);

enum class VotingMode { averaged, all_supports };

struct FinetuneConfig {
  std::size_t iterations = 100;
  std::size_t batch_size = 100;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
};

struct EpisodeResult {
  std::vector<std::size_t> predictions;  // predicted way per query
  double accuracy = 0.0;
  std::size_t triplets_per_query = 0;
  double inference_seconds = 0.0;
  double finetune_seconds = 0.0;
};

// Fine-tunes a velocity-free copy of `model` on support triplets first when
// `finetune` is set; `model` itself is never modified.
EpisodeResult classify_episode(const MlpModel& model, EncodingScheme scheme, const Episode& episode,
                               const std::optional<FinetuneConfig>& finetune,
                               VotingMode mode = VotingMode::averaged);

EpisodeResult classify_episode(const TripletClassifier& classifier, EncodingScheme scheme,
                               const Episode& episode, VotingMode mode = VotingMode::averaged);

// Fills `batch` rows with encodings of the listed triplets and returns BCE targets.
Vector encode_batch(EncodingScheme scheme, const TripletSet& set, std::span<const std::size_t> which,
                    Matrix& batch);

}  // namespace rankdnn
