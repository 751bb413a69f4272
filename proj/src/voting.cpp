#include "rankdnn/voting.hpp"

#include <algorithm>
#include <chrono>
#include <random>

#include "rankdnn/errors.hpp"

namespace rankdnn {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::vector<bool> MlpRanker::decide(const Matrix& encoded) const {
  Vector p = model_.predict(encoded);
  std::vector<bool> out(static_cast<std::size_t>(p.size()));
  for (Eigen::Index r = 0; r < p.size(); ++r) out[static_cast<std::size_t>(r)] = p(r) > 0.5;
  return out;
}

std::vector<Vector> class_prototypes(const Episode& episode) {
  if (episode.k_shot == 0) throw InvalidArgument("episode has an empty class");
  if (episode.support.size() != episode.n_way * episode.k_shot)
    throw InvalidArgument("episode support is not grouped as N*K items");
  std::vector<Vector> protos;
  protos.reserve(episode.n_way);
  for (std::size_t w = 0; w < episode.n_way; ++w) {
    Vector sum = Vector::Zero(episode.support[w * episode.k_shot].feature.size());
    for (std::size_t k = 0; k < episode.k_shot; ++k) sum += episode.support[w * episode.k_shot + k].feature;
    protos.push_back(sum / static_cast<double>(episode.k_shot));
  }
  return protos;
}

std::vector<VoteResult> rank_vote_batch(const TripletClassifier& classifier, EncodingScheme scheme,
                                        std::span<const Vector> queries, std::span<const Vector> candidates,
                                        std::span<const std::size_t> candidate_way, std::size_t n_way,
                                        bool record) {
  if (candidates.size() != candidate_way.size())
    throw InvalidArgument("candidate_way must map every candidate");
  if (candidates.size() < 2) throw InvalidArgument("voting needs at least 2 candidates");
  for (std::size_t w : candidate_way)
    if (w >= n_way) throw InvalidArgument("candidate way out of range");
  const auto d = static_cast<std::size_t>(candidates.front().size());
  const std::size_t width = encoded_dim(scheme, d);
  if (classifier.input_dim() != width)
    throw InvalidArgument("classifier expects " + std::to_string(classifier.input_dim()) +
                          " inputs but " + to_string(scheme) + " encodes d=" + std::to_string(d) +
                          " to " + std::to_string(width));

  const std::size_t m = candidates.size();
  const std::size_t pairs = m * (m - 1);
  std::vector<VoteResult> results(queries.size());
  if (queries.empty()) return results;

  // Encode a bounded number of rows at a time.
  constexpr std::size_t kMaxBatchValues = std::size_t{1} << 22;
  const std::size_t chunk = std::max<std::size_t>(1, kMaxBatchValues / (pairs * width));
  Matrix batch;
  for (std::size_t first = 0; first < queries.size(); first += chunk) {
    const std::size_t last = std::min(queries.size(), first + chunk);
    batch.resize(static_cast<Eigen::Index>((last - first) * pairs), static_cast<Eigen::Index>(width));
    Eigen::Index row = 0;
    for (std::size_t qi = first; qi < last; ++qi)
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
          if (a != b) encode_triplet_into(scheme, queries[qi], candidates[a], candidates[b], batch.row(row++));

    const std::vector<bool> decisions = classifier.decide(batch);
    std::size_t k = 0;
    for (std::size_t qi = first; qi < last; ++qi) {
      VoteResult& res = results[qi];
      res.scores.assign(n_way, 0);
      res.triplets_evaluated = pairs;
      if (record) res.outcomes.reserve(pairs);
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
          if (a == b) continue;
          const bool positive = decisions[k++];
          if (positive) ++res.scores[candidate_way[a]];
          if (record) res.outcomes.push_back({a, b, positive});
        }
      for (std::size_t w = 1; w < n_way; ++w)
        if (res.scores[w] > res.scores[res.predicted]) res.predicted = w;
    }
  }
  return results;
}

VoteResult rank_vote(const TripletClassifier& classifier, EncodingScheme scheme, const Vector& query,
                     std::span<const Vector> prototypes, bool record) {
  std::vector<std::size_t> ways(prototypes.size());
  for (std::size_t w = 0; w < ways.size(); ++w) ways[w] = w;
  return rank_vote_batch(classifier, scheme, std::span<const Vector>(&query, 1), prototypes, ways,
                         prototypes.size(), record)
      .front();
}

Vector encode_batch(EncodingScheme scheme, const TripletSet& set, std::span<const std::size_t> which,
                    Matrix& batch) {
  const auto d = static_cast<std::size_t>(set.pool.front().feature.size());
  batch.resize(static_cast<Eigen::Index>(which.size()), static_cast<Eigen::Index>(encoded_dim(scheme, d)));
  Vector targets(static_cast<Eigen::Index>(which.size()));
  for (std::size_t r = 0; r < which.size(); ++r) {
    const LabeledTriplet& t = set.triplets[which[r]];
    encode_triplet_into(scheme, set.pool[t.query].feature, set.pool[t.support_i].feature,
                        set.pool[t.support_j].feature, batch.row(static_cast<Eigen::Index>(r)));
    targets(static_cast<Eigen::Index>(r)) = bce_target(t.label);
  }
  return targets;
}

EpisodeResult classify_episode(const TripletClassifier& classifier, EncodingScheme scheme,
                               const Episode& episode, VotingMode mode) {
  const auto start = Clock::now();
  std::vector<Vector> candidates;
  std::vector<std::size_t> ways;
  if (mode == VotingMode::averaged) {
    candidates = class_prototypes(episode);
    for (std::size_t w = 0; w < episode.n_way; ++w) ways.push_back(w);
  } else {
    for (const EpisodeItem& s : episode.support) {
      candidates.push_back(s.feature);
      ways.push_back(s.way);
    }
  }
  std::vector<Vector> queries;
  queries.reserve(episode.queries.size());
  for (const EpisodeItem& q : episode.queries) queries.push_back(q.feature);

  auto votes = rank_vote_batch(classifier, scheme, queries, candidates, ways, episode.n_way);
  EpisodeResult res;
  res.triplets_per_query = candidates.size() * (candidates.size() - 1);
  std::size_t correct = 0;
  for (std::size_t k = 0; k < votes.size(); ++k) {
    res.predictions.push_back(votes[k].predicted);
    if (votes[k].predicted == episode.queries[k].way) ++correct;
  }
  res.accuracy = votes.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(votes.size());
  res.inference_seconds = seconds_since(start);
  return res;
}

EpisodeResult classify_episode(const MlpModel& model, EncodingScheme scheme, const Episode& episode,
                               const std::optional<FinetuneConfig>& finetune, VotingMode mode) {
  if (!finetune) return classify_episode(MlpRanker(model), scheme, episode, mode);

  if (episode.k_shot < 2)
    throw InvalidArgument("fine-tuning is undefined for 1-shot episodes");
  const auto start = Clock::now();
  MlpModel tuned = model;
  tuned.reset_velocity();
  tuned.set_learning_rate(finetune->learning_rate);

  const TripletSet triplets = build_finetune_triplets(episode, derive_seed(finetune->seed, 0));
  std::mt19937_64 rng(derive_seed(finetune->seed, 1));
  std::uniform_int_distribution<std::size_t> pick(0, triplets.triplets.size() - 1);
  std::vector<std::size_t> which(finetune->batch_size);
  Matrix batch;
  for (std::size_t it = 0; it < finetune->iterations; ++it) {
    for (auto& w : which) w = pick(rng);
    Vector targets = encode_batch(scheme, triplets, which, batch);
    tuned.train_step(batch, targets);
  }
  const double tune_seconds = seconds_since(start);

  EpisodeResult res = classify_episode(MlpRanker(tuned), scheme, episode, mode);
  res.finetune_seconds = tune_seconds;
  return res;
}

}  // namespace rankdnn
