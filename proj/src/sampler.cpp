#include "rankdnn/sampler.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <random>

#include "rankdnn/errors.hpp"

namespace rankdnn {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  // splitmix64 over the pair
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

Episode sample_episode(const FeatureSet& set, std::size_t n_way, std::size_t k_shot,
                       std::size_t total_queries, std::uint64_t seed) {
  if (n_way == 0 || k_shot == 0) throw InvalidArgument("episode needs N >= 1 and K >= 1");
  if (!set.has_labels()) throw InvalidArgument("episodes need a labeled feature set");
  if (set.num_classes() < n_way)
    throw InvalidArgument("episode needs " + std::to_string(n_way) + " classes, set has " +
                          std::to_string(set.num_classes()) + " (short by " +
                          std::to_string(n_way - set.num_classes()) + ")");
  const std::size_t per_class_queries = (total_queries + n_way - 1) / n_way;
  const std::size_t needed = k_shot + per_class_queries;
  for (const auto& [cls, rows] : set.class_index())
    if (rows.size() < needed)
      throw InvalidArgument("class " + std::to_string(cls) + " has " + std::to_string(rows.size()) +
                            " samples, episode needs " + std::to_string(needed) + " (short by " +
                            std::to_string(needed - rows.size()) + ")");

  std::mt19937_64 rng(seed);
  std::vector<ClassId> classes = set.classes();
  std::shuffle(classes.begin(), classes.end(), rng);
  classes.resize(n_way);

  Episode ep;
  ep.n_way = n_way;
  ep.k_shot = k_shot;
  ep.classes = classes;
  ep.support.reserve(n_way * k_shot);
  ep.queries.reserve(total_queries);
  for (std::size_t w = 0; w < n_way; ++w) {
    std::vector<std::size_t> rows = set.class_index().at(classes[w]);
    std::shuffle(rows.begin(), rows.end(), rng);
    const std::size_t q_count = total_queries / n_way + (w < total_queries % n_way ? 1 : 0);
    for (std::size_t k = 0; k < k_shot + q_count; ++k) {
      EpisodeItem item{set.row(rows[k]).transpose(), classes[w], w, rows[k]};
      (k < k_shot ? ep.support : ep.queries).push_back(std::move(item));
    }
  }
  return ep;
}

std::size_t TripletSet::positives() const {
  return static_cast<std::size_t>(
      std::count_if(triplets.begin(), triplets.end(), [](const LabeledTriplet& t) { return t.label > 0; }));
}

std::size_t TripletSet::negatives() const { return triplets.size() - positives(); }

std::string to_string(AnchorMode mode) {
  switch (mode) {
    case AnchorMode::support: return "support";
    case AnchorMode::query: return "query";
    case AnchorMode::both: return "both";
  }
  return "unknown";
}

AnchorMode parse_anchor_mode(std::string_view name) {
  if (name == "support") return AnchorMode::support;
  if (name == "query") return AnchorMode::query;
  if (name == "both") return AnchorMode::both;
  throw InvalidArgument("unknown anchor mode '" + std::string(name) + "'");
}

TripletSet build_training_triplets(const Episode& episode, std::uint64_t seed,
                                   const TripletOptions& options) {
  const std::size_t n = episode.n_way;
  const std::size_t k = episode.k_shot;
  if (n < 2) throw InvalidArgument("triplets need N >= 2 ways");
  if (episode.support.size() != n * k) throw InvalidArgument("episode support is not N*K items");
  const bool support_anchors = options.anchors != AnchorMode::query;
  const bool query_anchors = options.anchors != AnchorMode::support;
  if (support_anchors && k < 2)
    throw InvalidArgument("support anchors need K >= 2: a 1-shot class has no positive besides the anchor");
  if (query_anchors && episode.queries.empty())
    throw InvalidArgument("query anchors requested but the episode has no queries");

  TripletSet out;
  out.pool = episode.support;
  out.pool.insert(out.pool.end(), episode.queries.begin(), episode.queries.end());

  std::vector<std::size_t> anchors;
  if (support_anchors)
    for (std::size_t a = 0; a < n * k; ++a) anchors.push_back(a);
  if (query_anchors)
    for (std::size_t a = n * k; a < out.pool.size(); ++a) anchors.push_back(a);

  for (std::size_t a : anchors) {
    const std::size_t way = out.pool[a].way;
    for (std::size_t pos = way * k; pos < way * k + k; ++pos) {
      if (pos == a) continue;
      for (std::size_t neg = 0; neg < n * k; ++neg) {
        if (out.pool[neg].way == way) continue;
        out.triplets.push_back({a, pos, neg, +1});
        if (options.balanced) out.triplets.push_back({a, neg, pos, -1});
      }
    }
  }
  std::mt19937_64 rng(seed);
  std::shuffle(out.triplets.begin(), out.triplets.end(), rng);
  return out;
}

TripletSet build_finetune_triplets(const Episode& episode, std::uint64_t seed) {
  if (episode.k_shot < 2)
    throw InvalidArgument("fine-tuning needs K >= 2; 1-shot episodes are classified without it");
  Episode support_only = episode;
  support_only.queries.clear();
  return build_training_triplets(support_only, seed, {AnchorMode::support, true});
}

void dump_triplets(const TripletSet& set, std::ostream& out) {
  for (const LabeledTriplet& t : set.triplets)
    out << t.query << ' ' << t.support_i << ' ' << t.support_j << ' ' << t.label << '\n';
}

}  // namespace rankdnn
