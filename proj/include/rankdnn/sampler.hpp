#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "rankdnn/feature_store.hpp"
#include "rankdnn/types.hpp"

namespace rankdnn {

struct EpisodeItem {
  Vector feature;
  ClassId cls = 0;          // original class id in the source set
  std::size_t way = 0;      // position of the class inside the episode, 0..N-1
  std::size_t source_row = 0;
};

/// One N-way K-shot task. Support is grouped by way: support[w*K .. w*K+K-1].
struct Episode {
  std::size_t n_way = 0;
  std::size_t k_shot = 0;
  std::vector<ClassId> classes;  // classes[w] is the class of way w
  std::vector<EpisodeItem> support;
  std::vector<EpisodeItem> queries;
};

// Picks N classes without replacement, then K support and T/N (remainder to
// the first ways) disjoint query rows per class. Deterministic in `seed`.
Episode sample_episode(const FeatureSet& set, std::size_t n_way, std::size_t k_shot,
                       std::size_t total_queries, std::uint64_t seed);

/// Triplet over an item pool: (pool[query], pool[support_i], pool[support_j]).
/// label is +1 when support_i shares the query's class and support_j does not,
/// -1 for the mirrored order.
struct LabeledTriplet {
  std::size_t query = 0;
  std::size_t support_i = 0;
  std::size_t support_j = 0;
  int label = 0;
};

struct TripletSet {
  std::vector<EpisodeItem> pool;
  std::vector<LabeledTriplet> triplets;

  std::size_t positives() const;
  std::size_t negatives() const;
};

enum class AnchorMode { support, query, both };
std::string to_string(AnchorMode mode);
AnchorMode parse_anchor_mode(std::string_view name);

struct TripletOptions {
  AnchorMode anchors = AnchorMode::support;
  bool balanced = true;  // emit the mirrored -1 triplet for every +1 triplet
};

// Support anchors contribute (N-1)K(K-1) positives each (the anchor is never
// its own positive); query anchors contribute (N-1)K*K. Order is shuffled by seed.
TripletSet build_training_triplets(const Episode& episode, std::uint64_t seed,
                                   const TripletOptions& options = {});

// Support-only triplets for on-episode fine-tuning; needs K >= 2.
TripletSet build_finetune_triplets(const Episode& episode, std::uint64_t seed);

// `anchor_idx i_idx j_idx label` per line.
void dump_triplets(const TripletSet& set, std::ostream& out);

// Deterministic stream splitting: derives an independent seed for (seed, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace rankdnn
