#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rankdnn/encoding.hpp"
#include "rankdnn/mlp.hpp"
#include "rankdnn/pca.hpp"
#include "rankdnn/sampler.hpp"
#include "rankdnn/voting.hpp"

namespace rankdnn {

/// Everything that determines a meta-train + evaluate run.
struct ExperimentConfig {
  // Representation
  std::size_t pca_dim = kDefaultPcaDim;
  bool l2_normalize = false;
  EncodingScheme scheme = EncodingScheme::kronecker;

  // RankMLP and optimizer
  std::vector<std::size_t> hidden = kReferenceHidden;
  double learning_rate = 0.0005;
  double momentum = 0.9;
  double weight_decay = 1e-6;
  std::optional<double> clip_norm;
  std::size_t batch_size = 128;
  std::size_t iterations = 30000;

  // Meta-training episodes
  std::size_t train_way = 5;
  std::size_t train_shot = 5;
  std::size_t train_queries = 0;  // per class, used as anchors in query/both mode
  AnchorMode anchors = AnchorMode::support;

  // Early stopping on validation episodes
  double val_fraction = 0.2;  // share of training classes held out for validation
  std::size_t val_interval = 500;
  std::size_t val_episodes = 100;
  std::size_t patience = 5;

  // Evaluation
  std::size_t episodes = 2000;
  std::size_t n_way = 5;
  std::size_t k_shot = 1;
  std::size_t queries = 15;  // per class
  bool finetune = false;
  FinetuneConfig finetune_config;
  VotingMode voting = VotingMode::averaged;
  std::size_t threads = 0;  // 0: hardware concurrency

  // RankSVM baseline
  double svm_c = 1.0;
  std::size_t svm_epochs = 5;
  std::size_t svm_train_episodes = 50;

  std::uint64_t seed = 0;
};

MlpConfig mlp_config(const ExperimentConfig& config);

// Throws InvalidArgument when fields are inconsistent.
void validate(const ExperimentConfig& config);

// Sets one field from its key=value spelling (keys as in to_key_values).
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

// TOML-style file: `key = value` lines, '#' comments, optional quotes, [sections] ignored.
void load_config_file(ExperimentConfig& config, const std::filesystem::path& path);

// Canonical `key=value` listing, one per line, sorted by key.
std::string to_key_values(const ExperimentConfig& config);

// FNV-1a 64 of the canonical listing, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

// RANKDNN_SEED when set and parseable.
std::optional<std::uint64_t> seed_from_env();

}  // namespace rankdnn
