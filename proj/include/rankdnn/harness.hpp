#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rankdnn/config.hpp"
#include "rankdnn/feature_store.hpp"
#include "rankdnn/mlp.hpp"
#include "rankdnn/pca.hpp"
#include "rankdnn/ranksvm.hpp"
#include "rankdnn/report.hpp"

namespace rankdnn {

struct HistoryPoint {
  std::size_t iteration = 0;
  double loss = 0.0;  // mean training loss since the previous point
  std::optional<double> val_accuracy;
};

/// Frozen PCA + trained RankMLP, with the encoder they were trained for.
struct TrainedModel {
  PcaModel pca;
  bool l2_normalize = false;
  EncodingScheme scheme = EncodingScheme::kronecker;
  MlpModel mlp;
  std::vector<HistoryPoint> history;
  std::size_t iterations_run = 0;
  std::size_t best_iteration = 0;
};

struct SvmBaseline {
  PcaModel pca;
  bool l2_normalize = false;
  EncodingScheme scheme = EncodingScheme::kronecker;
  SvmModel svm;
};

// Moves a seeded random `fraction` of the classes (at least n_way of them when
// fraction > 0) into a validation set. Returns {train, validation}.
std::pair<FeatureSet, std::optional<FeatureSet>> holdout_validation(const FeatureSet& train,
                                                                    const ExperimentConfig& config);

// Meta-training: fit PCA on `train` once, freeze it, then loop over sampled
// episodes -> triplets -> encode -> BCE step. With a validation set, every
// val_interval iterations the validation accuracy is measured and training
// stops after `patience` evaluations without improvement; the best model is
// returned. Divergence is rethrown with iteration and encoder context.
TrainedModel meta_train(const ExperimentConfig& config, const FeatureSet& train,
                        const FeatureSet* validation = nullptr);

// Convenience: holdout_validation followed by meta_train.
TrainedModel meta_train_with_holdout(const ExperimentConfig& config, const FeatureSet& train);

FeatureSet reduce_features(const PcaModel& pca, bool l2_normalize, const FeatureSet& set);

// Runs config.episodes episodes on `reduced` (already PCA-reduced) in a worker
// pool. Episode e uses a seed derived from (config.seed, e) so results do not
// depend on scheduling.
Report evaluate_reduced(const std::function<EpisodeResult(const Episode&, std::uint64_t)>& run_episode,
                        const ExperimentConfig& config, const FeatureSet& reduced);

Report evaluate(const TrainedModel& model, const ExperimentConfig& config, const FeatureSet& test);
Report evaluate(const TripletClassifier& classifier, EncodingScheme scheme, const ExperimentConfig& config,
                const FeatureSet& reduced_test);

SvmBaseline train_svm_baseline(const ExperimentConfig& config, const FeatureSet& train);
Report evaluate(const SvmBaseline& baseline, const ExperimentConfig& config, const FeatureSet& test);

struct AblationRow {
  std::string name;
  std::optional<Report> report;
  std::string error;  // set when training or evaluation failed
  bool diverged = false;
};

// One model per scheme under the same seeds and data; failures are recorded
// in the row and the sweep continues.
std::vector<AblationRow> ablate(const ExperimentConfig& config, const FeatureSet& train, const FeatureSet& test,
                                std::span<const EncodingScheme> schemes, bool include_ranksvm = false);

std::string format_ablation(const std::vector<AblationRow>& rows);

// Meta-trains on train_set (PCA fit there only) and evaluates on test_set.
Report cross_domain_eval(const FeatureSet& train_set, const FeatureSet& test_set, const ExperimentConfig& config);

// Calls fn(k) for k in [0, count) on `threads` workers (0: hardware concurrency).
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace rankdnn
