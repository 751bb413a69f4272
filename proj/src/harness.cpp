#include "rankdnn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "rankdnn/errors.hpp"
#include "rankdnn/sampler.hpp"
#include "rankdnn/voting.hpp"

namespace rankdnn {

namespace {

// Seed streams, so adding a consumer never shifts another one's draws.
constexpr std::uint64_t kStreamHoldout = 1;
constexpr std::uint64_t kStreamTrainEpisodes = 2;
constexpr std::uint64_t kStreamValidation = 3;
constexpr std::uint64_t kStreamEvaluation = 4;
constexpr std::uint64_t kStreamSvm = 5;

std::size_t train_queries_total(const ExperimentConfig& c) {
  return c.anchors == AnchorMode::support ? 0 : c.train_way * c.train_queries;
}

void append_triplets(TripletSet& into, const TripletSet& from) {
  const std::size_t offset = into.pool.size();
  into.pool.insert(into.pool.end(), from.pool.begin(), from.pool.end());
  for (LabeledTriplet t : from.triplets) {
    t.query += offset;
    t.support_i += offset;
    t.support_j += offset;
    into.triplets.push_back(t);
  }
}

}  // namespace

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    for (std::size_t t = 0; t < threads; ++t)
      workers.emplace_back([&] {
        for (std::size_t k = next++; k < count; k = next++) {
          try {
            fn(k);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = count;
          }
        }
      });
  }
  if (failure) std::rethrow_exception(failure);
}

FeatureSet reduce_features(const PcaModel& pca, bool l2_normalize, const FeatureSet& set) {
  return pca_transform_set(pca, set, l2_normalize);
}

std::pair<FeatureSet, std::optional<FeatureSet>> holdout_validation(const FeatureSet& train,
                                                                    const ExperimentConfig& config) {
  if (config.val_fraction <= 0.0) return {train, std::nullopt};
  std::vector<ClassId> classes = train.classes();
  std::mt19937_64 rng(derive_seed(config.seed, kStreamHoldout));
  std::shuffle(classes.begin(), classes.end(), rng);
  auto held = static_cast<std::size_t>(config.val_fraction * static_cast<double>(classes.size()) + 0.5);
  held = std::max(held, config.n_way);
  if (classes.size() < held + config.train_way)
    throw InvalidArgument("too few training classes (" + std::to_string(classes.size()) +
                          ") to hold out " + std::to_string(held) + " for validation");
  std::vector<ClassId> val(classes.begin(), classes.begin() + static_cast<std::ptrdiff_t>(held));
  std::vector<ClassId> rest(classes.begin() + static_cast<std::ptrdiff_t>(held), classes.end());
  std::sort(val.begin(), val.end());
  std::sort(rest.begin(), rest.end());
  auto [t, v] = split_by_class(train, rest, val);
  return {std::move(t), std::move(v)};
}

TrainedModel meta_train(const ExperimentConfig& config, const FeatureSet& train, const FeatureSet* validation) {
  validate(config);
  if (!train.has_labels()) throw InvalidArgument("meta_train needs a labeled training set");

  TrainedModel out{fit_pca(train, config.pca_dim), config.l2_normalize, config.scheme,
                   MlpModel(mlp_config(config)), {}, 0, 0};
  const FeatureSet reduced = reduce_features(out.pca, out.l2_normalize, train);
  std::optional<FeatureSet> val_reduced;
  if (validation) val_reduced = reduce_features(out.pca, out.l2_normalize, *validation);

  MlpModel& model = out.mlp;
  std::optional<MlpModel> best;
  double best_accuracy = -1.0;
  std::size_t stale = 0;
  double loss_sum = 0.0;
  std::size_t loss_count = 0;

  ExperimentConfig val_config = config;
  val_config.episodes = config.val_episodes;
  val_config.finetune = false;
  val_config.seed = derive_seed(config.seed, kStreamValidation);

  const TripletOptions options{config.anchors, true};
  std::vector<std::size_t> which;
  Matrix batch;
  std::size_t it = 0;
  for (; it < config.iterations; ++it) {
    const std::uint64_t episode_seed = derive_seed(derive_seed(config.seed, kStreamTrainEpisodes), it);
    const Episode ep = sample_episode(reduced, config.train_way, config.train_shot, train_queries_total(config),
                                      episode_seed);
    const TripletSet triplets = build_training_triplets(ep, derive_seed(episode_seed, 1), options);
    // Triplets arrive shuffled; take the first batch_size.
    which.resize(std::min(config.batch_size, triplets.triplets.size()));
    for (std::size_t k = 0; k < which.size(); ++k) which[k] = k;
    const Vector targets = encode_batch(config.scheme, triplets, which, batch);
    try {
      loss_sum += model.train_step(batch, targets);
      ++loss_count;
    } catch (const TrainingDiverged& e) {
      throw TrainingDiverged(e.layer(), "iteration " + std::to_string(it) + ", encoder " + to_string(config.scheme));
    }

    const bool checkpoint = (it + 1) % config.val_interval == 0 || it + 1 == config.iterations;
    if (!checkpoint) continue;
    HistoryPoint point{it + 1, loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0, std::nullopt};
    loss_sum = 0.0;
    loss_count = 0;
    if (val_reduced) {
      const Report r = evaluate(MlpRanker(model), config.scheme, val_config, *val_reduced);
      point.val_accuracy = r.mean_accuracy;
      if (r.mean_accuracy > best_accuracy) {
        best_accuracy = r.mean_accuracy;
        best = model;
        out.best_iteration = it + 1;
        stale = 0;
      } else if (++stale >= config.patience) {
        out.history.push_back(point);
        ++it;
        break;
      }
    }
    out.history.push_back(point);
  }
  out.iterations_run = it;
  if (best) {
    model = std::move(*best);
  } else {
    out.best_iteration = it;
  }
  return out;
}

TrainedModel meta_train_with_holdout(const ExperimentConfig& config, const FeatureSet& train) {
  auto [train_part, validation] = holdout_validation(train, config);
  return meta_train(config, train_part, validation ? &*validation : nullptr);
}

Report evaluate_reduced(const std::function<EpisodeResult(const Episode&, std::uint64_t)>& run_episode,
                        const ExperimentConfig& config, const FeatureSet& reduced) {
  std::vector<double> accuracies(config.episodes);
  std::vector<double> seconds(config.episodes);
  std::vector<std::size_t> triplets(config.episodes);
  const std::uint64_t base = derive_seed(config.seed, kStreamEvaluation);
  parallel_for(config.episodes, config.threads, [&](std::size_t e) {
    const std::uint64_t seed = derive_seed(base, e);
    const Episode ep = sample_episode(reduced, config.n_way, config.k_shot, config.n_way * config.queries, seed);
    const EpisodeResult r = run_episode(ep, derive_seed(seed, 1));
    accuracies[e] = r.accuracy;
    seconds[e] = r.inference_seconds + r.finetune_seconds;
    triplets[e] = r.triplets_per_query;
  });
  Report report = make_report(std::move(accuracies), std::move(seconds), config_hash(config));
  report.triplets_per_query = triplets.front();
  return report;
}

Report evaluate(const TripletClassifier& classifier, EncodingScheme scheme, const ExperimentConfig& config,
                const FeatureSet& reduced_test) {
  return evaluate_reduced(
      [&](const Episode& ep, std::uint64_t) { return classify_episode(classifier, scheme, ep, config.voting); },
      config, reduced_test);
}

Report evaluate(const TrainedModel& model, const ExperimentConfig& config, const FeatureSet& test) {
  if (test.dim() != model.pca.input_dim)
    throw InvalidArgument("test features have dim " + std::to_string(test.dim()) + ", PCA expects " +
                          std::to_string(model.pca.input_dim));
  const FeatureSet reduced = reduce_features(model.pca, model.l2_normalize, test);
  if (!config.finetune) return evaluate(MlpRanker(model.mlp), model.scheme, config, reduced);
  return evaluate_reduced(
      [&](const Episode& ep, std::uint64_t seed) {
        FinetuneConfig ft = config.finetune_config;
        ft.seed = seed;
        return classify_episode(model.mlp, model.scheme, ep, ft, config.voting);
      },
      config, reduced);
}

SvmBaseline train_svm_baseline(const ExperimentConfig& config, const FeatureSet& train) {
  validate(config);
  SvmBaseline out{fit_pca(train, config.pca_dim), config.l2_normalize, config.scheme, {}};
  const FeatureSet reduced = reduce_features(out.pca, out.l2_normalize, train);
  TripletSet all;
  const std::uint64_t base = derive_seed(config.seed, kStreamSvm);
  for (std::size_t e = 0; e < config.svm_train_episodes; ++e) {
    const std::uint64_t seed = derive_seed(base, e);
    const Episode ep =
        sample_episode(reduced, config.train_way, config.train_shot, train_queries_total(config), seed);
    append_triplets(all, build_training_triplets(ep, derive_seed(seed, 1), {config.anchors, true}));
  }
  out.svm = train_ranksvm(all, config.scheme, config.svm_c, config.svm_epochs, derive_seed(base, ~0ull));
  return out;
}

Report evaluate(const SvmBaseline& baseline, const ExperimentConfig& config, const FeatureSet& test) {
  const FeatureSet reduced = reduce_features(baseline.pca, baseline.l2_normalize, test);
  ExperimentConfig c = config;
  c.finetune = false;
  return evaluate(SvmRanker(baseline.svm), baseline.scheme, c, reduced);
}

std::vector<AblationRow> ablate(const ExperimentConfig& config, const FeatureSet& train, const FeatureSet& test,
                                std::span<const EncodingScheme> schemes, bool include_ranksvm) {
  std::vector<AblationRow> rows;
  for (EncodingScheme scheme : schemes) {
    AblationRow row{to_string(scheme), std::nullopt, {}, false};
    ExperimentConfig c = config;
    c.scheme = scheme;
    try {
      const TrainedModel model = meta_train_with_holdout(c, train);
      row.report = evaluate(model, c, test);
    } catch (const TrainingDiverged& e) {
      row.error = e.what();
      row.diverged = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  if (include_ranksvm) {
    AblationRow row{"kronecker+ranksvm", std::nullopt, {}, false};
    ExperimentConfig c = config;
    c.scheme = EncodingScheme::kronecker;
    try {
      auto [train_part, validation] = holdout_validation(train, c);
      row.report = evaluate(train_svm_baseline(c, train_part), c, test);
    } catch (const TrainingDiverged& e) {
      row.error = e.what();
      row.diverged = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_ablation(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-22s %18s\n", "encoder", "accuracy (%)");
  out << line;
  for (const AblationRow& row : rows) {
    if (row.report)
      std::snprintf(line, sizeof line, "%-22s %18s\n", row.name.c_str(), format_accuracy(*row.report).c_str());
    else
      std::snprintf(line, sizeof line, "%-22s %18s  %s\n", row.name.c_str(),
                    row.diverged ? "diverged" : "failed", row.error.c_str());
    out << line;
  }
  return out.str();
}

Report cross_domain_eval(const FeatureSet& train_set, const FeatureSet& test_set, const ExperimentConfig& config) {
  if (train_set.dim() != test_set.dim())
    throw InvalidArgument("cross-domain sets differ in dim: " + std::to_string(train_set.dim()) + " vs " +
                          std::to_string(test_set.dim()));
  const TrainedModel model = meta_train_with_holdout(config, train_set);
  return evaluate(model, config, test_set);
}

}  // namespace rankdnn
