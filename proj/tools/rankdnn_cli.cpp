#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rankdnn/config.hpp"
#include "rankdnn/errors.hpp"
#include "rankdnn/feature_store.hpp"
#include "rankdnn/harness.hpp"
#include "rankdnn/synthetic_tasks.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rankdnn;

namespace {

// Flags shared by every subcommand that builds an ExperimentConfig. Values
// left unset keep whatever the config file (or the defaults) provided.
struct ConfigFlags {
  std::string config_file;
  std::vector<std::string> settings;
  std::optional<std::string> encoder;
  std::optional<std::string> anchors;
  std::optional<std::size_t> episodes, queries, way, shot, pca_dim, iterations, batch, threads;
  std::optional<double> svm_c, clip, lr;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> hidden;
  bool l2 = false;
  bool finetune = false;
  bool all_supports = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "key = value config file")->check(CLI::ExistingFile);
    app->add_option("--set", settings, "Extra key=value override (repeatable)");
    app->add_option("--encoder", encoder,
                    "kronecker|hadamard|disparity|combined|triple-concat|pairwise-concat-diff");
    app->add_option("--anchors", anchors, "support|query|both");
    app->add_option("--episodes", episodes, "Evaluation episodes");
    app->add_option("--queries", queries, "Queries per class");
    app->add_option("--way", way, "N");
    app->add_option("--shot", shot, "K");
    app->add_option("--pca-dim", pca_dim);
    app->add_option("--iterations", iterations, "Meta-training iteration budget");
    app->add_option("--batch", batch, "Triplets per step");
    app->add_option("--threads", threads, "Evaluation workers (0: all cores)");
    app->add_option("--svm-c", svm_c);
    app->add_option("--clip", clip, "Global gradient-norm clip");
    app->add_option("--lr", lr);
    app->add_option("--hidden", hidden, "Hidden widths, comma separated");
    app->add_option("--seed", seed, "Global seed (default: RANKDNN_SEED, else 0)");
    app->add_flag("--l2", l2, "L2-normalize features after PCA");
    app->add_flag("--finetune", finetune, "Fine-tune on each episode's support set");
    app->add_flag("--all-supports", all_supports, "Vote over every support instead of prototypes");
  }

  ExperimentConfig build() const {
    ExperimentConfig c;
    if (auto env = seed_from_env()) c.seed = *env;
    if (!config_file.empty()) load_config_file(c, config_file);
    for (const auto& kv : settings) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw InvalidArgument("--set expects key=value, got '" + kv + "'");
      apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (encoder) c.scheme = parse_scheme(*encoder);
    if (anchors) c.anchors = parse_anchor_mode(*anchors);
    if (episodes) c.episodes = *episodes;
    if (queries) c.queries = *queries;
    if (way) c.n_way = *way;
    if (shot) c.k_shot = *shot;
    if (pca_dim) c.pca_dim = *pca_dim;
    if (iterations) c.iterations = *iterations;
    if (batch) c.batch_size = *batch;
    if (threads) c.threads = *threads;
    if (svm_c) c.svm_c = *svm_c;
    if (clip) c.clip_norm = *clip;
    if (lr) c.learning_rate = *lr;
    if (hidden) apply_setting(c, "hidden", *hidden);
    if (seed) c.seed = *seed;
    if (l2) c.l2_normalize = true;
    if (finetune) c.finetune = true;
    if (all_supports) c.voting = VotingMode::all_supports;
    validate(c);
    return c;
  }
};

json history_json(const std::vector<HistoryPoint>& history) {
  json out = json::array();
  for (const auto& h : history) {
    json p{{"iteration", h.iteration}, {"loss", h.loss}};
    if (h.val_accuracy) p["val_accuracy"] = *h.val_accuracy;
    out.push_back(p);
  }
  return out;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  return json::parse(in);
}

void print_report(const Report& report, const std::string& label) {
  for (std::size_t e = 0; e < report.accuracies.size(); ++e)
    std::printf("episode %zu accuracy %.4f\n", e, report.accuracies[e]);
  json summary = to_json(report);
  summary["label"] = label;
  std::printf("%s\n", summary.dump().c_str());
}

// A saved model is a directory: model.json, pca.rkpc and ranker.rkml or ranker.rksv.
void save_model_dir(const fs::path& dir, const ExperimentConfig& config, const PcaModel& pca,
                    const json& extra) {
  fs::create_directories(dir);
  write_pca(pca, dir / "pca.rkpc");
  json meta = extra;
  meta["scheme"] = to_string(config.scheme);
  meta["l2_normalize"] = config.l2_normalize;
  meta["config"] = to_key_values(config);
  meta["config_hash"] = config_hash(config);
  write_json(dir / "model.json", meta);
}

int cmd_gen_data(const std::string& task, TaskSpec spec, const std::string& out, const std::string& train_out,
                 const std::string& test_out, std::size_t test_classes) {
  spec.kind = parse_task_kind(task);
  FeatureSet set = generate_task(spec);
  if (!out.empty()) write_feature_set(set, out);
  if (!train_out.empty() || !test_out.empty()) {
    if (train_out.empty() || test_out.empty())
      throw InvalidArgument("--train-out and --test-out go together");
    if (test_classes == 0 || test_classes >= spec.num_classes)
      throw InvalidArgument("--test-classes must be in [1, classes)");
    std::vector<ClassId> tr, te;
    for (ClassId c = 0; c < spec.num_classes; ++c)
      (c < spec.num_classes - test_classes ? tr : te).push_back(c);
    auto [train, test] = split_by_class(set, tr, te);
    write_feature_set(train, train_out);
    write_feature_set(test, test_out);
  }
  std::printf("generated %zu vectors of dim %zu in %zu classes\n", set.size(), set.dim(), set.num_classes());
  return 0;
}

void write_svg(const json& history, const fs::path& path) {
  std::vector<std::pair<double, double>> loss, val;
  double max_it = 1.0, max_loss = 1e-9;
  for (const auto& p : history) {
    double it = p.at("iteration").get<double>();
    max_it = std::max(max_it, it);
    loss.emplace_back(it, p.at("loss").get<double>());
    max_loss = std::max(max_loss, loss.back().second);
    if (p.contains("val_accuracy")) val.emplace_back(it, p.at("val_accuracy").get<double>());
  }
  const double w = 640, h = 360, m = 48;
  auto px = [&](double it) { return m + (w - 2 * m) * it / max_it; };
  auto py = [&](double v) { return h - m - (h - 2 * m) * v; };
  auto polyline = [&](const std::vector<std::pair<double, double>>& pts, double scale, const char* color) {
    std::ostringstream s;
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (auto [x, y] : pts) s << px(x) << ',' << py(y / scale) << ' ';
    s << "\"/>\n";
    return s.str();
  };
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<line x1=\"" << m << "\" y1=\"" << h - m << "\" x2=\"" << w - m << "\" y2=\"" << h - m
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << m << "\" y1=\"" << m << "\" x2=\"" << m << "\" y2=\"" << h - m << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << w / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\">iteration (max "
      << max_it << ")</text>\n"
      << "<text x=\"" << m << "\" y=\"" << m - 12 << "\" fill=\"steelblue\">validation accuracy (0..1)</text>\n"
      << "<text x=\"" << w - m << "\" y=\"" << m - 12 << "\" text-anchor=\"end\" fill=\"indianred\">loss (0.."
      << max_loss << ")</text>\n";
  out << polyline(val, 1.0, "steelblue") << polyline(loss, max_loss, "indianred") << "</svg>\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Few-shot classification by triplet ranking over feature-vector files"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic labeled feature set");
  std::string gen_task = "gaussian", gen_out, gen_train_out, gen_test_out;
  std::size_t gen_test_classes = 20;
  TaskSpec gen_spec;
  if (auto env = seed_from_env()) gen_spec.seed = *env;
  gen->add_option("--task", gen_task, "gaussian|scalemix|gated");
  gen->add_option("--classes", gen_spec.num_classes);
  gen->add_option("--per-class", gen_spec.per_class);
  gen->add_option("--dim", gen_spec.dim);
  gen->add_option("--center-scale", gen_spec.center_scale);
  gen->add_option("--noise", gen_spec.noise_sigma);
  gen->add_option("--nuisance", gen_spec.nuisance);
  gen->add_option("--seed", gen_spec.seed);
  gen->add_option("--out", gen_out, "Whole set");
  gen->add_option("--train-out", gen_train_out, "Class-disjoint train split");
  gen->add_option("--test-out", gen_test_out, "Class-disjoint test split (last --test-classes classes)");
  gen->add_option("--test-classes", gen_test_classes);

  // fit-pca
  auto* fit = app.add_subcommand("fit-pca", "Fit PCA on a feature file");
  std::string fit_data, fit_out, fit_transformed;
  std::size_t fit_dim = kDefaultPcaDim;
  bool fit_l2 = false;
  fit->add_option("--data", fit_data)->required()->check(CLI::ExistingFile);
  fit->add_option("--dim", fit_dim);
  fit->add_option("--out", fit_out, "RKPC model file")->required();
  fit->add_option("--transformed", fit_transformed, "Also write the reduced features here");
  fit->add_flag("--l2", fit_l2, "L2-normalize the reduced features");

  // train
  auto* train = app.add_subcommand("train", "Meta-train a ranker and save it to a directory");
  ConfigFlags train_flags;
  std::string train_data, train_out, train_ranker = "mlp";
  train->add_option("--data", train_data)->required()->check(CLI::ExistingFile);
  train->add_option("--out", train_out, "Model directory")->required();
  train->add_option("--ranker", train_ranker, "mlp|svm")->check(CLI::IsMember({"mlp", "svm"}));
  train_flags.attach(train);

  // eval
  auto* eval = app.add_subcommand("eval", "Episodic evaluation of a saved model");
  ConfigFlags eval_flags;
  std::string eval_model, eval_data;
  eval->add_option("--model", eval_model, "Model directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--data", eval_data)->required()->check(CLI::ExistingFile);
  eval_flags.attach(eval);

  // ablate
  auto* abl = app.add_subcommand("ablate", "Train and evaluate one model per encoder");
  ConfigFlags abl_flags;
  std::string abl_train, abl_test;
  std::vector<std::string> abl_schemes;
  bool abl_svm = false;
  abl->add_option("--train", abl_train)->required()->check(CLI::ExistingFile);
  abl->add_option("--test", abl_test)->required()->check(CLI::ExistingFile);
  abl->add_option("--schemes", abl_schemes, "Encoders to compare (default: all)")->delimiter(',');
  abl->add_flag("--ranksvm", abl_svm, "Add a Kronecker + RankSVM row");
  abl_flags.attach(abl);

  // cross-eval
  auto* cross = app.add_subcommand("cross-eval", "Meta-train on one set, evaluate on another");
  ConfigFlags cross_flags;
  std::string cross_train, cross_test;
  cross->add_option("--train", cross_train)->required()->check(CLI::ExistingFile);
  cross->add_option("--test", cross_test)->required()->check(CLI::ExistingFile);
  cross_flags.attach(cross);

  // plot
  auto* plot = app.add_subcommand("plot", "Loss and validation accuracy curves as SVG");
  std::string plot_model, plot_out;
  plot->add_option("--model", plot_model, "Model directory")->required()->check(CLI::ExistingDirectory);
  plot->add_option("--out", plot_out, "SVG file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_data(gen_task, gen_spec, gen_out, gen_train_out, gen_test_out, gen_test_classes);

    if (fit->parsed()) {
      FeatureSet set = read_feature_set(fit_data);
      PcaModel pca = fit_pca(set, fit_dim);
      write_pca(pca, fit_out);
      if (!fit_transformed.empty()) write_feature_set(pca_transform_set(pca, set, fit_l2), fit_transformed);
      double total = pca.explained_variance.sum();
      std::printf("pca %zu -> %zu, retained variance %.6g\n", pca.input_dim, pca.output_dim, total);
      return 0;
    }

    if (train->parsed()) {
      ExperimentConfig c = train_flags.build();
      FeatureSet data = read_feature_set(train_data);
      fs::path dir = train_out;
      if (train_ranker == "svm") {
        auto [train_part, validation] = holdout_validation(data, c);
        SvmBaseline b = train_svm_baseline(c, train_part);
        save_model_dir(dir, c, b.pca, json{{"ranker", "svm"}});
        write_svm(b.svm, dir / "ranker.rksv");
        std::printf("trained RankSVM on %zu-dim encodings\n", static_cast<std::size_t>(b.svm.w.size()));
      } else {
        TrainedModel m = meta_train_with_holdout(c, data);
        save_model_dir(dir, c, m.pca,
                       json{{"ranker", "mlp"},
                            {"iterations_run", m.iterations_run},
                            {"best_iteration", m.best_iteration},
                            {"history", history_json(m.history)}});
        save_checkpoint(m.mlp, dir / "ranker.rkml");
        for (const auto& h : m.history) {
          std::printf("iteration %zu loss %.4f", h.iteration, h.loss);
          if (h.val_accuracy) std::printf(" val %.4f", *h.val_accuracy);
          std::printf("\n");
        }
        std::printf("trained %zu iterations, best at %zu\n", m.iterations_run, m.best_iteration);
      }
      return 0;
    }

    if (eval->parsed()) {
      fs::path dir = eval_model;
      json meta = read_json(dir / "model.json");
      ExperimentConfig c = eval_flags.build();
      c.scheme = parse_scheme(meta.at("scheme").get<std::string>());
      c.l2_normalize = meta.at("l2_normalize").get<bool>();
      FeatureSet test = read_feature_set(eval_data);
      PcaModel pca = read_pca(dir / "pca.rkpc");
      Report report;
      if (meta.at("ranker") == "svm") {
        report = evaluate(SvmBaseline{pca, c.l2_normalize, c.scheme, read_svm(dir / "ranker.rksv")}, c, test);
      } else {
        TrainedModel m{pca, c.l2_normalize, c.scheme, load_checkpoint(dir / "ranker.rkml"), {}, 0, 0};
        report = evaluate(m, c, test);
      }
      print_report(report, meta.at("ranker").get<std::string>() + "/" + to_string(c.scheme));
      return 0;
    }

    if (abl->parsed()) {
      ExperimentConfig c = abl_flags.build();
      std::vector<EncodingScheme> schemes;
      for (const auto& s : abl_schemes) schemes.push_back(parse_scheme(s));
      if (schemes.empty()) schemes.assign(kAllSchemes.begin(), kAllSchemes.end());
      auto rows = ablate(c, read_feature_set(abl_train), read_feature_set(abl_test), schemes, abl_svm);
      std::printf("%s", format_ablation(rows).c_str());
      json out = json::array();
      for (const auto& r : rows) {
        json j{{"name", r.name}, {"diverged", r.diverged}};
        if (r.report) j["report"] = to_json(*r.report);
        if (!r.error.empty()) j["error"] = r.error;
        out.push_back(j);
      }
      std::printf("%s\n", out.dump().c_str());
      return 0;
    }

    if (cross->parsed()) {
      ExperimentConfig c = cross_flags.build();
      Report report = cross_domain_eval(read_feature_set(cross_train), read_feature_set(cross_test), c);
      print_report(report, "cross-domain/" + to_string(c.scheme));
      return 0;
    }

    if (plot->parsed()) {
      json meta = read_json(fs::path(plot_model) / "model.json");
      if (!meta.contains("history")) throw InvalidArgument("model has no training history to plot");
      write_svg(meta.at("history"), plot_out);
      return 0;
    }
  } catch (const TrainingDiverged& e) {
    std::fprintf(stderr, "training-diverged: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
