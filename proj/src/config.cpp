#include "rankdnn/config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "rankdnn/errors.hpp"

namespace rankdnn {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw InvalidArgument("config key '" + std::string(key) + "': cannot parse '" + std::string(value) + "'");
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  throw InvalidArgument("config key '" + std::string(key) + "': expected a boolean, got '" +
                        std::string(value) + "'");
}

std::vector<std::size_t> parse_list(std::string_view key, std::string_view value) {
  std::vector<std::size_t> out;
  value = trim(value);
  if (!value.empty() && value.front() == '[' && value.back() == ']') value = value.substr(1, value.size() - 2);
  while (!value.empty()) {
    const auto comma = value.find(',');
    const auto item = trim(value.substr(0, comma));
    if (!item.empty()) out.push_back(parse_number<std::size_t>(key, item));
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
  return s;
}

struct Field {
  std::function<void(ExperimentConfig&, std::string_view, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T>
Field number_field(T ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, std::string_view k, std::string_view v) {
            c.*member = parse_number<T>(k, v);
          },
          [member](const ExperimentConfig& c) {
            if constexpr (std::is_floating_point_v<T>)
              return fmt_double(c.*member);
            else
              return std::to_string(c.*member);
          }};
}

Field bool_field(bool ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, std::string_view k, std::string_view v) { c.*member = parse_bool(k, v); },
          [member](const ExperimentConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

const std::map<std::string, Field, std::less<>>& fields() {
  static const std::map<std::string, Field, std::less<>> table = {
      {"pca_dim", number_field(&ExperimentConfig::pca_dim)},
      {"l2_normalize", bool_field(&ExperimentConfig::l2_normalize)},
      {"encoder",
       {[](ExperimentConfig& c, std::string_view, std::string_view v) { c.scheme = parse_scheme(v); },
        [](const ExperimentConfig& c) { return to_string(c.scheme); }}},
      {"hidden",
       {[](ExperimentConfig& c, std::string_view k, std::string_view v) { c.hidden = parse_list(k, v); },
        [](const ExperimentConfig& c) { return fmt_list(c.hidden); }}},
      {"learning_rate", number_field(&ExperimentConfig::learning_rate)},
      {"momentum", number_field(&ExperimentConfig::momentum)},
      {"weight_decay", number_field(&ExperimentConfig::weight_decay)},
      {"clip",
       {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
          if (v == "none" || v == "off" || v.empty())
            c.clip_norm.reset();
          else
            c.clip_norm = parse_number<double>(k, v);
        },
        [](const ExperimentConfig& c) { return c.clip_norm ? fmt_double(*c.clip_norm) : std::string("none"); }}},
      {"batch_size", number_field(&ExperimentConfig::batch_size)},
      {"iterations", number_field(&ExperimentConfig::iterations)},
      {"train_way", number_field(&ExperimentConfig::train_way)},
      {"train_shot", number_field(&ExperimentConfig::train_shot)},
      {"train_queries", number_field(&ExperimentConfig::train_queries)},
      {"anchors",
       {[](ExperimentConfig& c, std::string_view, std::string_view v) { c.anchors = parse_anchor_mode(v); },
        [](const ExperimentConfig& c) { return to_string(c.anchors); }}},
      {"val_fraction", number_field(&ExperimentConfig::val_fraction)},
      {"val_interval", number_field(&ExperimentConfig::val_interval)},
      {"val_episodes", number_field(&ExperimentConfig::val_episodes)},
      {"patience", number_field(&ExperimentConfig::patience)},
      {"episodes", number_field(&ExperimentConfig::episodes)},
      {"n_way", number_field(&ExperimentConfig::n_way)},
      {"k_shot", number_field(&ExperimentConfig::k_shot)},
      {"queries", number_field(&ExperimentConfig::queries)},
      {"finetune", bool_field(&ExperimentConfig::finetune)},
      {"finetune_iterations",
       {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
          c.finetune_config.iterations = parse_number<std::size_t>(k, v);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.finetune_config.iterations); }}},
      {"finetune_batch",
       {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
          c.finetune_config.batch_size = parse_number<std::size_t>(k, v);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.finetune_config.batch_size); }}},
      {"finetune_lr",
       {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
          c.finetune_config.learning_rate = parse_number<double>(k, v);
        },
        [](const ExperimentConfig& c) { return fmt_double(c.finetune_config.learning_rate); }}},
      {"voting",
       {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
          if (v == "averaged")
            c.voting = VotingMode::averaged;
          else if (v == "all-supports" || v == "all_supports")
            c.voting = VotingMode::all_supports;
          else
            throw InvalidArgument("config key '" + std::string(k) + "': expected averaged or all-supports");
        },
        [](const ExperimentConfig& c) {
          return std::string(c.voting == VotingMode::averaged ? "averaged" : "all-supports");
        }}},
      {"svm_c", number_field(&ExperimentConfig::svm_c)},
      {"svm_epochs", number_field(&ExperimentConfig::svm_epochs)},
      {"svm_train_episodes", number_field(&ExperimentConfig::svm_train_episodes)},
      {"seed", number_field(&ExperimentConfig::seed)},
  };
  return table;
}

}  // namespace

MlpConfig mlp_config(const ExperimentConfig& config) {
  MlpConfig m;
  m.layer_dims.push_back(encoded_dim(config.scheme, config.pca_dim));
  m.layer_dims.insert(m.layer_dims.end(), config.hidden.begin(), config.hidden.end());
  m.layer_dims.push_back(1);
  m.seed = config.seed;
  m.learning_rate = config.learning_rate;
  m.momentum = config.momentum;
  m.weight_decay = config.weight_decay;
  m.clip_norm = config.clip_norm;
  return m;
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& msg) { throw InvalidArgument("config: " + msg); };
  if (c.pca_dim == 0) fail("pca_dim must be positive");
  for (std::size_t h : c.hidden)
    if (h == 0) fail("hidden widths must be positive");
  if (c.batch_size == 0) fail("batch_size must be positive");
  if (c.train_way < 2) fail("train_way must be >= 2");
  if (c.anchors != AnchorMode::query && c.train_shot < 2) fail("support anchors need train_shot >= 2");
  if (c.anchors != AnchorMode::support && c.train_queries == 0) fail("query anchors need train_queries >= 1");
  if (c.n_way < 2) fail("n_way must be >= 2");
  if (c.k_shot == 0 || c.queries == 0 || c.episodes == 0) fail("k_shot, queries and episodes must be positive");
  if (c.finetune && c.k_shot < 2) fail("fine-tuning needs k_shot >= 2");
  if (!(c.val_fraction >= 0 && c.val_fraction < 1)) fail("val_fraction must be in [0, 1)");
  if (c.val_interval == 0) fail("val_interval must be positive");
  if (!(c.svm_c > 0)) fail("svm_c must be > 0");
  if (!(c.learning_rate > 0)) fail("learning_rate must be > 0");
  if (!(c.momentum >= 0 && c.momentum < 1)) fail("momentum must be in [0, 1)");
  if (!(c.weight_decay >= 0)) fail("weight_decay must be >= 0");
  if (c.finetune && !(c.finetune_config.learning_rate > 0)) fail("finetune_lr must be > 0");
}

void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value) {
  std::string k(trim(key));
  for (char& ch : k)
    if (ch == '-') ch = '_';
  auto it = fields().find(k);
  if (it == fields().end()) throw InvalidArgument("unknown config key '" + k + "'");
  it->second.set(config, k, unquote(trim(value)));
}

void load_config_file(ExperimentConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file '" + path.string() + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = line;
    if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty() || s.front() == '[') continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos)
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
  }
}

std::string to_key_values(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [key, field] : fields()) out += key + "=" + field.get(config) + "\n";
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : to_key_values(config)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::optional<std::uint64_t> seed_from_env() {
  const char* v = std::getenv("RANKDNN_SEED");
  if (!v || !*v) return std::nullopt;
  std::uint64_t out = 0;
  std::string_view s(v);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return out;
}

}  // namespace rankdnn
