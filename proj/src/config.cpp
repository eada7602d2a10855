#include "cade/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "cade/error.hpp"

namespace cade {

namespace {

const std::vector<std::pair<std::string, std::string>>& defaults() {
  static const std::vector<std::pair<std::string, std::string>> d = {
      {"train.lr", "0.0001"},
      {"train.mode", "ms"},
      {"train.epochs", "1"},
      {"train.batch_size", "512"},
      {"train.negatives", "20"},
      {"train.neg_power", "0.75"},
      {"train.pairs_per_epoch", "0"},
      {"train.checkpoint_every", "0"},
      {"model.K", "10"},
      {"model.L", "2"},
      {"model.sizes", "20,10"},
      {"model.d", "256"},
      {"model.aggregator", "mean"},
      {"model.activation", "relu"},
      {"model.output_activation", "identity"},
      {"model.pool_activation", "relu"},
      {"model.normalize_output", "false"},
      {"model.use_bias", "true"},
      {"sampling.walks", "100"},
      {"sampling.length", "4"},
      {"sampling.pair_mode", "start"},
      {"infer.walks", "0"},
      {"infer.length", "0"},
      {"eval.task", "nc"},
      {"eval.method", "cade-ms"},
      {"eval.unseen_ratio", "0.3"},
      {"eval.lp_hide_fraction", "0.2"},
      {"eval.lp_unseen_ratio", "0.2"},
      {"eval.lp_unseen_edges", "allow"},
      {"eval.edge_feature", "hadamard"},
      {"eval.repeats", "1"},
      {"eval.probe_lr", "0.01"},
      {"eval.probe_epochs", "300"},
      {"seed", "0"},
      {"threads", "1"},
      {"paths.edges", ""},
      {"paths.features", ""},
      {"paths.labels", ""},
      {"paths.checkpoint", ""},
      {"paths.embeddings", ""},
      {"paths.report", ""},
      {"paths.log", ""},
      {"paths.dump_walks", ""},
  };
  return d;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": cannot parse '" + v + "' as a number");
  }
  return out;
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  return parse_number<std::size_t>(key, v);
}

double parse_real(const std::string& key, const std::string& v) {
  // from_chars for double is available in libstdc++ 11+.
  return parse_number<double>(key, v);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

std::vector<std::size_t> parse_sizes(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(parse_count(key, trim(part)));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

}  // namespace

ConfigMap::ConfigMap() {
  for (const auto& [k, v] : defaults()) values_[k] = defaults_[k] = v;
}

std::vector<std::string> ConfigMap::known_keys() {
  std::vector<std::string> keys;
  for (const auto& kv : defaults()) keys.push_back(kv.first);
  return keys;
}

void ConfigMap::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = value;
}

const std::string& ConfigMap::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

bool ConfigMap::is_default(const std::string& key) const { return get(key) == defaults_.at(key); }

void ConfigMap::merge_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void ConfigMap::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      merge_assignment(line);
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::string ConfigMap::echo(bool include_paths) const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) {
    if (!include_paths && k.rfind("paths.", 0) == 0) continue;
    out << k << " = " << v << '\n';
  }
  return out.str();
}

RunConfig resolve(const ConfigMap& map) {
  auto s = [&](const char* k) { return map.get(k); };
  auto count = [&](const char* k) { return parse_count(k, s(k)); };
  auto real = [&](const char* k) { return parse_real(k, s(k)); };

  RunConfig rc;
  RunSpec& spec = rc.spec;
  spec.seed = parse_number<std::uint64_t>("seed", s("seed"));
  rc.threads = count("threads");
  if (rc.threads < 1) throw ConfigError("threads must be >= 1");

  EncoderConfig& enc = spec.model.encoder;
  enc.embed_dim = count("model.d");
  const std::size_t L = count("model.L");
  if (L < 1) throw ConfigError("model.L must be >= 1");
  enc.sample_sizes = parse_sizes("model.sizes", s("model.sizes"));
  if (enc.sample_sizes.size() != L) {
    if (!map.is_default("model.sizes")) {
      throw ConfigError("model.L = " + std::to_string(L) + " but model.sizes lists " +
                        std::to_string(enc.sample_sizes.size()) + " entries");
    }
    enc.sample_sizes.resize(L, enc.sample_sizes.back());
  }
  enc.aggregator = parse_aggregator(s("model.aggregator"));
  enc.activation = parse_activation(s("model.activation"));
  enc.pool_activation = parse_activation(s("model.pool_activation"));
  enc.output_activation = parse_activation(s("model.output_activation"));
  enc.normalize_output = parse_bool("model.normalize_output", s("model.normalize_output"));
  spec.model.mode = parse_dual_mode(s("train.mode"));
  spec.model.num_candidates = count("model.K");
  spec.model.use_global_bias = parse_bool("model.use_bias", s("model.use_bias"));

  TrainConfig& tc = spec.train;
  tc.learning_rate = real("train.lr");
  tc.epochs = count("train.epochs");
  tc.batch_size = count("train.batch_size");
  tc.negatives = count("train.negatives");
  tc.neg_power = real("train.neg_power");
  tc.pairs_per_epoch = count("train.pairs_per_epoch");
  tc.checkpoint_every = count("train.checkpoint_every");
  tc.walks.walks_per_node = count("sampling.walks");
  tc.walks.walk_length = count("sampling.length");
  const std::string pm = s("sampling.pair_mode");
  if (pm == "start") tc.pair_mode = PairMode::kStartToRest;
  else if (pm == "all") tc.pair_mode = PairMode::kAllOffsets;
  else throw ConfigError("sampling.pair_mode: expected start|all, got '" + pm + "'");
  tc.seed = spec.seed;
  tc.threads = rc.threads;

  InferenceConfig& ic = spec.infer;
  ic.walks = tc.walks;
  if (count("infer.walks") > 0) ic.walks.walks_per_node = count("infer.walks");
  if (count("infer.length") > 0) ic.walks.walk_length = count("infer.length");
  ic.pair_mode = tc.pair_mode;
  ic.threads = rc.threads;

  EvalConfig& ec = spec.eval;
  ec.task = parse_task(s("eval.task"));
  rc.method = parse_method(s("eval.method"));
  ec.unseen_ratio = real("eval.unseen_ratio");
  ec.lp_hide_fraction = real("eval.lp_hide_fraction");
  ec.lp_unseen_ratio = real("eval.lp_unseen_ratio");
  const std::string ue = s("eval.lp_unseen_edges");
  if (ue == "allow") ec.lp_exclude_unseen = false;
  else if (ue == "exclude") ec.lp_exclude_unseen = true;
  else throw ConfigError("eval.lp_unseen_edges: expected allow|exclude, got '" + ue + "'");
  ec.edge_feature = parse_edge_feature(s("eval.edge_feature"));
  ec.repeats = count("eval.repeats");
  ec.probe.learning_rate = real("eval.probe_lr");
  ec.probe.epochs = count("eval.probe_epochs");

  rc.paths.edges = s("paths.edges");
  rc.paths.features = s("paths.features");
  rc.paths.labels = s("paths.labels");
  rc.paths.checkpoint = s("paths.checkpoint");
  rc.paths.embeddings = s("paths.embeddings");
  rc.paths.report = s("paths.report");
  rc.paths.log = s("paths.log");
  rc.paths.dump_walks = s("paths.dump_walks");
  tc.dump_walks = rc.paths.dump_walks;

  ModelConfig check = spec.model;
  check.encoder.feature_dim = 1;  // known only once features are loaded
  check.validate();
  tc.validate();
  return rc;
}

}  // namespace cade
