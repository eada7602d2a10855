#include "cade/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cade/error.hpp"
#include "cade/matrix_io.hpp"

namespace cade {

const char* to_string(DualMode m) { return m == DualMode::kMultiSampling ? "ms" : "ma"; }

DualMode parse_dual_mode(const std::string& s) {
  if (s == "ms" || s == "MS") return DualMode::kMultiSampling;
  if (s == "ma" || s == "MA") return DualMode::kMultiAggregating;
  throw ConfigError("unknown mode '" + s + "' (expected ms|ma)");
}

void ModelConfig::validate() const {
  encoder.validate();
  if (num_candidates < 1 || num_candidates > kMaxCandidates) {
    throw ConfigError("model.K must be in [1, " + std::to_string(kMaxCandidates) + "], got " +
                      std::to_string(num_candidates));
  }
}

Model Model::create(const ModelConfig& config, std::size_t num_nodes,
                    std::span<const NodeId> bias_nodes, std::uint64_t seed) {
  config.validate();
  Model m;
  m.config = config;
  m.seed = seed;
  Rng rng = substream(seed, "init");
  const std::size_t sets =
      config.mode == DualMode::kMultiAggregating ? config.num_candidates : 1;
  for (std::size_t k = 0; k < sets; ++k) {
    const std::string prefix = sets == 1 ? "" : "k" + std::to_string(k) + ".";
    m.encoders.push_back(init_encoder_weights(config.encoder, rng, prefix));
  }
  if (config.use_global_bias) {
    m.bias = make_global_bias(num_nodes, bias_nodes, config.encoder.embed_dim);
  }
  if (config.mode == DualMode::kMultiAggregating) {
    const std::size_t n = 2 * config.encoder.embed_dim;
    const double r = std::sqrt(6.0 / static_cast<double>(n + 1));
    Matrix a(1, n);
    for (double& x : a.values()) x = rng.uniform(-r, r);
    m.attention = ad::Parameter("A", std::move(a));
  }
  return m;
}

std::vector<ad::Parameter*> Model::parameters() {
  std::vector<ad::Parameter*> out;
  for (auto& enc : encoders) {
    for (auto& layer : enc.layers) {
      out.push_back(&layer.weight);
      if (!layer.pool_weight.value().empty()) {
        out.push_back(&layer.pool_weight);
        out.push_back(&layer.pool_bias);
      }
    }
  }
  if (bias && bias->table.value().rows() > 0) out.push_back(&bias->table);
  if (!attention.value().empty()) out.push_back(&attention);
  return out;
}

void Model::zero_grad() {
  for (ad::Parameter* p : parameters()) p->zero_grad();
}

namespace {

std::string sizes_string(const std::vector<std::size_t>& sizes) {
  std::string s;
  for (std::size_t i = 0; i < sizes.size(); ++i) s += (i ? "," : "") + std::to_string(sizes[i]);
  return s;
}

std::string file_name(const std::string& param_name) { return param_name + ".mat"; }

}  // namespace

void save_checkpoint(const Model& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& c = model.config;
  {
    std::ofstream out(dir / "manifest.txt");
    if (!out) throw DataError("cannot write checkpoint manifest in " + dir.string());
    out << "format = cade-checkpoint-1\n"
        << "feature_dim = " << c.encoder.feature_dim << '\n'
        << "embed_dim = " << c.encoder.embed_dim << '\n'
        << "L = " << c.encoder.depth() << '\n'
        << "sizes = " << sizes_string(c.encoder.sample_sizes) << '\n'
        << "K = " << c.num_candidates << '\n'
        << "mode = " << to_string(c.mode) << '\n'
        << "aggregator = " << to_string(c.encoder.aggregator) << '\n'
        << "activation = " << to_string(c.encoder.activation) << '\n'
        << "output_activation = " << to_string(c.encoder.output_activation) << '\n'
        << "pool_activation = " << to_string(c.encoder.pool_activation) << '\n'
        << "normalize_output = " << (c.encoder.normalize_output ? 1 : 0) << '\n'
        << "use_global_bias = " << (c.use_global_bias ? 1 : 0) << '\n'
        << "num_nodes = " << (model.bias ? model.bias->row_of_node.size() : 0) << '\n'
        << "seed = " << model.seed << '\n';
  }
  auto& mutable_model = const_cast<Model&>(model);  // parameters() only hands out pointers
  for (const ad::Parameter* p : mutable_model.parameters()) {
    save_matrix(dir / file_name(p->name()), p->value());
  }
  if (model.bias) {
    std::ofstream out(dir / "bias_nodes.txt");
    std::vector<NodeId> node_of_row(static_cast<std::size_t>(model.bias->table.value().rows()));
    for (std::size_t v = 0; v < model.bias->row_of_node.size(); ++v) {
      if (model.bias->row_of_node[v] >= 0) {
        node_of_row[static_cast<std::size_t>(model.bias->row_of_node[v])] = static_cast<NodeId>(v);
      }
    }
    for (NodeId v : node_of_row) out << v << '\n';
  }
}

std::map<std::string, std::string> read_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.txt");
  if (!in) throw DataError("checkpoint manifest not found in " + dir.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (line.empty() || line[0] == '#' || eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

Model load_checkpoint(const std::filesystem::path& dir) {
  const auto kv = read_manifest(dir);
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw DataError("checkpoint manifest missing key '" + key + "'");
    return it->second;
  };
  auto get_size = [&](const std::string& key) {
    try {
      return static_cast<std::size_t>(std::stoull(get(key)));
    } catch (const std::logic_error&) {
      throw DataError("checkpoint manifest: bad value for '" + key + "'");
    }
  };

  ModelConfig c;
  c.encoder.feature_dim = get_size("feature_dim");
  c.encoder.embed_dim = get_size("embed_dim");
  c.encoder.sample_sizes.clear();
  {
    std::stringstream ss(get("sizes"));
    std::string tok;
    while (std::getline(ss, tok, ',')) c.encoder.sample_sizes.push_back(std::stoull(tok));
  }
  if (c.encoder.sample_sizes.size() != get_size("L")) {
    throw DataError("checkpoint manifest: L does not match sizes");
  }
  c.num_candidates = get_size("K");
  c.mode = parse_dual_mode(get("mode"));
  c.encoder.aggregator = parse_aggregator(get("aggregator"));
  c.encoder.activation = parse_activation(get("activation"));
  c.encoder.pool_activation = parse_activation(get("pool_activation"));
  c.encoder.output_activation = parse_activation(get("output_activation"));
  c.encoder.normalize_output = get("normalize_output") == "1";
  c.use_global_bias = get("use_global_bias") == "1";

  std::vector<NodeId> bias_nodes;
  if (c.use_global_bias) {
    std::ifstream in(dir / "bias_nodes.txt");
    if (!in) throw DataError("checkpoint missing bias_nodes.txt");
    long long v;
    while (in >> v) bias_nodes.push_back(static_cast<NodeId>(v));
  }
  Model m = Model::create(c, get_size("num_nodes"), bias_nodes, std::stoull(get("seed")));
  for (ad::Parameter* p : m.parameters()) {
    Matrix value = load_matrix(dir / file_name(p->name()));
    if (!value.same_shape(p->value())) {
      throw DataError("checkpoint parameter " + p->name() + " has shape " + shape_string(value) +
                      ", manifest implies " + shape_string(p->value()));
    }
    p->value() = std::move(value);
  }
  return m;
}

std::uint64_t file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fnv1a(bytes);
}

std::uint64_t directory_hash(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& f : files) {
    const std::string name = f.filename().string();
    h = fnv1a({reinterpret_cast<const unsigned char*>(name.data()), name.size()}, h);
    const std::uint64_t fh = file_hash(f);
    h = fnv1a({reinterpret_cast<const unsigned char*>(&fh), sizeof(fh)}, h);
  }
  return h;
}

}  // namespace cade
