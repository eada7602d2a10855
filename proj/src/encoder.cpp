#include "cade/encoder.hpp"

#include <cmath>

#include "cade/error.hpp"

namespace cade {

const char* to_string(Aggregator a) { return a == Aggregator::kMean ? "mean" : "maxpool"; }

const char* to_string(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kIdentity: return "identity";
  }
  return "?";
}

Aggregator parse_aggregator(const std::string& s) {
  if (s == "mean") return Aggregator::kMean;
  if (s == "maxpool" || s == "pool") return Aggregator::kMaxPool;
  throw ConfigError("unknown aggregator '" + s + "' (expected mean|maxpool)");
}

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "sigmoid") return Activation::kSigmoid;
  if (s == "identity") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + s + "' (expected relu|sigmoid|identity)");
}

void EncoderConfig::validate() const {
  if (feature_dim == 0) throw ConfigError("feature dimension must be positive");
  if (embed_dim == 0) throw ConfigError("model.d must be positive");
  if (sample_sizes.empty()) throw ConfigError("model.sizes must name at least one layer");
  for (std::size_t s : sample_sizes)
    if (s == 0) throw ConfigError("model.sizes entries must be positive");
}

namespace {

Matrix glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (double& x : m.values()) x = rng.uniform(-r, r);
  return m;
}

}  // namespace

EncoderWeights init_encoder_weights(const EncoderConfig& cfg, Rng& rng, const std::string& prefix) {
  EncoderWeights w;
  for (std::size_t l = 1; l <= cfg.depth(); ++l) {
    const std::size_t din = cfg.layer_input_dim(l);
    const std::string tag = prefix + "W" + std::to_string(l);
    LayerWeights layer;
    layer.weight = ad::Parameter(tag, glorot(2 * din, cfg.embed_dim, rng));
    if (cfg.aggregator == Aggregator::kMaxPool) {
      layer.pool_weight = ad::Parameter(prefix + "pool_W" + std::to_string(l), glorot(din, din, rng));
      layer.pool_bias = ad::Parameter(prefix + "pool_b" + std::to_string(l), Matrix(1, din));
    }
    w.layers.push_back(std::move(layer));
  }
  return w;
}

GlobalBias make_global_bias(std::size_t num_nodes, std::span<const NodeId> bias_nodes,
                            std::size_t embed_dim) {
  GlobalBias b;
  b.row_of_node.assign(num_nodes, -1);
  std::int64_t next = 0;
  for (NodeId v : bias_nodes) {
    if (v >= num_nodes) throw DataError("bias node " + std::to_string(v) + " out of range");
    if (b.row_of_node[v] < 0) b.row_of_node[v] = next++;
  }
  b.table = ad::Parameter("B", Matrix(static_cast<std::size_t>(next), embed_dim), /*row_sparse=*/true);
  return b;
}

ad::Value activate(ad::Value x, Activation a) {
  switch (a) {
    case Activation::kRelu: return ad::relu(x);
    case Activation::kSigmoid: return ad::sigmoid(x);
    case Activation::kIdentity: return x;
  }
  return x;
}

ad::Value aggregate(ad::Value children, std::size_t group, const EncoderConfig& cfg,
                    LayerWeights& layer) {
  if (children.rows() == 0) throw ShapeError("aggregate: no children");
  if (cfg.aggregator == Aggregator::kMean) return ad::reduce_mean_rows(children, group);
  ad::Tape& tape = *children.tape();
  ad::Value transformed = ad::add(ad::matmul(children, tape.parameter(layer.pool_weight)),
                                  tape.parameter(layer.pool_bias));
  return ad::reduce_max_rows(activate(transformed, cfg.pool_activation), group);
}

ad::Value sagb_forward(ad::Tape& tape, const EncoderConfig& cfg, EncoderWeights& weights,
                       GlobalBias* bias, const Graph& g,
                       std::span<const NeighborhoodTree> trees) {
  const std::size_t depth = cfg.depth();
  if (trees.empty()) throw ShapeError("sagb_forward: no trees");
  if (weights.layers.size() != depth) {
    throw ShapeError("sagb_forward: weights have " + std::to_string(weights.layers.size()) +
                     " layers, config has " + std::to_string(depth));
  }
  if (g.feature_dim() != cfg.feature_dim) {
    throw ShapeError("sagb_forward: features have " + std::to_string(g.feature_dim()) +
                     " columns, encoder expects " + std::to_string(cfg.feature_dim));
  }
  for (const auto& t : trees) {
    if (t.sizes != cfg.sample_sizes || t.layers.size() != depth + 1) {
      throw ShapeError("sagb_forward: tree depth/sizes do not match the encoder (L=" +
                       std::to_string(depth) + ")");
    }
  }

  // Stack depth-t nodes of all trees tree-major; children of stacked row r
  // at depth t are rows [r * s, (r + 1) * s) at depth t + 1.
  std::vector<std::vector<NodeId>> ids(depth + 1);
  for (std::size_t t = 0; t <= depth; ++t) {
    for (const auto& tree : trees)
      for (const TreeNode& n : tree.layers[t]) ids[t].push_back(n.id);
  }

  const Matrix& X = g.features();
  std::vector<ad::Value> h(depth + 1);
  for (std::size_t t = 0; t <= depth; ++t) {
    Matrix rows(ids[t].size(), X.cols());
    for (std::size_t i = 0; i < ids[t].size(); ++i) {
      const auto src = X.row(ids[t][i]);
      std::copy(src.begin(), src.end(), rows.row(i).begin());
    }
    h[t] = tape.constant(std::move(rows));
  }

  for (std::size_t l = 1; l <= depth; ++l) {
    LayerWeights& layer = weights.layers[l - 1];
    ad::Value W = tape.parameter(layer.weight);
    std::vector<ad::Value> next(depth - l + 1);
    for (std::size_t t = 0; t + l <= depth; ++t) {
      ad::Value agg = aggregate(h[t + 1], cfg.sample_sizes[t], cfg, layer);
      ad::Value out = activate(ad::matmul(ad::concat_cols(h[t], agg), W),
                                l < depth ? cfg.activation : cfg.output_activation);
      if (l < depth && bias != nullptr) {
        std::vector<std::int64_t> rows(ids[t].size());
        bool any = false;
        for (std::size_t i = 0; i < ids[t].size(); ++i) {
          rows[i] = bias->row(ids[t][i]);
          any = any || rows[i] >= 0;
        }
        if (any) out = ad::add(out, ad::gather_rows(tape.parameter(bias->table), rows));
      }
      next[t] = out;
    }
    h.assign(next.begin(), next.end());
  }
  return cfg.normalize_output ? ad::l2_normalize_rows(h[0]) : h[0];
}

}  // namespace cade
