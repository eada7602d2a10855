#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cade/autodiff.hpp"
#include "cade/graph.hpp"
#include "cade/random.hpp"
#include "cade/sampling.hpp"

namespace cade {

enum class Aggregator { kMean, kMaxPool };
enum class Activation { kRelu, kSigmoid, kIdentity };

const char* to_string(Aggregator a);
const char* to_string(Activation a);
Aggregator parse_aggregator(const std::string& s);
Activation parse_activation(const std::string& s);

struct EncoderConfig {
  std::size_t feature_dim = 0;
  std::size_t embed_dim = 256;
  std::vector<std::size_t> sample_sizes{20, 10};
  Aggregator aggregator = Aggregator::kMean;
  Activation activation = Activation::kRelu;
  // Nonlinearity of the last layer. Identity by default: a nonnegative
  // output (relu, sigmoid) cannot express negative dot products.
  Activation output_activation = Activation::kIdentity;
  // Applied to each child's dense transform before max pooling.
  Activation pool_activation = Activation::kRelu;
  bool normalize_output = false;

  std::size_t depth() const { return sample_sizes.size(); }
  // Width of h^{l-1}: the feature dimension below layer 1, embed_dim above.
  std::size_t layer_input_dim(std::size_t layer) const {
    return layer == 1 ? feature_dim : embed_dim;
  }
  void validate() const;
};

// Parameters of one layer: W^l applied to [self || aggregated] and, for
// max pooling, the per-child dense transform.
struct LayerWeights {
  ad::Parameter weight;       // [2 * d_in x d]
  ad::Parameter pool_weight;  // [d_in x d_in], max pooling only
  ad::Parameter pool_bias;    // [1 x d_in], max pooling only
};

struct EncoderWeights {
  std::vector<LayerWeights> layers;
};

EncoderWeights init_encoder_weights(const EncoderConfig& cfg, Rng& rng, const std::string& prefix);

// Memorable global bias: one trainable row per training node. Nodes without
// a row (unseen during training) get a zero bias.
struct GlobalBias {
  ad::Parameter table;                   // [num_rows x d]
  std::vector<std::int64_t> row_of_node;  // -1 when the node has no row

  std::int64_t row(NodeId v) const {
    return v < row_of_node.size() ? row_of_node[v] : -1;
  }
};

GlobalBias make_global_bias(std::size_t num_nodes, std::span<const NodeId> bias_nodes,
                            std::size_t embed_dim);

ad::Value activate(ad::Value x, Activation a);

// Aggregates consecutive groups of `group` child rows into one row each.
ad::Value aggregate(ad::Value children, std::size_t group, const EncoderConfig& cfg,
                    LayerWeights& layer);

// Sampling-and-aggregating with global bias over a batch of trees sharing
// the configured sample sizes; returns [trees.size() x embed_dim], row k
// being the embedding of trees[k].root. Hidden layers add the node's bias
// row; the last layer does not.
ad::Value sagb_forward(ad::Tape& tape, const EncoderConfig& cfg, EncoderWeights& weights,
                       GlobalBias* bias, const Graph& g,
                       std::span<const NeighborhoodTree> trees);

}  // namespace cade
