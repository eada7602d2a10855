#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cade/dual_encoder.hpp"
#include "cade/sampling.hpp"

namespace cade {

struct EmbeddingMatrix {
  Matrix vectors;                     // [num_nodes x d]
  std::vector<std::size_t> coverage;  // dual encodings averaged into each row
  std::vector<bool> fallback;         // row came from the single-node tree path
  std::uint64_t graph_hash = 0;
};

struct InferenceConfig {
  WalkConfig walks;
  PairMode pair_mode = PairMode::kStartToRest;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

// Embeds every node of `g` (seen and unseen). Pairs come from walks on the
// whole graph; each pair is dual-encoded and both z_v and z_vp are added to
// their node's running sum. Rows are the unweighted mean over every
// encoding of that node. Nodes without any pair get a single-node tree
// encoded against itself and are flagged in `fallback`.
EmbeddingMatrix generate_embeddings(const Graph& g, const Model& model, const InferenceConfig& cfg);

// Local variant around one node: n_pairs pairs from walks starting at v,
// mean of z_v over them.
std::vector<double> embed_single(NodeId v, const Graph& g, const Model& model,
                                 std::size_t n_pairs, std::uint64_t seed,
                                 std::size_t walk_length = 4, bool allow_isolated = false);

// Writes the matrix and a "<path>.nodes" sidecar with row, node id,
// coverage and fallback flag.
void save_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& emb);
EmbeddingMatrix load_embeddings(const std::filesystem::path& path);

}  // namespace cade
