#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cade/model.hpp"

namespace cade {

// Normalized K x K attention between two candidate sets. a_v holds the row
// sums of S and a_vp the column sums, both as 1 x K row vectors.
struct BiAttention {
  Matrix S;
  Matrix a_v;
  Matrix a_vp;
};

struct DualOutput {
  ad::Value z_v;   // 1 x d
  ad::Value z_vp;  // 1 x d
  ad::Value S;     // K x K
  ad::Value a_v;   // 1 x K
  ad::Value a_vp;  // 1 x K

  BiAttention attention() const { return {S.data(), a_v.data(), a_vp.data()}; }
};

// Raw similarity before normalization: dot products for multi-sampling,
// A^T [h_vi || h_vpj] for multi-aggregating (attention is then 1 x 2d).
ad::Value similarity(ad::Value H_v, ad::Value H_vp, DualMode mode,
                     std::optional<ad::Value> attention);

// Flattened-softmax bi-attention and attention-weighted candidate fusion.
DualOutput fuse(ad::Value H_v, ad::Value H_vp, DualMode mode,
                std::optional<ad::Value> attention = std::nullopt);

// Tape-free convenience for inspecting attention on fixed candidates.
BiAttention biattention(const Matrix& H_v, const Matrix& H_vp, DualMode mode,
                        const Matrix* attention = nullptr);

// Trees used to build one node's candidates: K for multi-sampling, one for
// multi-aggregating. Nodes without neighbors get self trees.
std::vector<NeighborhoodTree> candidate_trees(const Model& model, const Graph& g, NodeId v,
                                              Rng& rng);

// K x d candidate embeddings from pre-sampled trees.
ad::Value candidates_from_trees(ad::Tape& tape, Model& model, const Graph& g,
                                std::span<const NeighborhoodTree> trees);

// K independently sampled trees through the shared encoder.
ad::Value candidates_ms(ad::Tape& tape, Model& model, const Graph& g, NodeId v, Rng& rng);
// One sampled tree through each of the K encoder parameter sets; the bias
// table is shared.
ad::Value candidates_ma(ad::Tape& tape, Model& model, const Graph& g, NodeId v, Rng& rng);

// Candidates for v then v_p (in that RNG order), fused with the model's
// attention. For multi-aggregating `freeze_attention` routes A through
// stop_gradient.
DualOutput dual_encode(ad::Tape& tape, Model& model, const Graph& g, NodeId v, NodeId vp,
                       Rng& rng, bool freeze_attention = false);

}  // namespace cade
