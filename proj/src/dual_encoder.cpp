#include "cade/dual_encoder.hpp"

#include "cade/error.hpp"

namespace cade {

ad::Value similarity(ad::Value H_v, ad::Value H_vp, DualMode mode,
                     std::optional<ad::Value> attention) {
  if (H_v.rows() != H_vp.rows() || H_v.cols() != H_vp.cols()) {
    throw ShapeError("bi-attention: candidate shapes " + shape_string(H_v.data()) + " and " +
                     shape_string(H_vp.data()) + " differ");
  }
  const std::size_t K = H_v.rows();
  if (mode == DualMode::kMultiSampling) return ad::matmul(H_v, ad::transpose(H_vp));

  if (!attention) throw ShapeError("bi-attention: multi-aggregating mode needs the vector A");
  if (attention->rows() != 1 || attention->cols() != 2 * H_v.cols()) {
    throw ShapeError("bi-attention: A must be [1x" + std::to_string(2 * H_v.cols()) + "], got " +
                     shape_string(attention->data()));
  }
  // Row (i * K + j) is [h_vi || h_vpj]; scores reshape to S[i][j].
  std::vector<std::int64_t> left(K * K), right(K * K);
  for (std::size_t i = 0; i < K; ++i) {
    for (std::size_t j = 0; j < K; ++j) {
      left[i * K + j] = static_cast<std::int64_t>(i);
      right[i * K + j] = static_cast<std::int64_t>(j);
    }
  }
  ad::Value pairs = ad::concat_cols(ad::gather_rows(H_v, left), ad::gather_rows(H_vp, right));
  return ad::reshape(ad::matmul(pairs, ad::transpose(*attention)), K, K);
}

DualOutput fuse(ad::Value H_v, ad::Value H_vp, DualMode mode, std::optional<ad::Value> attention) {
  DualOutput out;
  out.S = ad::softmax_flat(similarity(H_v, H_vp, mode, attention));
  out.a_v = ad::transpose(ad::row_sums(out.S));
  out.a_vp = ad::column_sums(out.S);
  out.z_v = ad::matmul(out.a_v, H_v);
  out.z_vp = ad::matmul(out.a_vp, H_vp);
  return out;
}

BiAttention biattention(const Matrix& H_v, const Matrix& H_vp, DualMode mode,
                        const Matrix* attention) {
  ad::Tape tape;
  std::optional<ad::Value> a;
  if (attention) a = tape.constant(*attention);
  return fuse(tape.constant(H_v), tape.constant(H_vp), mode, a).attention();
}

std::vector<NeighborhoodTree> candidate_trees(const Model& model, const Graph& g, NodeId v,
                                              Rng& rng) {
  const auto& sizes = model.config.encoder.sample_sizes;
  const std::size_t count =
      model.config.mode == DualMode::kMultiSampling ? model.config.num_candidates : 1;
  std::vector<NeighborhoodTree> trees;
  trees.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    trees.push_back(g.degree(v) == 0 ? self_tree(v, sizes) : sample_tree(g, v, sizes, rng));
  }
  return trees;
}

ad::Value candidates_from_trees(ad::Tape& tape, Model& model, const Graph& g,
                                std::span<const NeighborhoodTree> trees) {
  const auto& cfg = model.config.encoder;
  if (model.config.mode == DualMode::kMultiSampling) {
    return sagb_forward(tape, cfg, model.encoders.at(0), model.bias_ptr(), g, trees);
  }
  if (trees.size() != 1) throw ShapeError("multi-aggregating candidates take exactly one tree");
  std::vector<ad::Value> rows;
  rows.reserve(model.encoders.size());
  for (auto& enc : model.encoders) {
    rows.push_back(sagb_forward(tape, cfg, enc, model.bias_ptr(), g, trees));
  }
  return ad::concat_rows(rows);
}

ad::Value candidates_ms(ad::Tape& tape, Model& model, const Graph& g, NodeId v, Rng& rng) {
  if (model.config.mode != DualMode::kMultiSampling) throw ConfigError("candidates_ms on an MA model");
  const auto trees = candidate_trees(model, g, v, rng);
  return candidates_from_trees(tape, model, g, trees);
}

ad::Value candidates_ma(ad::Tape& tape, Model& model, const Graph& g, NodeId v, Rng& rng) {
  if (model.config.mode != DualMode::kMultiAggregating) throw ConfigError("candidates_ma on an MS model");
  const auto trees = candidate_trees(model, g, v, rng);
  return candidates_from_trees(tape, model, g, trees);
}

DualOutput dual_encode(ad::Tape& tape, Model& model, const Graph& g, NodeId v, NodeId vp,
                       Rng& rng, bool freeze_attention) {
  const auto trees_v = candidate_trees(model, g, v, rng);
  const auto trees_vp = candidate_trees(model, g, vp, rng);
  ad::Value H_v = candidates_from_trees(tape, model, g, trees_v);
  ad::Value H_vp = candidates_from_trees(tape, model, g, trees_vp);
  std::optional<ad::Value> a;
  if (model.config.mode == DualMode::kMultiAggregating) {
    a = tape.parameter(model.attention);
    if (freeze_attention) a = ad::stop_gradient(*a);
  }
  return fuse(H_v, H_vp, model.config.mode, a);
}

}  // namespace cade
