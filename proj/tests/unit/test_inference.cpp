#include <gtest/gtest.h>

#include <filesystem>

#include "cade/error.hpp"
#include "cade/inference.hpp"
#include "fixtures.hpp"

using cade::Matrix;
namespace fs = std::filesystem;

namespace {

cade::Model make_model(const cade::Graph& g, std::size_t L, std::vector<cade::NodeId> bias_nodes,
                       cade::DualMode mode = cade::DualMode::kMultiSampling, std::size_t K = 3) {
  cade::ModelConfig mc;
  mc.encoder.feature_dim = g.feature_dim();
  mc.encoder.embed_dim = 4;
  mc.encoder.sample_sizes = std::vector<std::size_t>(L, 3);
  mc.mode = mode;
  mc.num_candidates = K;
  cade::Model m = cade::Model::create(mc, g.num_nodes(), bias_nodes, 21);
  cade::Rng rng(3);
  for (double& b : m.bias->table.value().values()) b = rng.normal();
  return m;
}

std::vector<cade::NodeId> all_nodes(const cade::Graph& g) {
  std::vector<cade::NodeId> v(g.num_nodes());
  for (cade::NodeId i = 0; i < g.num_nodes(); ++i) v[i] = i;
  return v;
}

}  // namespace

TEST(GenerateEmbeddings, ShapeCoverageAndFiniteness) {
  const auto g = fixtures::random_connected(20, 0.1, 3, 1);
  const auto model = make_model(g, 2, all_nodes(g));
  cade::InferenceConfig cfg;
  cfg.walks = {100, 4};
  cfg.seed = 4;
  const auto emb = cade::generate_embeddings(g, model, cfg);
  EXPECT_EQ(emb.vectors.rows(), 20u);
  EXPECT_EQ(emb.vectors.cols(), 4u);
  for (cade::NodeId v = 0; v < 20; ++v) {
    EXPECT_GE(emb.coverage[v], 1u);
    EXPECT_FALSE(emb.fallback[v]);
  }
  EXPECT_TRUE(emb.vectors.all_finite());
  EXPECT_EQ(emb.graph_hash, g.content_hash());
}

TEST(GenerateEmbeddings, SinglePairRowEqualsThatDualEncoding) {
  // Path 0-1: one walk of length 1 from each node gives pairs (0,1), (1,0).
  const auto g = cade::Graph::from_edges(2, std::vector<cade::Edge>{{0, 1}}, fixtures::gaussian(2, 3, 1));
  auto model = make_model(g, 1, all_nodes(g));
  cade::InferenceConfig cfg;
  cfg.walks = {1, 1};
  cfg.seed = 9;
  const auto emb = cade::generate_embeddings(g, model, cfg);
  EXPECT_EQ(emb.coverage[0], 2u);  // once as v, once as v_p
  cade::Rng r0 = cade::substream(9, "infer-pair", 0);
  cade::Rng r1 = cade::substream(9, "infer-pair", 1);
  cade::ad::Tape t;
  const auto a = cade::dual_encode(t, model, g, 0, 1, r0);
  const auto b = cade::dual_encode(t, model, g, 1, 0, r1);
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_NEAR(emb.vectors(0, c), 0.5 * (a.z_v.data()[c] + b.z_vp.data()[c]), 1e-15);
  }
}

TEST(GenerateEmbeddings, IsolatedNodesUseFallbackAndAreFlagged) {
  const auto g = cade::Graph::from_edges(4, std::vector<cade::Edge>{{0, 1}, {1, 2}}, fixtures::gaussian(4, 3, 2));
  const auto model = make_model(g, 2, {0, 1, 2});
  cade::InferenceConfig cfg;
  cfg.walks = {3, 2};
  const auto emb = cade::generate_embeddings(g, model, cfg);
  EXPECT_TRUE(emb.fallback[3]);
  EXPECT_EQ(emb.coverage[3], 0u);
  EXPECT_TRUE(emb.vectors.all_finite());
}

TEST(GenerateEmbeddings, ThreadCountDoesNotChangeResult) {
  const auto g = fixtures::random_connected(15, 0.2, 3, 3);
  const auto model = make_model(g, 2, all_nodes(g), cade::DualMode::kMultiAggregating, 2);
  cade::InferenceConfig cfg;
  cfg.walks = {4, 3};
  const auto a = cade::generate_embeddings(g, model, cfg);
  cfg.threads = 4;
  const auto b = cade::generate_embeddings(g, model, cfg);
  EXPECT_EQ(a.vectors, b.vectors);
  EXPECT_EQ(a.coverage, b.coverage);
}

TEST(GenerateEmbeddings, MirroredComponentsGetEqualEmbeddings) {
  // Two copies of a 4-cycle with identical features and no bias table: the
  // symmetric pair (0,1) vs (4,5) replays the same draws when seeds match.
  const auto base = fixtures::cycle(4, 3, 5);
  std::vector<cade::Edge> edges = base.edges();
  for (const auto& e : base.edges()) edges.push_back({e.u + 4, e.v + 4});
  Matrix x(8, 3);
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 3; ++c) x(r, c) = base.features()(r % 4, c);
  const auto g = cade::Graph::from_edges(8, edges, x);
  cade::ModelConfig mc;
  mc.encoder.feature_dim = 3;
  mc.encoder.embed_dim = 4;
  mc.encoder.sample_sizes = {2, 2};
  mc.use_global_bias = false;
  mc.num_candidates = 2;
  const auto model = cade::Model::create(mc, 8, {}, 1);
  cade::ad::Tape t;
  cade::Rng r1(77), r2(77);
  const auto a = cade::dual_encode(t, const_cast<cade::Model&>(model), g, 0, 1, r1);
  const auto b = cade::dual_encode(t, const_cast<cade::Model&>(model), g, 4, 5, r2);
  EXPECT_LT(cade::max_abs_diff(a.z_v.data(), b.z_v.data()), 1e-15);
  EXPECT_LT(cade::max_abs_diff(a.z_vp.data(), b.z_vp.data()), 1e-15);
}

TEST(GenerateEmbeddings, MeanOverHalvesMergesToOnePassMean) {
  const auto g = fixtures::random_connected(10, 0.2, 3, 4);
  const auto model = make_model(g, 2, all_nodes(g));
  cade::InferenceConfig cfg;
  cfg.walks = {6, 3};
  cfg.seed = 2;
  const auto emb = cade::generate_embeddings(g, model, cfg);

  // Recompute node 0's encodings pair by pair and merge two half-means.
  const auto walks = cade::random_walks(g, cfg.walks, cade::derive_seed(cfg.seed, "infer-walks"));
  const auto pairs = cade::positive_pairs(walks).pairs;
  std::vector<Matrix> rows;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].v != 0 && pairs[i].vp != 0) continue;
    cade::Rng rng = cade::substream(cfg.seed, "infer-pair", i);
    cade::ad::Tape t;
    const auto d = cade::dual_encode(t, const_cast<cade::Model&>(model), g, pairs[i].v, pairs[i].vp, rng);
    if (pairs[i].v == 0) rows.push_back(d.z_v.data());
    if (pairs[i].vp == 0) rows.push_back(d.z_vp.data());
  }
  ASSERT_EQ(rows.size(), emb.coverage[0]);
  const std::size_t h = rows.size() / 2;
  for (std::size_t c = 0; c < 4; ++c) {
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < h; ++i) m1 += rows[i][c];
    for (std::size_t i = h; i < rows.size(); ++i) m2 += rows[i][c];
    m1 /= static_cast<double>(h);
    m2 /= static_cast<double>(rows.size() - h);
    const double merged = (m1 * h + m2 * (rows.size() - h)) / static_cast<double>(rows.size());
    EXPECT_NEAR(emb.vectors(0, c), merged, 1e-12);
  }
}

TEST(GenerateEmbeddings, FeatureDimMismatchIsConfigError) {
  const auto g = fixtures::cycle(5, 3, 1);
  const auto model = make_model(fixtures::cycle(5, 2, 1), 1, {});
  EXPECT_THROW(cade::generate_embeddings(g, model, {}), cade::ConfigError);
}

TEST(EmbedSingle, OnePairEqualsOneDualEncoding) {
  const auto g = fixtures::cycle(6, 3, 1);
  auto model = make_model(g, 2, all_nodes(g));
  const auto z = cade::embed_single(2, g, model, 1, 13, 1);
  const auto walks = cade::walks_from(g, 2, 1, 1, cade::derive_seed(13, "single-walks"));
  cade::Rng rng = cade::substream(13, "single-pair", 0);
  cade::ad::Tape t;
  const auto d = cade::dual_encode(t, model, g, 2, walks[0][1], rng);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(z[c], d.z_v.data()[c]);
}

TEST(EmbedSingle, IsolatedNodeNeedsOptIn) {
  const auto g = cade::Graph::from_edges(3, std::vector<cade::Edge>{{0, 1}}, fixtures::gaussian(3, 2, 1));
  const auto model = make_model(g, 1, {0, 1});
  EXPECT_THROW(cade::embed_single(2, g, model, 4, 1), cade::DataError);
  EXPECT_EQ(cade::embed_single(2, g, model, 4, 1, 4, true).size(), 4u);
}

TEST(EmbedSingle, UnseenTwinOfTrainedNodeMatchesWithOneLayer) {
  // Edges 0-1 and 3-2 are mirror images with equal features; only 0 and 1
  // have bias rows. With L=1 no bias is applied, so the embeddings agree.
  const std::vector<cade::Edge> edges = {{0, 1}, {2, 3}};
  Matrix x{{1, 2}, {3, 4}, {3, 4}, {1, 2}};
  const auto g = cade::Graph::from_edges(4, edges, x);
  const auto model = make_model(g, 1, {0, 1});
  EXPECT_EQ(cade::embed_single(0, g, model, 4, 5), cade::embed_single(3, g, model, 4, 5));
}

TEST(EmbedSingle, MorePairsReduceVarianceAcrossSeeds) {
  const auto g = fixtures::random_connected(30, 0.1, 3, 6);
  const auto model = make_model(g, 2, all_nodes(g));
  auto spread = [&](std::size_t n_pairs) {
    std::vector<std::vector<double>> outs;
    for (std::uint64_t s = 0; s < 30; ++s) outs.push_back(cade::embed_single(5, g, model, n_pairs, s));
    double var = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
      double m = 0.0;
      for (const auto& o : outs) m += o[c] / 30.0;
      for (const auto& o : outs) var += (o[c] - m) * (o[c] - m);
    }
    return var;
  };
  EXPECT_GT(spread(1), spread(64));
}

TEST(EmbeddingFiles, RoundTripWithSidecar) {
  const auto g = cade::Graph::from_edges(4, std::vector<cade::Edge>{{0, 1}, {1, 2}}, fixtures::gaussian(4, 3, 2));
  const auto model = make_model(g, 2, {0, 1, 2});
  const auto emb = cade::generate_embeddings(g, model, {});
  const fs::path p = fs::temp_directory_path() / "cade_unit_emb.bin";
  cade::save_embeddings(p, emb);
  const auto back = cade::load_embeddings(p);
  EXPECT_LT(cade::max_abs_diff(back.vectors, emb.vectors), 1e-6);
  EXPECT_EQ(back.coverage, emb.coverage);
  EXPECT_EQ(back.fallback, emb.fallback);
  EXPECT_EQ(back.graph_hash, emb.graph_hash);
}
