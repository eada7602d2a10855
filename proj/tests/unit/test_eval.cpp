#include <gtest/gtest.h>

#include <cmath>

#include "cade/error.hpp"
#include "cade/eval.hpp"
#include "cade/metrics.hpp"
#include "fixtures.hpp"

using cade::Matrix;

namespace {

double brute_force_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (!y[i] || y[j]) continue;
      total += 1.0;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  return wins / total;
}

}  // namespace

TEST(MicroF1, HandBuiltConfusionTable) {
  // 6 single-label predictions: 4 right, 2 wrong -> TP 4, FP 2, FN 2.
  const std::vector<std::vector<int>> truth = {{0}, {1}, {2}, {0}, {1}, {2}};
  const std::vector<std::vector<int>> pred = {{0}, {1}, {2}, {0}, {2}, {0}};
  const auto c = cade::pooled_counts(pred, truth);
  EXPECT_EQ(c.tp, 4u);
  EXPECT_EQ(c.fp, 2u);
  EXPECT_EQ(c.fn, 2u);
  EXPECT_DOUBLE_EQ(cade::micro_f1(pred, truth), 4.0 / (4.0 + 0.5 * 4.0));
}

TEST(MicroF1, MultiLabelPoolsAcrossClasses) {
  const std::vector<std::vector<int>> truth = {{0, 1}, {2}};
  const std::vector<std::vector<int>> pred = {{0}, {1, 2}};
  // TP 2 (0 and 2), FP 1 (1 on node 1), FN 1 (1 on node 0)
  EXPECT_DOUBLE_EQ(cade::micro_f1(pred, truth), 2.0 / (2.0 + 1.0));
}

TEST(Auc, PerfectScores) {
  const std::vector<double> s = {1, 1, 0, 0};
  const std::vector<int> y = {1, 1, 0, 0};
  EXPECT_EQ(cade::roc_auc(s, y), 1.0);
  EXPECT_EQ(cade::average_precision(s, y), 1.0);
}

TEST(Auc, OneInversionMatchesBruteForce) {
  const std::vector<double> s = {0.9, 0.3, 0.5, 0.1};
  const std::vector<int> y = {1, 1, 0, 0};
  EXPECT_DOUBLE_EQ(cade::roc_auc(s, y), brute_force_auc(s, y));
  EXPECT_DOUBLE_EQ(cade::roc_auc(s, y), 0.75);
}

TEST(Auc, RankStatisticEqualsBruteForceWithTies) {
  cade::Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 10 + rng.uniform_index(300);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.uniform_index(12));  // many ties
      y[i] = i < 3 ? static_cast<int>(i % 2) : static_cast<int>(rng.uniform_index(2));
    }
    EXPECT_NEAR(cade::roc_auc(s, y), brute_force_auc(s, y), 1e-12);
  }
}

TEST(Auc, RandomScoresNearHalf) {
  cade::Rng rng(5);
  std::vector<double> s(1000);
  std::vector<int> y(1000);
  for (std::size_t i = 0; i < 1000; ++i) {
    s[i] = rng.uniform();
    y[i] = i < 500;
  }
  EXPECT_NEAR(cade::roc_auc(s, y), 0.5, 0.05);
}

TEST(Ap, HandComputed) {
  // Ranked: + - + -  -> precision at hits 1 and 2/3, recall steps 0.5 each.
  const std::vector<double> s = {4, 3, 2, 1};
  const std::vector<int> y = {1, 0, 1, 0};
  EXPECT_DOUBLE_EQ(cade::average_precision(s, y), 0.5 * 1.0 + 0.5 * (2.0 / 3.0));
}

TEST(Ap, InvariantUnderMonotoneTransform) {
  cade::Rng rng(6);
  std::vector<double> s(200), t(200);
  std::vector<int> y(200);
  for (std::size_t i = 0; i < 200; ++i) {
    s[i] = rng.normal();
    t[i] = std::exp(3.0 * s[i]) + 7.0;
    y[i] = static_cast<int>(rng.uniform_index(2));
  }
  EXPECT_DOUBLE_EQ(cade::average_precision(s, y), cade::average_precision(t, y));
  EXPECT_DOUBLE_EQ(cade::roc_auc(s, y), cade::roc_auc(t, y));
}

TEST(Ranking, OneClassOnlyIsConfigError) {
  const std::vector<double> s = {1, 2};
  const std::vector<int> y = {1, 1};
  EXPECT_THROW(cade::roc_auc(s, y), cade::ConfigError);
}

TEST(EdgeFeatures, AllKinds) {
  const Matrix emb{{1, 2}, {3, -1}};
  const std::vector<cade::Edge> e = {{0, 1}};
  EXPECT_EQ(cade::edge_features(emb, e, cade::EdgeFeature::kHadamard), (Matrix{{3, -2}}));
  EXPECT_EQ(cade::edge_features(emb, e, cade::EdgeFeature::kConcat), (Matrix{{1, 2, 3, -1}}));
  EXPECT_EQ(cade::edge_features(emb, e, cade::EdgeFeature::kL1), (Matrix{{2, 3}}));
  EXPECT_EQ(cade::edge_features(emb, e, cade::EdgeFeature::kL2), (Matrix{{4, 9}}));
}

TEST(NodeClassification, SeparableEmbeddingsScorePerfectly) {
  const std::size_t n = 60;
  Matrix emb(n, 2);
  cade::LabelSet labels;
  labels.num_classes = 2;
  labels.classes.resize(n);
  cade::Rng rng(1);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % 2);
    emb(i, 0) = (c ? 3.0 : -3.0) + 0.3 * rng.normal();
    emb(i, 1) = rng.normal();
    labels.classes[i] = {c};
  }
  const auto g = fixtures::cycle(n, 1, 0);
  const auto split = cade::split_unseen_nodes(g, 0.3, 2);
  EXPECT_EQ(cade::node_classification(emb, labels, split, {}).micro_f1, 1.0);
}

TEST(NodeClassification, ShuffledLabelsAreNearChance) {
  const std::size_t n = 400;
  const Matrix emb = fixtures::gaussian(n, 4, 3);
  cade::LabelSet labels;
  labels.num_classes = 2;
  labels.classes.resize(n);
  cade::Rng rng(8);
  for (std::size_t i = 0; i < n; ++i) labels.classes[i] = {static_cast<int>(rng.uniform_index(2))};
  const auto g = fixtures::cycle(n, 1, 0);
  const auto split = cade::split_unseen_nodes(g, 0.5, 2);
  EXPECT_NEAR(cade::node_classification(emb, labels, split, {}).micro_f1, 0.5, 0.1);
}

TEST(NodeClassification, ReportsClassesMissingFromTraining) {
  const std::size_t n = 10;
  const Matrix emb = fixtures::gaussian(n, 2, 1);
  cade::LabelSet labels;
  labels.num_classes = 3;
  labels.classes.assign(n, {0});
  const auto g = fixtures::cycle(n, 1, 0);
  const auto split = cade::split_unseen_nodes(g, 0.3, 1);
  labels.classes[split.unseen_nodes[0]] = {2};
  const auto r = cade::node_classification(emb, labels, split, {});
  EXPECT_EQ(r.classes_missing_in_train, (std::vector<int>{1, 2}));
}

TEST(LinkPrediction, ProvenanceMismatchIsDataError) {
  const auto g = fixtures::random_connected(30, 0.2, 2, 1);
  const auto split = cade::split_edges_for_lp(g, 0.2, 1);
  cade::EmbeddingMatrix emb;
  emb.vectors = fixtures::gaussian(30, 2, 1);
  emb.graph_hash = g.content_hash();  // full graph, not the training graph
  EXPECT_THROW(cade::link_prediction(emb, split, {}), cade::DataError);
}

TEST(LinkPrediction, PlantedEmbeddingsRankHiddenEdgesHigh) {
  // Two dense blocks; embeddings are the block indicator.
  const auto g = fixtures::two_cliques(12, 2, 1);
  const auto split = cade::split_edges_for_lp(g, 0.2, 4);
  cade::EmbeddingMatrix emb;
  emb.vectors = Matrix(24, 2);
  for (std::size_t v = 0; v < 24; ++v) emb.vectors(v, v < 12 ? 0 : 1) = 1.0;
  emb.graph_hash = split.train_graph.content_hash();
  const auto r = cade::link_prediction(emb, split, {});
  EXPECT_GT(r.auc, 0.85);
  EXPECT_GT(r.ap, 0.8);
}

TEST(Protocol, RawFeaturesSkipTraining) {
  cade::Dataset data;
  data.graph = fixtures::two_cliques(15, 3, 2);
  Matrix x = data.graph.features();
  cade::LabelSet labels;
  labels.num_classes = 2;
  for (std::size_t v = 0; v < 30; ++v) {
    labels.classes.push_back({v < 15 ? 0 : 1});
    x(v, 0) = v < 15 ? -2.0 : 2.0;
  }
  data.graph = cade::Graph::from_edges(30, data.graph.edges(), x);
  data.labels = labels;
  cade::RunSpec spec;
  spec.eval.repeats = 2;
  const auto r = cade::run_protocol(data, cade::Method::kRaw, spec);
  ASSERT_EQ(r.runs.size(), 2u);
  EXPECT_EQ(r.runs[0].checkpoint_hash, 0u);
  EXPECT_EQ(r.mean, 1.0);
}

TEST(Protocol, MethodOverrides) {
  cade::ModelConfig base;
  base.num_candidates = 10;
  const auto sagb = cade::model_for_method(cade::Method::kSagb, base);
  EXPECT_EQ(sagb.num_candidates, 1u);
  EXPECT_FALSE(sagb.use_global_bias);
  const auto gb = cade::model_for_method(cade::Method::kCadeGb, base);
  EXPECT_EQ(gb.num_candidates, 1u);
  EXPECT_TRUE(gb.use_global_bias);
  EXPECT_EQ(cade::model_for_method(cade::Method::kCadeMa, base).mode, cade::DualMode::kMultiAggregating);
  EXPECT_EQ(cade::parse_method("cade-ms"), cade::Method::kCadeMs);
  EXPECT_THROW(cade::parse_method("graphsage"), cade::ConfigError);
}
