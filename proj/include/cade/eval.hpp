#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cade/inference.hpp"
#include "cade/probe.hpp"
#include "cade/split.hpp"
#include "cade/training.hpp"

namespace cade {

enum class EdgeFeature { kHadamard, kConcat, kL1, kL2 };
const char* to_string(EdgeFeature f);
EdgeFeature parse_edge_feature(const std::string& s);

enum class Task { kNodeClassification, kLinkPrediction };
const char* to_string(Task t);
Task parse_task(const std::string& s);  // "nc" or "lp"

enum class Method { kCadeMs, kCadeMa, kSagb, kCadeGb, kRaw };
const char* to_string(Method m);
Method parse_method(const std::string& s);

// One row per edge built from its endpoint embeddings.
Matrix edge_features(const Matrix& emb, std::span<const Edge> edges, EdgeFeature kind);

struct NcResult {
  double micro_f1 = 0.0;
  std::size_t test_nodes = 0;
  std::vector<int> classes_missing_in_train;
};

// Probe trained on split.train_nodes, scored on split.unseen_nodes.
NcResult node_classification(const Matrix& emb, const LabelSet& labels, const NodeSplit& split,
                             const ProbeConfig& probe);

struct LpResult {
  double auc = 0.0;
  double ap = 0.0;
  std::size_t test_edges = 0;
};

// Embeddings must come from split.train_graph; a recorded graph hash that
// disagrees raises DataError.
LpResult link_prediction(const EmbeddingMatrix& emb, const EdgeSplit& split,
                         const ProbeConfig& probe, EdgeFeature feature = EdgeFeature::kHadamard);

struct EvalConfig {
  Task task = Task::kNodeClassification;
  double unseen_ratio = 0.3;       // node classification
  double lp_hide_fraction = 0.2;   // hidden edges
  double lp_unseen_ratio = 0.2;    // nodes withheld from encoder training
  bool lp_exclude_unseen = false;  // test edges may not touch unseen nodes
  EdgeFeature edge_feature = EdgeFeature::kHadamard;
  ProbeConfig probe;
  std::size_t repeats = 1;
};

// Graphs for one run: the encoder trains on `train_graph`, embeddings are
// generated on `embed_graph`.
struct PreparedSplit {
  NodeSplit nodes;
  std::optional<EdgeSplit> edges;
  Graph train_graph;
  Graph embed_graph;
};

PreparedSplit prepare_split(const Graph& g, const EvalConfig& cfg, std::uint64_t seed);

struct RunSpec {
  ModelConfig model;
  TrainConfig train;
  InferenceConfig infer;  // seed is taken from the run
  EvalConfig eval;
  std::uint64_t seed = 0;
};

// Applies the method's overrides (K, mode, bias) to a model configuration.
ModelConfig model_for_method(Method m, ModelConfig base);

struct RunMetrics {
  std::uint64_t seed = 0;
  double micro_f1 = 0.0;
  double auc = 0.0;
  double ap = 0.0;
  std::uint64_t checkpoint_hash = 0;
};

struct MetricReport {
  Method method = Method::kCadeMs;
  Task task = Task::kNodeClassification;
  std::vector<RunMetrics> runs;
  double mean = 0.0;  // micro-F1 or AUC
  double stddev = 0.0;
  double mean_ap = 0.0;
  double stddev_ap = 0.0;
};

// split -> train -> embed -> evaluate, repeated with seeds seed, seed+1, ...
MetricReport run_protocol(const Dataset& data, Method method, const RunSpec& spec,
                          std::ostream* log = nullptr);

std::uint64_t model_hash(const Model& model);

}  // namespace cade
