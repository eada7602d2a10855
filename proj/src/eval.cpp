#include "cade/eval.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "cade/error.hpp"
#include "cade/metrics.hpp"

namespace cade {

const char* to_string(EdgeFeature f) {
  switch (f) {
    case EdgeFeature::kHadamard: return "hadamard";
    case EdgeFeature::kConcat: return "concat";
    case EdgeFeature::kL1: return "l1";
    case EdgeFeature::kL2: return "l2";
  }
  return "?";
}

EdgeFeature parse_edge_feature(const std::string& s) {
  if (s == "hadamard") return EdgeFeature::kHadamard;
  if (s == "concat") return EdgeFeature::kConcat;
  if (s == "l1") return EdgeFeature::kL1;
  if (s == "l2") return EdgeFeature::kL2;
  throw ConfigError("unknown edge feature '" + s + "' (hadamard|concat|l1|l2)");
}

const char* to_string(Task t) { return t == Task::kNodeClassification ? "nc" : "lp"; }

Task parse_task(const std::string& s) {
  if (s == "nc") return Task::kNodeClassification;
  if (s == "lp") return Task::kLinkPrediction;
  throw ConfigError("unknown task '" + s + "' (nc|lp)");
}

const char* to_string(Method m) {
  switch (m) {
    case Method::kCadeMs: return "cade-ms";
    case Method::kCadeMa: return "cade-ma";
    case Method::kSagb: return "sagb";
    case Method::kCadeGb: return "cade-gb";
    case Method::kRaw: return "raw";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  for (Method m : {Method::kCadeMs, Method::kCadeMa, Method::kSagb, Method::kCadeGb, Method::kRaw})
    if (s == to_string(m)) return m;
  throw ConfigError("unknown method '" + s + "' (cade-ms|cade-ma|sagb|cade-gb|raw)");
}

Matrix edge_features(const Matrix& emb, std::span<const Edge> edges, EdgeFeature kind) {
  const std::size_t d = emb.cols();
  Matrix out(edges.size(), kind == EdgeFeature::kConcat ? 2 * d : d);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i].u >= emb.rows() || edges[i].v >= emb.rows()) {
      throw ShapeError("edge endpoint outside the embedding matrix");
    }
    const auto a = emb.row(edges[i].u);
    const auto b = emb.row(edges[i].v);
    auto o = out.row(i);
    for (std::size_t c = 0; c < d; ++c) {
      switch (kind) {
        case EdgeFeature::kHadamard: o[c] = a[c] * b[c]; break;
        case EdgeFeature::kConcat: o[c] = a[c]; o[d + c] = b[c]; break;
        case EdgeFeature::kL1: o[c] = std::abs(a[c] - b[c]); break;
        case EdgeFeature::kL2: o[c] = (a[c] - b[c]) * (a[c] - b[c]); break;
      }
    }
  }
  return out;
}

NcResult node_classification(const Matrix& emb, const LabelSet& labels, const NodeSplit& split,
                             const ProbeConfig& probe) {
  if (labels.classes.size() != emb.rows()) {
    throw DataError("labels cover " + std::to_string(labels.classes.size()) +
                    " nodes, embeddings have " + std::to_string(emb.rows()) + " rows");
  }
  if (split.train_nodes.empty() || split.unseen_nodes.empty()) throw DataError("empty node split");
  const std::size_t k = labels.num_classes;
  Matrix targets(split.train_nodes.size(), k);
  std::vector<bool> seen(k, false);
  for (std::size_t i = 0; i < split.train_nodes.size(); ++i) {
    for (int c : labels.classes[split.train_nodes[i]]) {
      targets(i, static_cast<std::size_t>(c)) = 1.0;
      seen[static_cast<std::size_t>(c)] = true;
    }
  }
  NcResult r;
  for (std::size_t c = 0; c < k; ++c)
    if (!seen[c]) r.classes_missing_in_train.push_back(static_cast<int>(c));

  const ProbeModel model = train_probe(gather(emb, split.train_nodes), targets, probe);
  const auto predicted = predict_classes(model, gather(emb, split.unseen_nodes), labels.multi_label);
  std::vector<std::vector<int>> truth;
  truth.reserve(split.unseen_nodes.size());
  for (NodeId v : split.unseen_nodes) truth.push_back(labels.classes[v]);
  r.micro_f1 = micro_f1(predicted, truth);
  r.test_nodes = truth.size();
  return r;
}

LpResult link_prediction(const EmbeddingMatrix& emb, const EdgeSplit& split,
                         const ProbeConfig& probe, EdgeFeature feature) {
  if (emb.graph_hash != 0 && emb.graph_hash != split.train_graph.content_hash()) {
    throw DataError("embeddings were not generated from this split's training graph (hash " +
                    hex64(emb.graph_hash) + " vs " + hex64(split.train_graph.content_hash()) + ")");
  }
  std::vector<Edge> train_edges = split.train_pos;
  train_edges.insert(train_edges.end(), split.train_neg.begin(), split.train_neg.end());
  Matrix targets(train_edges.size(), 1);
  for (std::size_t i = 0; i < split.train_pos.size(); ++i) targets[i] = 1.0;
  const ProbeModel model = train_probe(edge_features(emb.vectors, train_edges, feature), targets, probe);

  std::vector<Edge> test_edges = split.test_pos;
  test_edges.insert(test_edges.end(), split.test_neg.begin(), split.test_neg.end());
  const Matrix scores = model.logits(edge_features(emb.vectors, test_edges, feature));
  std::vector<int> labels(test_edges.size(), 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(split.test_pos.size()), 1);
  LpResult r;
  r.auc = roc_auc(scores.values(), labels);
  r.ap = average_precision(scores.values(), labels);
  r.test_edges = test_edges.size();
  return r;
}

PreparedSplit prepare_split(const Graph& g, const EvalConfig& cfg, std::uint64_t seed) {
  PreparedSplit p;
  if (cfg.task == Task::kNodeClassification) {
    p.nodes = split_unseen_nodes(g, cfg.unseen_ratio, derive_seed(seed, "node-split"));
    p.train_graph = training_view(g, p.nodes.unseen_nodes);
    p.embed_graph = g;
    return p;
  }
  p.nodes = split_unseen_nodes(g, cfg.lp_unseen_ratio, derive_seed(seed, "node-split"));
  EdgeSplitOptions opt;
  opt.hide_fraction = cfg.lp_hide_fraction;
  opt.seed = derive_seed(seed, "edge-split");
  if (cfg.lp_exclude_unseen) opt.excluded_endpoints = p.nodes.unseen_nodes;
  p.edges = split_edges_for_lp(g, opt);
  p.train_graph = training_view(p.edges->train_graph, p.nodes.unseen_nodes);
  p.embed_graph = p.edges->train_graph;
  return p;
}

ModelConfig model_for_method(Method m, ModelConfig base) {
  switch (m) {
    case Method::kCadeMs: base.mode = DualMode::kMultiSampling; break;
    case Method::kCadeMa: base.mode = DualMode::kMultiAggregating; break;
    case Method::kSagb:
      base.mode = DualMode::kMultiSampling;
      base.num_candidates = 1;
      base.use_global_bias = false;
      break;
    case Method::kCadeGb:
      base.mode = DualMode::kMultiSampling;
      base.num_candidates = 1;
      base.use_global_bias = true;
      break;
    case Method::kRaw: break;
  }
  return base;
}

std::uint64_t model_hash(const Model& model) {
  std::uint64_t h = fnv1a({});
  for (ad::Parameter* p : const_cast<Model&>(model).parameters()) {
    const auto& v = p->value().values();
    h = fnv1a({reinterpret_cast<const unsigned char*>(p->name().data()), p->name().size()}, h);
    h = fnv1a({reinterpret_cast<const unsigned char*>(v.data()), v.size() * sizeof(double)}, h);
  }
  return h;
}

namespace {

void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  sd = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
}

}  // namespace

MetricReport run_protocol(const Dataset& data, Method method, const RunSpec& spec, std::ostream* log) {
  if (spec.eval.repeats < 1) throw ConfigError("eval.repeats must be >= 1");
  if (spec.eval.task == Task::kNodeClassification && !data.labels) {
    throw DataError("node classification needs a label file");
  }
  MetricReport report;
  report.method = method;
  report.task = spec.eval.task;
  std::vector<double> primary, ap;
  for (std::size_t r = 0; r < spec.eval.repeats; ++r) {
    RunMetrics m;
    m.seed = spec.seed + r;
    const PreparedSplit split = prepare_split(data.graph, spec.eval, m.seed);

    EmbeddingMatrix emb;
    if (method == Method::kRaw) {
      emb.vectors = split.embed_graph.features();
    } else {
      // Only graph structure and features reach training.
      TrainConfig tc = spec.train;
      tc.seed = m.seed;
      tc.checkpoint_dir.clear();
      tc.dump_walks.clear();
      FitResult fit_result = fit(split.train_graph, model_for_method(method, spec.model), tc, nullptr);
      m.checkpoint_hash = model_hash(fit_result.model);
      InferenceConfig ic = spec.infer;
      ic.seed = derive_seed(m.seed, "infer");
      emb = generate_embeddings(split.embed_graph, fit_result.model, ic);
    }

    ProbeConfig pc = spec.eval.probe;
    pc.seed = derive_seed(m.seed, "probe");
    if (spec.eval.task == Task::kNodeClassification) {
      m.micro_f1 = node_classification(emb.vectors, *data.labels, split.nodes, pc).micro_f1;
      primary.push_back(m.micro_f1);
    } else {
      const LpResult lp = link_prediction(emb, *split.edges, pc, spec.eval.edge_feature);
      m.auc = lp.auc;
      m.ap = lp.ap;
      primary.push_back(m.auc);
      ap.push_back(m.ap);
    }
    if (log) {
      *log << to_string(method) << " seed=" << m.seed;
      if (spec.eval.task == Task::kNodeClassification) *log << " micro_f1=" << m.micro_f1 << '\n';
      else *log << " auc=" << m.auc << " ap=" << m.ap << '\n';
    }
    report.runs.push_back(m);
  }
  mean_std(primary, report.mean, report.stddev);
  if (!ap.empty()) mean_std(ap, report.mean_ap, report.stddev_ap);
  return report;
}

}  // namespace cade
