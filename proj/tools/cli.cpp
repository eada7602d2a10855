#include "cade/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "cade/config.hpp"
#include "cade/error.hpp"
#include "cade/gradcheck_suite.hpp"
#include "cade/metrics.hpp"

namespace cade {

namespace {

using nlohmann::ordered_json;

struct Shortcut {
  const char* flag;
  const char* key;
  const char* help;
};

const Shortcut kShortcuts[] = {
    {"--mode", "train.mode", "ms or ma"},
    {"--K", "model.K", "candidates per node"},
    {"--L", "model.L", "encoder depth"},
    {"--sizes", "model.sizes", "neighbors per layer, e.g. 20,10"},
    {"--d", "model.d", "embedding size"},
    {"--aggregator", "model.aggregator", "mean or maxpool"},
    {"--lr", "train.lr", "learning rate"},
    {"--epochs", "train.epochs", "training epochs"},
    {"--batch-size", "train.batch_size", "pairs per step"},
    {"--negatives", "train.negatives", "negatives per pair"},
    {"--pairs-per-epoch", "train.pairs_per_epoch", "cap on pairs per epoch (0 = all)"},
    {"--walks", "sampling.walks", "walks per node"},
    {"--walk-length", "sampling.length", "walk length"},
    {"--infer-walks", "infer.walks", "walks per node at inference (0 = same as training)"},
    {"--seed", "seed", "root seed"},
    {"--threads", "threads", "worker threads"},
    {"--task", "eval.task", "nc or lp"},
    {"--method", "eval.method", "cade-ms, cade-ma, sagb, cade-gb or raw"},
    {"--unseen-ratio", "eval.unseen_ratio", "fraction of nodes held out (nc)"},
    {"--hide-fraction", "eval.lp_hide_fraction", "fraction of edges hidden (lp)"},
    {"--edge-feature", "eval.edge_feature", "hadamard, concat, l1 or l2"},
    {"--repeats", "eval.repeats", "protocol repeats"},
    {"--edges", "paths.edges", "edge list file"},
    {"--features", "paths.features", "feature matrix file"},
    {"--labels", "paths.labels", "label file"},
    {"--checkpoint", "paths.checkpoint", "checkpoint directory"},
    {"--embeddings", "paths.embeddings", "embedding matrix file"},
    {"--report", "paths.report", "report file"},
    {"--log", "paths.log", "training log file (default stdout)"},
    {"--dump-walks", "paths.dump_walks", "write the first epoch's walks here"},
};

struct CommonOptions {
  std::string config_file;
  std::vector<std::string> assignments;
  std::map<std::string, std::string> shortcut_values;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config_file, "key = value config file");
  cmd->add_option("--set", o.assignments, "override key=value (repeatable)");
  for (const Shortcut& s : kShortcuts) {
    cmd->add_option(s.flag, o.shortcut_values[s.key], s.help)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }
}

ConfigMap build_map(const CommonOptions& o, const CLI::App* cmd) {
  ConfigMap map;
  if (!o.config_file.empty()) map.merge_file(o.config_file);
  for (const auto& a : o.assignments) map.merge_assignment(a);
  for (const Shortcut& s : kShortcuts) {
    if (cmd->count(s.flag) > 0) map.set(s.key, o.shortcut_values.at(s.key));
  }
  return map;
}

void require(const std::filesystem::path& p, const char* key) {
  if (p.empty()) throw ConfigError(std::string(key) + " is required");
}

Graph load_input_graph(const RunConfig& rc) {
  require(rc.paths.edges, "paths.edges");
  require(rc.paths.features, "paths.features");
  return load_graph(rc.paths.edges, rc.paths.features);
}

Dataset load_input_dataset(const RunConfig& rc) {
  require(rc.paths.edges, "paths.edges");
  require(rc.paths.features, "paths.features");
  std::optional<std::filesystem::path> labels;
  if (!rc.paths.labels.empty()) labels = rc.paths.labels;
  return load_dataset(rc.paths.edges, rc.paths.features, labels);
}

void echo_config(std::ostream& out, const ConfigMap& map) {
  std::istringstream lines(map.echo());
  std::string line;
  while (std::getline(lines, line)) out << "# " << line << '\n';
}

ordered_json config_json(const ConfigMap& map) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : map.values())
    if (k.rfind("paths.", 0) != 0) j[k] = v;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f << text;
}

int cmd_train(const ConfigMap& map, std::ostream& out) {
  const RunConfig rc = resolve(map);
  require(rc.paths.checkpoint, "paths.checkpoint");
  echo_config(out, map);
  const Graph g = load_input_graph(rc);
  const PreparedSplit split = prepare_split(g, rc.spec.eval, rc.spec.seed);
  ModelConfig mc = rc.spec.model;
  mc.encoder.feature_dim = g.feature_dim();
  TrainConfig tc = rc.spec.train;
  tc.checkpoint_dir = rc.paths.checkpoint;

  std::ofstream log_file;
  std::ostream* log = &out;
  if (!rc.paths.log.empty()) {
    if (rc.paths.log.has_parent_path()) std::filesystem::create_directories(rc.paths.log.parent_path());
    log_file.open(rc.paths.log);
    if (!log_file) throw DataError("cannot write " + rc.paths.log.string());
    log = &log_file;
  }
  const FitResult result = fit(split.train_graph, mc, tc, log);
  write_text(rc.paths.checkpoint / "config.txt", map.echo(false));
  out << "checkpoint " << rc.paths.checkpoint.string() << " hash "
      << hex64(directory_hash(rc.paths.checkpoint)) << '\n';
  out << "final_loss " << result.log.back().mean_loss << '\n';
  return 0;
}

int cmd_embed(const ConfigMap& map, std::ostream& out) {
  const RunConfig rc = resolve(map);
  require(rc.paths.checkpoint, "paths.checkpoint");
  require(rc.paths.embeddings, "paths.embeddings");
  echo_config(out, map);
  const Graph g = load_input_graph(rc);
  const Model model = load_checkpoint(rc.paths.checkpoint);
  const PreparedSplit split = prepare_split(g, rc.spec.eval, rc.spec.seed);
  InferenceConfig ic = rc.spec.infer;
  ic.seed = derive_seed(rc.spec.seed, "infer");
  const EmbeddingMatrix emb = generate_embeddings(split.embed_graph, model, ic);
  save_embeddings(rc.paths.embeddings, emb);
  std::size_t fallback = 0;
  for (bool f : emb.fallback) fallback += f ? 1 : 0;
  out << "embeddings " << rc.paths.embeddings.string() << " rows " << emb.vectors.rows() << " dim "
      << emb.vectors.cols() << " fallback_rows " << fallback << '\n';
  return 0;
}

ordered_json report_json(const MetricReport& r, const ConfigMap& map, std::uint64_t checkpoint_hash) {
  ordered_json j;
  j["method"] = to_string(r.method);
  j["task"] = to_string(r.task);
  j["seed"] = map.get("seed");
  if (checkpoint_hash) j["checkpoint_hash"] = hex64(checkpoint_hash);
  ordered_json runs = ordered_json::array();
  for (const RunMetrics& m : r.runs) {
    ordered_json x;
    x["seed"] = m.seed;
    if (r.task == Task::kNodeClassification) {
      x["micro_f1"] = m.micro_f1;
    } else {
      x["auc"] = m.auc;
      x["ap"] = m.ap;
    }
    if (m.checkpoint_hash) x["model_hash"] = hex64(m.checkpoint_hash);
    runs.push_back(x);
  }
  j["runs"] = runs;
  if (r.task == Task::kNodeClassification) {
    j["micro_f1_mean"] = r.mean;
    j["micro_f1_std"] = r.stddev;
  } else {
    j["auc_mean"] = r.mean;
    j["auc_std"] = r.stddev;
    j["ap_mean"] = r.mean_ap;
    j["ap_std"] = r.stddev_ap;
  }
  j["config"] = config_json(map);
  return j;
}

void print_summary(std::ostream& out, const MetricReport& r) {
  if (r.task == Task::kNodeClassification) {
    out << to_string(r.method) << " micro_f1 " << r.mean << " +- " << r.stddev << '\n';
  } else {
    out << to_string(r.method) << " auc " << r.mean << " +- " << r.stddev << " ap " << r.mean_ap
        << " +- " << r.stddev_ap << '\n';
  }
}

int cmd_eval(const ConfigMap& map, std::ostream& out) {
  const RunConfig rc = resolve(map);
  echo_config(out, map);
  const Dataset data = load_input_dataset(rc);
  MetricReport report;
  std::uint64_t ckpt_hash = 0;
  if (!rc.paths.checkpoint.empty() && std::filesystem::exists(rc.paths.checkpoint)) {
    ckpt_hash = directory_hash(rc.paths.checkpoint);
  }
  if (!rc.paths.embeddings.empty()) {
    // Score precomputed embeddings on the split derived from the seed.
    const EmbeddingMatrix emb = load_embeddings(rc.paths.embeddings);
    if (emb.vectors.rows() != data.graph.num_nodes()) {
      throw DataError("embeddings have " + std::to_string(emb.vectors.rows()) + " rows, graph has " +
                      std::to_string(data.graph.num_nodes()) + " nodes");
    }
    const PreparedSplit split = prepare_split(data.graph, rc.spec.eval, rc.spec.seed);
    ProbeConfig pc = rc.spec.eval.probe;
    pc.seed = derive_seed(rc.spec.seed, "probe");
    report.method = rc.method;
    report.task = rc.spec.eval.task;
    RunMetrics m;
    m.seed = rc.spec.seed;
    if (report.task == Task::kNodeClassification) {
      if (!data.labels) throw DataError("node classification needs paths.labels");
      const NcResult nc = node_classification(emb.vectors, *data.labels, split.nodes, pc);
      for (int c : nc.classes_missing_in_train)
        out << "warning: class " << c << " has no training node\n";
      m.micro_f1 = report.mean = nc.micro_f1;
    } else {
      const LpResult lp = link_prediction(emb, *split.edges, pc, rc.spec.eval.edge_feature);
      m.auc = report.mean = lp.auc;
      m.ap = report.mean_ap = lp.ap;
    }
    report.runs.push_back(m);
  } else {
    report = run_protocol(data, rc.method, rc.spec, &out);
  }
  print_summary(out, report);
  if (!rc.paths.report.empty()) write_text(rc.paths.report, report_json(report, map, ckpt_hash).dump(2) + "\n");
  return 0;
}

int cmd_gradcheck(const ConfigMap& map, std::ostream& out) {
  const RunConfig rc = resolve(map);
  const GradCheckReport r = run_gradcheck_suite(rc.spec.seed == 0 ? 7 : rc.spec.seed);
  for (const auto& e : r.entries) {
    out << e.name << '\t' << e.result.max_rel_error << '\t' << e.result.coordinates << '\t'
        << e.result.parameter << '\n';
  }
  const bool ok = r.worst < 1e-4;
  out << "worst " << r.worst << " (" << r.worst_name << ") " << (ok ? "ok" : "FAILED") << '\n';
  return ok ? 0 : 1;
}

int cmd_sweep(const ConfigMap& map, const std::string& key, const std::vector<std::string>& values,
              std::ostream& out) {
  if (values.empty()) throw ConfigError("sweep needs --values");
  map.get(key);  // rejects unknown keys up front
  const Dataset data = load_input_dataset(resolve(map));
  out << key << "\tmean\tstd\n";
  for (const std::string& v : values) {
    ConfigMap m = map;
    m.set(key, v);
    const RunConfig rc = resolve(m);
    const MetricReport r = run_protocol(data, rc.method, rc.spec);
    out << v << '\t' << r.mean << '\t' << r.stddev << '\n';
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unsupervised inductive node embeddings with dual encoding"};
  app.require_subcommand(1);
  CommonOptions train_o, embed_o, eval_o, grad_o, sweep_o;
  auto* train = app.add_subcommand("train", "train an encoder and write a checkpoint");
  auto* embed = app.add_subcommand("embed", "embed every node with a trained checkpoint");
  auto* eval = app.add_subcommand("eval", "node classification or link prediction");
  auto* grad = app.add_subcommand("gradcheck", "finite-difference gradient checks");
  auto* sweep = app.add_subcommand("sweep", "run the protocol for several values of one key");
  add_common(train, train_o);
  add_common(embed, embed_o);
  add_common(eval, eval_o);
  add_common(grad, grad_o);
  add_common(sweep, sweep_o);
  std::string sweep_key;
  std::vector<std::string> sweep_values;
  sweep->add_option("--key", sweep_key, "config key to vary")->required();
  sweep->add_option("--values", sweep_values, "values to try")->delimiter(',')->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train) return cmd_train(build_map(train_o, train), out);
    if (*embed) return cmd_embed(build_map(embed_o, embed), out);
    if (*eval) return cmd_eval(build_map(eval_o, eval), out);
    if (*grad) return cmd_gradcheck(build_map(grad_o, grad), out);
    if (*sweep) return cmd_sweep(build_map(sweep_o, sweep), sweep_key, sweep_values, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace cade
