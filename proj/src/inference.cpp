#include "cade/inference.hpp"

#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "cade/error.hpp"
#include "cade/matrix_io.hpp"

namespace cade {

namespace {

// Forward-only passes never write to parameters, so a shared model can be
// used from several threads.
Model& mutable_model(const Model& m) { return const_cast<Model&>(m); }

void check_model(const Graph& g, const Model& model) {
  if (model.encoders.empty()) throw ConfigError("model has no encoder weights");
  if (g.feature_dim() != model.config.encoder.feature_dim) {
    throw ConfigError("graph features have " + std::to_string(g.feature_dim()) +
                      " columns, checkpoint expects " +
                      std::to_string(model.config.encoder.feature_dim));
  }
}

struct PairEncoding {
  Matrix z_v;
  Matrix z_vp;
};

PairEncoding encode_pair(const Graph& g, const Model& model, PositivePair p, Rng& rng) {
  ad::Tape tape;
  DualOutput d = dual_encode(tape, mutable_model(model), g, p.v, p.vp, rng);
  return {d.z_v.data(), d.z_vp.data()};
}

void add_row(Matrix& m, NodeId r, const Matrix& x) {
  auto dst = m.row(r);
  for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += x[c];
}

}  // namespace

EmbeddingMatrix generate_embeddings(const Graph& g, const Model& model, const InferenceConfig& cfg) {
  check_model(g, model);
  validate(cfg.walks);
  const std::size_t n = g.num_nodes();
  const std::size_t d = model.config.encoder.embed_dim;
  const std::size_t threads = std::max<std::size_t>(1, cfg.threads);

  std::vector<PositivePair> pairs;
  if (g.num_edges() > 0) {
    const auto walks = random_walks(g, cfg.walks, derive_seed(cfg.seed, "infer-walks"), threads);
    pairs = positive_pairs(walks, cfg.pair_mode).pairs;
  }

  // Encode in parallel, then accumulate in pair order so the sums do not
  // depend on the thread count.
  std::vector<PairEncoding> encoded(pairs.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = substream(cfg.seed, "infer-pair", i);
      encoded[i] = encode_pair(g, model, pairs[i], rng);
    }
  };
  if (threads == 1 || pairs.size() < 2) {
    work(0, pairs.size());
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const std::size_t chunk = (pairs.size() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t b = std::min(pairs.size(), t * chunk);
      const std::size_t e = std::min(pairs.size(), b + chunk);
      pool.emplace_back([&, t, b, e] {
        try {
          work(b, e);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  EmbeddingMatrix out;
  out.vectors = Matrix(n, d);
  out.coverage.assign(n, 0);
  out.fallback.assign(n, false);
  out.graph_hash = g.content_hash();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    add_row(out.vectors, pairs[i].v, encoded[i].z_v);
    add_row(out.vectors, pairs[i].vp, encoded[i].z_vp);
    ++out.coverage[pairs[i].v];
    ++out.coverage[pairs[i].vp];
  }
  for (NodeId v = 0; v < n; ++v) {
    if (out.coverage[v] > 0) {
      for (double& x : out.vectors.row(v)) x /= static_cast<double>(out.coverage[v]);
      continue;
    }
    Rng rng = substream(cfg.seed, "infer-fallback", v);
    const PairEncoding e = encode_pair(g, model, {v, v}, rng);
    add_row(out.vectors, v, e.z_v);
    out.fallback[v] = true;
  }
  if (!out.vectors.all_finite()) throw NumericError("non-finite embedding produced");
  return out;
}

std::vector<double> embed_single(NodeId v, const Graph& g, const Model& model,
                                 std::size_t n_pairs, std::uint64_t seed,
                                 std::size_t walk_length, bool allow_isolated) {
  check_model(g, model);
  if (v >= g.num_nodes()) throw DataError("node " + std::to_string(v) + " is not in the graph");
  if (n_pairs == 0) throw ConfigError("n_pairs must be >= 1");
  if (walk_length == 0) throw ConfigError("walk length must be >= 1");
  const std::size_t d = model.config.encoder.embed_dim;
  std::vector<double> sum(d, 0.0);
  if (g.degree(v) == 0) {
    if (!allow_isolated) throw DataError("node " + std::to_string(v) + " is isolated");
    Rng rng = substream(seed, "single-fallback", v);
    const PairEncoding e = encode_pair(g, model, {v, v}, rng);
    for (std::size_t c = 0; c < d; ++c) sum[c] = e.z_v[c];
    return sum;
  }
  // Cycle through walk positions of enough walks to yield n_pairs pairs.
  const std::size_t n_walks = (n_pairs + walk_length - 1) / walk_length;
  const auto walks = walks_from(g, v, n_walks, walk_length, derive_seed(seed, "single-walks"));
  std::vector<PositivePair> pairs;
  for (const Walk& w : walks) {
    for (std::size_t t = 1; t < w.size() && pairs.size() < n_pairs; ++t) {
      if (w[t] != v) pairs.push_back({v, w[t]});
    }
  }
  if (pairs.empty()) pairs.push_back({v, g.neighbors(v)[0]});
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    Rng rng = substream(seed, "single-pair", i);
    const PairEncoding e = encode_pair(g, model, pairs[i], rng);
    for (std::size_t c = 0; c < d; ++c) sum[c] += e.z_v[c];
  }
  for (double& x : sum) x /= static_cast<double>(pairs.size());
  return sum;
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& emb) {
  save_matrix(path, emb.vectors);
  std::filesystem::path side = path;
  side += ".nodes";
  std::ofstream out(side);
  if (!out) throw DataError("cannot write " + side.string());
  out << "# graph_hash " << hex64(emb.graph_hash) << '\n';
  out << "# row\tnode\tcoverage\tfallback\n";
  for (std::size_t r = 0; r < emb.vectors.rows(); ++r) {
    out << r << '\t' << r << '\t' << emb.coverage[r] << '\t' << (emb.fallback[r] ? 1 : 0) << '\n';
  }
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
  EmbeddingMatrix emb;
  emb.vectors = load_matrix_any(path);
  const std::size_t n = emb.vectors.rows();
  emb.coverage.assign(n, 0);
  emb.fallback.assign(n, false);
  std::filesystem::path side = path;
  side += ".nodes";
  std::ifstream in(side);
  if (!in) return emb;  // plain matrix without metadata
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.rfind("# graph_hash ", 0) == 0) {
      emb.graph_hash = std::stoull(line.substr(13), nullptr, 16);
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::size_t row = 0, node = 0, cov = 0;
    int fb = 0;
    if (!(ls >> row >> node >> cov >> fb) || row >= n) {
      throw DataError(side.string() + ":" + std::to_string(line_no) + ": malformed line");
    }
    emb.coverage[row] = cov;
    emb.fallback[row] = fb != 0;
  }
  return emb;
}

}  // namespace cade
