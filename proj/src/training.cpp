#include "cade/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <ostream>
#include <thread>

#include "cade/error.hpp"

namespace cade {

// ---------------------------------------------------------------------------
// Negative sampling

NegativeSampler::NegativeSampler(const Graph& g, double power) {
  if (!(power >= 0.0) || !std::isfinite(power)) throw ConfigError("train.neg_power must be >= 0");
  prob_of_node_.assign(g.num_nodes(), 0.0);
  double total = 0.0;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (g.degree(v) == 0) continue;
    nodes_.push_back(v);
    const double w = std::pow(static_cast<double>(g.degree(v)), power);
    total += w;
    cumulative_.push_back(total);
    prob_of_node_[v] = w;
  }
  if (nodes_.empty()) throw DataError("negative sampler: graph has no node with degree >= 1");
  for (double& c : cumulative_) c /= total;
  cumulative_.back() = 1.0;
  for (double& p : prob_of_node_) p /= total;
}

double NegativeSampler::probability(NodeId v) const {
  return v < prob_of_node_.size() ? prob_of_node_[v] : 0.0;
}

std::vector<NodeId> NegativeSampler::sample(std::span<const NodeId> exclude, std::size_t count,
                                            Rng& rng) const {
  auto excluded = [&](NodeId v) {
    return std::find(exclude.begin(), exclude.end(), v) != exclude.end();
  };
  double excluded_mass = 0.0;
  std::vector<NodeId> unique_excluded(exclude.begin(), exclude.end());
  std::sort(unique_excluded.begin(), unique_excluded.end());
  unique_excluded.erase(std::unique(unique_excluded.begin(), unique_excluded.end()),
                        unique_excluded.end());
  for (NodeId v : unique_excluded) excluded_mass += probability(v);
  std::size_t excluded_eligible = 0;
  for (NodeId v : unique_excluded) excluded_eligible += probability(v) > 0.0 ? 1 : 0;
  if (excluded_eligible >= nodes_.size()) {
    throw DataError("negative sampler: all " + std::to_string(nodes_.size()) +
                    " eligible nodes are excluded");
  }

  std::vector<NodeId> out;
  out.reserve(count);
  if (excluded_mass < 0.5) {
    while (out.size() < count) {
      const double u = rng.uniform();
      auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      if (it == cumulative_.end()) --it;
      const NodeId v = nodes_[static_cast<std::size_t>(it - cumulative_.begin())];
      if (!excluded(v)) out.push_back(v);
    }
    return out;
  }
  // Most of the mass is excluded: draw from the renormalized remainder.
  std::vector<NodeId> rest;
  std::vector<double> cum;
  double total = 0.0;
  for (NodeId v : nodes_) {
    if (excluded(v)) continue;
    rest.push_back(v);
    total += prob_of_node_[v];
    cum.push_back(total);
  }
  while (out.size() < count) {
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    if (it == cum.end()) --it;
    out.push_back(rest[static_cast<std::size_t>(it - cum.begin())]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Objectives

ad::Value loss_ms(ad::Value z_v, ad::Value z_vp, ad::Value z_negs) {
  if (z_negs.rows() == 0) throw ConfigError("loss needs at least one negative sample (Q >= 1)");
  ad::Value positive = ad::scale(ad::log_sigmoid(ad::dot(z_v, z_vp)), -1.0);
  ad::Value neg_scores = ad::matmul(z_negs, ad::transpose(z_v));  // Q x 1
  ad::Value negative = ad::scale(ad::sum(ad::log_sigmoid(ad::scale(neg_scores, -1.0))), -1.0);
  return ad::add(positive, negative);
}

MaLossTerms loss_ma(ad::Value H_v, ad::Value H_vp, std::span<const ad::Value> H_negs,
                    ad::Value attention) {
  return loss_ma(H_v, H_vp, H_negs, attention, ad::stop_gradient(attention));
}

MaLossTerms loss_ma(ad::Value H_v, ad::Value H_vp, std::span<const ad::Value> H_negs,
                    ad::Value attention, ad::Value negative_attention) {
  if (H_negs.empty()) throw ConfigError("loss needs at least one negative sample (Q >= 1)");
  MaLossTerms t;
  DualOutput pos = fuse(H_v, H_vp, DualMode::kMultiAggregating, attention);
  t.positive = ad::scale(ad::log_sigmoid(ad::dot(pos.z_v, pos.z_vp)), -1.0);
  ad::Value frozen = ad::stop_gradient(negative_attention);
  std::vector<ad::Value> scores;
  scores.reserve(H_negs.size());
  for (const ad::Value& H_n : H_negs) {
    DualOutput support = fuse(H_v, H_n, DualMode::kMultiAggregating, frozen);
    scores.push_back(ad::dot(support.z_v, support.z_vp));
  }
  ad::Value stacked = ad::concat_rows(scores);
  t.negative = ad::scale(ad::sum(ad::log_sigmoid(ad::scale(stacked, -1.0))), -1.0);
  t.total = ad::add(t.positive, t.negative);
  return t;
}

ad::Value pair_loss(ad::Tape& tape, Model& model, const Graph& g, PositivePair pair,
                    std::span<const NodeId> negatives, Rng& rng,
                    const Matrix* frozen_attention) {
  const auto& cfg = model.config;
  const std::size_t K = cfg.num_candidates;
  const std::size_t Q = negatives.size();
  const auto& sizes = cfg.encoder.sample_sizes;

  std::vector<NeighborhoodTree> trees = candidate_trees(model, g, pair.v, rng);
  for (auto& t : candidate_trees(model, g, pair.vp, rng)) trees.push_back(std::move(t));
  for (NodeId n : negatives) {
    trees.push_back(g.degree(n) == 0 ? self_tree(n, sizes) : sample_tree(g, n, sizes, rng));
  }

  if (cfg.mode == DualMode::kMultiSampling) {
    ad::Value all = sagb_forward(tape, cfg.encoder, model.encoders.at(0), model.bias_ptr(), g, trees);
    DualOutput d = fuse(ad::row_slice(all, 0, K), ad::row_slice(all, K, K), cfg.mode);
    return loss_ms(d.z_v, d.z_vp, ad::row_slice(all, 2 * K, Q));
  }

  // One tree per node (v, v_p, negatives) through every parameter set;
  // candidate k of tree i sits at row k * n_trees + i.
  const std::size_t n_trees = trees.size();
  std::vector<ad::Value> per_set;
  for (auto& enc : model.encoders) {
    per_set.push_back(sagb_forward(tape, cfg.encoder, enc, model.bias_ptr(), g, trees));
  }
  ad::Value all = ad::concat_rows(per_set);
  auto candidates_of = [&](std::size_t tree) {
    std::vector<std::int64_t> idx(K);
    for (std::size_t k = 0; k < K; ++k) idx[k] = static_cast<std::int64_t>(k * n_trees + tree);
    return ad::gather_rows(all, idx);
  };
  std::vector<ad::Value> H_negs;
  for (std::size_t n = 0; n < Q; ++n) H_negs.push_back(candidates_of(2 + n));
  ad::Value a = tape.parameter(model.attention);
  ad::Value a_neg = frozen_attention ? tape.constant(*frozen_attention) : a;
  return loss_ma(candidates_of(0), candidates_of(1), H_negs, a, a_neg).total;
}

// ---------------------------------------------------------------------------
// Adam

Adam::Adam(std::vector<ad::Parameter*> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  for (ad::Parameter* p : params_) {
    m_.emplace_back(p->value().rows(), p->value().cols());
    v_.emplace_back(p->value().rows(), p->value().cols());
  }
}

void Adam::step() {
  for (ad::Parameter* p : params_) {
    const Matrix& g = p->grad();
    if (!g.same_shape(p->value())) continue;
    for (std::size_t r = 0; r < g.rows(); ++r) {
      if (p->row_sparse() && !p->touched(r)) continue;
      for (double x : g.row(r)) {
        if (!std::isfinite(x)) {
          throw NumericError("non-finite gradient in parameter " + p->name() + " (row " +
                             std::to_string(r) + ")");
        }
      }
    }
  }
  ++steps_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    ad::Parameter* p = params_[i];
    Matrix& w = p->value();
    const Matrix& g = p->grad();
    if (!g.same_shape(w)) continue;
    for (std::size_t r = 0; r < w.rows(); ++r) {
      if (p->row_sparse() && !p->touched(r)) continue;
      for (std::size_t c = 0; c < w.cols(); ++c) {
        const std::size_t k = r * w.cols() + c;
        m_[i][k] = b1 * m_[i][k] + (1.0 - b1) * g[k];
        v_[i][k] = b2 * v_[i][k] + (1.0 - b2) * g[k] * g[k];
        const double mhat = m_[i][k] / c1;
        const double vhat = v_[i][k] / c2;
        w[k] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Training loop

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("train.lr must be positive");
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (negatives < 1) throw ConfigError("train.negatives must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  cade::validate(walks);
}

namespace {

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.uniform_index(i)]);
}

std::vector<NodeId> nodes_with_edges(const Graph& g) {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    if (g.degree(v) > 0) out.push_back(v);
  return out;
}

void add_gradients(ad::Parameter& into, const ad::Parameter& from) {
  Matrix& dst = into.grad();
  const Matrix& src = from.grad();
  if (!src.same_shape(from.value())) return;
  if (!dst.same_shape(into.value())) into.zero_grad();
  for (std::size_t r = 0; r < src.rows(); ++r) {
    if (!from.touched(r)) continue;
    auto d = dst.row(r);
    const auto s = src.row(r);
    for (std::size_t c = 0; c < s.size(); ++c) d[c] += s[c];
    into.touch_row(r);
  }
}

}  // namespace

std::vector<EpochStats> train(Model& model, const Graph& g, const TrainConfig& config,
                              std::ostream* log) {
  config.validate();
  model.config.validate();
  if (g.feature_dim() != model.config.encoder.feature_dim) {
    throw DataError("graph features have " + std::to_string(g.feature_dim()) +
                    " columns, model expects " + std::to_string(model.config.encoder.feature_dim));
  }
  if (g.num_edges() == 0) throw DataError("training graph has no edges");

  const NegativeSampler sampler(g, config.neg_power);
  std::vector<ad::Parameter*> params = model.parameters();
  Adam adam(params, {config.learning_rate});
  const std::size_t threads = std::max<std::size_t>(1, config.threads);
  std::vector<Model> replicas(threads > 1 ? threads : 0, model);

  if (log) {
    *log << "# mode=" << to_string(model.config.mode) << " K=" << model.config.num_candidates
         << " L=" << model.config.encoder.depth() << " d=" << model.config.encoder.embed_dim
         << " negatives=" << config.negatives << " neg_power=" << config.neg_power
         << " lr=" << config.learning_rate << " batch_size=" << config.batch_size
         << " seed=" << config.seed << '\n';
  }

  auto run_pair = [&](Model& m, const std::vector<PositivePair>& pairs, std::size_t epoch,
                      std::size_t i, double weight) {
    const PositivePair pair = pairs[i];
    Rng rng = substream(config.seed, "pair", epoch, i);
    const NodeId exclude[2] = {pair.v, pair.vp};
    const auto negs = sampler.sample(exclude, config.negatives, rng);
    ad::Tape tape;
    ad::Value loss = pair_loss(tape, m, g, pair, negs, rng);
    const double value = loss.scalar();
    if (!std::isfinite(value)) {
      throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", pair #" +
                         std::to_string(i) + " (" + std::to_string(pair.v) + ", " +
                         std::to_string(pair.vp) + ")");
    }
    tape.backward(ad::scale(loss, weight));
    return value;
  };

  std::vector<EpochStats> stats;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto walks = random_walks(g, config.walks, derive_seed(config.seed, "walks", epoch), threads);
    if (epoch == 1 && !config.dump_walks.empty()) write_walks(config.dump_walks, walks);
    std::vector<PositivePair> pairs = positive_pairs(walks, config.pair_mode).pairs;
    Rng shuffle_rng = substream(config.seed, "shuffle", epoch);
    shuffle(pairs, shuffle_rng);
    if (config.pairs_per_epoch > 0 && pairs.size() > config.pairs_per_epoch) {
      pairs.resize(config.pairs_per_epoch);
    }
    if (pairs.empty()) throw DataError("random walks produced no positive pairs");

    double total = 0.0;
    for (std::size_t b0 = 0; b0 < pairs.size(); b0 += config.batch_size) {
      const std::size_t b1 = std::min(pairs.size(), b0 + config.batch_size);
      const double weight = 1.0 / static_cast<double>(b1 - b0);
      model.zero_grad();
      if (threads == 1) {
        for (std::size_t i = b0; i < b1; ++i) total += run_pair(model, pairs, epoch, i, weight);
      } else {
        std::vector<double> shard_loss(threads, 0.0);
        std::vector<std::exception_ptr> errors(threads);
        std::vector<std::thread> pool;
        const std::size_t chunk = (b1 - b0 + threads - 1) / threads;
        for (std::size_t t = 0; t < threads; ++t) {
          auto rparams = replicas[t].parameters();
          for (std::size_t k = 0; k < params.size(); ++k) rparams[k]->value() = params[k]->value();
          replicas[t].zero_grad();
          const std::size_t s0 = std::min(b1, b0 + t * chunk);
          const std::size_t s1 = std::min(b1, s0 + chunk);
          pool.emplace_back([&, t, s0, s1] {
            try {
              for (std::size_t i = s0; i < s1; ++i)
                shard_loss[t] += run_pair(replicas[t], pairs, epoch, i, weight);
            } catch (...) {
              errors[t] = std::current_exception();
            }
          });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
          if (e) std::rethrow_exception(e);
        for (std::size_t t = 0; t < threads; ++t) {
          total += shard_loss[t];
          auto rparams = replicas[t].parameters();
          for (std::size_t k = 0; k < params.size(); ++k) add_gradients(*params[k], *rparams[k]);
        }
      }
      adam.step();
    }

    EpochStats s;
    s.epoch = epoch;
    s.pairs = pairs.size();
    s.mean_loss = total / static_cast<double>(pairs.size());
    s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    stats.push_back(s);
    if (log) *log << s.epoch << '\t' << s.mean_loss << '\t' << s.seconds << '\n' << std::flush;

    if (!config.checkpoint_dir.empty() && config.checkpoint_every > 0 &&
        epoch % config.checkpoint_every == 0 && epoch != config.epochs) {
      save_checkpoint(model, config.checkpoint_dir / ("epoch-" + std::to_string(epoch)));
    }
  }
  if (!config.checkpoint_dir.empty()) save_checkpoint(model, config.checkpoint_dir);
  return stats;
}

FitResult fit(const Graph& g, const ModelConfig& model_config, const TrainConfig& config,
              std::ostream* log) {
  ModelConfig mc = model_config;
  if (mc.encoder.feature_dim == 0) mc.encoder.feature_dim = g.feature_dim();
  const auto bias_nodes = nodes_with_edges(g);
  FitResult result{Model::create(mc, g.num_nodes(), bias_nodes, derive_seed(config.seed, "model")),
                   {}};
  result.log = train(result.model, g, config, log);
  return result;
}

}  // namespace cade
