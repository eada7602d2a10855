#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "cade/dual_encoder.hpp"
#include "cade/sampling.hpp"

namespace cade {

// Draws negatives with probability proportional to degree^power over nodes
// with degree >= 1.
class NegativeSampler {
 public:
  explicit NegativeSampler(const Graph& g, double power = 0.75);

  // i.i.d. draws rejecting ids in `exclude`; repeats are allowed. Throws
  // DataError when every eligible node is excluded.
  std::vector<NodeId> sample(std::span<const NodeId> exclude, std::size_t count, Rng& rng) const;

  double probability(NodeId v) const;
  std::size_t eligible() const { return nodes_.size(); }

 private:
  std::vector<NodeId> nodes_;
  std::vector<double> cumulative_;  // normalized, last entry 1
  std::vector<double> prob_of_node_;
};

// -log sigmoid(z_v . z_vp) - sum_n log sigmoid(-z_v . z_n) with z_negs
// holding one negative embedding per row.
ad::Value loss_ms(ad::Value z_v, ad::Value z_vp, ad::Value z_negs);

struct MaLossTerms {
  ad::Value positive;  // -log sigmoid(z_v . z_vp), attention live
  ad::Value negative;  // sum over negatives, attention behind stop_gradient
  ad::Value total;
};

// Multi-aggregating objective from candidate matrices: the positive pair is
// fused with A, each negative is fused against v's candidates with A
// frozen, giving the support embeddings that the negative term pushes apart.
MaLossTerms loss_ma(ad::Value H_v, ad::Value H_vp, std::span<const ad::Value> H_negs,
                    ad::Value attention);

// Same with an explicit attention value for the negative term. Passing a
// constant snapshot of A here gives a loss whose finite differences match
// the stop-gradient analytic gradient.
MaLossTerms loss_ma(ad::Value H_v, ad::Value H_vp, std::span<const ad::Value> H_negs,
                    ad::Value attention, ad::Value negative_attention);

// Full per-pair objective: samples trees for v, v_p and each negative from
// `rng` (same order as dual_encode for the pair) and evaluates the loss of
// the model's mode. `frozen_attention`, when given, replaces A in the
// negative term of the multi-aggregating loss.
ad::Value pair_loss(ad::Tape& tape, Model& model, const Graph& g, PositivePair pair,
                    std::span<const NodeId> negatives, Rng& rng,
                    const Matrix* frozen_attention = nullptr);

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam. Row-sparse parameters only update rows touched since
// the last zero_grad (moments of untouched rows are left as they are).
class Adam {
 public:
  Adam(std::vector<ad::Parameter*> params, AdamConfig config);

  // Throws NumericError naming the parameter if a gradient is not finite.
  void step();
  std::size_t steps() const { return steps_; }
  const Matrix& first_moment(std::size_t i) const { return m_[i]; }
  const Matrix& second_moment(std::size_t i) const { return v_[i]; }

 private:
  std::vector<ad::Parameter*> params_;
  AdamConfig config_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::size_t steps_ = 0;
};

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t epochs = 1;
  std::size_t batch_size = 512;
  std::size_t negatives = 20;  // Q
  double neg_power = 0.75;
  std::size_t pairs_per_epoch = 0;  // 0 = every pair from the epoch's walks
  WalkConfig walks;
  PairMode pair_mode = PairMode::kStartToRest;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::size_t checkpoint_every = 0;
  std::filesystem::path checkpoint_dir;
  std::filesystem::path dump_walks;

  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double seconds = 0.0;
  std::size_t pairs = 0;
};

struct FitResult {
  Model model;
  std::vector<EpochStats> log;
};

// Unsupervised training on a training graph. Global-bias rows are created
// for nodes with degree >= 1. Each epoch draws fresh walks, shuffles the
// pairs and takes mean-loss Adam steps over batches. Writes "# key=value"
// header lines and one "epoch<TAB>mean_loss<TAB>wallclock_s" line per epoch
// to `log` when given.
FitResult fit(const Graph& g, const ModelConfig& model_config, const TrainConfig& config,
              std::ostream* log = nullptr);

// Same, continuing from an existing model.
std::vector<EpochStats> train(Model& model, const Graph& g, const TrainConfig& config,
                              std::ostream* log = nullptr);

}  // namespace cade
