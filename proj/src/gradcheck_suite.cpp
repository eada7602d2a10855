#include "cade/gradcheck_suite.hpp"

#include <functional>

#include "cade/training.hpp"

namespace cade {

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (double& x : m.values()) x = scale * rng.normal();
  return m;
}

// Values bounded away from zero so relu and max have no kink within eps.
Matrix spread_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double mag = 0.2 + 0.15 * static_cast<double>(i % 7) + 0.01 * rng.uniform();
    m[i] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * mag;
  }
  return m;
}

using UnaryOp = std::function<ad::Value(ad::Tape&, ad::Value)>;

GradCheckResult check_op(const UnaryOp& op, Matrix x0, std::size_t out_rows, std::size_t out_cols,
                         Rng& rng) {
  ad::Parameter x("x", std::move(x0));
  const Matrix weights = random_matrix(out_rows, out_cols, rng);
  ad::Parameter* params[] = {&x};
  return grad_check(
      [&](ad::Tape& t) {
        ad::Value y = op(t, t.parameter(x));
        return ad::sum(ad::elementwise_mul(y, t.constant(weights)));
      },
      params);
}

Graph micro_graph(std::size_t feature_dim, Rng& rng) {
  const std::vector<Edge> edges = {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 4},
                                   {4, 5}, {5, 6}, {6, 7}, {7, 4}, {1, 6}};
  return Graph::from_edges(8, edges, random_matrix(8, feature_dim, rng));
}

GradCheckResult check_objective(DualMode mode, Aggregator agg, std::size_t K, std::uint64_t seed) {
  Rng rng(seed);
  const Graph g = micro_graph(3, rng);
  ModelConfig mc;
  mc.encoder.feature_dim = 3;
  mc.encoder.embed_dim = 4;
  mc.encoder.sample_sizes = {2, 2};
  mc.encoder.aggregator = agg;
  mc.mode = mode;
  mc.num_candidates = K;
  std::vector<NodeId> bias_nodes = {0, 1, 2, 3, 4, 5, 6, 7};
  Model model = Model::create(mc, g.num_nodes(), bias_nodes, seed);
  // Non-zero bias rows so the bias path contributes.
  for (double& b : model.bias->table.value().values()) b = 0.3 * rng.normal();
  const PositivePair pair{0, 2};
  const std::vector<NodeId> negs = {5, 7};
  auto params = model.parameters();
  // The stopped copy of A stays fixed while A itself is perturbed.
  const Matrix frozen = model.attention.value();
  const Matrix* frozen_ptr = mode == DualMode::kMultiAggregating ? &frozen : nullptr;
  return grad_check(
      [&](ad::Tape& t) {
        Rng tree_rng(seed + 1);
        return pair_loss(t, model, g, pair, negs, tree_rng, frozen_ptr);
      },
      params);
}

}  // namespace

GradCheckReport run_gradcheck_suite(std::uint64_t seed) {
  GradCheckReport report;
  Rng rng(seed);
  auto add = [&](std::string name, GradCheckResult r) {
    if (r.max_rel_error >= report.worst) {
      report.worst = r.max_rel_error;
      report.worst_name = name;
    }
    report.entries.push_back({std::move(name), r});
  };

  const Matrix b34 = random_matrix(3, 4, rng);
  const Matrix b14 = random_matrix(1, 4, rng);
  const Matrix b42 = random_matrix(4, 2, rng);
  const Matrix b22 = random_matrix(2, 4, rng);
  add("matmul", check_op([&](ad::Tape& t, ad::Value x) { return ad::matmul(x, t.constant(b42)); },
                         random_matrix(3, 4, rng), 3, 2, rng));
  add("matmul_rhs", check_op([&](ad::Tape& t, ad::Value x) { return ad::matmul(t.constant(b34), x); },
                             random_matrix(4, 2, rng), 3, 2, rng));
  add("add", check_op([&](ad::Tape& t, ad::Value x) { return ad::add(x, t.constant(b34)); },
                      random_matrix(3, 4, rng), 3, 4, rng));
  add("add_row", check_op([&](ad::Tape& t, ad::Value x) { return ad::add(t.constant(b34), x); },
                          random_matrix(1, 4, rng), 3, 4, rng));
  add("add_row_lhs", check_op([&](ad::Tape&, ad::Value x) { return ad::add(x, ad::row_slice(x, 1, 1)); },
                              random_matrix(3, 4, rng), 3, 4, rng));
  add("elementwise_mul",
      check_op([&](ad::Tape& t, ad::Value x) { return ad::elementwise_mul(x, t.constant(b34)); },
               random_matrix(3, 4, rng), 3, 4, rng));
  add("square", check_op([&](ad::Tape&, ad::Value x) { return ad::elementwise_mul(x, x); },
                         random_matrix(3, 4, rng), 3, 4, rng));
  add("scale", check_op([&](ad::Tape&, ad::Value x) { return ad::scale(x, -2.5); },
                        random_matrix(3, 4, rng), 3, 4, rng));
  add("concat_cols", check_op([&](ad::Tape& t, ad::Value x) { return ad::concat_cols(t.constant(b34), x); },
                              random_matrix(3, 2, rng), 3, 6, rng));
  add("concat_rows", check_op(
                         [&](ad::Tape& t, ad::Value x) {
                           const ad::Value parts[] = {x, t.constant(b22), x};
                           return ad::concat_rows(parts);
                         },
                         random_matrix(1, 4, rng), 4, 4, rng));
  add("row_slice", check_op([&](ad::Tape&, ad::Value x) { return ad::row_slice(x, 1, 2); },
                            random_matrix(4, 3, rng), 2, 3, rng));
  add("gather_rows", check_op(
                         [&](ad::Tape&, ad::Value x) {
                           const std::int64_t idx[] = {2, 0, -1, 2};
                           return ad::gather_rows(x, idx);
                         },
                         random_matrix(3, 2, rng), 4, 2, rng));
  add("transpose", check_op([&](ad::Tape&, ad::Value x) { return ad::transpose(x); },
                            random_matrix(3, 4, rng), 4, 3, rng));
  add("reshape", check_op([&](ad::Tape&, ad::Value x) { return ad::reshape(x, 2, 6); },
                          random_matrix(3, 4, rng), 2, 6, rng));
  add("sigmoid", check_op([&](ad::Tape&, ad::Value x) { return ad::sigmoid(x); },
                          random_matrix(3, 4, rng), 3, 4, rng));
  add("relu", check_op([&](ad::Tape&, ad::Value x) { return ad::relu(x); },
                       spread_matrix(3, 4, rng), 3, 4, rng));
  add("log_sigmoid", check_op([&](ad::Tape&, ad::Value x) { return ad::log_sigmoid(x); },
                              random_matrix(3, 4, rng, 3.0), 3, 4, rng));
  add("reduce_mean_rows", check_op([&](ad::Tape&, ad::Value x) { return ad::reduce_mean_rows(x, 2); },
                                   random_matrix(6, 3, rng), 3, 3, rng));
  add("reduce_max_rows", check_op([&](ad::Tape&, ad::Value x) { return ad::reduce_max_rows(x, 3); },
                                  spread_matrix(6, 3, rng), 2, 3, rng));
  add("column_sums", check_op([&](ad::Tape&, ad::Value x) { return ad::column_sums(x); },
                              random_matrix(3, 4, rng), 1, 4, rng));
  add("row_sums", check_op([&](ad::Tape&, ad::Value x) { return ad::row_sums(x); },
                           random_matrix(3, 4, rng), 3, 1, rng));
  add("sum", check_op([&](ad::Tape&, ad::Value x) { return ad::sum(x); }, random_matrix(3, 4, rng), 1,
                      1, rng));
  add("softmax_flat", check_op([&](ad::Tape&, ad::Value x) { return ad::softmax_flat(x); },
                               random_matrix(3, 3, rng), 3, 3, rng));
  add("dot", check_op([&](ad::Tape& t, ad::Value x) { return ad::dot(x, t.constant(b14)); },
                      random_matrix(1, 4, rng), 1, 1, rng));
  add("dot_self", check_op([&](ad::Tape&, ad::Value x) { return ad::dot(x, x); },
                           random_matrix(2, 3, rng), 1, 1, rng));
  add("l2_normalize_rows", check_op([&](ad::Tape&, ad::Value x) { return ad::l2_normalize_rows(x); },
                                    random_matrix(3, 4, rng), 3, 4, rng));

  add("objective_ms_mean", check_objective(DualMode::kMultiSampling, Aggregator::kMean, 3, seed + 11));
  add("objective_ms_maxpool", check_objective(DualMode::kMultiSampling, Aggregator::kMaxPool, 3, seed + 12));
  add("objective_ma_mean", check_objective(DualMode::kMultiAggregating, Aggregator::kMean, 3, seed + 13));
  add("objective_ma_maxpool", check_objective(DualMode::kMultiAggregating, Aggregator::kMaxPool, 2, seed + 14));
  return report;
}

}  // namespace cade
