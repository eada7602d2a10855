#include "cade/split.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cade/error.hpp"
#include "cade/random.hpp"

namespace cade {
namespace {

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.uniform_index(i)]);
  }
}

}  // namespace

NodeSplit split_unseen_nodes(const Graph& g, double unseen_ratio, std::uint64_t seed) {
  if (!(unseen_ratio > 0.0 && unseen_ratio < 1.0)) {
    throw ConfigError("unseen_ratio must be in (0, 1), got " + std::to_string(unseen_ratio));
  }
  const std::size_t n = g.num_nodes();
  const auto n_unseen = static_cast<std::size_t>(std::llround(unseen_ratio * static_cast<double>(n)));
  if (n_unseen == 0 || n_unseen >= n) {
    throw DataError("unseen_ratio " + std::to_string(unseen_ratio) + " over " + std::to_string(n) +
                    " nodes leaves an empty train or unseen set");
  }
  std::vector<NodeId> order(n);
  for (NodeId i = 0; i < n; ++i) order[i] = i;
  Rng rng = substream(seed, "node-split");
  shuffle(order, rng);

  NodeSplit split;
  split.seed = seed;
  split.unseen_nodes.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_unseen));
  split.train_nodes.assign(order.begin() + static_cast<std::ptrdiff_t>(n_unseen), order.end());
  std::sort(split.unseen_nodes.begin(), split.unseen_nodes.end());
  std::sort(split.train_nodes.begin(), split.train_nodes.end());
  return split;
}

Graph training_view(const Graph& g, std::span<const NodeId> unseen_nodes) {
  std::vector<bool> unseen(g.num_nodes(), false);
  for (NodeId v : unseen_nodes) unseen.at(v) = true;
  std::vector<Edge> kept;
  for (const Edge& e : g.edges())
    if (!unseen[e.u] && !unseen[e.v]) kept.push_back(e);
  return g.with_edges(kept);
}

HiddenEdges hide_edges(const Graph& g, const EdgeSplitOptions& options) {
  if (!(options.hide_fraction > 0.0 && options.hide_fraction < 1.0)) {
    throw ConfigError("hide_fraction must be in (0, 1)");
  }
  const auto all = g.edges();
  HiddenEdges best;
  best.requested = static_cast<std::size_t>(
      std::llround(options.hide_fraction * static_cast<double>(all.size())));
  std::vector<bool> excluded(g.num_nodes(), false);
  for (NodeId v : options.excluded_endpoints) excluded.at(v) = true;

  for (int round = 0; round < std::max(1, options.max_rounds); ++round) {
    std::vector<Edge> order = all;
    Rng rng = substream(options.seed, "hide-edges", static_cast<std::uint64_t>(round));
    shuffle(order, rng);
    std::vector<std::size_t> deg(g.num_nodes());
    for (NodeId v = 0; v < g.num_nodes(); ++v) deg[v] = g.degree(v);

    HiddenEdges attempt;
    attempt.requested = best.requested;
    for (const Edge& e : order) {
      const bool can_hide = attempt.hidden.size() < best.requested && !excluded[e.u] &&
                            !excluded[e.v] && deg[e.u] >= 2 && deg[e.v] >= 2;
      if (can_hide) {
        --deg[e.u];
        --deg[e.v];
        attempt.hidden.push_back(e);
      } else {
        attempt.kept.push_back(e);
      }
    }
    if (round == 0 || attempt.hidden.size() > best.hidden.size()) best = std::move(attempt);
    if (best.hidden.size() == best.requested) break;
  }
  std::sort(best.hidden.begin(), best.hidden.end());
  std::sort(best.kept.begin(), best.kept.end());
  return best;
}

std::vector<Edge> sample_non_edges(const Graph& g, std::size_t count, std::uint64_t seed,
                                   std::span<const Edge> taken,
                                   const std::vector<bool>* forbidden_nodes) {
  const std::size_t n = g.num_nodes();
  const std::size_t total_pairs = n < 2 ? 0 : n * (n - 1) / 2;
  std::set<Edge> blocked(taken.begin(), taken.end());
  Rng rng = substream(seed, "non-edges");
  std::vector<Edge> out;
  out.reserve(count);
  auto forbidden = [&](NodeId v) { return forbidden_nodes && (*forbidden_nodes)[v]; };

  if (total_pairs <= 4'000'000) {
    // Small enough to enumerate; exact feasibility check and no retry loop.
    std::vector<Edge> pool;
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v = u + 1; v < n; ++v)
        if (!forbidden(u) && !forbidden(v) && !g.has_edge(u, v) && !blocked.count({u, v}))
          pool.push_back({u, v});
    if (pool.size() < count) {
      throw DataError("graph has only " + std::to_string(pool.size()) +
                      " available non-edges, " + std::to_string(count) + " required");
    }
    for (std::size_t i = 0; i < count; ++i) {
      std::swap(pool[i], pool[i + rng.uniform_index(pool.size() - i)]);
      out.push_back(pool[i]);
    }
  } else {
    const std::size_t max_attempts = 100 * count + 1000;
    std::size_t attempts = 0;
    while (out.size() < count) {
      if (++attempts > max_attempts) {
        throw DataError("could not sample " + std::to_string(count) + " non-edges");
      }
      const auto a = static_cast<NodeId>(rng.uniform_index(n));
      const auto b = static_cast<NodeId>(rng.uniform_index(n));
      if (a == b || forbidden(a) || forbidden(b) || g.has_edge(a, b)) continue;
      const Edge e = make_edge(a, b);
      if (!blocked.insert(e).second) continue;
      out.push_back(e);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

EdgeSplit split_edges_for_lp(const Graph& g, const EdgeSplitOptions& options) {
  HiddenEdges hidden = hide_edges(g, options);
  EdgeSplit split;
  split.seed = options.seed;
  if (hidden.hidden.size() < hidden.requested) {
    const std::string msg = "only " + std::to_string(hidden.hidden.size()) + " of " +
                            std::to_string(hidden.requested) +
                            " edges can be hidden without leaving a dangling node";
    if (!options.allow_partial) throw DataError("infeasible hide_fraction: " + msg);
    split.warning = msg;
  }
  if (hidden.hidden.empty()) throw DataError("no edge can be hidden");

  split.test_pos = std::move(hidden.hidden);
  split.train_pos = std::move(hidden.kept);
  split.train_graph = g.with_edges(split.train_pos);

  // Test negatives avoid excluded endpoints like the test positives do.
  std::vector<bool> excluded(g.num_nodes(), false);
  for (NodeId v : options.excluded_endpoints) excluded[v] = true;
  split.test_neg = sample_non_edges(g, split.test_pos.size(), derive_seed(options.seed, "test-neg"),
                                    {}, options.excluded_endpoints.empty() ? nullptr : &excluded);
  split.train_neg = sample_non_edges(g, split.train_pos.size(),
                                     derive_seed(options.seed, "train-neg"), split.test_neg);
  return split;
}

EdgeSplit split_edges_for_lp(const Graph& g, double hide_fraction, std::uint64_t seed) {
  EdgeSplitOptions options;
  options.hide_fraction = hide_fraction;
  options.seed = seed;
  return split_edges_for_lp(g, options);
}

}  // namespace cade
