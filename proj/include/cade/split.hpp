#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cade/graph.hpp"

namespace cade {

struct NodeSplit {
  std::vector<NodeId> train_nodes;   // sorted
  std::vector<NodeId> unseen_nodes;  // sorted
  std::uint64_t seed = 0;
};

// Uniform random partition with |unseen| = round(unseen_ratio * |V|).
NodeSplit split_unseen_nodes(const Graph& g, double unseen_ratio, std::uint64_t seed);

// g without any edge that touches an unseen node. Node ids and features
// are kept, so unseen nodes are present but isolated.
Graph training_view(const Graph& g, std::span<const NodeId> unseen_nodes);

struct EdgeSplit {
  Graph train_graph;
  std::vector<Edge> train_pos;
  std::vector<Edge> train_neg;
  std::vector<Edge> test_pos;
  std::vector<Edge> test_neg;
  std::uint64_t seed = 0;
  std::string warning;  // non-empty when fewer edges than requested were hidden
};

struct EdgeSplitOptions {
  double hide_fraction = 0.1;
  std::uint64_t seed = 0;
  // Accept fewer hidden edges than requested instead of failing.
  bool allow_partial = false;
  // Hidden (test) edges may not touch these nodes.
  std::vector<NodeId> excluded_endpoints;
  int max_rounds = 10;
};

struct HiddenEdges {
  std::vector<Edge> hidden;
  std::vector<Edge> kept;
  std::size_t requested = 0;
};

// Greedy rejection pass over shuffled edges: an edge is hidden only if both
// endpoints keep degree >= 1. Retries with fresh orders up to max_rounds and
// returns the best attempt; does not throw on shortfall.
HiddenEdges hide_edges(const Graph& g, const EdgeSplitOptions& options);

// Full link-prediction split: hidden positives plus an equal number of
// sampled non-edges for test; remaining edges plus equal non-edges for the
// predictor's training set. Throws DataError if the hide fraction is
// infeasible (unless allow_partial) or the graph has too few non-edges.
EdgeSplit split_edges_for_lp(const Graph& g, const EdgeSplitOptions& options);
EdgeSplit split_edges_for_lp(const Graph& g, double hide_fraction, std::uint64_t seed);

// Distinct non-edges (u < v, u != v) of g, avoiding `taken` and, when
// given, any pair touching a node flagged in `forbidden_nodes`.
std::vector<Edge> sample_non_edges(const Graph& g, std::size_t count, std::uint64_t seed,
                                   std::span<const Edge> taken = {},
                                   const std::vector<bool>* forbidden_nodes = nullptr);

}  // namespace cade
