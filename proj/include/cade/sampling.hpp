#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cade/graph.hpp"
#include "cade/random.hpp"

namespace cade {

struct WalkConfig {
  std::size_t walks_per_node = 100;
  std::size_t walk_length = 4;  // steps; a walk visits walk_length + 1 nodes
};

void validate(const WalkConfig& cfg);

using Walk = std::vector<NodeId>;

// Uniform random walks from every node with degree >= 1. Each start node has
// its own RNG substream, so the output (ordered by start node, then walk
// index) does not depend on the number of worker threads.
std::vector<Walk> random_walks(const Graph& g, const WalkConfig& cfg, std::uint64_t seed,
                               std::size_t threads = 1);

// Walks started from a single node, using the same per-node substream as
// random_walks.
std::vector<Walk> walks_from(const Graph& g, NodeId start, std::size_t count,
                             std::size_t walk_length, std::uint64_t seed);

void write_walks(const std::filesystem::path& path, std::span<const Walk> walks);

struct PositivePair {
  NodeId v = 0;
  NodeId vp = 0;
  friend bool operator==(const PositivePair&, const PositivePair&) = default;
};

enum class PairMode {
  kStartToRest,  // (w_0, w_t) for t >= 1
  kAllOffsets,   // (w_i, w_j) for every i < j
};

struct PairSet {
  std::vector<PositivePair> pairs;
};

// Pairs with equal endpoints are skipped; duplicates are kept.
PairSet positive_pairs(std::span<const Walk> walks, PairMode mode = PairMode::kStartToRest);

struct TreeNode {
  NodeId id = 0;
  std::int32_t parent = -1;  // index into the previous layer
};

// Layer 0 holds the root; every node of layer l has exactly sizes[l]
// children in layer l + 1, stored contiguously in parent order.
struct NeighborhoodTree {
  NodeId root = 0;
  std::vector<std::size_t> sizes;
  std::vector<std::vector<TreeNode>> layers;

  std::size_t depth() const { return sizes.size(); }
};

// Uniform sampling with replacement from each node's neighbor list.
// Throws DataError if a node without neighbors is reached.
NeighborhoodTree sample_tree(const Graph& g, NodeId u, std::span<const std::size_t> sizes,
                             Rng& rng);

// Degenerate tree where every sampled neighbor is u itself. Used for nodes
// without neighbors.
NeighborhoodTree self_tree(NodeId u, std::span<const std::size_t> sizes);

}  // namespace cade
