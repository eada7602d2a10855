#pragma once

#include <cstdint>
#include <vector>

#include "cade/graph.hpp"
#include "cade/random.hpp"

namespace fixtures {

inline cade::Matrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale = 1.0) {
  cade::Rng rng(seed);
  cade::Matrix m(rows, cols);
  for (double& x : m.values()) x = scale * rng.normal();
  return m;
}

// Two k-cliques {0..k-1} and {k..2k-1} joined by the edge (k-1, k).
inline cade::Graph two_cliques(std::size_t k, std::size_t feature_dim, std::uint64_t seed) {
  std::vector<cade::Edge> edges;
  for (std::size_t base : {std::size_t{0}, k})
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        edges.push_back({static_cast<cade::NodeId>(base + i), static_cast<cade::NodeId>(base + j)});
  edges.push_back({static_cast<cade::NodeId>(k - 1), static_cast<cade::NodeId>(k)});
  return cade::Graph::from_edges(2 * k, edges, gaussian(2 * k, feature_dim, seed));
}

// Cycle 0-1-...-(n-1)-0.
inline cade::Graph cycle(std::size_t n, std::size_t feature_dim, std::uint64_t seed) {
  std::vector<cade::Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    edges.push_back({static_cast<cade::NodeId>(i), static_cast<cade::NodeId>((i + 1) % n)});
  return cade::Graph::from_edges(n, edges, gaussian(n, feature_dim, seed));
}

// Star with center 0 and leaves 1..n-1.
inline cade::Graph star(std::size_t n, std::size_t feature_dim, std::uint64_t seed) {
  std::vector<cade::Edge> edges;
  for (std::size_t i = 1; i < n; ++i) edges.push_back({0, static_cast<cade::NodeId>(i)});
  return cade::Graph::from_edges(n, edges, gaussian(n, feature_dim, seed));
}

// Erdos-Renyi style graph with every node on a backbone path so none is
// isolated.
inline cade::Graph random_connected(std::size_t n, double p, std::size_t feature_dim, std::uint64_t seed) {
  cade::Rng rng(seed);
  std::vector<cade::Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i)
    edges.push_back({static_cast<cade::NodeId>(i), static_cast<cade::NodeId>(i + 1)});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 2; j < n; ++j)
      if (rng.uniform() < p) edges.push_back({static_cast<cade::NodeId>(i), static_cast<cade::NodeId>(j)});
  return cade::Graph::from_edges(n, edges, gaussian(n, feature_dim, seed + 1));
}

}  // namespace fixtures
