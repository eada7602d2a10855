#include "cade/sampling.hpp"

#include <fstream>
#include <thread>

#include "cade/error.hpp"

namespace cade {

void validate(const WalkConfig& cfg) {
  if (cfg.walks_per_node < 1) throw ConfigError("sampling.walks must be >= 1");
  if (cfg.walk_length < 1) throw ConfigError("sampling.length must be >= 1");
}

namespace {

Walk one_walk(const Graph& g, NodeId start, std::size_t length, Rng& rng) {
  Walk w;
  w.reserve(length + 1);
  w.push_back(start);
  NodeId cur = start;
  for (std::size_t s = 0; s < length; ++s) {
    const auto nb = g.neighbors(cur);
    cur = nb[rng.uniform_index(nb.size())];
    w.push_back(cur);
  }
  return w;
}

}  // namespace

std::vector<Walk> walks_from(const Graph& g, NodeId start, std::size_t count,
                             std::size_t walk_length, std::uint64_t seed) {
  if (g.degree(start) == 0) return {};
  Rng rng = substream(seed, "walks", start);
  std::vector<Walk> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(one_walk(g, start, walk_length, rng));
  return out;
}

std::vector<Walk> random_walks(const Graph& g, const WalkConfig& cfg, std::uint64_t seed,
                               std::size_t threads) {
  validate(cfg);
  if (g.num_edges() == 0) throw DataError("random_walks: graph has no edges");
  const std::size_t n = g.num_nodes();
  std::vector<std::vector<Walk>> per_node(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) {
      per_node[v] = walks_from(g, static_cast<NodeId>(v), cfg.walks_per_node, cfg.walk_length, seed);
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back(work, std::min(n, t * chunk), std::min(n, (t + 1) * chunk));
    }
    for (auto& th : pool) th.join();
  }
  std::vector<Walk> walks;
  walks.reserve(n * cfg.walks_per_node);
  for (auto& ws : per_node)
    for (auto& w : ws) walks.push_back(std::move(w));
  return walks;
}

void write_walks(const std::filesystem::path& path, std::span<const Walk> walks) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  for (const Walk& w : walks) {
    for (std::size_t i = 0; i < w.size(); ++i) out << (i ? " " : "") << w[i];
    out << '\n';
  }
}

PairSet positive_pairs(std::span<const Walk> walks, PairMode mode) {
  PairSet set;
  for (const Walk& w : walks) {
    if (w.empty()) continue;
    const std::size_t anchors = mode == PairMode::kStartToRest ? 1 : w.size();
    for (std::size_t i = 0; i < anchors; ++i) {
      for (std::size_t j = i + 1; j < w.size(); ++j) {
        if (w[j] != w[i]) set.pairs.push_back({w[i], w[j]});
      }
    }
  }
  return set;
}

NeighborhoodTree sample_tree(const Graph& g, NodeId u, std::span<const std::size_t> sizes,
                             Rng& rng) {
  NeighborhoodTree tree;
  tree.root = u;
  tree.sizes.assign(sizes.begin(), sizes.end());
  tree.layers.resize(sizes.size() + 1);
  tree.layers[0].push_back({u, -1});
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    const auto& parents = tree.layers[l];
    auto& children = tree.layers[l + 1];
    children.reserve(parents.size() * sizes[l]);
    for (std::size_t p = 0; p < parents.size(); ++p) {
      const auto nb = g.neighbors(parents[p].id);
      if (nb.empty()) {
        throw DataError("sample_tree: node " + std::to_string(parents[p].id) +
                        " has no neighbors (rooted at " + std::to_string(u) + ")");
      }
      for (std::size_t s = 0; s < sizes[l]; ++s) {
        children.push_back({nb[rng.uniform_index(nb.size())], static_cast<std::int32_t>(p)});
      }
    }
  }
  return tree;
}

NeighborhoodTree self_tree(NodeId u, std::span<const std::size_t> sizes) {
  NeighborhoodTree tree;
  tree.root = u;
  tree.sizes.assign(sizes.begin(), sizes.end());
  tree.layers.resize(sizes.size() + 1);
  tree.layers[0].push_back({u, -1});
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    const std::size_t parents = tree.layers[l].size();
    for (std::size_t p = 0; p < parents; ++p)
      for (std::size_t s = 0; s < sizes[l]; ++s)
        tree.layers[l + 1].push_back({u, static_cast<std::int32_t>(p)});
  }
  return tree;
}

}  // namespace cade
