#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "cade/matrix.hpp"

namespace cade {

using NodeId = std::uint32_t;

// Undirected edge, canonically u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge make_edge(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

// Immutable undirected attributed graph: sorted CSR adjacency plus a
// node feature matrix with one row per node. Labels are deliberately not
// part of this type; see LabelSet.
class Graph {
 public:
  Graph() = default;

  // Symmetrizes, drops self-loops and duplicate edges. Throws DataError for
  // ids >= num_nodes or a feature row count different from num_nodes.
  static Graph from_edges(std::size_t num_nodes, std::span<const Edge> edges, Matrix features);

  std::size_t num_nodes() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_edges() const { return neighbors_.size() / 2; }
  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
  std::span<const NodeId> neighbors(NodeId v) const {
    return {neighbors_.data() + offsets_[v], degree(v)};
  }
  bool has_edge(NodeId u, NodeId v) const;
  // Canonical edge list (u < v), sorted.
  std::vector<Edge> edges() const;
  std::size_t min_degree() const;

  const Matrix& features() const { return features_; }
  std::size_t feature_dim() const { return features_.cols(); }

  // Same node set and features with a different edge set.
  Graph with_edges(std::span<const Edge> edges) const;

  // FNV-1a over node count, adjacency and feature bits.
  std::uint64_t content_hash() const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> neighbors_;
  Matrix features_;
};

// Per-node class memberships. A node with more than one class makes the
// set multi-label; an empty entry means unlabeled.
struct LabelSet {
  std::size_t num_classes = 0;
  bool multi_label = false;
  std::vector<std::vector<int>> classes;
};

struct Dataset {
  Graph graph;
  std::optional<LabelSet> labels;
};

// Edge file: "u v" per line, 0-based ids, '#' comments. The node count is
// taken from the feature file's row count.
std::vector<Edge> read_edge_list(const std::filesystem::path& path);
Graph load_graph(const std::filesystem::path& edge_path,
                 const std::filesystem::path& feature_path);
LabelSet load_labels(const std::filesystem::path& path, std::size_t num_nodes);
Dataset load_dataset(const std::filesystem::path& edge_path,
                     const std::filesystem::path& feature_path,
                     const std::optional<std::filesystem::path>& label_path = std::nullopt);

void save_edge_list(const std::filesystem::path& path, const Graph& g);
void save_labels(const std::filesystem::path& path, const LabelSet& labels);

std::uint64_t fnv1a(std::span<const unsigned char> bytes,
                    std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace cade
