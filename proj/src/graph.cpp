#include "cade/graph.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "cade/error.hpp"
#include "cade/matrix_io.hpp"

namespace cade {

Graph Graph::from_edges(std::size_t num_nodes, std::span<const Edge> edges, Matrix features) {
  if (features.rows() != num_nodes) {
    throw DataError("feature matrix has " + std::to_string(features.rows()) + " rows but graph has " +
                    std::to_string(num_nodes) + " nodes");
  }
  std::vector<Edge> canon;
  canon.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.u >= num_nodes || e.v >= num_nodes) {
      throw DataError("node id " + std::to_string(std::max(e.u, e.v)) + " out of range (" +
                      std::to_string(num_nodes) + " nodes)");
    }
    if (e.u == e.v) continue;
    canon.push_back(make_edge(e.u, e.v));
  }
  std::sort(canon.begin(), canon.end());
  canon.erase(std::unique(canon.begin(), canon.end()), canon.end());

  Graph g;
  g.offsets_.assign(num_nodes + 1, 0);
  for (const Edge& e : canon) {
    ++g.offsets_[e.u + 1];
    ++g.offsets_[e.v + 1];
  }
  for (std::size_t i = 0; i < num_nodes; ++i) g.offsets_[i + 1] += g.offsets_[i];
  g.neighbors_.resize(canon.size() * 2);
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const Edge& e : canon) {
    g.neighbors_[cursor[e.u]++] = e.v;
    g.neighbors_[cursor[e.v]++] = e.u;
  }
  for (std::size_t i = 0; i < num_nodes; ++i) {
    std::sort(g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]),
              g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]));
  }
  g.features_ = std::move(features);
  return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  if (u >= num_nodes() || v >= num_nodes()) return false;
  const auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes(); ++u)
    for (NodeId v : neighbors(u))
      if (u < v) out.push_back({u, v});
  return out;
}

std::size_t Graph::min_degree() const {
  std::size_t m = num_nodes() == 0 ? 0 : degree(0);
  for (NodeId v = 1; v < num_nodes(); ++v) m = std::min(m, degree(v));
  return m;
}

Graph Graph::with_edges(std::span<const Edge> edges) const {
  return from_edges(num_nodes(), edges, features_);
}

std::uint64_t fnv1a(std::span<const unsigned char> bytes, std::uint64_t h) {
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t Graph::content_hash() const {
  auto bytes = [](const auto& vec) {
    return std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(vec.data()),
                                          vec.size() * sizeof(vec[0]));
  };
  const std::uint64_t n = num_nodes();
  std::uint64_t h = fnv1a({reinterpret_cast<const unsigned char*>(&n), sizeof(n)});
  h = fnv1a(bytes(offsets_), h);
  h = fnv1a(bytes(neighbors_), h);
  return fnv1a(bytes(features_.values()), h);
}

std::vector<Edge> read_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edge file: " + path.string());
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    long long u = -1, v = -1;
    std::string rest;
    if (!(ss >> u >> v) || u < 0 || v < 0 || (ss >> rest)) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected two non-negative integer ids, got '" + line + "'");
    }
    if (u > 0xffffffffLL || v > 0xffffffffLL) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": node id too large");
    }
    edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
  }
  return edges;
}

Graph load_graph(const std::filesystem::path& edge_path,
                 const std::filesystem::path& feature_path) {
  if (!std::filesystem::exists(feature_path)) {
    throw DataError("feature file not found: " + feature_path.string());
  }
  Matrix features = load_matrix_any(feature_path);
  const auto edges = read_edge_list(edge_path);
  const std::size_t n = features.rows();
  return Graph::from_edges(n, edges, std::move(features));
}

LabelSet load_labels(const std::filesystem::path& path, std::size_t num_nodes) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open label file: " + path.string());
  LabelSet labels;
  labels.classes.assign(num_nodes, {});
  std::string line;
  std::size_t line_no = 0;
  int max_class = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    long long node = -1, cls = -1;
    std::string rest;
    if (!(ss >> node >> cls) || node < 0 || cls < 0 || (ss >> rest)) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 'node_id label_id'");
    }
    if (static_cast<std::size_t>(node) >= num_nodes) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": node id " +
                      std::to_string(node) + " out of range (" + std::to_string(num_nodes) +
                      " nodes)");
    }
    auto& c = labels.classes[static_cast<std::size_t>(node)];
    if (std::find(c.begin(), c.end(), static_cast<int>(cls)) == c.end()) c.push_back(static_cast<int>(cls));
    max_class = std::max(max_class, static_cast<int>(cls));
  }
  for (auto& c : labels.classes) {
    std::sort(c.begin(), c.end());
    if (c.size() > 1) labels.multi_label = true;
  }
  labels.num_classes = static_cast<std::size_t>(max_class + 1);
  return labels;
}

Dataset load_dataset(const std::filesystem::path& edge_path,
                     const std::filesystem::path& feature_path,
                     const std::optional<std::filesystem::path>& label_path) {
  Dataset ds;
  ds.graph = load_graph(edge_path, feature_path);
  if (label_path) ds.labels = load_labels(*label_path, ds.graph.num_nodes());
  return ds;
}

void save_edge_list(const std::filesystem::path& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << '\n';
}

void save_labels(const std::filesystem::path& path, const LabelSet& labels) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  for (std::size_t v = 0; v < labels.classes.size(); ++v)
    for (int c : labels.classes[v]) out << v << ' ' << c << '\n';
}

}  // namespace cade
