#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "cade/error.hpp"
#include "cade/graph.hpp"
#include "cade/matrix_io.hpp"
#include "fixtures.hpp"

namespace fs = std::filesystem;
using cade::Edge;
using cade::Graph;

namespace {

fs::path temp_dir() {
  fs::path dir = fs::temp_directory_path() / "cade_unit_graph";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Graph, SymmetrizesAndDropsSelfLoopsAndDuplicates) {
  const std::vector<Edge> edges = {{0, 1}, {1, 0}, {2, 2}, {1, 2}, {0, 1}};
  const Graph g = Graph::from_edges(4, edges, cade::Matrix(4, 2));
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_EQ(g.degree(1), 2u);
  EXPECT_EQ(g.degree(3), 0u);
  EXPECT_TRUE(g.has_edge(2, 1));
  EXPECT_FALSE(g.has_edge(2, 2));
  EXPECT_EQ(g.min_degree(), 0u);
  const auto nb = g.neighbors(1);
  EXPECT_EQ(std::vector<cade::NodeId>(nb.begin(), nb.end()), (std::vector<cade::NodeId>{0, 2}));
}

TEST(Graph, EdgesAreCanonicalAndSorted) {
  const Graph g = fixtures::cycle(4, 1, 0);
  const auto e = g.edges();
  ASSERT_EQ(e.size(), 4u);
  for (const Edge& x : e) EXPECT_LT(x.u, x.v);
  EXPECT_TRUE(std::is_sorted(e.begin(), e.end()));
}

TEST(Graph, OutOfRangeNodeIsDataError) {
  const std::vector<Edge> edges = {{0, 5}};
  EXPECT_THROW(Graph::from_edges(3, edges, cade::Matrix(3, 1)), cade::DataError);
}

TEST(Graph, FeatureRowMismatchIsDataError) {
  const std::vector<Edge> edges = {{0, 1}};
  EXPECT_THROW(Graph::from_edges(3, edges, cade::Matrix(2, 1)), cade::DataError);
}

TEST(Graph, ContentHashTracksEdgesAndFeatures) {
  const Graph a = fixtures::cycle(5, 2, 1);
  const Graph b = fixtures::cycle(5, 2, 1);
  EXPECT_EQ(a.content_hash(), b.content_hash());
  const std::vector<Edge> fewer = {{0, 1}, {1, 2}};
  EXPECT_NE(a.content_hash(), a.with_edges(fewer).content_hash());
  EXPECT_NE(a.content_hash(), fixtures::cycle(5, 2, 2).content_hash());
}

TEST(Loader, RoundTripsEdgesFeaturesLabels) {
  const fs::path dir = temp_dir();
  const Graph g = fixtures::two_cliques(4, 3, 5);
  cade::save_edge_list(dir / "e.txt", g);
  cade::save_text_matrix(dir / "x.txt", g.features());
  cade::LabelSet labels;
  labels.num_classes = 2;
  labels.classes = {{0}, {0}, {0}, {0}, {1}, {1}, {1}, {1}};
  cade::save_labels(dir / "y.txt", labels);
  const cade::Dataset ds = cade::load_dataset(dir / "e.txt", dir / "x.txt", dir / "y.txt");
  EXPECT_EQ(ds.graph.edges(), g.edges());
  EXPECT_LT(cade::max_abs_diff(ds.graph.features(), g.features()), 1e-12);
  ASSERT_TRUE(ds.labels);
  EXPECT_EQ(ds.labels->classes, labels.classes);
  EXPECT_FALSE(ds.labels->multi_label);
}

TEST(Loader, MissingFeatureFileNamesThePath) {
  const fs::path dir = temp_dir();
  std::ofstream(dir / "edges_only.txt") << "0 1\n";
  const fs::path missing = dir / "no_such_features.txt";
  try {
    cade::load_graph(dir / "edges_only.txt", missing);
    FAIL();
  } catch (const cade::DataError& e) {
    EXPECT_NE(std::string(e.what()).find(missing.string()), std::string::npos);
  }
}

TEST(Loader, MalformedEdgeLineNamesTheLine) {
  const fs::path p = temp_dir() / "bad_edges.txt";
  std::ofstream(p) << "# comment\n0 1\n1 two\n";
  try {
    cade::read_edge_list(p);
    FAIL();
  } catch (const cade::DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
}

TEST(Loader, MultiLabelDetected) {
  const fs::path p = temp_dir() / "ml.txt";
  std::ofstream(p) << "0 0\n0 2\n1 1\n";
  const auto labels = cade::load_labels(p, 3);
  EXPECT_TRUE(labels.multi_label);
  EXPECT_EQ(labels.num_classes, 3u);
  EXPECT_EQ(labels.classes[0], (std::vector<int>{0, 2}));
  EXPECT_TRUE(labels.classes[2].empty());
}
