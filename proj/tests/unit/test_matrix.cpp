#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cade/error.hpp"
#include "cade/matrix.hpp"
#include "cade/matrix_io.hpp"
#include "cade/random.hpp"

namespace fs = std::filesystem;
using cade::Matrix;

namespace {

fs::path temp_path(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "cade_unit";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Matrix, MatmulAgainstLoops) {
  const Matrix a{{1, 2, 3}, {4, 5, 6}};
  const Matrix b{{7, 8}, {9, 10}, {11, 12}};
  const Matrix c = cade::matmul(a, b);
  EXPECT_EQ(c, (Matrix{{58, 64}, {139, 154}}));
  EXPECT_EQ(cade::transpose(a), (Matrix{{1, 4}, {2, 5}, {3, 6}}));
}

TEST(Matrix, MatmulShapeMismatchThrows) {
  EXPECT_THROW(cade::matmul(Matrix(2, 3), Matrix(2, 3)), cade::ShapeError);
}

TEST(MatrixIo, BinaryRoundTripIsFloat32) {
  Matrix m{{1.5, -2.25}, {1.0 / 3.0, 4.0}};
  std::stringstream ss;
  cade::write_matrix(ss, m);
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.substr(0, 8), "CADEMAT1");
  EXPECT_EQ(bytes.size(), 8u + 16u + 4u * 4u);
  const Matrix back = cade::read_matrix(ss);
  EXPECT_EQ(back(0, 0), 1.5);
  EXPECT_EQ(back(1, 0), static_cast<double>(static_cast<float>(1.0 / 3.0)));
}

TEST(MatrixIo, BadMagicIsDataError) {
  std::stringstream ss("NOTAMATRIX0000000000000000");
  EXPECT_THROW(cade::read_matrix(ss), cade::DataError);
}

TEST(MatrixIo, TextErrorsNameTheLine) {
  const fs::path p = temp_path("bad.txt");
  std::ofstream(p) << "1 2\n3 x\n";
  try {
    cade::load_text_matrix(p);
    FAIL();
  } catch (const cade::DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
  }
}

TEST(MatrixIo, LoadAnySniffsFormat) {
  const Matrix m{{1, 2}, {3, 4}};
  cade::save_text_matrix(temp_path("m.txt"), m);
  cade::save_matrix(temp_path("m.bin"), m);
  EXPECT_EQ(cade::load_matrix_any(temp_path("m.txt")), m);
  EXPECT_EQ(cade::load_matrix_any(temp_path("m.bin")), m);
}

TEST(Random, SameSeedSameStream) {
  cade::Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Random, UniformIndexStaysInRangeAndCoversIt) {
  cade::Rng rng(1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto k = rng.uniform_index(7);
    ASSERT_LT(k, 7u);
    seen.insert(k);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(Random, SubstreamsDifferByTagAndIndex) {
  EXPECT_NE(cade::derive_seed(1, "walks"), cade::derive_seed(1, "trees"));
  EXPECT_NE(cade::derive_seed(1, "walks", 0), cade::derive_seed(1, "walks", 1));
  EXPECT_EQ(cade::derive_seed(9, "pair", 3, 4), cade::derive_seed(9, "pair", 3, 4));
}

TEST(Random, UniformMeanIsHalf) {
  cade::Rng rng(3);
  double s = 0.0;
  for (int i = 0; i < 100000; ++i) s += rng.uniform();
  EXPECT_NEAR(s / 100000.0, 0.5, 0.01);
}
