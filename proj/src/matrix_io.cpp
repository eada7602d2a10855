#include "cade/matrix_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cade/error.hpp"

namespace cade {
namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<unsigned char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b.data()), 8);
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 8)) {
    throw DataError("matrix file: truncated header");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void write_matrix(std::ostream& out, const Matrix& m) {
  out.write(kMatrixMagic, sizeof(kMatrixMagic));
  put_u64(out, m.rows());
  put_u64(out, m.cols());
  std::vector<unsigned char> buf(m.size() * 4);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(m[i]));
    for (int k = 0; k < 4; ++k) buf[4 * i + k] = static_cast<unsigned char>(bits >> (8 * k));
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataError("matrix file: write failed");
}

Matrix read_matrix(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMatrixMagic, 8) != 0) {
    throw DataError("matrix file: bad magic (expected CADEMAT1)");
  }
  const std::uint64_t rows = get_u64(in);
  const std::uint64_t cols = get_u64(in);
  if (cols != 0 && rows > (std::uint64_t{1} << 40) / cols) {
    throw DataError("matrix file: implausible dimensions");
  }
  Matrix m(rows, cols);
  std::vector<unsigned char> buf(m.size() * 4);
  if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
    throw DataError("matrix file: truncated payload");
  }
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::uint32_t bits = 0;
    for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(buf[4 * i + k]) << (8 * k);
    m[i] = std::bit_cast<float>(bits);
  }
  return m;
}

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  write_matrix(out, m);
}

Matrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  try {
    return read_matrix(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

Matrix load_text_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path.string());
  std::vector<double> values;
  std::size_t cols = 0, rows = 0, line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    std::size_t n = 0;
    std::string tok;
    while (ss >> tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": unparsable value '" +
                        tok + "'");
      }
      values.push_back(v);
      ++n;
    }
    if (rows == 0) {
      cols = n;
    } else if (n != cols) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(cols) + " columns, found " + std::to_string(n));
    }
    ++rows;
  }
  Matrix m(rows, cols);
  m.values() = std::move(values);
  return m;
}

void save_text_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << std::setprecision(17);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? " " : "") << m(r, c);
    out << '\n';
  }
}

Matrix load_matrix_any(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  char magic[8] = {};
  in.read(magic, 8);
  if (in.gcount() == 8 && std::memcmp(magic, kMatrixMagic, 8) == 0) return load_matrix(path);
  return load_text_matrix(path);
}

}  // namespace cade
