#pragma once

#include <filesystem>
#include <iosfwd>

#include "cade/matrix.hpp"

namespace cade {

// Binary matrix format: 8 magic bytes "CADEMAT1", rows and cols as
// little-endian u64, then rows*cols little-endian f32 values, row-major.
inline constexpr char kMatrixMagic[8] = {'C', 'A', 'D', 'E', 'M', 'A', 'T', '1'};

void write_matrix(std::ostream& out, const Matrix& m);
Matrix read_matrix(std::istream& in);

void save_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix load_matrix(const std::filesystem::path& path);

// Text matrix: one row per line, whitespace-separated decimals; '#' comments.
Matrix load_text_matrix(const std::filesystem::path& path);
void save_text_matrix(const std::filesystem::path& path, const Matrix& m);

// Detects the binary magic and dispatches to the right reader.
Matrix load_matrix_any(const std::filesystem::path& path);

}  // namespace cade
