#pragma once

#include <filesystem>
#include <iosfwd>

#include "refcond/types.hpp"

namespace refcond {

/// Whitespace-separated rows, 17 significant digits (lossless for doubles).
void write_matrix(std::ostream& out, const Matrix& m);
void write_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path);

} // namespace refcond
