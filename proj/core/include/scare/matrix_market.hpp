#pragma once

#include <string>

#include "scare/types.hpp"

namespace scare {

/// Matrix Market I/O for "matrix coordinate|array real|integer|pattern
/// general|symmetric|skew-symmetric".  Errors are LoadError naming the file.
SparseMatrix read_mm_sparse(const std::string& path);
Matrix read_mm_dense(const std::string& path);

/// Coordinate format for sparse input, array format for dense, 17 digits.
void write_mm(const std::string& path, const SparseMatrix& m);
void write_mm(const std::string& path, const Matrix& m);

}  // namespace scare
