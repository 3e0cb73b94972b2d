#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace scare {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// Row ordering used when a stacked operand is flattened into one dense
/// matrix.  `Interleaved` puts row a of block i at position a*k + i, which
/// is the ordering produced by (X kron I_k); `Blocked` puts the blocks one
/// after another, the ordering produced by (I_k kron X).
enum class BlockLayout { Interleaved, Blocked };

}  // namespace scare
