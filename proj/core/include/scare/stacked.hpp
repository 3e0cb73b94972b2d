#pragma once

#include <utility>
#include <vector>

#include "scare/errors.hpp"
#include "scare/types.hpp"

namespace scare {

/// A vertical stack [M_1; ...; M_k] of equally sized blocks, the operand
/// shape of the left semi-tensor product in the stochastic terms.  A stack
/// with zero blocks is legal and still carries its block shape.
template <class Block>
class StackedMat {
 public:
  StackedMat() = default;
  StackedMat(Index block_rows, Index block_cols)
      : rows_(block_rows), cols_(block_cols) {}
  explicit StackedMat(std::vector<Block> blocks) {
    if (!blocks.empty()) {
      rows_ = blocks.front().rows();
      cols_ = blocks.front().cols();
    }
    for (auto& b : blocks) push_back(std::move(b));
  }

  Index block_count() const { return static_cast<Index>(blocks_.size()); }
  Index block_rows() const { return rows_; }
  Index block_cols() const { return cols_; }
  bool empty() const { return blocks_.empty(); }

  const Block& block(Index i) const { return blocks_[static_cast<size_t>(i)]; }
  Block& block(Index i) { return blocks_[static_cast<size_t>(i)]; }
  const std::vector<Block>& blocks() const { return blocks_; }

  void push_back(Block b) {
    if (blocks_.empty() && rows_ == 0 && cols_ == 0) {
      rows_ = b.rows();
      cols_ = b.cols();
    }
    if (b.rows() != rows_ || b.cols() != cols_) {
      throw DimensionError("stacked block " + shape_string(b.rows(), b.cols()) +
                           " does not match " + shape_string(rows_, cols_));
    }
    blocks_.push_back(std::move(b));
  }

 private:
  std::vector<Block> blocks_;
  Index rows_ = 0;
  Index cols_ = 0;
};

using DenseStack = StackedMat<Matrix>;
using SparseStack = StackedMat<SparseMatrix>;

/// x ⋉ [M_1; ...; M_k] for the row-compatible case: block i of the result
/// is x * M_i.  Equivalent to (x kron I_k) applied to the interleaved stack.
template <class Block>
DenseStack ltimes(const Matrix& x, const StackedMat<Block>& m) {
  if (x.cols() != m.block_rows()) {
    throw DimensionError("ltimes: left operand " + shape_string(x.rows(), x.cols()) +
                         " vs stacked blocks " +
                         shape_string(m.block_rows(), m.block_cols()));
  }
  DenseStack out(x.rows(), m.block_cols());
  for (const auto& b : m.blocks()) out.push_back(Matrix(x * b));
  return out;
}

/// Flatten a stack into a (k*p) x q dense matrix using `layout`.
Matrix stack_rows(const DenseStack& s, BlockLayout layout);

/// Inverse of stack_rows.
DenseStack unstack_rows(const Matrix& m, Index block_count, BlockLayout layout);

/// G kron I_k (Interleaved) or I_k kron G (Blocked).
Matrix kron_identity(const Matrix& g, Index k, BlockLayout layout);

/// Plain Kronecker product.
Matrix kron(const Matrix& a, const Matrix& b);

/// Left semi-tensor product of two dense matrices following the full
/// definition: (a kron I_{p/n}) b when n | p, a (b kron I_{n/p}) when p | n.
/// Small dense reference implementation.
Matrix ltimes_general(const Matrix& a, const Matrix& b);

}  // namespace scare
