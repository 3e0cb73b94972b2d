#include "scare/stacked.hpp"

namespace scare {

Matrix stack_rows(const DenseStack& s, BlockLayout layout) {
  const Index k = s.block_count();
  const Index p = s.block_rows();
  Matrix out(k * p, s.block_cols());
  for (Index i = 0; i < k; ++i) {
    const Matrix& b = s.block(i);
    if (layout == BlockLayout::Blocked) {
      out.middleRows(i * p, p) = b;
    } else {
      for (Index a = 0; a < p; ++a) out.row(a * k + i) = b.row(a);
    }
  }
  return out;
}

DenseStack unstack_rows(const Matrix& m, Index block_count, BlockLayout layout) {
  if (block_count == 0) {
    if (m.rows() != 0) throw DimensionError("unstack_rows: rows left over with zero blocks");
    return DenseStack(0, m.cols());
  }
  if (m.rows() % block_count != 0) {
    throw DimensionError("unstack_rows: " + std::to_string(m.rows()) +
                         " rows not divisible by " + std::to_string(block_count));
  }
  const Index p = m.rows() / block_count;
  DenseStack out(p, m.cols());
  for (Index i = 0; i < block_count; ++i) {
    Matrix b(p, m.cols());
    if (layout == BlockLayout::Blocked) {
      b = m.middleRows(i * p, p);
    } else {
      for (Index a = 0; a < p; ++a) b.row(a) = m.row(a * block_count + i);
    }
    out.push_back(std::move(b));
  }
  return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix kron_identity(const Matrix& g, Index k, BlockLayout layout) {
  const Matrix eye = Matrix::Identity(k, k);
  return layout == BlockLayout::Interleaved ? kron(g, eye) : kron(eye, g);
}

Matrix ltimes_general(const Matrix& a, const Matrix& b) {
  const Index n = a.cols();
  const Index p = b.rows();
  if (n == 0 || p == 0) throw DimensionError("ltimes_general: empty operand");
  if (p % n == 0) {
    return kron(a, Matrix::Identity(p / n, p / n)) * b;
  }
  if (n % p == 0) {
    return a * kron(b, Matrix::Identity(n / p, n / p));
  }
  throw DimensionError("ltimes_general: " + shape_string(a.rows(), a.cols()) + " and " +
                       shape_string(b.rows(), b.cols()) + " are not semi-tensor conformable");
}

}  // namespace scare
