#include "scare/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <vector>

#include "scare/errors.hpp"

namespace scare {

namespace {

struct Header {
  bool coordinate = true;
  bool pattern = false;
  enum class Sym { General, Symmetric, Skew } sym = Sym::General;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw LoadError(path + ": " + what);
}

Header parse_header(const std::string& path, const std::string& line) {
  std::istringstream in(line);
  std::string banner, object, format, field, symmetry;
  in >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix") fail(path, "not a Matrix Market matrix");
  Header h;
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (format == "array") {
    h.coordinate = false;
  } else if (format != "coordinate") {
    fail(path, "unsupported format '" + format + "'");
  }
  if (field == "pattern") {
    if (!h.coordinate) fail(path, "pattern field requires coordinate format");
    h.pattern = true;
  } else if (field != "real" && field != "integer" && field != "double") {
    fail(path, "unsupported field '" + field + "'");
  }
  if (symmetry == "symmetric") {
    h.sym = Header::Sym::Symmetric;
  } else if (symmetry == "skew-symmetric") {
    h.sym = Header::Sym::Skew;
  } else if (symmetry != "general") {
    fail(path, "unsupported symmetry '" + symmetry + "'");
  }
  return h;
}

struct Raw {
  Index rows = 0, cols = 0;
  std::vector<Eigen::Triplet<double>> entries;
};

Raw read_raw(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  std::string line;
  if (!std::getline(in, line)) fail(path, "empty file");
  const Header h = parse_header(path, line);
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%' &&
        line.find_first_not_of(" \t\r") != std::string::npos)
      break;
  }
  std::istringstream size_line(line);
  Raw raw;
  long long nnz = 0;
  size_line >> raw.rows >> raw.cols;
  if (h.coordinate) size_line >> nnz;
  if (!size_line || raw.rows < 0 || raw.cols < 0) fail(path, "bad size line");

  auto add = [&](Index i, Index j, double v) {
    raw.entries.emplace_back(i, j, v);
    if (i != j && h.sym == Header::Sym::Symmetric) raw.entries.emplace_back(j, i, v);
    if (i != j && h.sym == Header::Sym::Skew) raw.entries.emplace_back(j, i, -v);
  };

  if (h.coordinate) {
    raw.entries.reserve(static_cast<size_t>(nnz));
    for (long long e = 0; e < nnz; ++e) {
      long long i = 0, j = 0;
      double v = 1.0;
      if (!(in >> i >> j)) fail(path, "truncated at entry " + std::to_string(e + 1));
      if (!h.pattern && !(in >> v)) fail(path, "missing value at entry " + std::to_string(e + 1));
      if (i < 1 || j < 1 || i > raw.rows || j > raw.cols)
        fail(path, "index out of range at entry " + std::to_string(e + 1));
      add(static_cast<Index>(i - 1), static_cast<Index>(j - 1), v);
    }
  } else {
    for (Index j = 0; j < raw.cols; ++j) {
      const Index start = h.sym == Header::Sym::General ? 0 : (h.sym == Header::Sym::Skew ? j + 1 : j);
      for (Index i = start; i < raw.rows; ++i) {
        double v = 0.0;
        if (!(in >> v)) fail(path, "truncated array data");
        if (v != 0.0) add(i, j, v);
      }
    }
  }
  return raw;
}

}  // namespace

SparseMatrix read_mm_sparse(const std::string& path) {
  Raw raw = read_raw(path);
  SparseMatrix m(raw.rows, raw.cols);
  m.setFromTriplets(raw.entries.begin(), raw.entries.end());
  m.makeCompressed();
  return m;
}

Matrix read_mm_dense(const std::string& path) {
  Raw raw = read_raw(path);
  Matrix m = Matrix::Zero(raw.rows, raw.cols);
  for (const auto& t : raw.entries) m(t.row(), t.col()) += t.value();
  return m;
}

void write_mm(const std::string& path, const SparseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw LoadError(path + ": cannot open for writing");
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  out.precision(17);
  for (Index j = 0; j < m.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(m, j); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

void write_mm(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw LoadError(path + ": cannot open for writing");
  out << "%%MatrixMarket matrix array real general\n";
  out << m.rows() << ' ' << m.cols() << '\n';
  out.precision(17);
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) out << m(i, j) << '\n';
}

}  // namespace scare
