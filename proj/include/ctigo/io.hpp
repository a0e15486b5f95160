/// \file io.hpp
/// File formats: Matrix Market coordinate for sparse matrices, RFC-4180 CSV
/// for dense data, binary PGM (P5) for images.  Floats are printed with the
/// shortest representation that round-trips exactly.
#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "ctigo/dense.hpp"
#include "ctigo/errors.hpp"
#include "ctigo/sparse.hpp"

namespace ctigo {

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc()) throw io_error("cannot parse number: '" + s + "'");
  return v;
}

// ---------------------------------------------------------------------------
// Matrix Market coordinate format
// ---------------------------------------------------------------------------

inline void write_matrix_market(const SparseMatrix& A, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.nrows << " " << A.ncols << " " << A.nnz() << "\n";
  for (index_t j = 0; j < A.ncols; ++j) {
    for (index_t p = A.col_ptr[j]; p < A.col_ptr[j + 1]; ++p) {
      out << (A.row_idx[static_cast<std::size_t>(p)] + 1) << " " << (j + 1)
          << " " << format_double(A.values[static_cast<std::size_t>(p)])
          << "\n";
    }
  }
}

inline void write_matrix_market(const SparseMatrix& A,
                                const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path);
  write_matrix_market(A, out);
  if (!out) throw io_error("write failed: " + path);
}

inline SparseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw io_error("matrix market: empty stream");
  std::istringstream hdr(line);
  std::string banner, object, fmt, field, symmetry;
  hdr >> banner >> object >> fmt >> field >> symmetry;
  if (banner != "%%MatrixMarket" || object != "matrix" ||
      fmt != "coordinate") {
    throw io_error("matrix market: unsupported header '" + line + "'");
  }
  if (field != "real" && field != "integer") {
    throw io_error("matrix market: unsupported field '" + field + "'");
  }
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general") {
    throw io_error("matrix market: unsupported symmetry '" + symmetry + "'");
  }

  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  std::istringstream sz(line);
  index_t nrows = -1, ncols = -1, nnz = -1;
  sz >> nrows >> ncols >> nnz;
  if (nrows < 0 || ncols < 0 || nnz < 0) {
    throw io_error("matrix market: bad size line '" + line + "'");
  }

  std::vector<Triplet> ts;
  ts.reserve(static_cast<std::size_t>(nnz));
  for (index_t k = 0; k < nnz; ++k) {
    if (!std::getline(in, line)) {
      throw io_error("matrix market: truncated entry list");
    }
    std::istringstream es(line);
    index_t i = 0, j = 0;
    std::string vtok;
    es >> i >> j >> vtok;
    if (!es && vtok.empty()) {
      throw io_error("matrix market: bad entry '" + line + "'");
    }
    const double v = parse_double(vtok);
    ts.push_back({i - 1, j - 1, v});
    if (symmetric && i != j) ts.push_back({j - 1, i - 1, v});
  }
  return from_triplets(nrows, ncols, std::move(ts));
}

inline SparseMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open for reading: " + path);
  return read_matrix_market(in);
}

// ---------------------------------------------------------------------------
// CSV (RFC 4180: comma separated, CRLF line endings)
// ---------------------------------------------------------------------------

inline void write_csv(const DenseMatrix& M, std::ostream& out) {
  for (index_t i = 0; i < M.nrows; ++i) {
    for (index_t j = 0; j < M.ncols; ++j) {
      if (j) out << ",";
      out << format_double(M(i, j));
    }
    out << "\r\n";
  }
}

inline void write_csv(const DenseMatrix& M, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path);
  write_csv(M, out);
  if (!out) throw io_error("write failed: " + path);
}

/// One value per line, e.g. observation vectors.
inline void write_vector_csv(const DenseVector& v, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path);
  for (double x : v) out << format_double(x) << "\r\n";
  if (!out) throw io_error("write failed: " + path);
}

inline DenseVector read_vector_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open for reading: " + path);
  DenseVector v;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const double x = parse_double(line);
    if (!std::isfinite(x)) {
      throw io_error("non-finite value in " + path + ": '" + line + "'");
    }
    v.push_back(x);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Binary PGM (P5)
// ---------------------------------------------------------------------------

/// 8-bit grayscale image; pixel (x, y) is pixels[y*width + x].
struct GrayImage {
  index_t width = 0;
  index_t height = 0;
  std::vector<std::uint8_t> pixels;
};

inline void write_pgm(const GrayImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw io_error("write failed: " + path);
}

}  // namespace ctigo
