/// \file errors.hpp
/// Error hierarchy shared by all modules.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ctigo {

/// Base class for every error thrown by this library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched shapes or indices outside the matrix extent.
class dim_error : public error {
 public:
  using error::error;
};

/// A dense-scale operation was requested above its configured size limit.
class size_error : public error {
 public:
  using error::error;
};

/// Invalid caller-supplied parameter (non-positive weights, bad tensors, ...).
class param_error : public error {
 public:
  using error::error;
};

/// Cholesky pivot failure; `column` is the first column with a non-positive pivot.
class not_spd_error : public error {
 public:
  not_spd_error(const std::string& what, std::int64_t column)
      : error(what), column_(column) {}
  std::int64_t column() const noexcept { return column_; }

 private:
  std::int64_t column_;
};

/// Structural rank deficiency detected during orthogonal factorization.
class rank_error : public error {
 public:
  rank_error(const std::string& what, std::int64_t column)
      : error(what), column_(column) {}
  std::int64_t column() const noexcept { return column_; }

 private:
  std::int64_t column_;
};

/// Zero diagonal met during a triangular solve.
class singular_error : public error {
 public:
  using error::error;
};

/// File format or filesystem failure.
class io_error : public error {
 public:
  using error::error;
};

}  // namespace ctigo
