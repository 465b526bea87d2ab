#pragma once

// Exact rational scalars and dense matrices over Q.

#include <gmpxx.h>

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pqk {

using Rational = mpq_class;

/// Parses "p/q", "p", or a decimal literal such as "-0.5". Throws MalformedInput.
Rational parse_rational(std::string_view text);
/// Canonical "p/q" text ("p" when q == 1).
std::string format_rational(const Rational& value);
/// Exact conversion of a finite double.
Rational rational_from_double(double value);

class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(std::size_t rows, std::size_t cols);
  RationalMatrix(std::initializer_list<std::initializer_list<Rational>> rows);

  static RationalMatrix identity(std::size_t n);
  static RationalMatrix from_rows(const std::vector<std::vector<Rational>>& rows, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  Rational& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Rational& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<Rational> row(std::size_t r) const;
  std::vector<Rational> col(std::size_t c) const;

  RationalMatrix transpose() const;
  RationalMatrix operator*(const RationalMatrix& rhs) const;
  RationalMatrix operator+(const RationalMatrix& rhs) const;
  RationalMatrix operator-(const RationalMatrix& rhs) const;
  std::vector<Rational> operator*(const std::vector<Rational>& v) const;
  bool operator==(const RationalMatrix& rhs) const;
  bool operator!=(const RationalMatrix& rhs) const { return !(*this == rhs); }

  /// [this | rhs]; row counts must agree.
  RationalMatrix hstack(const RationalMatrix& rhs) const;
  RationalMatrix vstack(const RationalMatrix& rhs) const;

  bool is_zero() const;
  bool is_identity() const;

  Eigen::MatrixXd to_double() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

struct RowEchelon {
  RationalMatrix reduced;              // reduced row echelon form
  std::vector<std::size_t> pivot_cols;  // one per nonzero row
};

/// Gauss-Jordan elimination with exact arithmetic (first nonzero pivot).
RowEchelon row_reduce(const RationalMatrix& m);
std::size_t exact_rank(const RationalMatrix& m);
/// Singular values below rel_tol * sigma_max count as zero.
std::size_t numeric_rank(const RationalMatrix& m, double rel_tol = 1e-10);
/// Columns span the right null space; built from free columns of the RREF.
RationalMatrix null_space(const RationalMatrix& m);
Rational determinant(const RationalMatrix& m);
std::optional<RationalMatrix> inverse(const RationalMatrix& m);
/// A particular solution of m·x = rhs, or nullopt if inconsistent.
std::optional<std::vector<Rational>> solve(const RationalMatrix& m, const std::vector<Rational>& rhs);

}  // namespace pqk
