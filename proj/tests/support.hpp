#pragma once

// Shared generators and independent oracles for the test binaries.
// Oracles here deliberately avoid the library's own elimination code.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pqk/rational.hpp"
#include "pqk/reduced_spaces.hpp"

namespace pqk::test {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(gen_); }

  /// p/q with |p| ≤ span and 1 ≤ q ≤ max_den.
  Rational rational(int span = 4, int max_den = 3) {
    Rational r(uniform(-span, span), uniform(1, max_den));
    r.canonicalize();
    return r;
  }

  RationalMatrix matrix(std::size_t rows, std::size_t cols, int span = 3, int max_den = 2) {
    RationalMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) m(i, j) = rational(span, max_den);
    return m;
  }

  /// Random invertible n×n matrix: unit lower × unit upper triangular, then row-scaled.
  RationalMatrix invertible(std::size_t n) {
    RationalMatrix l = RationalMatrix::identity(n), u = RationalMatrix::identity(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) {
        l(i, j) = rational(2, 2);
        u(j, i) = rational(2, 2);
      }
    RationalMatrix m = l * u;
    for (std::size_t j = 0; j < n; ++j) {
      Rational s = rational(3, 2);
      if (s == 0) s = 1;
      for (std::size_t i = 0; i < n; ++i) m(i, j) *= s;
    }
    return m;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

inline ReducedFrame frame(const std::string& prefix, std::size_t n) {
  std::vector<DofId> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(DofId{prefix + std::to_string(i + 1)});
  return ReducedFrame(std::move(ids));
}

/// Laplace expansion along the first row.
inline Rational cofactor_det(const RationalMatrix& m) {
  const std::size_t n = m.rows();
  if (n == 0) return 1;
  if (n == 1) return m(0, 0);
  Rational total = 0;
  for (std::size_t c = 0; c < n; ++c) {
    if (m(0, c) == 0) continue;
    RationalMatrix minor(n - 1, n - 1);
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t j = 0, k = 0; j < n; ++j)
        if (j != c) minor(i - 1, k++) = m(i, j);
    const Rational term = m(0, c) * cofactor_det(minor);
    total += (c % 2 == 0) ? term : Rational(-term);
  }
  return total;
}

/// Index subsets of {0..n−1} of size k, in lexicographic order.
inline std::vector<std::vector<std::size_t>> subsets(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (cur.size() == k) {
      out.push_back(cur);
      return;
    }
    for (std::size_t i = start; i < n; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

/// Largest k with a nonzero k×k minor, by exhaustive search. Small matrices only.
inline std::size_t minor_rank(const RationalMatrix& m) {
  for (std::size_t k = std::min(m.rows(), m.cols()); k > 0; --k)
    for (const auto& rs : subsets(m.rows(), k))
      for (const auto& cs : subsets(m.cols(), k)) {
        RationalMatrix sub(k, k);
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = 0; j < k; ++j) sub(i, j) = m(rs[i], cs[j]);
        if (cofactor_det(sub) != 0) return k;
      }
  return 0;
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace pqk::test
