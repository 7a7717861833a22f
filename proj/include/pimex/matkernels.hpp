#pragma once

// Small dense coefficient matrices shared by every method construction:
// the nilpotent shift K_n, its exponential, the phi_1 and Hessenberg
// factorial matrices, the scaled Vandermonde matrix and Laguerre
// polynomial derivatives. Everything is templated on the scalar so the
// same formulas run in double and in extended precision.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace pimex {

using Index = Eigen::Index;

template <typename Scalar = double>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar = double>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar = double>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

namespace detail {

inline void require_dimension(Index n, const char* what) {
  if (n < 1) {
    throw std::invalid_argument(std::string(what) + ": dimension must be >= 1, got " +
                                std::to_string(n));
  }
}

// Closed-form polynomial sums lose digits to cancellation; double sums are
// carried in long double.
template <typename Scalar>
using accumulator_t = std::conditional_t<std::is_same_v<Scalar, double>, long double, Scalar>;

}  // namespace detail

/// n! by iterative product.
template <typename Scalar = double>
Scalar factorial(int n) {
  if (n < 0) throw std::invalid_argument("factorial: negative argument");
  Scalar result(1);
  for (int k = 2; k <= n; ++k) result *= Scalar(k);
  return result;
}

/// K_n: ones on the superdiagonal.
template <typename Scalar = double>
Matrix<Scalar> shift_matrix(Index n) {
  detail::require_dimension(n, "shift_matrix");
  Matrix<Scalar> k = Matrix<Scalar>::Zero(n, n);
  for (Index i = 0; i + 1 < n; ++i) k(i, i + 1) = Scalar(1);
  return k;
}

/// E_n = exp(K_n); entry (i, j) = 1/(j - i)! on and above the diagonal.
template <typename Scalar = double>
Matrix<Scalar> exp_shift_matrix(Index n) {
  detail::require_dimension(n, "exp_shift_matrix");
  Matrix<Scalar> e = Matrix<Scalar>::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) e(i, j) = Scalar(1) / factorial<Scalar>(int(j - i));
  return e;
}

/// H_n: entry (i, j) = 1/(j - i + 1)! for j >= i - 1, so the subdiagonal is one.
template <typename Scalar = double>
Matrix<Scalar> hess_matrix(Index n) {
  detail::require_dimension(n, "hess_matrix");
  Matrix<Scalar> h = Matrix<Scalar>::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = std::max<Index>(i - 1, 0); j < n; ++j)
      h(i, j) = Scalar(1) / factorial<Scalar>(int(j - i + 1));
  return h;
}

/// phi_1(K_n) = sum_k K_n^k / (k+1)!; upper triangular with 1/(j - i + 1)!.
template <typename Scalar = double>
Matrix<Scalar> phi1_matrix(Index n) {
  detail::require_dimension(n, "phi1_matrix");
  Matrix<Scalar> phi = Matrix<Scalar>::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) phi(i, j) = Scalar(1) / factorial<Scalar>(int(j - i + 1));
  return phi;
}

/// C_n = [1, c, c^2/2, ..., c^(n-1)/(n-1)!], one row per abscissa.
template <typename Scalar = double>
Matrix<Scalar> scaled_vandermonde(const Vector<Scalar>& c, Index n) {
  detail::require_dimension(n, "scaled_vandermonde");
  if (c.size() < 1) throw std::invalid_argument("scaled_vandermonde: empty abscissae");
  Matrix<Scalar> v(c.size(), n);
  for (Index i = 0; i < c.size(); ++i) {
    Scalar term(1);
    v(i, 0) = term;
    for (Index j = 1; j < n; ++j) {
      term = term * c(i) / Scalar(int(j));
      v(i, j) = term;
    }
  }
  return v;
}

/// m-th derivative of the degree-n Laguerre polynomial
/// L_n(x) = sum_i binom(n, i) (-x)^i / i!, evaluated from the closed-form sum.
/// Returns zero once m exceeds the degree.
template <typename Scalar = double>
Scalar laguerre_derivative(int n, int m, const Scalar& x) {
  if (n < 0 || m < 0) throw std::invalid_argument("laguerre_derivative: negative degree or order");
  if (m > n) return Scalar(0);
  using Acc = detail::accumulator_t<Scalar>;
  const Acc xa = Acc(x);
  // Horner over i = m..n of binom(n, i) (-1)^i x^(i-m) / (i-m)!.
  Acc sum(0);
  for (int i = n; i >= m; --i) {
    Acc binom(1);
    for (int k = 1; k <= i; ++k) binom = binom * Acc(n - i + k) / Acc(k);
    Acc coeff = binom / factorial<Acc>(i - m);
    if (i % 2 != 0) coeff = -coeff;
    sum = sum * xa + coeff;
  }
  return Scalar(sum);
}

/// M * A^{-1} through an LU solve on A^T; no inverse is formed.
template <typename Derived, typename DerivedA>
auto right_solve(const Eigen::MatrixBase<Derived>& m, const Eigen::MatrixBase<DerivedA>& a) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> at = a.transpose();
  Matrix<Scalar> mt = m.transpose();
  Matrix<Scalar> x = at.partialPivLu().solve(mt);
  return Matrix<Scalar>(x.transpose());
}

/// Throws unless all abscissae are pairwise distinct and finite.
template <typename Scalar>
void require_distinct(const Vector<Scalar>& c, const char* what) {
  using std::isfinite;
  for (Index i = 0; i < c.size(); ++i) {
    if (!isfinite(c(i))) throw std::invalid_argument(std::string(what) + ": non-finite abscissa");
    for (Index j = i + 1; j < c.size(); ++j)
      if (c(i) == c(j))
        throw std::invalid_argument(std::string(what) +
                                    ": duplicate abscissae (confluent method)");
  }
}

}  // namespace pimex
