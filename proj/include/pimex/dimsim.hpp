#pragma once

// Parallel IMEX DIMSIMs with p = q = r = s. The implicit base is Butcher's
// type 4 DIMSIM with perfect damping at infinity; the explicit partner is
// then fixed by the coupled order conditions. In the transformed basis
// (T^{-1} X T):
//
//   Vbar     = e_1 v^T
//   Bbar     = H_s - Vbar K_s^T                            (explicit, lambda = 0)
//   Bhat_bar = H_s - lambda E_s + Vbar (lambda I - K_s^T)  (implicit)

#include "pimex/abscissae.hpp"
#include "pimex/tableau.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <tuple>
#include <stdexcept>
#include <vector>

namespace pimex {

struct DimsimSpec {
  int order = 2;
  AbscissaeChoice abscissae = AbscissaeChoice::unit_interval;
  std::vector<double> custom_abscissae;
  /// Skips the Laguerre root; the stiff damping property then no longer holds.
  std::optional<double> lambda_override;
};

inline constexpr int kDimsimMinOrder = 2;
inline constexpr int kDimsimMaxOrder = 10;

/// Tabulated L-stable roots (order 9 has no L-stable choice; the listed value
/// is still a root). Used to select and seed the Newton polish.
inline double dimsim_reference_lambda(int s) {
  static constexpr std::array<double, 9> table = {0.633975, 1.21014, 0.872421, 1.30128, 1.80569,
                                                  1.35220,  1.73680, 1.38470,  1.69561};
  if (s < kDimsimMinOrder || s > kDimsimMaxOrder)
    throw std::invalid_argument("DIMSIM order must be in [2, 10], got " + std::to_string(s));
  return table[std::size_t(s - kDimsimMinOrder)];
}

/// lambda solving L'_{s+1}((s+1)/lambda) = 0, polished by Newton in
/// x = (s+1)/lambda from the tabulated value.
template <typename Scalar = double>
Scalar find_dimsim_lambda(int s) {
  using std::abs;
  const double reference = dimsim_reference_lambda(s);
  const int n = s + 1;
  Scalar x = Scalar(n) / Scalar(reference);
  const Scalar step_tol = std::numeric_limits<Scalar>::epsilon() * Scalar(16);
  bool converged = false;
  for (int it = 0; it < 100; ++it) {
    const Scalar d1 = laguerre_derivative<Scalar>(n, 1, x);
    const Scalar d2 = laguerre_derivative<Scalar>(n, 2, x);
    if (d2 == Scalar(0)) break;
    const Scalar dx = d1 / d2;
    x -= dx;
    if (abs(dx) <= step_tol * (Scalar(1) + abs(x))) {
      converged = true;
      break;
    }
  }
  if (!converged) throw std::runtime_error("find_dimsim_lambda: Newton did not converge");
  const Scalar residual = abs(laguerre_derivative<Scalar>(n, 1, x));
  if (residual >= Scalar(1e-10))
    throw std::runtime_error("find_dimsim_lambda: root residual too large");
  const Scalar lambda = Scalar(n) / x;
  if (abs(lambda - Scalar(reference)) > Scalar(1e-5) * Scalar(reference))
    throw std::runtime_error("find_dimsim_lambda: polished root left the reference root");
  return lambda;
}

/// First row of Vbar:
/// v_i = (-1)^{s+1} (s-i+2)/(s+1) lambda^{i-1} L_{s+1}^{(s-i+2)}((s+1)/lambda).
template <typename Scalar = double>
RowVector<Scalar> dimsim_vbar(int s, const Scalar& lambda) {
  if (s < 1) throw std::invalid_argument("dimsim_vbar: order must be >= 1");
  if (!(lambda > Scalar(0))) throw std::invalid_argument("dimsim_vbar: lambda must be positive");
  const int n = s + 1;
  const Scalar x = Scalar(n) / lambda;
  const Scalar sign = (n % 2 == 0) ? Scalar(1) : Scalar(-1);
  RowVector<Scalar> v(s);
  Scalar lambda_pow(1);
  for (int i = 1; i <= s; ++i) {
    v(i - 1) = sign * Scalar(s - i + 2) / Scalar(n) * lambda_pow *
               laguerre_derivative<Scalar>(n, s - i + 2, x);
    lambda_pow *= lambda;
  }
  return v;
}

/// T(i, j) = P^{(s-j)}(c_i) (0-based j), P(x) = prod_i (x - c_i) / s!.
template <typename Scalar = double>
Matrix<Scalar> dimsim_transform(const Vector<Scalar>& c) {
  require_distinct(c, "dimsim_transform");
  const Index s = c.size();
  // Monomial coefficients of prod (x - c_i), lowest degree first.
  std::vector<Scalar> coeffs{Scalar(1)};
  for (Index i = 0; i < s; ++i) {
    std::vector<Scalar> next(coeffs.size() + 1, Scalar(0));
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      next[k + 1] += coeffs[k];
      next[k] -= c(i) * coeffs[k];
    }
    coeffs = std::move(next);
  }
  const Scalar s_fact = factorial<Scalar>(int(s));
  for (auto& a : coeffs) a /= s_fact;

  auto derivative = [&](int m, const Scalar& x) {
    Scalar sum(0);
    for (int k = int(coeffs.size()) - 1; k >= m; --k) {
      const Scalar falling = factorial<Scalar>(k) / factorial<Scalar>(k - m);
      sum = sum * x + coeffs[std::size_t(k)] * falling;
    }
    return sum;
  };

  Matrix<Scalar> t(s, s);
  for (Index i = 0; i < s; ++i)
    for (Index j = 0; j < s; ++j) t(i, j) = derivative(int(s - j), c(i));

  const Eigen::FullPivLU<Matrix<Scalar>> lu(t);
  if (!lu.isInvertible()) throw std::runtime_error("dimsim_transform: singular transform");
  return t;
}

template <typename Scalar = double>
BasicTableau<Scalar> build_parallel_imex_dimsim(const DimsimSpec& spec) {
  const int s = spec.order;
  if (s < kDimsimMinOrder || s > kDimsimMaxOrder)
    throw std::invalid_argument("DIMSIM order must be in [2, 10], got " + std::to_string(s));

  const Scalar lambda =
      spec.lambda_override ? Scalar(*spec.lambda_override) : find_dimsim_lambda<Scalar>(s);
  const Vector<Scalar> c = make_abscissae<Scalar>(s, spec.abscissae, spec.custom_abscissae);
  const Matrix<Scalar> t = dimsim_transform<Scalar>(c);

  const Matrix<Scalar> eye = Matrix<Scalar>::Identity(s, s);
  const Matrix<Scalar> kt = shift_matrix<Scalar>(s).transpose();
  const Matrix<Scalar> h = hess_matrix<Scalar>(s);
  Matrix<Scalar> vbar = Matrix<Scalar>::Zero(s, s);
  vbar.row(0) = dimsim_vbar<Scalar>(s, lambda);

  const Matrix<Scalar> b_bar = h - vbar * kt;
  const Matrix<Scalar> bhat_bar = h - lambda * exp_shift_matrix<Scalar>(s) + vbar * (lambda * eye - kt);

  BasicTableau<Scalar> out;
  out.family = Family::dimsim;
  out.s = out.r = out.p = out.q = s;
  out.lambda = lambda;
  out.c = c;
  out.A = Matrix<Scalar>::Zero(s, s);
  out.Ahat = lambda * eye;
  out.U = eye;
  out.B = right_solve(Matrix<Scalar>(t * b_bar), t);
  out.Bhat = right_solve(Matrix<Scalar>(t * bhat_bar), t);
  out.V = right_solve(Matrix<Scalar>(t * vbar), t);
  std::tie(out.W, out.What) = taylor_weights_parallel<Scalar>(c, lambda, s);
  return out;
}

/// Largest |entry| of B, Bhat and V at the tabulated lambda.
template <typename Scalar = double>
Scalar dimsim_max_coefficient(int s, AbscissaeChoice choice) {
  DimsimSpec spec;
  spec.order = s;
  spec.abscissae = choice;
  return build_parallel_imex_dimsim<Scalar>(spec).max_coefficient();
}

}  // namespace pimex
