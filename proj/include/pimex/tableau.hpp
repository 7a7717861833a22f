#pragma once

#include "pimex/matkernels.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace pimex {

enum class Family { dimsim, ensemble, external };

inline std::string_view to_string(Family family) {
  switch (family) {
    case Family::dimsim: return "dimsim";
    case Family::ensemble: return "ensemble";
    case Family::external: return "external";
  }
  return "unknown";
}

class TableauError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Family parse_family(std::string_view text) {
  if (text == "dimsim") return Family::dimsim;
  if (text == "ensemble") return Family::ensemble;
  if (text == "external") return Family::external;
  throw TableauError("unknown family '" + std::string(text) + "'");
}

/// Coefficients of an IMEX general linear method
///
///   c | A  Ahat U
///   --+-----------
///     | B  Bhat V
///
/// with s internal and r external stages, order p and stage order q. W and
/// What hold the Taylor weights of the external stages (r x (p+1)).
template <typename Scalar = double>
struct BasicTableau {
  int s = 0;
  int r = 0;
  int p = 0;
  int q = 0;
  Scalar lambda{0};
  Vector<Scalar> c;
  Matrix<Scalar> A, Ahat, U;
  Matrix<Scalar> B, Bhat, V;
  Matrix<Scalar> W, What;
  Family family = Family::external;

  template <typename To>
  BasicTableau<To> cast() const {
    BasicTableau<To> out;
    out.s = s;
    out.r = r;
    out.p = p;
    out.q = q;
    out.lambda = To(lambda);
    out.c = c.template cast<To>();
    out.A = A.template cast<To>();
    out.Ahat = Ahat.template cast<To>();
    out.U = U.template cast<To>();
    out.B = B.template cast<To>();
    out.Bhat = Bhat.template cast<To>();
    out.V = V.template cast<To>();
    out.W = W.template cast<To>();
    out.What = What.template cast<To>();
    out.family = family;
    return out;
  }

  /// Largest |entry| of B, Bhat and V.
  Scalar max_coefficient() const {
    Scalar m = B.cwiseAbs().maxCoeff();
    m = std::max<Scalar>(m, Bhat.cwiseAbs().maxCoeff());
    m = std::max<Scalar>(m, V.cwiseAbs().maxCoeff());
    return m;
  }

  /// Largest |entry| over every coefficient block.
  Scalar max_abs_entry() const {
    Scalar m = max_coefficient();
    for (const auto* block : {&A, &Ahat, &U})
      if (block->size() > 0) m = std::max<Scalar>(m, block->cwiseAbs().maxCoeff());
    return m;
  }

  /// A = 0 and Ahat = lambda I (type 3 explicit paired with type 4 implicit).
  bool has_parallel_structure(double tol = 0.0) const {
    using std::abs;
    if (A.rows() != s || A.cols() != s || Ahat.rows() != s || Ahat.cols() != s) return false;
    const Scalar scale = Scalar(tol) * (Scalar(1) + abs(lambda));
    for (Index i = 0; i < s; ++i)
      for (Index j = 0; j < s; ++j) {
        if (abs(A(i, j)) > scale) return false;
        const Scalar expect = i == j ? lambda : Scalar(0);
        if (abs(Ahat(i, j) - expect) > scale) return false;
      }
    return true;
  }
};

using ImexGlmTableau = BasicTableau<double>;

/// Taylor weights of a parallel method with U = I and p = q:
/// W = C_{p+1}, What = C_{p+1} - lambda C_{p+1} K_{p+1}.
template <typename Scalar>
std::pair<Matrix<Scalar>, Matrix<Scalar>> taylor_weights_parallel(const Vector<Scalar>& c,
                                                                  const Scalar& lambda, int p) {
  if (p < 0) throw std::invalid_argument("taylor_weights_parallel: negative order");
  Matrix<Scalar> w = scaled_vandermonde<Scalar>(c, p + 1);
  Matrix<Scalar> what = w - lambda * w * shift_matrix<Scalar>(p + 1);
  return {std::move(w), std::move(what)};
}

template <typename Scalar = double>
struct OrderConditionResidual {
  Matrix<Scalar> internal_explicit;
  Matrix<Scalar> internal_implicit;
  Matrix<Scalar> external_explicit;
  Matrix<Scalar> external_implicit;
  Scalar max_abs{0};

  static constexpr std::array<std::string_view, 4> block_names = {
      "internal_explicit", "internal_implicit", "external_explicit", "external_implicit"};

  std::array<Scalar, 4> block_max() const {
    auto mx = [](const Matrix<Scalar>& m) {
      return m.size() == 0 ? Scalar(0) : Scalar(m.cwiseAbs().maxCoeff());
    };
    return {mx(internal_explicit), mx(internal_implicit), mx(external_explicit),
            mx(external_implicit)};
  }

  std::string_view worst_block() const {
    const auto m = block_max();
    std::size_t k = 0;
    for (std::size_t i = 1; i < m.size(); ++i)
      if (m[i] > m[k]) k = i;
    return block_names[k];
  }
};

namespace detail {

template <typename Scalar>
void require_shape(const Matrix<Scalar>& m, Index rows, Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols)
    throw TableauError(std::string("dimension mismatch: ") + name + " is " +
                       std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ", expected " +
                       std::to_string(rows) + "x" + std::to_string(cols));
}

}  // namespace detail

/// Checks the block dimensions implied by (s, r, p, q).
template <typename Scalar>
void check_dimensions(const BasicTableau<Scalar>& t) {
  if (t.s < 1 || t.r < 1) throw TableauError("dimension mismatch: s and r must be >= 1");
  if (t.p < 0 || t.q < 0 || t.q > t.p) throw TableauError("invalid orders: need 0 <= q <= p");
  if (t.c.size() != t.s) throw TableauError("dimension mismatch: c must have s entries");
  detail::require_shape(t.A, t.s, t.s, "A");
  detail::require_shape(t.Ahat, t.s, t.s, "Ahat");
  detail::require_shape(t.U, t.s, t.r, "U");
  detail::require_shape(t.B, t.r, t.s, "B");
  detail::require_shape(t.Bhat, t.r, t.s, "Bhat");
  detail::require_shape(t.V, t.r, t.r, "V");
  detail::require_shape(t.W, t.r, t.p + 1, "W");
  detail::require_shape(t.What, t.r, t.p + 1, "What");
}

/// Residuals of the compact order conditions, evaluated exactly as written:
///
///   C_{q+1} - A    C_{q+1} K_{q+1} - U W_{:,0:q}
///   C_{q+1} - Ahat C_{q+1} K_{q+1} - U What_{:,0:q}
///   W    E_{p+1} - B    C_{p+1} K_{p+1} - V W
///   What E_{p+1} - Bhat C_{p+1} K_{p+1} - V What
///
/// All four blocks vanish iff the method has order p and stage order q.
template <typename Scalar>
OrderConditionResidual<Scalar> verify_order_conditions(const BasicTableau<Scalar>& t) {
  check_dimensions(t);
  const Index q1 = t.q + 1;
  const Index p1 = t.p + 1;
  const Matrix<Scalar> cq = scaled_vandermonde<Scalar>(t.c, q1);
  const Matrix<Scalar> cq_k = cq * shift_matrix<Scalar>(q1);
  const Matrix<Scalar> cp_k = scaled_vandermonde<Scalar>(t.c, p1) * shift_matrix<Scalar>(p1);
  const Matrix<Scalar> e = exp_shift_matrix<Scalar>(p1);

  OrderConditionResidual<Scalar> res;
  res.internal_explicit = cq - t.A * cq_k - t.U * t.W.leftCols(q1);
  res.internal_implicit = cq - t.Ahat * cq_k - t.U * t.What.leftCols(q1);
  res.external_explicit = t.W * e - t.B * cp_k - t.V * t.W;
  res.external_implicit = t.What * e - t.Bhat * cp_k - t.V * t.What;
  Scalar m(0);
  for (const auto& b : res.block_max()) m = std::max<Scalar>(m, b);
  res.max_abs = m;
  return res;
}

/// Pass threshold for verify_order_conditions, scaled by the coefficient
/// magnitude: 1e-9 (1 + max |coefficient|).
template <typename Scalar>
Scalar order_condition_tolerance(const BasicTableau<Scalar>& t) {
  return Scalar(1e-9) * (Scalar(1) + t.max_abs_entry());
}

namespace detail {

// C_s E_s C_s^{-1}
template <typename Scalar>
Matrix<Scalar> conjugated_exp_shift(const Vector<Scalar>& c) {
  require_distinct(c, "conjugated_exp_shift");
  const Index s = c.size();
  const Matrix<Scalar> cs = scaled_vandermonde<Scalar>(c, s);
  return right_solve(Matrix<Scalar>(cs * exp_shift_matrix<Scalar>(s)), cs);
}

template <typename Scalar>
void require_coupling_shapes(const Matrix<Scalar>& b, const Matrix<Scalar>& v,
                             const Vector<Scalar>& c) {
  const Index s = c.size();
  if (b.rows() != s || b.cols() != s || v.rows() != s || v.cols() != s)
    throw TableauError("coupling relation needs square r = s blocks matching c");
}

}  // namespace detail

/// B = Bhat + lambda C_s E_s C_s^{-1} - lambda V: the unique explicit partner
/// of an implicit parallel base method with p = q = r = s and U = I.
template <typename Scalar>
Matrix<Scalar> explicit_from_implicit(const Matrix<Scalar>& bhat, const Matrix<Scalar>& v,
                                      const Vector<Scalar>& c, const Scalar& lambda) {
  detail::require_coupling_shapes(bhat, v, c);
  return bhat + lambda * detail::conjugated_exp_shift(c) - lambda * v;
}

/// Bhat = B - lambda C_s E_s C_s^{-1} + lambda V.
template <typename Scalar>
Matrix<Scalar> implicit_from_explicit(const Matrix<Scalar>& b, const Matrix<Scalar>& v,
                                      const Vector<Scalar>& c, const Scalar& lambda) {
  detail::require_coupling_shapes(b, v, c);
  return b - lambda * detail::conjugated_exp_shift(c) + lambda * v;
}

/// Recomputes W and What from the internal stage conditions,
/// W_{:,0:q} = U^{-1} (C_{q+1} - A C_{q+1} K_{q+1}) and likewise for What.
/// Requires a square invertible U and p = q.
template <typename Scalar>
void recompute_taylor_weights(BasicTableau<Scalar>& t) {
  if (t.p != t.q) throw TableauError("W and What must be supplied when p != q");
  if (t.U.rows() != t.U.cols())
    throw TableauError("W and What must be supplied when U is not square");
  const Index q1 = t.q + 1;
  const Matrix<Scalar> cq = scaled_vandermonde<Scalar>(t.c, q1);
  const Matrix<Scalar> cq_k = cq * shift_matrix<Scalar>(q1);
  const auto lu = t.U.partialPivLu();
  t.W = lu.solve(Matrix<Scalar>(cq - t.A * cq_k));
  t.What = lu.solve(Matrix<Scalar>(cq - t.Ahat * cq_k));
}

/// Validates the data-model invariants, throwing TableauError that names the
/// first violated one.
void validate_tableau(const ImexGlmTableau& t);

/// JSON tableau schema: {"s","r","p","q","lambda","c","A","Ahat","U","B","Bhat",
/// "V","family"} plus optional "W","What". Matrices are row-major nested arrays.
std::string write_tableau(const ImexGlmTableau& t);
ImexGlmTableau read_tableau(std::string_view text);

ImexGlmTableau load_tableau(const std::string& path);
void save_tableau(const std::string& path, const ImexGlmTableau& t);

}  // namespace pimex
