#pragma once

// Parallel ensemble IMEX Euler: s copies of IMEX Euler advanced from
// staggered states, recombined so that p = q = r = s. With A = 0,
// Ahat = lambda I and U = V = I the order conditions fix
//
//   B    = C_s phi_1(K_s) C_s^{-1}
//   Bhat = C_s phi_1(K_s) (I - lambda K_s) C_s^{-1}

#include "pimex/abscissae.hpp"
#include "pimex/tableau.hpp"

#include <tuple>
#include <vector>

namespace pimex {

struct EnsembleSpec {
  int order = 2;
  AbscissaeChoice abscissae = AbscissaeChoice::unit_interval;
  std::vector<double> custom_abscissae;
  double lambda = 1.0;
};

template <typename Scalar = double>
BasicTableau<Scalar> build_parallel_ensemble(const EnsembleSpec& spec) {
  const int s = spec.order;
  if (s < 1) throw std::invalid_argument("ensemble order must be >= 1");
  const Scalar lambda(spec.lambda);
  const Vector<Scalar> c = make_abscissae<Scalar>(s, spec.abscissae, spec.custom_abscissae);
  const Matrix<Scalar> cs = scaled_vandermonde<Scalar>(c, s);
  const Matrix<Scalar> cs_phi = cs * phi1_matrix<Scalar>(s);
  const Matrix<Scalar> eye = Matrix<Scalar>::Identity(s, s);

  BasicTableau<Scalar> out;
  out.family = Family::ensemble;
  out.s = out.r = out.p = out.q = s;
  out.lambda = lambda;
  out.c = c;
  out.A = Matrix<Scalar>::Zero(s, s);
  out.Ahat = lambda * eye;
  out.U = eye;
  out.V = eye;
  out.B = right_solve(cs_phi, cs);
  out.Bhat = right_solve(Matrix<Scalar>(cs_phi * (eye - lambda * shift_matrix<Scalar>(s))), cs);
  std::tie(out.W, out.What) = taylor_weights_parallel<Scalar>(c, lambda, s);
  return out;
}

/// Largest |entry| of B and Bhat with lambda = 1.
template <typename Scalar = double>
Scalar ensemble_max_coefficient(int s, AbscissaeChoice choice) {
  EnsembleSpec spec;
  spec.order = s;
  spec.abscissae = choice;
  const auto t = build_parallel_ensemble<Scalar>(spec);
  return std::max<Scalar>(t.B.cwiseAbs().maxCoeff(), t.Bhat.cwiseAbs().maxCoeff());
}

}  // namespace pimex
