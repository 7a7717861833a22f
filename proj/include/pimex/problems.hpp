#pragma once

// Benchmark problems as partitioned systems y' = f(y) + g(y).

#include "pimex/integrator.hpp"

#include <complex>

namespace pimex {

/// Singularly perturbed cusp catastrophe with periodic diffusion on [0, 1].
struct CuspConfig {
  int N = 32;
  double eps = 1e-4;
  double sigma = 1.0 / 144.0;
  double t0 = 0.0;
  double tf = 1.1;
};

/// Layout [y_1..y_N, a_1..a_N, b_1..b_N] at x_i = i/N. g holds the diffusion
/// of all three fields and -(y^3 + a y + b)/eps; f holds the rest.
PartitionedSystem cusp_system(const CuspConfig& cfg = {});

/// u_t = alpha lap u + beta (u - u^3) + s on the unit square with Dirichlet
/// data and source manufactured from u = 2 + sin(2 pi (x - t)) cos(3 pi (y - t)).
struct AllenCahnConfig {
  int N = 32;
  double alpha = 0.1;
  double beta = 3.0;
  double t0 = 0.0;
  double tf = 1.0;
};

double allen_cahn_exact(double t, double x, double y);

/// Five-point differences on the (N-2)^2 interior nodes of an N x N grid,
/// node (i, j) at index (j-1)(N-2) + (i-1). Time is appended as the last
/// state entry (f-component 1, g-component 0) so the system is autonomous.
/// g = alpha lap_h u + boundary forcing; f = beta (u - u^3) + s_h(t), where
/// s_h makes the exact nodal values an exact solution of the semi-discrete
/// system.
PartitionedSystem allen_cahn_system(const AllenCahnConfig& cfg = {});

/// y' = xi y + xihat y with f = xi y and g = xihat y. Real xi and xihat give
/// a scalar system; otherwise y is stored as (Re y, Im y).
PartitionedSystem linear_test(std::complex<double> xi, std::complex<double> xihat,
                              std::complex<double> y0 = 1.0, double t0 = 0.0, double tf = 1.0);

}  // namespace pimex
