#pragma once

// Linear stability of IMEX GLMs on y' = xi y + xihat y with w = h xi and
// what = h xihat:
//
//   M(w, what) = V + (w B + what Bhat)(I - w A - what Ahat)^{-1} U.

#include "pimex/tableau.hpp"

#include <complex>
#include <iosfwd>
#include <stdexcept>
#include <vector>

namespace pimex {

template <typename Scalar = double>
using ComplexMatrix = Matrix<std::complex<Scalar>>;

/// A point (w, what); what may be the infinitely stiff limit.
template <typename Scalar = double>
struct StabilityQuery {
  std::complex<Scalar> w{};
  std::complex<Scalar> what{};
  bool what_is_infinite = false;

  static StabilityQuery finite(std::complex<Scalar> w, std::complex<Scalar> what) {
    return {w, what, false};
  }
  static StabilityQuery stiff_limit(std::complex<Scalar> w) { return {w, {}, true}; }
};

class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluates the defining formula with a dense LU solve. At what = infinity
/// returns the limit V - Bhat Ahat^{-1} U.
template <typename Scalar>
ComplexMatrix<Scalar> stability_matrix_generic(const BasicTableau<Scalar>& t,
                                               const StabilityQuery<Scalar>& q) {
  using C = std::complex<Scalar>;
  const ComplexMatrix<Scalar> v = t.V.template cast<C>();
  const ComplexMatrix<Scalar> u = t.U.template cast<C>();
  if (q.what_is_infinite) {
    const Eigen::FullPivLU<ComplexMatrix<Scalar>> lu(t.Ahat.template cast<C>());
    if (!lu.isInvertible())
      throw StabilityError("stability_matrix: stiff limit needs an invertible Ahat");
    // Bhat Ahat^{-1} U
    const ComplexMatrix<Scalar> bhat = t.Bhat.template cast<C>();
    return v - right_solve(bhat, t.Ahat.template cast<C>()) * u;
  }
  const Index s = t.s;
  const ComplexMatrix<Scalar> x = ComplexMatrix<Scalar>::Identity(s, s) -
                                  q.w * t.A.template cast<C>() -
                                  q.what * t.Ahat.template cast<C>();
  const Eigen::FullPivLU<ComplexMatrix<Scalar>> lu(x);
  if (!lu.isInvertible()) throw StabilityError("stability_matrix: I - w A - what Ahat is singular");
  const ComplexMatrix<Scalar> z = lu.solve(u);
  return v + (q.w * t.B.template cast<C>() + q.what * t.Bhat.template cast<C>()) * z;
}

/// Parallel methods (A = 0, Ahat = lambda I):
/// M = V + w/(1 - lambda what) B U + what/(1 - lambda what) Bhat U, and
/// M(w, infinity) = V - Bhat U / lambda.
template <typename Scalar>
ComplexMatrix<Scalar> stability_matrix_parallel(const BasicTableau<Scalar>& t,
                                                const StabilityQuery<Scalar>& q) {
  using C = std::complex<Scalar>;
  const ComplexMatrix<Scalar> v = t.V.template cast<C>();
  const ComplexMatrix<Scalar> bu = (t.B * t.U).template cast<C>();
  const ComplexMatrix<Scalar> bhu = (t.Bhat * t.U).template cast<C>();
  if (q.what_is_infinite) {
    if (t.lambda == Scalar(0)) throw StabilityError("stability_matrix: lambda = 0 at stiff limit");
    return v - bhu / C(t.lambda);
  }
  const C denom = C(1) - C(t.lambda) * q.what;
  if (denom == C(0)) throw StabilityError("stability_matrix: 1 - lambda what = 0");
  return v + (q.w / denom) * bu + (q.what / denom) * bhu;
}

template <typename Scalar>
ComplexMatrix<Scalar> stability_matrix(const BasicTableau<Scalar>& t,
                                       const StabilityQuery<Scalar>& q) {
  return t.has_parallel_structure() ? stability_matrix_parallel(t, q)
                                    : stability_matrix_generic(t, q);
}

template <typename Scalar>
Vector<std::complex<Scalar>> eigenvalues(const ComplexMatrix<Scalar>& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eigenvalues: matrix must be square");
  const Eigen::ComplexEigenSolver<ComplexMatrix<Scalar>> solver(m, false);
  if (solver.info() != Eigen::Success)
    throw StabilityError("eigenvalues: eigensolver did not converge");
  return solver.eigenvalues();
}

/// max |eigenvalue| from a dense eigensolver.
template <typename Scalar>
Scalar spectral_radius(const ComplexMatrix<Scalar>& m) {
  return eigenvalues(m).cwiseAbs().maxCoeff();
}

template <typename Scalar>
Scalar spectral_radius(const Matrix<Scalar>& m) {
  return spectral_radius(ComplexMatrix<Scalar>(m.template cast<std::complex<Scalar>>()));
}

// ---------------------------------------------------------------------------
// Constrained nonstiff stability region

/// Stiff probe what; infinite marks the stiff limit.
struct StiffProbe {
  std::complex<double> value{};
  bool infinite = false;
};

/// The sector probe set {inf} U {-10^k e^{+-i theta} : k = -2..6,
/// theta in {0, alpha/2, alpha}}, ordered by increasing modulus with the
/// stiff limit last.
std::vector<StiffProbe> sector_probes(double alpha);

struct GridSpec {
  double re_min = -6.0;
  double re_max = 1.0;
  double im_min = -3.5;
  double im_max = 3.5;
  int re_points = 401;
  int im_points = 401;

  double re_at(int i) const;
  double im_at(int j) const;
  double cell_area() const;
};

struct StabilityGrid {
  double alpha = 0.0;
  GridSpec grid;
  std::vector<StiffProbe> probes;
  /// verdicts[j * re_points + i] for point (re_at(i), im_at(j)).
  std::vector<unsigned char> verdicts;
  long stable_cells = 0;

  bool stable(int i, int j) const {
    return verdicts[std::size_t(j) * std::size_t(grid.re_points) + std::size_t(i)] != 0;
  }
  double area() const { return double(stable_cells) * grid.cell_area(); }
};

inline constexpr double kPowerBoundTolerance = 1e-9;

/// True iff rho(M(w, what)) < 1 - tol for every probe.
bool is_stable_point(const ImexGlmTableau& t, std::complex<double> w,
                     const std::vector<StiffProbe>& probes, double tol = kPowerBoundTolerance);

/// Scans the w-plane grid with the sector probes for alpha (radians, in
/// [0, pi/2]). Rows are distributed over `workers` threads; verdicts do not
/// depend on scheduling.
StabilityGrid constrained_region(const ImexGlmTableau& t, double alpha, const GridSpec& grid,
                                 int workers = 1);

/// Same scan with an explicit probe set.
StabilityGrid constrained_region(const ImexGlmTableau& t, double alpha, const GridSpec& grid,
                                 std::vector<StiffProbe> probes, int workers = 1);

/// Regions for several sector angles. The probe set of each angle also
/// contains the probes of every smaller angle in the list, so the regions
/// nest cellwise.
std::vector<StabilityGrid> constrained_regions(const ImexGlmTableau& t,
                                               std::vector<double> alphas, const GridSpec& grid,
                                               int workers = 1);

/// CSV "re,im,stable", one row per grid point, then a "# ..." area summary row.
void write_region_csv(std::ostream& out, const StabilityGrid& region);

}  // namespace pimex
