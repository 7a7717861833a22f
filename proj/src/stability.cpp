#include "pimex/stability.hpp"

#include "pimex/worker_pool.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace pimex {

std::vector<StiffProbe> sector_probes(double alpha) {
  if (!(alpha >= 0.0 && alpha <= std::numbers::pi / 2 + 1e-15))
    throw std::invalid_argument("sector angle must lie in [0, pi/2]");
  std::vector<StiffProbe> probes;
  for (int k = -2; k <= 6; ++k) {
    const double modulus = std::pow(10.0, k);
    for (double theta : {0.0, alpha / 2, alpha})
      for (double sign : {1.0, -1.0})
        probes.push_back({-modulus * std::polar(1.0, sign * theta), false});
  }
  std::stable_sort(probes.begin(), probes.end(), [](const StiffProbe& a, const StiffProbe& b) {
    return std::abs(a.value) < std::abs(b.value);
  });
  probes.push_back({{}, true});
  return probes;
}

double GridSpec::re_at(int i) const {
  return re_points == 1 ? re_min : re_min + (re_max - re_min) * double(i) / double(re_points - 1);
}

double GridSpec::im_at(int j) const {
  return im_points == 1 ? im_min : im_min + (im_max - im_min) * double(j) / double(im_points - 1);
}

double GridSpec::cell_area() const {
  const double dre = re_points > 1 ? (re_max - re_min) / double(re_points - 1) : 0.0;
  const double dim = im_points > 1 ? (im_max - im_min) / double(im_points - 1) : 0.0;
  return dre * dim;
}

namespace {

void check_grid(const GridSpec& grid) {
  if (grid.re_points < 1 || grid.im_points < 1)
    throw std::invalid_argument("stability grid is empty");
  if (!(grid.re_max > grid.re_min) || !(grid.im_max > grid.im_min))
    throw std::invalid_argument("stability grid ranges must be increasing");
}

// Per-tableau constants reused at every grid point.
struct ParallelPieces {
  ComplexMatrix<double> v, bu, bhu, at_infinity;
  double lambda;
  bool parallel;
};

ParallelPieces pieces_for(const ImexGlmTableau& t) {
  using C = std::complex<double>;
  ParallelPieces p;
  p.parallel = t.has_parallel_structure();
  p.lambda = t.lambda;
  p.v = t.V.cast<C>();
  p.bu = (t.B * t.U).cast<C>();
  p.bhu = (t.Bhat * t.U).cast<C>();
  p.at_infinity = stability_matrix(t, StabilityQuery<double>::stiff_limit({}));
  return p;
}

bool stable_with(const ImexGlmTableau& t, const ParallelPieces& pieces, std::complex<double> w,
                 const std::vector<StiffProbe>& probes, double tol) {
  using C = std::complex<double>;
  for (const auto& probe : probes) {
    ComplexMatrix<double> m;
    if (pieces.parallel) {
      if (probe.infinite) {
        m = pieces.at_infinity;
      } else {
        const C denom = C(1) - pieces.lambda * probe.value;
        m = pieces.v + (w / denom) * pieces.bu + (probe.value / denom) * pieces.bhu;
      }
    } else {
      m = probe.infinite ? stability_matrix(t, StabilityQuery<double>::stiff_limit(w))
                         : stability_matrix(t, StabilityQuery<double>::finite(w, probe.value));
    }
    if (!(spectral_radius(m) < 1.0 - tol)) return false;
  }
  return true;
}

}  // namespace

bool is_stable_point(const ImexGlmTableau& t, std::complex<double> w,
                     const std::vector<StiffProbe>& probes, double tol) {
  return stable_with(t, pieces_for(t), w, probes, tol);
}

StabilityGrid constrained_region(const ImexGlmTableau& t, double alpha, const GridSpec& grid,
                                 std::vector<StiffProbe> probes, int workers) {
  check_grid(grid);
  if (!(alpha >= 0.0 && alpha <= std::numbers::pi / 2 + 1e-15))
    throw std::invalid_argument("sector angle must lie in [0, pi/2]");
  const ParallelPieces pieces = pieces_for(t);

  StabilityGrid out;
  out.alpha = alpha;
  out.grid = grid;
  out.probes = std::move(probes);
  out.verdicts.assign(std::size_t(grid.re_points) * std::size_t(grid.im_points), 0);

  WorkerPool pool(std::size_t(std::max(workers, 1)));
  pool.parallel_for(std::size_t(grid.im_points), [&](std::size_t j) {
    const double im = grid.im_at(int(j));
    for (int i = 0; i < grid.re_points; ++i) {
      const std::complex<double> w(grid.re_at(i), im);
      out.verdicts[j * std::size_t(grid.re_points) + std::size_t(i)] =
          stable_with(t, pieces, w, out.probes, kPowerBoundTolerance) ? 1 : 0;
    }
  });
  out.stable_cells = long(std::count(out.verdicts.begin(), out.verdicts.end(), 1));
  return out;
}

StabilityGrid constrained_region(const ImexGlmTableau& t, double alpha, const GridSpec& grid,
                                 int workers) {
  return constrained_region(t, alpha, grid, sector_probes(alpha), workers);
}

std::vector<StabilityGrid> constrained_regions(const ImexGlmTableau& t,
                                               std::vector<double> alphas, const GridSpec& grid,
                                               int workers) {
  std::vector<StabilityGrid> out;
  out.reserve(alphas.size());
  for (double alpha : alphas) {
    std::vector<StiffProbe> probes;
    for (double other : alphas) {
      if (other > alpha) continue;
      auto extra = sector_probes(other);
      extra.pop_back();  // stiff limit added once below
      probes.insert(probes.end(), extra.begin(), extra.end());
    }
    std::stable_sort(probes.begin(), probes.end(), [](const StiffProbe& a, const StiffProbe& b) {
      return std::abs(a.value) < std::abs(b.value);
    });
    probes.push_back({{}, true});
    out.push_back(constrained_region(t, alpha, grid, std::move(probes), workers));
  }
  return out;
}

void write_region_csv(std::ostream& out, const StabilityGrid& region) {
  const auto& g = region.grid;
  out << "re,im,stable\n";
  char buf[96];
  for (int j = 0; j < g.im_points; ++j)
    for (int i = 0; i < g.re_points; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", g.re_at(i), g.im_at(j),
                    region.stable(i, j) ? 1 : 0);
      out << buf;
    }
  std::snprintf(buf, sizeof buf, "# alpha=%.17g area=%.17g stable_cells=%ld\n", region.alpha,
                region.area(), region.stable_cells);
  out << buf;
}

}  // namespace pimex
