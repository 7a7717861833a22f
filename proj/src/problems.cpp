#include "pimex/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace pimex {

namespace {

using Triplet = Eigen::Triplet<double>;
constexpr double kPi = std::numbers::pi;
// Five-point stencil neighbours.
constexpr int di[4] = {-1, 1, 0, 0};
constexpr int dj[4] = {0, 0, -1, 1};

}  // namespace

// ---------------------------------------------------------------------------
// CUSP

PartitionedSystem cusp_system(const CuspConfig& cfg) {
  if (cfg.N < 3) throw std::invalid_argument("cusp: N must be >= 3");
  if (!(cfg.eps > 0.0) || !(cfg.sigma > 0.0)) throw std::invalid_argument("cusp: eps and sigma must be positive");
  if (!(cfg.tf > cfg.t0)) throw std::invalid_argument("cusp: empty time span");

  const Index n = cfg.N;
  const double diff = cfg.sigma * double(n) * double(n);  // sigma / dx^2, dx = 1/N
  const double inv_eps = 1.0 / cfg.eps;

  auto laplace = [n, diff](const State& y, Index off, State& out) {
    for (Index i = 0; i < n; ++i) {
      const Index left = i == 0 ? n - 1 : i - 1;
      const Index right = i == n - 1 ? 0 : i + 1;
      out(off + i) = diff * (y(off + left) - 2.0 * y(off + i) + y(off + right));
    }
  };

  PartitionedSystem sys;
  sys.name = "cusp";
  sys.dim = 3 * n;
  sys.output_dim = 3 * n;
  sys.t0 = cfg.t0;
  sys.tf = cfg.tf;

  sys.f = [n](const State& s) {
    State out = State::Zero(3 * n);
    for (Index i = 0; i < n; ++i) {
      const double y = s(i), a = s(n + i), b = s(2 * n + i);
      const double u = (y - 0.7) * (y - 1.3);
      const double v = u / (u + 0.1);
      out(n + i) = b + 0.07 * v;
      out(2 * n + i) = b * (1.0 - a * a) - a - 0.4 * y + 0.035 * v;
    }
    return out;
  };

  sys.g = [n, inv_eps, laplace](const State& s) {
    State out(3 * n);
    for (Index block = 0; block < 3; ++block) laplace(s, block * n, out);
    for (Index i = 0; i < n; ++i) {
      const double y = s(i), a = s(n + i), b = s(2 * n + i);
      out(i) -= inv_eps * (y * y * y + a * y + b);
    }
    return out;
  };

  sys.g_jacobian = [n, diff, inv_eps](const State& s) {
    std::vector<Triplet> entries;
    entries.reserve(std::size_t(12 * n));
    for (Index block = 0; block < 3; ++block)
      for (Index i = 0; i < n; ++i) {
        const Index row = block * n + i;
        const Index left = block * n + (i == 0 ? n - 1 : i - 1);
        const Index right = block * n + (i == n - 1 ? 0 : i + 1);
        entries.emplace_back(row, left, diff);
        entries.emplace_back(row, right, diff);
        entries.emplace_back(row, row, -2.0 * diff);
      }
    for (Index i = 0; i < n; ++i) {
      const double y = s(i), a = s(n + i);
      entries.emplace_back(i, i, -inv_eps * (3.0 * y * y + a));
      entries.emplace_back(i, n + i, -inv_eps * y);
      entries.emplace_back(i, 2 * n + i, -inv_eps);
    }
    SparseMatrix jac(3 * n, 3 * n);
    jac.setFromTriplets(entries.begin(), entries.end());  // duplicates are summed
    return jac;
  };

  sys.y0 = State::Zero(3 * n);
  for (Index i = 0; i < n; ++i) {
    const double phase = 2.0 * kPi * double(i + 1) / double(n);
    sys.y0(n + i) = -2.0 * std::cos(phase);
    sys.y0(2 * n + i) = 2.0 * std::sin(phase);
  }
  return sys;
}

// ---------------------------------------------------------------------------
// Allen-Cahn

double allen_cahn_exact(double t, double x, double y) {
  return 2.0 + std::sin(2.0 * kPi * (x - t)) * std::cos(3.0 * kPi * (y - t));
}

namespace {

double allen_cahn_exact_dt(double t, double x, double y) {
  const double px = 2.0 * kPi * (x - t), py = 3.0 * kPi * (y - t);
  return -2.0 * kPi * std::cos(px) * std::cos(py) + 3.0 * kPi * std::sin(px) * std::sin(py);
}

struct AllenCahnGrid {
  int N;
  int m;  // interior nodes per direction
  double dx;

  double coord(int i) const { return double(i) * dx; }
  Index index(int i, int j) const { return Index(j - 1) * m + Index(i - 1); }
  bool interior(int i, int j) const { return i > 0 && j > 0 && i < N - 1 && j < N - 1; }
};

}  // namespace

PartitionedSystem allen_cahn_system(const AllenCahnConfig& cfg) {
  if (cfg.N < 4) throw std::invalid_argument("allen-cahn: N must be >= 4");
  if (!(cfg.alpha > 0.0) || !(cfg.beta > 0.0)) throw std::invalid_argument("allen-cahn: alpha and beta must be positive");
  if (!(cfg.tf > cfg.t0)) throw std::invalid_argument("allen-cahn: empty time span");

  const AllenCahnGrid grid{cfg.N, cfg.N - 2, 1.0 / double(cfg.N - 1)};
  const Index nu = Index(grid.m) * grid.m;
  const double coef = cfg.alpha / (grid.dx * grid.dx);
  const double beta = cfg.beta;

  PartitionedSystem sys;
  sys.name = "allencahn";
  sys.dim = nu + 1;
  sys.output_dim = nu;
  sys.t0 = cfg.t0;
  sys.tf = cfg.tf;

  // alpha lap_h applied to interior values, with boundary values supplied by `edge`.
  auto diffusion = [grid, coef, nu](const State& u, auto&& edge) {
    State out(nu);
    for (int j = 1; j < grid.N - 1; ++j)
      for (int i = 1; i < grid.N - 1; ++i) {
        double sum = -4.0 * u(grid.index(i, j));
        for (int k = 0; k < 4; ++k) {
          const int ii = i + di[k], jj = j + dj[k];
          sum += grid.interior(ii, jj) ? u(grid.index(ii, jj)) : edge(ii, jj);
        }
        out(grid.index(i, j)) = coef * sum;
      }
    return out;
  };

  sys.g = [nu, grid, diffusion](const State& s) {
    const double t = s(nu);
    State out(nu + 1);
    out.head(nu) = diffusion(s.head(nu), [&](int i, int j) {
      return allen_cahn_exact(t, grid.coord(i), grid.coord(j));
    });
    out(nu) = 0.0;
    return out;
  };

  sys.f = [nu, grid, diffusion, beta](const State& s) {
    const double t = s(nu);
    State exact(nu), dt(nu);
    for (int j = 1; j < grid.N - 1; ++j)
      for (int i = 1; i < grid.N - 1; ++i) {
        exact(grid.index(i, j)) = allen_cahn_exact(t, grid.coord(i), grid.coord(j));
        dt(grid.index(i, j)) = allen_cahn_exact_dt(t, grid.coord(i), grid.coord(j));
      }
    const State lap_exact = diffusion(exact, [&](int i, int j) {
      return allen_cahn_exact(t, grid.coord(i), grid.coord(j));
    });
    State out(nu + 1);
    for (Index k = 0; k < nu; ++k) {
      const double ue = exact(k), u = s(k);
      const double source = dt(k) - lap_exact(k) - beta * (ue - ue * ue * ue);
      out(k) = beta * (u - u * u * u) + source;
    }
    out(nu) = 1.0;
    return out;
  };

  sys.g_jacobian = [nu, grid, coef](const State& s) {
    const double t = s(nu);
    std::vector<Triplet> entries;
    entries.reserve(std::size_t(6 * nu));
    for (int j = 1; j < grid.N - 1; ++j)
      for (int i = 1; i < grid.N - 1; ++i) {
        const Index row = grid.index(i, j);
        entries.emplace_back(row, row, -4.0 * coef);
        double boundary_rate = 0.0;
        for (int k = 0; k < 4; ++k) {
          const int ii = i + di[k], jj = j + dj[k];
          if (grid.interior(ii, jj))
            entries.emplace_back(row, grid.index(ii, jj), coef);
          else
            boundary_rate += allen_cahn_exact_dt(t, grid.coord(ii), grid.coord(jj));
        }
        if (boundary_rate != 0.0) entries.emplace_back(row, nu, coef * boundary_rate);
      }
    SparseMatrix jac(nu + 1, nu + 1);
    jac.setFromTriplets(entries.begin(), entries.end());
    return jac;
  };

  auto exact_state = [nu, grid](double t) {
    State out(nu + 1);
    for (int j = 1; j < grid.N - 1; ++j)
      for (int i = 1; i < grid.N - 1; ++i)
        out(grid.index(i, j)) = allen_cahn_exact(t, grid.coord(i), grid.coord(j));
    out(nu) = t;
    return out;
  };
  sys.exact = exact_state;
  sys.y0 = exact_state(cfg.t0);
  return sys;
}

// ---------------------------------------------------------------------------
// Linear test equation

PartitionedSystem linear_test(std::complex<double> xi, std::complex<double> xihat,
                              std::complex<double> y0, double t0, double tf) {
  const bool real = xi.imag() == 0.0 && xihat.imag() == 0.0 && y0.imag() == 0.0;
  const Index d = real ? 1 : 2;
  auto as_matrix = [real](std::complex<double> z) {
    if (real) return Eigen::MatrixXd::Constant(1, 1, z.real()).eval();
    Eigen::MatrixXd m(2, 2);
    m << z.real(), -z.imag(), z.imag(), z.real();
    return m;
  };
  const Eigen::MatrixXd mf = as_matrix(xi), mg = as_matrix(xihat);

  PartitionedSystem sys;
  sys.name = "linear";
  sys.dim = d;
  sys.output_dim = d;
  sys.t0 = t0;
  sys.tf = tf;
  sys.f = [mf](const State& y) { return State(mf * y); };
  sys.g = [mg](const State& y) { return State(mg * y); };
  const SparseMatrix jac = mg.sparseView();
  sys.g_jacobian = [jac](const State&) { return jac; };
  sys.y0 = real ? State::Constant(1, y0.real()) : State((State(2) << y0.real(), y0.imag()).finished());
  const std::complex<double> rate = xi + xihat;
  sys.exact = [real, rate, y0, t0](double t) {
    const std::complex<double> y = std::exp(rate * (t - t0)) * y0;
    return real ? State::Constant(1, y.real()) : State((State(2) << y.real(), y.imag()).finished());
  };
  return sys;
}

}  // namespace pimex
