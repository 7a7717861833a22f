#include "pimex/integrator.hpp"

#include <boost/numeric/odeint.hpp>
#include <boost/numeric/odeint/external/eigen/eigen.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

namespace pimex {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Abscissae are stored in binary, so "equals 0" and "equals 1" allow a few ulps.
constexpr double kAbscissaTol = 1e-12;

// Residual reduction per modified Newton iteration below which the
// Jacobian is refreshed.
constexpr double kStallRatio = 0.25;

}  // namespace

JacobianReuse parse_jacobian_reuse(const std::string& text) {
  if (text == "every_iteration") return JacobianReuse::every_iteration;
  if (text == "per_stage") return JacobianReuse::per_stage;
  if (text == "lazy") return JacobianReuse::lazy;
  if (text == "frozen") return JacobianReuse::frozen;
  throw std::invalid_argument("unknown jacobian reuse policy '" + text + "'");
}

Ending parse_ending(const std::string& text) {
  if (text == "final" || text == "final_stage") return Ending::final_stage;
  if (text == "corrected" || text == "corrected_zero_abscissa") return Ending::corrected_zero_abscissa;
  throw std::invalid_argument("unknown ending '" + text + "'");
}

std::string to_string(JacobianReuse reuse) {
  switch (reuse) {
    case JacobianReuse::every_iteration: return "every_iteration";
    case JacobianReuse::per_stage: return "per_stage";
    case JacobianReuse::lazy: return "lazy";
    case JacobianReuse::frozen: return "frozen";
  }
  return "?";
}

std::string to_string(Ending ending) {
  return ending == Ending::final_stage ? "final" : "corrected";
}

void require_integrable(const ImexGlmTableau& t) {
  check_dimensions(t);
  if (!t.has_parallel_structure(1e-14))
    throw TableauError("parallel structure violated: time stepping needs A = 0, Ahat = lambda I");
  if (!t.c.allFinite() || !t.B.allFinite() || !t.Bhat.allFinite() || !t.V.allFinite() ||
      !t.U.allFinite() || !std::isfinite(t.lambda))
    throw TableauError("invariant violated: non-finite entries");
}

// ---------------------------------------------------------------------------

void NewtonMatrix::factorize(const SparseMatrix& jacobian, double h_lambda) {
  if (jacobian.rows() != jacobian.cols()) throw IntegrationError("Newton matrix: Jacobian not square");
  dim_ = jacobian.rows();
  const double fill = double(jacobian.nonZeros()) / (double(dim_) * double(dim_));
  if (dim_ <= kDenseLimit && fill >= 0.1) {
    Eigen::MatrixXd m = -h_lambda * Eigen::MatrixXd(jacobian);
    m.diagonal().array() += 1.0;
    dense_.emplace(m);
    return;
  }
  dense_.reset();
  SparseMatrix eye(dim_, dim_);
  eye.setIdentity();
  SparseMatrix m = eye - h_lambda * jacobian;
  m.makeCompressed();
  const auto* outer = m.outerIndexPtr();
  const auto* inner = m.innerIndexPtr();
  const bool same = sparse_ && Index(outer_.size()) == dim_ + 1 &&
                    std::equal(outer_.begin(), outer_.end(), outer) &&
                    Index(inner_.size()) == m.nonZeros() &&
                    std::equal(inner_.begin(), inner_.end(), inner);
  if (!same) {
    sparse_ = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
    sparse_->analyzePattern(m);
    outer_.assign(outer, outer + dim_ + 1);
    inner_.assign(inner, inner + m.nonZeros());
  }
  factored_ = false;
  sparse_->factorize(m);
  if (sparse_->info() != Eigen::Success) throw IntegrationError("Newton matrix: sparse LU failed");
  factored_ = true;
}

State NewtonMatrix::solve(const State& rhs) const {
  if (!ready()) throw IntegrationError("Newton matrix used before factorization");
  if (dense_) return dense_->solve(rhs);
  State out = sparse_->solve(rhs);
  if (sparse_->info() != Eigen::Success) throw IntegrationError("Newton matrix: sparse solve failed");
  return out;
}

StageSolution solve_stage(const ImexGlmTableau& t, const PartitionedSystem& sys, const State& rhs,
                          double h, const IntegrationConfig& cfg, const NewtonMatrix* frozen,
                          const State* guess, NewtonMatrix* workspace) {
  const double hl = h * t.lambda;
  StageSolution out;
  out.y = guess && hl != 0.0 ? *guess : rhs;
  out.g_value = sys.g(out.y);
  if (hl != 0.0) {
    const double bound = cfg.newton_tol * (1.0 + rhs.norm());
    NewtonMatrix local;
    NewtonMatrix& own = workspace ? *workspace : local;
    bool factored = cfg.jacobian_reuse == JacobianReuse::lazy && own.ready();
    double previous = std::numeric_limits<double>::infinity();
    for (int it = 0;; ++it) {
      const State residual = out.y - hl * out.g_value - rhs;
      out.residual = residual.norm();
      if (!std::isfinite(out.residual)) throw IntegrationError("Newton iterate is not finite");
      if (out.residual <= bound) {
        out.iterations = it;
        break;
      }
      if (it >= cfg.newton_max_iters)
        throw IntegrationError("Newton did not converge in " + std::to_string(cfg.newton_max_iters) +
                               " iterations (residual " + std::to_string(out.residual) + ")");
      const NewtonMatrix* matrix = frozen;
      if (!matrix) {
        // Reused factorizations are refreshed at the current iterate once
        // contraction stalls.
        const bool stalled = it > 0 && out.residual > kStallRatio * previous;
        if (!factored || cfg.jacobian_reuse == JacobianReuse::every_iteration || stalled) {
          own.factorize(sys.g_jacobian(out.y), hl);
          factored = true;
        }
        matrix = &own;
      }
      previous = out.residual;
      out.y -= matrix->solve(residual);
      out.g_value = sys.g(out.y);
    }
  }
  out.f_value = sys.f(out.y);
  return out;
}

// ---------------------------------------------------------------------------

EndingCoefficients ending_coefficients(const ImexGlmTableau& t, Ending ending) {
  const Index s = t.s;
  const Index last = s - 1;
  if (std::abs(t.c(last) - 1.0) > kAbscissaTol)
    throw IntegrationError("ending procedure needs c_s = 1");
  EndingCoefficients e;
  if (ending == Ending::final_stage) {
    // y(t_n) ~ Y_s of the last step.
    e.beta = t.A.row(last);
    e.beta_hat = t.Ahat.row(last);
    e.gamma = t.U.row(last);
    return e;
  }
  Index zero = -1;
  for (Index i = 0; i < last; ++i)
    if (std::abs(t.c(i)) <= kAbscissaTol) zero = i;
  if (zero < 0) throw IntegrationError("corrected ending needs some c_i = 0 with i < s");
  if (t.r != s) throw IntegrationError("corrected ending needs r = s");
  // The new external stage x_i with c_i = 0 approximates y(t_n) - h lambda g(y(t_n));
  // adding h lambda g(Y_s) restores y(t_n).
  e.beta = t.B.row(zero);
  e.beta_hat = t.Bhat.row(zero);
  e.beta_hat(last) += t.lambda;
  e.gamma = t.V.row(zero);
  return e;
}

int starting_shift(const ImexGlmTableau& t) {
  const double cmin = t.c.minCoeff();
  if (cmin >= 0.0) return 0;
  return int(std::ceil(-cmin - kAbscissaTol));
}

std::vector<State> adaptive_flow(const PartitionedSystem& sys, const std::vector<double>& times,
                                 double tol) {
  namespace odeint = boost::numeric::odeint;
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  auto rhs = [&](const State& y, State& dy, double) { dy = sys.f(y) + sys.g(y); };
  auto stepper = odeint::make_controlled<odeint::runge_kutta_fehlberg78<State, double, State, double,
                                                                        odeint::vector_space_algebra>>(
      tol, tol);

  std::vector<State> out(times.size());
  State y = sys.y0;
  double now = sys.t0;
  for (std::size_t idx : order) {
    const double target = times[idx];
    if (target < sys.t0) throw std::invalid_argument("adaptive_flow: target before t0");
    if (target > now) {
      const double dt0 = std::min(target - now, 1e-6 * (1.0 + std::abs(target - sys.t0)));
      odeint::integrate_adaptive(stepper, rhs, y, now, target, dt0);
      now = target;
    }
    if (!y.allFinite()) throw IntegrationError("starting procedure produced non-finite values");
    out[idx] = y;
  }
  return out;
}

namespace {

// Preconsistent methods (V e = e, first Taylor weight column all ones) get
// sum_j v_ij x_j evaluated as x_r + sum_j v_ij (x_j - x_r): rounding in the
// stored V then multiplies O(h) differences instead of the solution itself,
// so it cannot accumulate into an h-independent drift. Returns -1 otherwise.
Index difference_reference(const ImexGlmTableau& t) {
  if (t.W.cols() == 0 || t.W.rows() != t.r) return -1;
  if ((t.W.col(0).array() != 1.0).any()) return -1;
  const double scale = 1.0 + t.V.cwiseAbs().maxCoeff();
  if (((t.V.rowwise().sum().array() - 1.0).abs() > 1e-12 * scale).any()) return -1;
  return t.r - 1;
}

void external_update(const ImexGlmTableau& t, double h, const std::vector<StageSolution>& stages,
                     const ExternalStageVector& x, Index i, Index ref, State& out) {
  // Fixed left-to-right accumulation, so results do not depend on threading.
  State acc = State::Zero(x.stages.front().size());
  for (Index j = 0; j < t.s; ++j) {
    acc += t.B(i, j) * stages[std::size_t(j)].f_value;
    acc += t.Bhat(i, j) * stages[std::size_t(j)].g_value;
  }
  out = h * acc;
  if (ref < 0) {
    for (Index j = 0; j < t.r; ++j) out += t.V(i, j) * x.stages[std::size_t(j)];
    return;
  }
  const State& base = x.stages[std::size_t(ref)];
  for (Index j = 0; j < t.r; ++j)
    if (j != ref) out += t.V(i, j) * (x.stages[std::size_t(j)] - base);
  out += base;
}

StepResult step_impl(const ImexGlmTableau& t, const PartitionedSystem& sys,
                     const ExternalStageVector& x, const IntegrationConfig& cfg, WorkerPool& pool,
                     const NewtonMatrix* frozen, const std::vector<State>* last_g,
                     std::vector<NewtonMatrix>* workspaces) {
  if (Index(x.stages.size()) != t.r) throw IntegrationError("external stage count differs from r");
  const double h = cfg.h;
  StepResult res;
  res.stages.resize(std::size_t(t.s));
  pool.parallel_for(std::size_t(t.s), [&](std::size_t i) {
    State rhs = t.U(Index(i), 0) * x.stages[0];
    for (Index j = 1; j < t.r; ++j) rhs += t.U(Index(i), j) * x.stages[std::size_t(j)];
    NewtonMatrix* workspace = workspaces ? &(*workspaces)[i] : nullptr;
    try {
      if (last_g) {
        const State guess = rhs + h * t.lambda * (*last_g)[i];
        res.stages[i] = solve_stage(t, sys, rhs, h, cfg, frozen, &guess, workspace);
      } else {
        res.stages[i] = solve_stage(t, sys, rhs, h, cfg, frozen, nullptr, workspace);
      }
    } catch (const IntegrationError& e) {
      throw IntegrationError(e.what(), int(i) + 1);
    }
  });
  res.next.stages.resize(std::size_t(t.r));
  const Index ref = difference_reference(t);
  pool.parallel_for(std::size_t(t.r), [&](std::size_t i) {
    external_update(t, h, res.stages, x, Index(i), ref, res.next.stages[i]);
  });
  for (const auto& st : res.stages) {
    res.newton_iters_max = std::max(res.newton_iters_max, st.iterations);
    res.newton_iters_total += st.iterations;
  }
  res.next.t = x.t + h;
  res.next.step_index = x.step_index + 1;
  res.next.shift = x.shift;
  return res;
}

ExternalStageVector start_impl(const ImexGlmTableau& t, const PartitionedSystem& sys,
                               const IntegrationConfig& cfg) {
  if (t.r != t.s || (t.U - Matrix<double>::Identity(t.s, t.s)).cwiseAbs().maxCoeff() > 1e-14)
    throw IntegrationError("starting procedure needs r = s and U = I");
  if (sys.y0.size() != sys.dim) throw IntegrationError("initial value has the wrong dimension");
  const int shift = starting_shift(t);
  const double base = sys.t0 + shift * cfg.h;
  std::vector<double> times(std::size_t(t.s));
  for (Index i = 0; i < t.s; ++i) times[std::size_t(i)] = base + t.c(i) * cfg.h;
  for (double& tau : times) {
    if (tau < sys.t0 - 1e-12 * (1.0 + std::abs(sys.t0)))
      throw IntegrationError("starting procedure target lies before t0");
    tau = std::max(tau, sys.t0);  // t_l + c_i h can round just below t0
  }
  const std::vector<State> ys = adaptive_flow(sys, times, cfg.start_tol);

  ExternalStageVector x;
  x.t = base;
  x.step_index = shift;
  x.shift = shift;
  x.stages.resize(std::size_t(t.s));
  for (std::size_t i = 0; i < ys.size(); ++i)
    x.stages[i] = ys[i] - cfg.h * t.lambda * sys.g(ys[i]);
  return x;
}

State finish_impl(const ImexGlmTableau& t, const StepResult& last,
                  const ExternalStageVector& incoming, const IntegrationConfig& cfg) {
  const EndingCoefficients e = ending_coefficients(t, cfg.ending);
  State acc = State::Zero(incoming.stages.front().size());
  for (Index j = 0; j < t.s; ++j) {
    acc += e.beta(j) * last.stages[std::size_t(j)].f_value;
    acc += e.beta_hat(j) * last.stages[std::size_t(j)].g_value;
  }
  State y = cfg.h * acc;
  for (Index j = 0; j < t.r; ++j) y += e.gamma(j) * incoming.stages[std::size_t(j)];
  return y;
}

void check_config(const IntegrationConfig& cfg) {
  if (!(cfg.h > 0.0) || !std::isfinite(cfg.h)) throw std::invalid_argument("step size must be positive");
  if (!(cfg.newton_tol > 0.0)) throw std::invalid_argument("Newton tolerance must be positive");
  if (cfg.newton_max_iters < 1) throw std::invalid_argument("Newton iteration cap must be >= 1");
  if (cfg.parallel_workers < 1) throw std::invalid_argument("worker count must be >= 1");
  if (!(cfg.start_tol > 0.0)) throw std::invalid_argument("starting tolerance must be positive");
}

}  // namespace

// ---------------------------------------------------------------------------

ParallelImexStepper::ParallelImexStepper(const ImexGlmTableau& t, const PartitionedSystem& sys,
                                         IntegrationConfig cfg)
    : t_(t), sys_(sys), cfg_(cfg), pool_(std::size_t(std::max(cfg.parallel_workers, 1))) {
  require_integrable(t);
  check_config(cfg_);
  if (cfg_.jacobian_reuse == JacobianReuse::frozen && t.lambda != 0.0)
    frozen_ = std::make_unique<NewtonMatrix>(sys.g_jacobian(sys.y0), cfg_.h * t.lambda);
  workspaces_.resize(std::size_t(t.s));
}

ExternalStageVector ParallelImexStepper::start() const { return start_impl(t_, sys_, cfg_); }

StepResult ParallelImexStepper::step(const ExternalStageVector& x) {
  const bool follows = last_index_ >= 0 && x.step_index == last_index_;
  StepResult res = step_impl(t_, sys_, x, cfg_, pool_, frozen_.get(), follows ? &last_g_ : nullptr,
                             &workspaces_);
  last_g_.resize(res.stages.size());
  for (std::size_t i = 0; i < res.stages.size(); ++i) last_g_[i] = res.stages[i].g_value;
  last_index_ = res.next.step_index;
  return res;
}

State ParallelImexStepper::finish(const StepResult& last, const ExternalStageVector& incoming) const {
  return finish_impl(t_, last, incoming, cfg_);
}

ExternalStageVector starting_procedure(const ImexGlmTableau& t, const PartitionedSystem& sys,
                                       const IntegrationConfig& cfg) {
  require_integrable(t);
  check_config(cfg);
  return start_impl(t, sys, cfg);
}

StepResult step(const ImexGlmTableau& t, const PartitionedSystem& sys, const ExternalStageVector& x,
                const IntegrationConfig& cfg) {
  ParallelImexStepper stepper(t, sys, cfg);
  return stepper.step(x);
}

State ending_procedure(const ImexGlmTableau& t, const StepResult& last,
                       const ExternalStageVector& incoming, const IntegrationConfig& cfg) {
  return finish_impl(t, last, incoming, cfg);
}

IntegrationResult integrate(const ImexGlmTableau& t, const PartitionedSystem& sys,
                            const IntegrationConfig& cfg) {
  require_integrable(t);
  check_config(cfg);
  // Fail on a bad ending before doing any work.
  ending_coefficients(t, cfg.ending);

  const double span = sys.tf - sys.t0;
  const double ratio = span / cfg.h;
  const long total = std::lround(ratio);
  if (std::abs(ratio - double(total)) > 1e-9 * std::max(1.0, ratio))
    throw std::invalid_argument("(tf - t0) / h must be an integer");
  const int shift = starting_shift(t);
  const long steps = total - shift;
  if (steps < 1) throw std::invalid_argument("too few steps for the starting shift");

  const auto wall_start = Clock::now();
  ParallelImexStepper stepper(t, sys, cfg);
  IntegrationResult out;
  out.diagnostics.shift = shift;

  auto mark = Clock::now();
  ExternalStageVector x = stepper.start();
  out.diagnostics.start_ms = ms_since(mark);
  out.diagnostics.steps.reserve(std::size_t(steps));

  StepResult last;
  ExternalStageVector incoming;
  for (long n = 0; n < steps; ++n) {
    mark = Clock::now();
    StepResult res = stepper.step(x);
    StepDiagnostics d;
    d.step = res.next.step_index;
    d.t = sys.t0 + double(res.next.step_index) * cfg.h;
    d.newton_iters_max = res.newton_iters_max;
    out.diagnostics.newton_iterations_total += res.newton_iters_total;
    incoming = std::move(x);
    x = res.next;
    last = std::move(res);
    d.wall_ms = ms_since(mark);
    out.diagnostics.steps.push_back(d);
  }
  out.y = stepper.finish(last, incoming);
  out.diagnostics.wall_ms = ms_since(wall_start);
  return out;
}

void write_diagnostics_csv(std::ostream& out, const Diagnostics& diag) {
  out << "step,t,newton_iters_max,wall_ms\n";
  char buf[128];
  for (const auto& d : diag.steps) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%d,%.6f\n", d.step, d.t, d.newton_iters_max, d.wall_ms);
    out << buf;
  }
}

}  // namespace pimex
