#pragma once

// Fixed-step execution of parallel IMEX GLMs (A = 0, Ahat = lambda I):
//
//   Y_i     = h lambda g(Y_i) + sum_j u_ij x_j                     (independent)
//   x_i^new = h sum_j (b_ij f(Y_j) + bhat_ij g(Y_j)) + sum_j v_ij x_j

#include "pimex/tableau.hpp"
#include "pimex/worker_pool.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pimex {

using State = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// y' = f(y) + g(y) with f nonstiff and g stiff. f, g and g_jacobian must be
/// pure and safe to call from several threads at once.
struct PartitionedSystem {
  std::string name;
  Index dim = 0;
  /// Leading components that are physical unknowns; error norms use these.
  Index output_dim = 0;
  std::function<State(const State&)> f;
  std::function<State(const State&)> g;
  std::function<SparseMatrix(const State&)> g_jacobian;
  double t0 = 0.0;
  double tf = 1.0;
  State y0;
  /// Exact solution at time t, if known.
  std::function<State(double)> exact;
};

/// every_iteration: full Newton. per_stage: one factorization per stage
/// solve, refreshed if contraction stalls. lazy: each stage slot keeps its
/// factorization across steps until contraction stalls. frozen: one
/// factorization at y0 for the whole run.
enum class JacobianReuse { every_iteration, per_stage, lazy, frozen };
enum class Ending { final_stage, corrected_zero_abscissa };

JacobianReuse parse_jacobian_reuse(const std::string& text);
Ending parse_ending(const std::string& text);
std::string to_string(JacobianReuse reuse);
std::string to_string(Ending ending);

struct IntegrationConfig {
  double h = 0.0;
  double newton_tol = 1e-12;
  int newton_max_iters = 25;
  JacobianReuse jacobian_reuse = JacobianReuse::per_stage;
  Ending ending = Ending::final_stage;
  int parallel_workers = 1;
  /// Local error tolerance of the adaptive one-step method used at start-up.
  double start_tol = 1e-14;
};

/// External stages x^[n]; `t` is the base time t_n they expand about.
struct ExternalStageVector {
  std::vector<State> stages;
  double t = 0.0;
  long step_index = 0;
  int shift = 0;
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, int stage = -1)
      : std::runtime_error(stage >= 0 ? "stage " + std::to_string(stage) + ": " + what : what),
        stage_(stage) {}
  int stage() const { return stage_; }

 private:
  int stage_;
};

/// Factorization of I - h lambda J: sparse LU when J is sparse (under 10%
/// filled) or has more than 512 rows, dense partial-pivot LU otherwise.
/// Refactoring with an unchanged sparsity pattern reuses the symbolic analysis.
class NewtonMatrix {
 public:
  static constexpr Index kDenseLimit = 512;

  NewtonMatrix() = default;
  NewtonMatrix(const SparseMatrix& jacobian, double h_lambda) { factorize(jacobian, h_lambda); }

  void factorize(const SparseMatrix& jacobian, double h_lambda);
  bool ready() const { return dense_.has_value() || (sparse_ && factored_); }
  State solve(const State& rhs) const;

 private:
  Index dim_ = 0;
  bool factored_ = false;
  std::optional<Eigen::PartialPivLU<Eigen::MatrixXd>> dense_;
  std::unique_ptr<Eigen::SparseLU<SparseMatrix>> sparse_;
  std::vector<SparseMatrix::StorageIndex> outer_, inner_;
};

struct StageSolution {
  State y;
  State f_value;
  State g_value;
  int iterations = 0;
  double residual = 0.0;
};

/// Solves Y = h lambda g(Y) + rhs by modified Newton until
/// ||Y - h lambda g(Y) - rhs|| <= newton_tol (1 + ||rhs||), starting from
/// `guess` or else from rhs. A frozen Newton matrix, when given, is used for
/// every iteration; otherwise factorizations go to `workspace` (or a local one).
StageSolution solve_stage(const ImexGlmTableau& t, const PartitionedSystem& sys, const State& rhs,
                          double h, const IntegrationConfig& cfg,
                          const NewtonMatrix* frozen = nullptr, const State* guess = nullptr,
                          NewtonMatrix* workspace = nullptr);

struct StepResult {
  ExternalStageVector next;
  std::vector<StageSolution> stages;
  int newton_iters_max = 0;
  long newton_iters_total = 0;
};

struct StepDiagnostics {
  long step = 0;
  double t = 0.0;
  int newton_iters_max = 0;
  double wall_ms = 0.0;
};

struct Diagnostics {
  std::vector<StepDiagnostics> steps;
  long newton_iterations_total = 0;
  double start_ms = 0.0;
  double wall_ms = 0.0;
  int shift = 0;
};

/// CSV "step,t,newton_iters_max,wall_ms".
void write_diagnostics_csv(std::ostream& out, const Diagnostics& diag);

/// Coefficients of an ending procedure
/// y(t_n) ~ h sum_j (beta_j f(Y_j) + betahat_j g(Y_j)) + sum_j gamma_j x_j^[n-1].
struct EndingCoefficients {
  Eigen::RowVectorXd beta, beta_hat, gamma;
};

EndingCoefficients ending_coefficients(const ImexGlmTableau& t, Ending ending);

/// y at each of `times` (all >= t0, any order) from an adaptive 7(8)
/// Runge-Kutta-Fehlberg integration of f + g with absolute and relative
/// tolerance `tol`.
std::vector<State> adaptive_flow(const PartitionedSystem& sys, const std::vector<double>& times,
                                 double tol);

/// Number of steps the starting procedure skips: ceil(-min c), or 0.
int starting_shift(const ImexGlmTableau& t);

/// Owns the worker pool and any frozen Newton matrix for one run.
class ParallelImexStepper {
 public:
  ParallelImexStepper(const ImexGlmTableau& t, const PartitionedSystem& sys,
                      IntegrationConfig cfg);

  /// x_i^[l] = y(t_l + c_i h) - h lambda g(y(t_l + c_i h)) with
  /// l = starting_shift(t); y is taken from an adaptive one-step solve.
  ExternalStageVector start() const;

  /// One step: s concurrent stage solves, barrier, then the r external
  /// updates with a fixed summation order. When x follows the previous call,
  /// stage i starts Newton from rhs_i + h lambda g(Y_i) of that call.
  StepResult step(const ExternalStageVector& x);

  /// Applies the configured ending to the last step and its incoming stages.
  State finish(const StepResult& last, const ExternalStageVector& incoming) const;

  const IntegrationConfig& config() const { return cfg_; }

 private:
  const ImexGlmTableau& t_;
  const PartitionedSystem& sys_;
  IntegrationConfig cfg_;
  WorkerPool pool_;
  std::unique_ptr<NewtonMatrix> frozen_;
  std::vector<NewtonMatrix> workspaces_;
  std::vector<State> last_g_;
  long last_index_ = -1;
};

ExternalStageVector starting_procedure(const ImexGlmTableau& t, const PartitionedSystem& sys,
                                       const IntegrationConfig& cfg);

StepResult step(const ImexGlmTableau& t, const PartitionedSystem& sys,
                const ExternalStageVector& x, const IntegrationConfig& cfg);

State ending_procedure(const ImexGlmTableau& t, const StepResult& last,
                       const ExternalStageVector& incoming, const IntegrationConfig& cfg);

struct IntegrationResult {
  State y;
  Diagnostics diagnostics;
};

/// Start, (tf - t0)/h - shift steps, end. The step count must be integral.
IntegrationResult integrate(const ImexGlmTableau& t, const PartitionedSystem& sys,
                            const IntegrationConfig& cfg);

/// Throws unless the tableau has the parallel structure and matching sizes.
void require_integrable(const ImexGlmTableau& t);

}  // namespace pimex
