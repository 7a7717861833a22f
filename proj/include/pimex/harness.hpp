#pragma once

// Experiment drivers behind the command-line tool: method and problem
// construction, convergence ladders, work-precision runs, run manifests.

#include "pimex/abscissae.hpp"
#include "pimex/integrator.hpp"
#include "pimex/problems.hpp"
#include "pimex/tableau.hpp"

#include <complex>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pimex {

inline constexpr const char* kToolVersion = "0.1.0";

/// Either a constructed family or a tableau file.
struct MethodSpec {
  Family family = Family::ensemble;
  int order = 2;
  /// Defaults to unit_interval up to order 4 and integer_tail above.
  std::optional<AbscissaeChoice> abscissae;
  /// Ensemble lambda, or a DIMSIM override of the Laguerre root.
  std::optional<double> lambda;
  std::string tableau_path;
};

AbscissaeChoice resolved_abscissae(const MethodSpec& spec);

/// Constructs in 100-digit arithmetic and rounds once, so the stored
/// coefficients are the correctly rounded exact ones.
ImexGlmTableau build_method(const MethodSpec& spec);

std::string describe(const MethodSpec& spec);

enum class ProblemKind { cusp, allen_cahn, linear };

ProblemKind parse_problem(const std::string& text);
std::string to_string(ProblemKind kind);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::linear;
  /// Grid size; 0 keeps the problem default.
  int N = 0;
  std::complex<double> xi = -1.0;
  std::complex<double> xihat = -10.0;
};

PartitionedSystem build_problem(const ProblemSpec& spec);

/// Default Jacobian reuse: lazy for CUSP, frozen for Allen-Cahn (g is affine
/// in u and does not depend on the time entry's Newton update), per_stage
/// otherwise.
JacobianReuse default_jacobian_reuse(ProblemKind kind);

/// Default convergence ladder for a problem.
std::vector<long> default_steps(ProblemKind kind);

/// Physical-component l2 norm.
double solution_error(const PartitionedSystem& sys, const State& y, const State& reference);

/// y(tf): the exact solution when known, otherwise an adaptive 7(8)
/// Runge-Kutta-Fehlberg solve at tolerance `tol`, cross-checked against a
/// solve at 10 tol. Throws if the two differ by more than `agreement`.
State reference_solution(const PartitionedSystem& sys, double tol = 1e-14,
                         double agreement = 1e-10);

struct ConvergenceRecord {
  long steps = 0;
  double h = 0.0;
  double error = 0.0;
  double wall_ms = 0.0;
  long newton_iters_total = 0;
  bool failed = false;
  std::string failure;
};

struct ConvergenceReport {
  std::vector<ConvergenceRecord> records;
  double fitted_order = 0.0;
};

/// Least-squares slope of log(error) against log(h) over the finest
/// ceil(n/2) successful records. NaN when fewer than two qualify.
double fit_order(const std::vector<ConvergenceRecord>& records);

/// Runs every step count against `reference`; failures are recorded and
/// left out of the fit.
ConvergenceReport run_convergence(const ImexGlmTableau& t, const PartitionedSystem& sys,
                                  std::vector<long> steps, const IntegrationConfig& base,
                                  const State& reference);

/// CSV "steps,h,error,wall_ms"; failed rows carry error nan and are listed
/// in trailing "# failed" comment rows.
void write_convergence_csv(std::ostream& out, const ConvergenceReport& report);

struct BenchRecord {
  int workers = 1;
  long steps = 0;
  double error = 0.0;
  double wall_ms = 0.0;
};

std::vector<BenchRecord> run_bench(const ImexGlmTableau& t, const PartitionedSystem& sys,
                                   const std::vector<long>& steps, const std::vector<int>& workers,
                                   const IntegrationConfig& base, const State& reference);

/// CSV "workers,steps,error,wall_ms".
void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records);

/// Wall time needed to reach `target_error`, read off the log-log
/// interpolant of one worker count's (error, wall_ms) curve. NaN when the
/// target lies outside the measured error range.
double time_at_error(const std::vector<BenchRecord>& records, int workers, double target_error);

struct RunManifest {
  std::string command;
  MethodSpec method;
  ProblemSpec problem;
  IntegrationConfig config;
  std::vector<long> steps;
  std::vector<int> workers;
  std::string tool_version = kToolVersion;
};

std::string manifest_json(const RunManifest& manifest);
void write_manifest(const std::string& path, const RunManifest& manifest);

}  // namespace pimex
