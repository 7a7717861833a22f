#include "pimex/harness.hpp"

#include "pimex/dimsim.hpp"
#include "pimex/ensemble.hpp"
#include "pimex/high_precision.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

namespace pimex {

AbscissaeChoice resolved_abscissae(const MethodSpec& spec) {
  return spec.abscissae.value_or(default_abscissae(spec.order));
}

ImexGlmTableau build_method(const MethodSpec& spec) {
  if (!spec.tableau_path.empty()) return load_tableau(spec.tableau_path);
  switch (spec.family) {
    case Family::ensemble: {
      EnsembleSpec e;
      e.order = spec.order;
      e.abscissae = resolved_abscissae(spec);
      e.lambda = spec.lambda.value_or(1.0);
      return build_parallel_ensemble<HighPrecision>(e).cast<double>();
    }
    case Family::dimsim: {
      DimsimSpec d;
      d.order = spec.order;
      d.abscissae = resolved_abscissae(spec);
      d.lambda_override = spec.lambda;
      return build_parallel_imex_dimsim<HighPrecision>(d).cast<double>();
    }
    case Family::external:
      break;
  }
  throw std::invalid_argument("external methods need a tableau file");
}

std::string describe(const MethodSpec& spec) {
  if (!spec.tableau_path.empty()) return "tableau:" + spec.tableau_path;
  return std::string(to_string(spec.family)) + std::to_string(spec.order) + "/" +
         std::string(to_string(resolved_abscissae(spec)));
}

ProblemKind parse_problem(const std::string& text) {
  if (text == "cusp") return ProblemKind::cusp;
  if (text == "allencahn" || text == "allen_cahn" || text == "allen-cahn") return ProblemKind::allen_cahn;
  if (text == "linear") return ProblemKind::linear;
  throw std::invalid_argument("unknown problem '" + text + "'");
}

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::cusp: return "cusp";
    case ProblemKind::allen_cahn: return "allencahn";
    case ProblemKind::linear: return "linear";
  }
  return "?";
}

PartitionedSystem build_problem(const ProblemSpec& spec) {
  switch (spec.kind) {
    case ProblemKind::cusp: {
      CuspConfig cfg;
      if (spec.N > 0) cfg.N = spec.N;
      return cusp_system(cfg);
    }
    case ProblemKind::allen_cahn: {
      AllenCahnConfig cfg;
      if (spec.N > 0) cfg.N = spec.N;
      return allen_cahn_system(cfg);
    }
    case ProblemKind::linear:
      return linear_test(spec.xi, spec.xihat);
  }
  throw std::invalid_argument("unknown problem");
}

JacobianReuse default_jacobian_reuse(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::cusp: return JacobianReuse::lazy;
    case ProblemKind::allen_cahn: return JacobianReuse::frozen;
    case ProblemKind::linear: return JacobianReuse::per_stage;
  }
  return JacobianReuse::per_stage;
}

std::vector<long> default_steps(ProblemKind kind) {
  switch (kind) {
    // h must stay well below eps = 1e-4 for the fixed-step scheme to follow
    // the fast jumps of y.
    case ProblemKind::cusp: return {70000, 100000, 140000, 200000, 280000, 400000};
    // Coarser steps violate the explicit stability limit of the reaction term.
    case ProblemKind::allen_cahn: return {240, 320, 400, 560, 800, 1120};
    case ProblemKind::linear: return {10, 20, 40, 80, 160, 320};
  }
  return {};
}

double solution_error(const PartitionedSystem& sys, const State& y, const State& reference) {
  const Index n = sys.output_dim > 0 ? sys.output_dim : sys.dim;
  return (y.head(n) - reference.head(n)).norm();
}

State reference_solution(const PartitionedSystem& sys, double tol, double agreement) {
  if (sys.exact) return sys.exact(sys.tf);
  const State fine = adaptive_flow(sys, {sys.tf}, tol).front();
  const State check = adaptive_flow(sys, {sys.tf}, 10.0 * tol).front();
  const double gap = solution_error(sys, fine, check);
  if (!(gap <= agreement))
    throw IntegrationError("reference solutions disagree by " + std::to_string(gap));
  return fine;
}

// ---------------------------------------------------------------------------

double fit_order(const std::vector<ConvergenceRecord>& records) {
  std::vector<ConvergenceRecord> sorted = records;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.steps < b.steps; });
  const std::size_t tail = (sorted.size() + 1) / 2;
  std::vector<double> x, y;
  for (std::size_t i = sorted.size() - tail; i < sorted.size(); ++i) {
    const auto& r = sorted[i];
    if (r.failed || !(r.error > 0.0) || !std::isfinite(r.error)) continue;
    x.push_back(std::log(r.h));
    y.push_back(std::log(r.error));
  }
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

ConvergenceReport run_convergence(const ImexGlmTableau& t, const PartitionedSystem& sys,
                                  std::vector<long> steps, const IntegrationConfig& base,
                                  const State& reference) {
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  ConvergenceReport report;
  for (long n : steps) {
    ConvergenceRecord rec;
    rec.steps = n;
    rec.h = (sys.tf - sys.t0) / double(n);
    IntegrationConfig cfg = base;
    cfg.h = rec.h;
    try {
      if (n < 1) throw std::invalid_argument("step counts must be positive");
      const IntegrationResult res = integrate(t, sys, cfg);
      rec.error = solution_error(sys, res.y, reference);
      rec.wall_ms = res.diagnostics.wall_ms;
      rec.newton_iters_total = res.diagnostics.newton_iterations_total;
      if (!std::isfinite(rec.error)) {
        rec.failed = true;
        rec.failure = "non-finite solution";
      }
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.failure = e.what();
      rec.error = std::numeric_limits<double>::quiet_NaN();
    }
    report.records.push_back(rec);
  }
  report.fitted_order = fit_order(report.records);
  return report;
}

void write_convergence_csv(std::ostream& out, const ConvergenceReport& report) {
  out << "steps,h,error,wall_ms\n";
  char buf[160];
  for (const auto& r : report.records) {
    if (r.failed)
      std::snprintf(buf, sizeof buf, "%ld,%.17g,nan,%.3f\n", r.steps, r.h, r.wall_ms);
    else
      std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.3f\n", r.steps, r.h, r.error, r.wall_ms);
    out << buf;
  }
  for (const auto& r : report.records)
    if (r.failed) out << "# failed steps=" << r.steps << ": " << r.failure << "\n";
}

// ---------------------------------------------------------------------------

std::vector<BenchRecord> run_bench(const ImexGlmTableau& t, const PartitionedSystem& sys,
                                   const std::vector<long>& steps, const std::vector<int>& workers,
                                   const IntegrationConfig& base, const State& reference) {
  std::vector<BenchRecord> out;
  for (int w : workers) {
    if (w < 1) throw std::invalid_argument("worker counts must be >= 1");
    for (long n : steps) {
      IntegrationConfig cfg = base;
      cfg.h = (sys.tf - sys.t0) / double(n);
      cfg.parallel_workers = w;
      const IntegrationResult res = integrate(t, sys, cfg);
      out.push_back({w, n, solution_error(sys, res.y, reference), res.diagnostics.wall_ms});
    }
  }
  return out;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << "workers,steps,error,wall_ms\n";
  char buf[128];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%d,%ld,%.17g,%.3f\n", r.workers, r.steps, r.error, r.wall_ms);
    out << buf;
  }
}

double time_at_error(const std::vector<BenchRecord>& records, int workers, double target_error) {
  std::vector<BenchRecord> curve;
  for (const auto& r : records)
    if (r.workers == workers && r.error > 0.0 && r.wall_ms > 0.0) curve.push_back(r);
  std::sort(curve.begin(), curve.end(),
            [](const auto& a, const auto& b) { return a.error > b.error; });
  const double le = std::log(target_error);
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    const double e0 = std::log(curve[i].error), e1 = std::log(curve[i + 1].error);
    if (le <= e0 && le >= e1) {
      const double w = e0 == e1 ? 0.0 : (le - e0) / (e1 - e0);
      return std::exp((1 - w) * std::log(curve[i].wall_ms) + w * std::log(curve[i + 1].wall_ms));
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------

std::string manifest_json(const RunManifest& m) {
  using json = nlohmann::json;
  json doc;
  doc["command"] = m.command;
  doc["tool_version"] = m.tool_version;
  json method;
  if (m.method.tableau_path.empty()) {
    method["family"] = std::string(to_string(m.method.family));
    method["order"] = m.method.order;
    method["abscissae"] = std::string(to_string(resolved_abscissae(m.method)));
    if (m.method.lambda) method["lambda"] = *m.method.lambda;
  } else {
    method["tableau"] = m.method.tableau_path;
  }
  doc["method"] = method;
  json problem;
  problem["name"] = to_string(m.problem.kind);
  problem["N"] = m.problem.N;
  if (m.problem.kind == ProblemKind::linear) {
    problem["xi"] = {m.problem.xi.real(), m.problem.xi.imag()};
    problem["xihat"] = {m.problem.xihat.real(), m.problem.xihat.imag()};
  }
  doc["problem"] = problem;
  json cfg;
  cfg["newton_tol"] = m.config.newton_tol;
  cfg["newton_max_iters"] = m.config.newton_max_iters;
  cfg["jacobian_reuse"] = to_string(m.config.jacobian_reuse);
  cfg["ending"] = to_string(m.config.ending);
  cfg["parallel_workers"] = m.config.parallel_workers;
  cfg["start_tol"] = m.config.start_tol;
  doc["config"] = cfg;
  doc["steps"] = m.steps;
  doc["workers"] = m.workers;
  return doc.dump(2) + "\n";
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest '" + path + "'");
  out << manifest_json(manifest);
}

}  // namespace pimex
