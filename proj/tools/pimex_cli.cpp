// pimex: derive, verify and analyze parallel IMEX general linear methods and
// run them on the bundled test problems.

#include "pimex/harness.hpp"
#include "pimex/stability.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace {

using namespace pimex;

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

// Raised for user-input problems that surface after parsing.
struct ValidationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MethodFlags {
  std::string family = "ensemble";
  int order = 2;
  std::string abscissae;
  std::optional<double> lambda;
  std::string tableau;

  void attach(CLI::App* cmd, bool positional) {
    // derive also takes them positionally: "derive ensemble 3"
    cmd->add_option(positional ? "family,--method" : "--method", family, "dimsim or ensemble");
    cmd->add_option(positional ? "order,--order" : "--order", order, "method order");
    cmd->add_option("--abscissae", abscissae, "unit or integer (default: unit up to order 4)");
    cmd->add_option("--lambda", lambda, "ensemble lambda, or DIMSIM lambda override");
  }

  MethodSpec spec() const {
    MethodSpec m;
    if (!tableau.empty()) {
      m.family = Family::external;
      m.tableau_path = tableau;
      return m;
    }
    m.family = parse_family(family);
    if (m.family == Family::external) throw ValidationFailure("external methods need --tableau");
    m.order = order;
    if (!abscissae.empty()) m.abscissae = parse_abscissae_choice(abscissae);
    m.lambda = lambda;
    return m;
  }
};

struct RunFlags {
  std::string problem = "linear";
  int grid_n = 0;
  std::vector<long> steps;
  std::vector<int> workers{1};
  std::string ending = "final";
  std::string reuse;
  double newton_tol = 1e-12;
  double reference_tol = 1e-14;

  void attach(CLI::App* cmd) {
    cmd->add_option("--problem", problem, "cusp, allencahn or linear");
    cmd->add_option("--N", grid_n, "spatial grid size (problem default if omitted)");
    cmd->add_option("--steps", steps, "step counts, comma separated")->delimiter(',');
    cmd->add_option("--workers", workers, "worker threads (bench: comma separated list)")
        ->delimiter(',');
    cmd->add_option("--ending", ending, "final or corrected");
    cmd->add_option("--reuse", reuse, "Jacobian reuse: every_iteration, per_stage, lazy, frozen");
    cmd->add_option("--newton-tol", newton_tol, "Newton residual tolerance");
    cmd->add_option("--reference-tol", reference_tol,
                    "tolerance of the adaptive reference solve");
  }

  ProblemSpec problem_spec() const {
    ProblemSpec p;
    p.kind = parse_problem(problem);
    p.N = grid_n;
    return p;
  }

  IntegrationConfig config(ProblemKind kind) const {
    IntegrationConfig cfg;
    cfg.newton_tol = newton_tol;
    cfg.ending = parse_ending(ending);
    cfg.jacobian_reuse = reuse.empty() ? default_jacobian_reuse(kind) : parse_jacobian_reuse(reuse);
    cfg.parallel_workers = workers.empty() ? 1 : workers.front();
    return cfg;
  }
};

// Writes to `path`, or stdout when empty. Status text then goes to stderr so
// that stdout stays parseable.
template <typename Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write(out);
}

std::ostream& status(const std::string& out_path) { return out_path.empty() ? std::cerr : std::cout; }

std::string fmt(double x, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

ImexGlmTableau method_from(const MethodFlags& flags) { return build_method(flags.spec()); }

// ---------------------------------------------------------------------------

int cmd_derive(const MethodFlags& mf, const std::string& out_path) {
  const ImexGlmTableau t = method_from(mf);
  emit(out_path, [&](std::ostream& os) { os << write_tableau(t); });
  const auto res = verify_order_conditions(t);
  auto& log = status(out_path);
  log << describe(mf.spec()) << "  s=" << t.s << " p=" << t.p << " q=" << t.q << "\n";
  log << "lambda          " << fmt(t.lambda, "%.12g") << "\n";
  log << "max coefficient " << fmt(t.max_coefficient(), "%.6g") << "\n";
  log << "order residual  " << fmt(res.max_abs, "%.3e") << " (tolerance "
      << fmt(order_condition_tolerance(t), "%.3e") << ")\n";
  if (!(res.max_abs <= order_condition_tolerance(t))) {
    std::cerr << "order conditions violated in " << res.worst_block() << "\n";
    return kExitValidation;
  }
  return 0;
}

int cmd_verify(const std::string& path) {
  const ImexGlmTableau t = load_tableau(path);
  const auto res = verify_order_conditions(t);
  const double tol = order_condition_tolerance(t);
  const auto blocks = res.block_max();
  std::cout << "tableau " << path << "  family=" << to_string(t.family) << " s=" << t.s
            << " r=" << t.r << " p=" << t.p << " q=" << t.q << "\n";
  for (std::size_t i = 0; i < blocks.size(); ++i)
    std::cout << "  " << res.block_names[i] << std::string(20 - res.block_names[i].size(), ' ')
              << fmt(blocks[i], "%.3e") << (blocks[i] <= tol ? "" : "  FAIL") << "\n";
  std::cout << "  tolerance           " << fmt(tol, "%.3e") << "\n";
  if (!(res.max_abs <= tol)) {
    std::cout << "FAIL: order conditions violated in " << res.worst_block() << "\n";
    return kExitValidation;
  }
  std::cout << "PASS\n";
  return 0;
}

std::string region_path(std::string prefix, double alpha_deg) {
  if (prefix.size() > 4 && prefix.substr(prefix.size() - 4) == ".csv")
    prefix.resize(prefix.size() - 4);
  std::string deg = fmt(alpha_deg, "%g");
  return prefix + "_alpha" + deg + ".csv";
}

int cmd_stability(const MethodFlags& mf, const std::vector<double>& alphas_deg,
                  const GridSpec& grid, int workers, const std::string& out_prefix) {
  const ImexGlmTableau t = method_from(mf);
  std::vector<double> alphas;
  for (double a : alphas_deg) {
    if (!(a >= 0.0 && a <= 90.0)) throw ValidationFailure("alpha must lie in [0, 90] degrees");
    alphas.push_back(a * std::numbers::pi / 180.0);
  }
  if (grid.re_points < 2 || grid.im_points < 2 || !(grid.re_max > grid.re_min) ||
      !(grid.im_max > grid.im_min))
    throw ValidationFailure("grid needs at least 2 points per axis and increasing bounds");
  const auto regions = constrained_regions(t, alphas, grid, workers);
  std::cout << "alpha_deg,stable_cells,area,file\n";
  for (std::size_t k = 0; k < regions.size(); ++k) {
    const double deg = regions[k].alpha * 180.0 / std::numbers::pi;
    const std::string path = region_path(out_prefix, deg);
    emit(path, [&](std::ostream& os) { write_region_csv(os, regions[k]); });
    std::cout << fmt(deg, "%g") << "," << regions[k].stable_cells << ","
              << fmt(regions[k].area(), "%.6f") << "," << path << "\n";
  }
  return 0;
}

int cmd_integrate(const MethodFlags& mf, const RunFlags& rf, const std::string& out_path) {
  const ImexGlmTableau t = method_from(mf);
  const ProblemSpec ps = rf.problem_spec();
  const PartitionedSystem sys = build_problem(ps);
  if (rf.steps.size() > 1) throw ValidationFailure("integrate takes a single --steps value");
  const long n = rf.steps.empty() ? default_steps(ps.kind).back() : rf.steps.front();
  if (n < 1) throw ValidationFailure("--steps must be positive");
  IntegrationConfig cfg = rf.config(ps.kind);
  cfg.h = (sys.tf - sys.t0) / double(n);
  const IntegrationResult res = integrate(t, sys, cfg);
  emit(out_path, [&](std::ostream& os) { write_diagnostics_csv(os, res.diagnostics); });
  const State ref = reference_solution(sys, rf.reference_tol);
  auto& log = status(out_path);
  log << describe(mf.spec()) << " on " << sys.name << ": steps=" << n
      << " error=" << fmt(solution_error(sys, res.y, ref), "%.6e")
      << " newton_iters=" << res.diagnostics.newton_iterations_total
      << " wall_ms=" << fmt(res.diagnostics.wall_ms, "%.1f") << "\n";
  return 0;
}

std::string manifest_path(const std::string& out_path) {
  std::string base = out_path;
  if (base.size() > 4 && base.substr(base.size() - 4) == ".csv") base.resize(base.size() - 4);
  return base + ".manifest.json";
}

int cmd_convergence(const MethodFlags& mf, const RunFlags& rf, const std::string& out_path) {
  const ImexGlmTableau t = method_from(mf);
  const ProblemSpec ps = rf.problem_spec();
  const PartitionedSystem sys = build_problem(ps);
  const std::vector<long> steps = rf.steps.empty() ? default_steps(ps.kind) : rf.steps;
  const IntegrationConfig cfg = rf.config(ps.kind);
  const State ref = reference_solution(sys, rf.reference_tol);
  const ConvergenceReport report = run_convergence(t, sys, steps, cfg, ref);
  emit(out_path, [&](std::ostream& os) { write_convergence_csv(os, report); });
  if (!out_path.empty())
    write_manifest(manifest_path(out_path),
                   {"convergence", mf.spec(), ps, cfg, steps, {cfg.parallel_workers}});
  long failed = 0;
  for (const auto& r : report.records) failed += r.failed;
  status(out_path) << describe(mf.spec()) << " on " << sys.name
                   << ": fitted order " << fmt(report.fitted_order, "%.3f") << " ("
                   << report.records.size() - failed << "/" << report.records.size()
                   << " runs succeeded)\n";
  if (!std::isfinite(report.fitted_order)) {
    std::cerr << "not enough successful runs to fit an order\n";
    return kExitRuntime;
  }
  return 0;
}

int cmd_bench(const MethodFlags& mf, const RunFlags& rf, const std::string& out_path) {
  const ImexGlmTableau t = method_from(mf);
  const ProblemSpec ps = rf.problem_spec();
  const PartitionedSystem sys = build_problem(ps);
  const std::vector<long> steps = rf.steps.empty() ? default_steps(ps.kind) : rf.steps;
  for (long n : steps)
    if (n < 1) throw ValidationFailure("--steps must be positive");
  const IntegrationConfig cfg = rf.config(ps.kind);
  const State ref = reference_solution(sys, rf.reference_tol);
  const auto records = run_bench(t, sys, steps, rf.workers, cfg, ref);
  emit(out_path, [&](std::ostream& os) { write_bench_csv(os, records); });
  if (!out_path.empty())
    write_manifest(manifest_path(out_path), {"bench", mf.spec(), ps, cfg, steps, rf.workers});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel IMEX general linear methods: construction, analysis and experiments"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  MethodFlags mf;
  RunFlags rf;
  std::string out_path;
  std::string verify_path;
  std::vector<double> alphas{0.0, 75.0, 90.0};
  GridSpec grid;
  int resolution = 0;
  int stab_workers = 1;

  auto* derive = app.add_subcommand("derive", "construct a method and write its tableau JSON");
  mf.attach(derive, true);
  derive->add_option("--out", out_path, "tableau file (stdout if omitted)");

  auto* verify = app.add_subcommand("verify", "check a tableau file against the order conditions");
  verify->add_option("tableau", verify_path, "tableau JSON file")->required();

  auto* stability = app.add_subcommand("stability", "constrained nonstiff stability regions");
  mf.attach(stability, false);
  stability->add_option("--tableau", mf.tableau, "tableau file instead of --method/--order");
  stability->add_option("--alpha", alphas, "sector angles in degrees")->delimiter(',');
  stability->add_option("--re-min", grid.re_min);
  stability->add_option("--re-max", grid.re_max);
  stability->add_option("--im-min", grid.im_min);
  stability->add_option("--im-max", grid.im_max);
  stability->add_option("--resolution", resolution, "grid points per axis (default 401)");
  stability->add_option("--workers", stab_workers, "scan threads");
  std::string region_prefix = "region";
  stability->add_option("--out", region_prefix, "output prefix; writes PREFIX_alphaA.csv");

  auto* integ = app.add_subcommand("integrate", "one run; per-step diagnostics CSV");
  auto* conv = app.add_subcommand("convergence", "step ladder against a reference solution");
  auto* bench = app.add_subcommand("bench", "work-precision runs over step and worker counts");
  for (auto* cmd : {integ, conv, bench}) {
    mf.attach(cmd, false);
    cmd->add_option("--tableau", mf.tableau, "tableau file instead of --method/--order");
    rf.attach(cmd);
    cmd->add_option("--out", out_path, "CSV file (stdout if omitted)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (resolution > 0) grid.re_points = grid.im_points = resolution;
    if (*derive) return cmd_derive(mf, out_path);
    if (*verify) return cmd_verify(verify_path);
    if (*stability) return cmd_stability(mf, alphas, grid, stab_workers, region_prefix);
    if (*integ) return cmd_integrate(mf, rf, out_path);
    if (*conv) return cmd_convergence(mf, rf, out_path);
    if (*bench) return cmd_bench(mf, rf, out_path);
  } catch (const TableauError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const StabilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
