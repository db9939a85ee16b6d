// Command-line front end. `run` is free of global state so tests can drive it
// with their own streams.
#pragma once

#include "polyelast/checks.hpp"
#include "polyelast/vtk.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace polyelast::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

inline std::vector<double> parse_lambda_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !(v >= 0.0)) throw UsageError("invalid lambda value '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("--lambda list is empty");
  return out;
}

struct RunConfig {
  std::string command;
  CaseId case_id = CaseId::example1;
  std::vector<MeshSource> meshes;
  std::vector<double> lambdas{1.0};
  double mu = 1.0;
  std::optional<double> mu1;
  bool bubbles = true;
  SolverConfig solver;
  std::string csv_path;
  std::string vtk_path;
  std::uint64_t seed = kDefaultPerturbSeed;

  StudyConfig study() const {
    StudyConfig s;
    s.case_id = case_id;
    s.meshes = meshes;
    s.lambdas = lambdas;
    s.mu = mu;
    s.mu1 = mu1;
    s.bubbles = bubbles;
    s.solver = solver;
    s.seed = seed;
    return s;
  }
};

namespace detail {

/// Writes to `path`, or to `fallback` when the path is empty.
template <class F>
void with_output(const std::string& path, std::ostream& fallback, F&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open output file: " + path);
  write(file);
}

inline int run_solve(const RunConfig& rc, std::ostream& out) {
  if (rc.meshes.size() != 1) throw UsageError("solve needs exactly one mesh");
  if (rc.lambdas.size() != 1) throw UsageError("solve needs exactly one lambda");
  const StudyConfig sc = rc.study();
  const auto t0 = std::chrono::steady_clock::now();
  const Mesh mesh = rc.meshes.front().load(rc.seed);
  const MaterialParams mat(rc.mu, rc.lambdas.front(), rc.mu1.value_or(rc.mu));
  const ManufacturedCase mc = make_case(rc.case_id, mat);
  const DofMap dofs(mesh, rc.bubbles, mc.boundary(mesh).dirichlet_faces(mesh));
  const SolveOutcome res = solve_case(mesh, mc, dofs, rc.solver);

  ConvergenceRecord row;
  row.case_id = rc.case_id;
  row.mesh_kind = rc.meshes.front().kind_label();
  row.n = rc.meshes.front().kind ? rc.meshes.front().n : 0;
  row.h = mesh.h();
  row.lambda = mat.lambda;
  row.mu = mat.mu;
  row.bubbles = rc.bubbles;
  row.n_dofs = dofs.total_dofs();
  row.error_rel = res.error_rel;
  row.cg_iters = res.solve.iterations;
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  with_output(rc.csv_path, out, [&](std::ostream& o) { write_csv(o, sc, {row}); });
  if (!rc.vtk_path.empty()) write_vtk_file(rc.vtk_path, mesh, res.solution);
  return kExitOk;
}

inline int run_convergence(const RunConfig& rc, std::ostream& out) {
  const StudyConfig sc = rc.study();
  const auto rows = run_convergence_study(sc);
  with_output(rc.csv_path, out, [&](std::ostream& o) { write_csv(o, sc, rows); });
  return kExitOk;
}

inline int run_check(const RunConfig& rc, std::ostream& out) {
  if (rc.meshes.size() != 1) throw UsageError("check needs exactly one mesh");
  const Mesh mesh = rc.meshes.front().load(rc.seed);
  const MaterialParams mat(rc.mu, rc.lambdas.front(), rc.mu1.value_or(rc.mu));
  bool all = true;
  for (const auto& r : run_checks(mesh, mat, rc.solver, rc.seed)) {
    out << (r.skipped ? "SKIP " : r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    all = all && r.passed;
  }
  return all ? kExitOk : kExitNumerical;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Polyhedral linear elasticity solver with face-bubble enrichment", "polyelast"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string case_name = "example1", mesh, series, lambdas = "1";
  double mu = 1.0, tol = 1e-10;
  std::optional<double> mu1;
  int max_iters = 0;
  bool no_bubbles = false;
  std::string out_path, vtk_path;
  std::uint64_t seed = kDefaultPerturbSeed;

  app.add_option("--case", case_name, "example1 | example2 | example3 | patch")->check(
      CLI::IsMember({"example1", "example2", "example3", "patch"}));
  auto* mesh_opt = app.add_option("--mesh", mesh, "generated mesh <hex|tet>:<n>[:<perturb>] or POLYMESH file");
  auto* series_opt = app.add_option("--mesh-series", series, "comma list of kind:n entries or POLYMESH files");
  mesh_opt->excludes(series_opt);
  app.add_option("--lambda", lambdas, "comma list of lambda values");
  app.add_option("--mu", mu, "shear modulus (default 1)")->check(CLI::PositiveNumber);
  app.add_option("--mu1", mu1, "stabilisation scale (default mu)")->check(CLI::PositiveNumber);
  app.add_flag("--no-bubbles", no_bubbles, "constrain all face bubbles to zero");
  app.add_option("--tol", tol, "CG relative residual tolerance")->check(CLI::Range(0.0, 1.0));
  app.add_option("--max-iters", max_iters, "CG iteration cap (default max(1000, 20 sqrt(n)))")->check(CLI::PositiveNumber);
  app.add_option("--out", out_path, "CSV output path (default standard output)");
  app.add_option("--vtk", vtk_path, "VTK output path (solve only)");
  app.add_option("--seed", seed, "seed for mesh perturbation and random samples");

  app.add_subcommand("solve", "solve one problem; writes a one-row CSV and optionally VTK");
  app.add_subcommand("convergence", "run a convergence study over a mesh series and lambda list");
  app.add_subcommand("check", "run the invariant suite on one mesh");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "polyelast: " << e.what() << '\n';
    return kExitUsage;
  }

  RunConfig rc;
  try {
    rc.command = app.get_subcommands().front()->get_name();
    rc.case_id = parse_case_id(case_name);
    if (mesh.empty() && series.empty()) throw UsageError("one of --mesh or --mesh-series is required");
    for (const auto& s : mesh.empty() ? split_list(series) : std::vector<std::string>{mesh}) rc.meshes.push_back(parse_mesh_source(s));
    if (rc.meshes.empty()) throw UsageError("--mesh-series is empty");
    rc.lambdas = parse_lambda_list(lambdas);
    rc.mu = mu;
    rc.mu1 = mu1;
    rc.bubbles = !no_bubbles;
    rc.solver.tolerance = tol;
    rc.solver.max_iterations = max_iters;
    rc.csv_path = out_path;
    rc.vtk_path = vtk_path;
    rc.seed = seed;
    if (!rc.vtk_path.empty() && rc.command != "solve") throw UsageError("--vtk is only valid with solve");
    if ((rc.case_id == CaseId::example2 || rc.case_id == CaseId::example3))
      for (double l : rc.lambdas)
        if (!(l > 0.0)) throw UsageError(to_string(rc.case_id) + " requires lambda > 0");
  } catch (const std::invalid_argument& e) {
    err << "polyelast: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (rc.command == "solve") return detail::run_solve(rc, out);
    if (rc.command == "convergence") return detail::run_convergence(rc, out);
    return detail::run_check(rc, out);
  } catch (const UsageError& e) {
    err << "polyelast: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "polyelast: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace polyelast::cli
