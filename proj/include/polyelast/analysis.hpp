// Norms, errors, rates, scheme diagnostics and the convergence study driver.
#pragma once

#include "polyelast/manufactured.hpp"
#include "polyelast/mesh_generator.hpp"
#include "polyelast/mesh_io.hpp"
#include "polyelast/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace polyelast {

inline constexpr const char* kVersion = "1.0.0";

struct DiscreteNorms {
  double h1 = 0.0;
  double energy = 0.0;
  double eps_l2 = 0.0;
  double sD = 0.0;
};

inline DiscreteNorms discrete_norms(const Mesh& mesh, const DiscreteFunction& v, const MaterialParams& mat) {
  double h1 = 0.0, energy = 0.0, eps = 0.0, sd = 0.0;
  for (int k = 0; k < mesh.n_cells(); ++k) {
    const double vol = mesh.cell(k).volume;
    const auto r = cell_reconstructions(mesh, k, v);
    const double s = stabilization_value(mesh, k, v, v);
    h1 += vol * r.gradient.squaredNorm() + s;
    eps += vol * r.strain.squaredNorm();
    energy += vol * (stress(r.strain, r.divergence, mat).cwiseProduct(r.strain)).sum() + mat.mu1 * s;
    sd += s;
  }
  return {std::sqrt(h1), std::sqrt(energy), std::sqrt(eps), sd};
}

/// ||eps_D(u_D) - eps_D(I u)|| / ||eps(u)||
inline double relative_error(const Mesh& mesh, const DiscreteFunction& u_d, const DiscreteFunction& iu,
                             const TensorField& exact_strain) {
  double num = 0.0, den = 0.0;
  for (int k = 0; k < mesh.n_cells(); ++k) {
    const Mat3 d = cell_reconstructions(mesh, k, u_d).strain - cell_reconstructions(mesh, k, iu).strain;
    num += mesh.cell(k).volume * d.squaredNorm();
    den += integrate(cell_rule(mesh, k, kQuadratureDegree), [&](const Vec3& x) { return exact_strain(x).squaredNorm(); });
  }
  if (!(den > 0.0)) throw std::domain_error("relative_error: exact strain has zero norm");
  return std::sqrt(num / den);
}

/// ||sigma_D(u_D) - sigma_D(I u)|| / ||sigma(u)||. Diagnostic only; unlike the
/// strain error it carries the lambda-weighted divergence mismatch.
inline double relative_stress_error(const Mesh& mesh, const DiscreteFunction& u_d, const DiscreteFunction& iu,
                                    const TensorField& exact_stress, const MaterialParams& mat) {
  double num = 0.0, den = 0.0;
  for (int k = 0; k < mesh.n_cells(); ++k) {
    const auto a = cell_reconstructions(mesh, k, u_d);
    const auto b = cell_reconstructions(mesh, k, iu);
    num += mesh.cell(k).volume * (stress(a.strain, a.divergence, mat) - stress(b.strain, b.divergence, mat)).squaredNorm();
    den += integrate(cell_rule(mesh, k, kQuadratureDegree), [&](const Vec3& x) { return exact_stress(x).squaredNorm(); });
  }
  if (!(den > 0.0)) throw std::domain_error("relative_stress_error: exact stress has zero norm");
  return std::sqrt(num / den);
}

inline double compute_rate(double e0, double h0, double e1, double h1) {
  if (!(e0 > 0.0 && h0 > 0.0 && e1 > 0.0 && h1 > 0.0)) throw std::domain_error("compute_rate: inputs must be positive");
  if (!(h1 < h0)) throw std::domain_error("compute_rate: mesh size must decrease");
  return std::log(e0 / e1) / std::log(h0 / h1);
}

/// (sum_K int_K |grad u - grad^K v|^2 + S_D(v, v))^(1/2)
inline double consistency_CD(const Mesh& mesh, const TensorField& grad_u, const DiscreteFunction& v) {
  double total = 0.0;
  for (int k = 0; k < mesh.n_cells(); ++k) {
    const Mat3 g = cell_reconstructions(mesh, k, v).gradient;
    total += integrate(cell_rule(mesh, k, kQuadratureDegree), [&](const Vec3& x) { return (grad_u(x) - g).squaredNorm(); });
    total += stabilization_value(mesh, k, v, v);
  }
  return std::sqrt(total);
}

/// sum_K (int_K sigma) : eps_K(v) - sum_K (int_K f) . vbar_K
inline double adjoint_residual(const Mesh& mesh, const TensorField& sigma, const VectorField& f, const DiscreteFunction& v) {
  double w = 0.0;
  for (int k = 0; k < mesh.n_cells(); ++k) {
    const auto rule = cell_rule(mesh, k, kQuadratureDegree);
    const auto r = cell_reconstructions(mesh, k, v);
    w += integrate(rule, sigma).cwiseProduct(r.strain).sum() - integrate(rule, f).dot(r.mean);
  }
  return w;
}

/// Uniform [-1,1] values on unconstrained slots, zero elsewhere.
inline DiscreteFunction random_interior_function(const DofMap& dofs, std::mt19937_64& rng) {
  DiscreteFunction v(dofs);
  for (int s = 0; s < dofs.n_slots(); ++s)
    if (!dofs.is_constrained(s)) v.values()(s) = 2.0 * uniform01(rng) - 1.0;
  return v;
}

struct RatioStats {
  double max = 0.0;
  double mean = 0.0;
};

/// ||v||_{1,D}^2 / (||eps_D v||^2 + S_D(v,v)) over random interior-supported v.
inline RatioStats korn_ratio(const Mesh& mesh, const DofMap& dofs, int samples, std::uint64_t seed = kDefaultPerturbSeed) {
  std::mt19937_64 rng(seed);
  RatioStats st;
  const MaterialParams unit(1.0, 0.0);
  for (int i = 0; i < samples; ++i) {
    const auto n = discrete_norms(mesh, random_interior_function(dofs, rng), unit);
    const double den = n.eps_l2 * n.eps_l2 + n.sD;
    if (!(den > 0.0)) throw std::logic_error("korn_ratio: zero denominator for a nonzero function");
    const double r = n.h1 * n.h1 / den;
    st.max = std::max(st.max, r);
    st.mean += r / samples;
  }
  return st;
}

/// max over samples and cells of ||w||_{1,K} / (h_K^{-1} |K|^{1/2} (max|w_s| + max|w_sigma|)).
inline double dof_bound_ratio(const Mesh& mesh, const DofMap& dofs, int samples, std::uint64_t seed = kDefaultPerturbSeed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const auto w = random_interior_function(dofs, rng);
    for (int k = 0; k < mesh.n_cells(); ++k) {
      const Cell& cell = mesh.cell(k);
      double ms = 0.0, mf = 0.0;
      for (int s : cell.vertices) ms = std::max(ms, w.vertex(s).norm());
      for (const auto& cf : cell.faces) mf = std::max(mf, std::abs(w.bubble(cf.face)));
      if (ms + mf == 0.0) continue;
      const double norm = std::sqrt(cell.volume * cell_reconstructions(mesh, k, w).gradient.squaredNorm() +
                                    stabilization_value(mesh, k, w, w));
      worst = std::max(worst, norm / (std::sqrt(cell.volume) / cell.diameter * (ms + mf)));
    }
  }
  return worst;
}

//------------------------------------------------------------------------------
// Convergence study
//------------------------------------------------------------------------------

/// Generated mesh `kind:n[:perturb]` or a POLYMESH file path.
struct MeshSource {
  std::optional<MeshKind> kind;
  int n = 0;
  double perturb = 0.0;
  std::string path;

  std::string kind_label() const { return kind ? to_string(*kind) : "file"; }
  Mesh load(std::uint64_t seed = kDefaultPerturbSeed) const {
    return kind ? generate_structured_mesh(*kind, n, perturb, seed) : read_polymesh(path);
  }
};

/// Accepts `hex:n`, `tet:n`, `tet:n:perturb`; anything else is a file path.
inline MeshSource parse_mesh_source(const std::string& s) {
  MeshSource src;
  const auto c1 = s.find(':');
  const std::string head = s.substr(0, c1);
  if (c1 == std::string::npos || (head != "hex" && head != "tet")) {
    if (s.empty()) throw std::invalid_argument("empty mesh source");
    src.path = s;
    return src;
  }
  src.kind = head == "hex" ? MeshKind::hex : MeshKind::tet;
  const auto c2 = s.find(':', c1 + 1);
  const std::string ns = s.substr(c1 + 1, c2 == std::string::npos ? std::string::npos : c2 - c1 - 1);
  std::size_t used = 0;
  try {
    src.n = std::stoi(ns, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != ns.size() || src.n < 1) throw std::invalid_argument("bad subdivision count in mesh '" + s + "'");
  if (c2 != std::string::npos) {
    const std::string ps = s.substr(c2 + 1);
    try {
      src.perturb = std::stod(ps, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != ps.size()) throw std::invalid_argument("bad perturbation in mesh '" + s + "'");
    if (src.perturb < 0.0 || src.perturb >= 1.0) throw std::invalid_argument("perturbation must lie in [0,1) in mesh '" + s + "'");
    if (*src.kind == MeshKind::hex && src.perturb > 0.0) throw std::invalid_argument("perturbation is only supported for tet meshes");
  }
  return src;
}

struct ConvergenceRecord {
  CaseId case_id = CaseId::example1;
  std::string mesh_kind;
  int n = 0;  // 0 for file meshes
  double h = 0.0;
  double lambda = 0.0;
  double mu = 1.0;
  bool bubbles = true;
  int n_dofs = 0;
  double error_rel = 0.0;
  std::optional<double> rate;
  int cg_iters = 0;
  double seconds = 0.0;
};

/// The functions refer to the DofMap passed to solve_case.
struct SolveOutcome {
  DiscreteFunction solution;
  DiscreteFunction interpolant;
  SolveResult solve;
  double error_rel = 0.0;
};

/// Assemble, solve and measure one manufactured problem.
inline SolveOutcome solve_case(const Mesh& mesh, const ManufacturedCase& mc, const DofMap& dofs,
                               const SolverConfig& config) {
  const BoundaryConditions bc = mc.boundary(mesh);
  const SparseSystem sys = assemble(mesh, dofs, mc.material, bc, mc.f);
  SolveResult res = solve_spd(sys, config);
  DiscreteFunction uh(dofs, res.values);
  DiscreteFunction iu = interpolate(mesh, dofs, mc.u);
  const double err = relative_error(mesh, uh, iu, [&](const Vec3& x) { return mc.strain(x); });
  return {std::move(uh), std::move(iu), std::move(res), err};
}

struct StudyConfig {
  CaseId case_id = CaseId::example1;
  std::vector<MeshSource> meshes;
  std::vector<double> lambdas{1.0};
  double mu = 1.0;
  std::optional<double> mu1;
  bool bubbles = true;
  SolverConfig solver;
  std::uint64_t seed = kDefaultPerturbSeed;
};

/// Rows ordered by (mesh index, lambda index); the rate of a row compares it
/// with the previous mesh at the same lambda.
inline std::vector<ConvergenceRecord> run_convergence_study(const StudyConfig& cfg) {
  if (cfg.lambdas.empty()) throw std::invalid_argument("lambda list is empty");
  std::vector<ConvergenceRecord> rows;
  std::vector<std::optional<ConvergenceRecord>> previous(cfg.lambdas.size());
  for (const auto& src : cfg.meshes) {
    const Mesh mesh = src.load(cfg.seed);
    for (std::size_t li = 0; li < cfg.lambdas.size(); ++li) {
      const auto t0 = std::chrono::steady_clock::now();
      const double lambda = cfg.lambdas[li];
      const MaterialParams mat(cfg.mu, lambda, cfg.mu1.value_or(cfg.mu));
      const ManufacturedCase mc = make_case(cfg.case_id, mat);
      const DofMap dofs(mesh, cfg.bubbles, mc.boundary(mesh).dirichlet_faces(mesh));
      const SolveOutcome out = solve_case(mesh, mc, dofs, cfg.solver);
      ConvergenceRecord r;
      r.case_id = cfg.case_id;
      r.mesh_kind = src.kind_label();
      r.n = src.kind ? src.n : 0;
      r.h = mesh.h();
      r.lambda = lambda;
      r.mu = cfg.mu;
      r.bubbles = cfg.bubbles;
      r.n_dofs = dofs.total_dofs();
      r.error_rel = out.error_rel;
      r.cg_iters = out.solve.iterations;
      if (previous[li] && r.h < previous[li]->h && r.error_rel > 0.0 && previous[li]->error_rel > 0.0)
        r.rate = compute_rate(previous[li]->error_rel, previous[li]->h, r.error_rel, r.h);
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      previous[li] = r;
      rows.push_back(r);
    }
  }
  return rows;
}

inline constexpr const char* kCsvHeader = "case,mesh_kind,n,h,lambda,mu,bubbles,n_dofs,error_rel,rate,cg_iters,seconds";

/// Six significant digits in scientific notation.
inline std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.5e", v);
  return buf;
}

inline std::string provenance_line(const StudyConfig& cfg) {
  const std::time_t now = std::time(nullptr);
  char ts[32];
  std::strftime(ts, sizeof(ts), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  std::string s = "# polyelast " + std::string(kVersion) + "; perturb_seed=" + std::to_string(cfg.seed) +
                  "; cg_tol=" + format_sci(cfg.solver.tolerance) + "; max_iters=" +
                  (cfg.solver.max_iterations > 0 ? std::to_string(cfg.solver.max_iterations) : std::string("auto")) +
                  "; preconditioner=" + (cfg.solver.preconditioner == Preconditioner::diagonal ? "diagonal" : "none") +
                  "; quadrature_degree=" + std::to_string(kQuadratureDegree) +
                  "; interpolation_degree=" + std::to_string(kInterpolationDegree) + "; timestamp=" + ts;
  return s;
}

inline void write_csv_row(std::ostream& out, const ConvergenceRecord& r) {
  out << to_string(r.case_id) << ',' << r.mesh_kind << ',';
  if (r.n > 0) out << r.n;
  out << ',' << format_sci(r.h) << ',' << format_sci(r.lambda) << ',' << format_sci(r.mu) << ','
      << (r.bubbles ? "on" : "off") << ',' << r.n_dofs << ',' << format_sci(r.error_rel) << ',';
  if (r.rate) out << format_sci(*r.rate);
  out << ',' << r.cg_iters << ',' << format_sci(r.seconds) << '\n';
}

inline void write_csv(std::ostream& out, const StudyConfig& cfg, const std::vector<ConvergenceRecord>& rows) {
  out << provenance_line(cfg) << '\n' << kCsvHeader << '\n';
  for (const auto& r : rows) write_csv_row(out, r);
}

}  // namespace polyelast
