// Invariant suite run by `polyelast check`.
#pragma once

#include "polyelast/analysis.hpp"

#include <cstdio>
#include <string>
#include <vector>

namespace polyelast {

struct CheckResult {
  std::string name;
  bool passed = false;
  bool skipped = false;
  std::string detail;
};

namespace detail {

inline std::string sci(double v) { return format_sci(v); }

}  // namespace detail

/// max_K | |K| div_K(I u) - int_K div u | / |int_K div u|, with |K| in place of
/// the denominator when the integral vanishes (then it is max_K |div_K(I u)|).
inline double commutation_defect(const Mesh& mesh, const VectorField& u, const ScalarField& div_u) {
  const DofMap dofs(mesh, true);
  const DiscreteFunction iu = interpolate(mesh, dofs, u);
  double worst = 0.0;
  for (int k = 0; k < mesh.n_cells(); ++k) {
    const double lhs = mesh.cell(k).volume * cell_reconstructions(mesh, k, iu).divergence;
    const double rhs = integrate(cell_rule(mesh, k, kQuadratureDegree), div_u);
    const double scale = rhs != 0.0 ? std::abs(rhs) : mesh.cell(k).volume;
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return worst;
}

/// max_sigma | face average of Pi^sigma v - vbar_sigma | for random DOFs
inline double mean_property_defect(const Mesh& mesh, std::uint64_t seed) {
  const DofMap dofs(mesh, true, std::vector<bool>(static_cast<std::size_t>(mesh.n_faces()), false));
  std::mt19937_64 rng(seed);
  const DiscreteFunction v = random_interior_function(dofs, rng);
  double worst = 0.0;
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const Vec3 avg = integrate(face_rule(mesh, f, kQuadratureDegree), [&](const Vec3& x) { return face_displacement(mesh, f, v, x); }) /
                     mesh.face(f).area;
    worst = std::max(worst, (avg - face_mean(mesh, f, v)).norm());
  }
  return worst;
}

struct PatchTestResult {
  double error_rel = 0.0;
  double s_d = 0.0;
  /// max_K |eps_K(u_D) - eps(u)|
  double strain_defect = 0.0;
};

inline PatchTestResult patch_test(const Mesh& mesh, const MaterialParams& mat, const SolverConfig& config) {
  const ManufacturedCase mc = make_case(CaseId::patch, mat);
  const DofMap dofs(mesh, true);
  const SolveOutcome out = solve_case(mesh, mc, dofs, config);
  PatchTestResult r;
  r.error_rel = out.error_rel;
  const Mat3 eps = sym(patch_gradient());
  for (int k = 0; k < mesh.n_cells(); ++k) {
    r.s_d += stabilization_value(mesh, k, out.solution, out.solution);
    r.strain_defect = std::max(r.strain_defect, (cell_reconstructions(mesh, k, out.solution).strain - eps).norm());
  }
  return r;
}

inline std::vector<CheckResult> run_checks(const Mesh& mesh, const MaterialParams& mat, const SolverConfig& config,
                                           std::uint64_t seed) {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, bool ok, std::string detail) { out.push_back({std::move(name), ok, false, std::move(detail)}); };

  const MeshReport report = validate_mesh(mesh);
  add("mesh invariants and weight identities", report.ok(),
      report.ok() ? "volume ratio h^3/|K| in [" + detail::sci(report.min_volume_ratio) + ", " + detail::sci(report.max_volume_ratio) + "]"
                  : report.violations.front());

  const double c_lin = commutation_defect(mesh, [](const Vec3& x) { return x; }, [](const Vec3&) { return 3.0; });
  add("commutation u=(x,y,z)", c_lin <= 1e-12, "max defect " + detail::sci(c_lin));
  const ManufacturedCase ex1 = make_case(CaseId::example1, mat);
  const double c_ex1 = commutation_defect(mesh, ex1.u, ex1.div);
  add("commutation example1 field", c_ex1 <= 1e-10, "max |div_K| " + detail::sci(c_ex1));

  const double mp = mean_property_defect(mesh, seed);
  add("face mean property", mp <= 1e-13, "max defect " + detail::sci(mp));

  {
    const DofMap dofs(mesh, true);
    const Mat3 a = patch_gradient();
    const DiscreteFunction iu = interpolate(mesh, dofs, [&](const Vec3& x) { return Vec3(a * x + patch_offset()); });
    double g = 0.0, s = 0.0;
    for (int k = 0; k < mesh.n_cells(); ++k) {
      g = std::max(g, (cell_reconstructions(mesh, k, iu).gradient - a).norm());
      s = std::max(s, std::abs(stabilization_value(mesh, k, iu, iu)));
    }
    add("linear exactness", g <= 1e-12 && s <= 1e-12, "max gradient defect " + detail::sci(g) + ", max S_K " + detail::sci(s));
  }

  const PatchTestResult pt = patch_test(mesh, mat, config);
  add("patch test", pt.error_rel <= 1e-9 && pt.s_d <= 1e-18,
      "E_rel " + detail::sci(pt.error_rel) + ", S_D " + detail::sci(pt.s_d));

  const DofMap dofs(mesh, true);
  bool any_free = false;
  for (int s = 0; s < dofs.n_slots() && !any_free; ++s) any_free = !dofs.is_constrained(s);
  if (any_free) {
    const RatioStats korn = korn_ratio(mesh, dofs, 64, seed);
    add("Korn ratio", std::isfinite(korn.max) && korn.max > 0.0, "max " + detail::sci(korn.max) + ", mean " + detail::sci(korn.mean));
  } else {
    out.push_back({"Korn ratio", true, true, "no interior DOFs"});
  }
  return out;
}

}  // namespace polyelast
