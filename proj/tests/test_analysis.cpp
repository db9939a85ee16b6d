#include "polyelast/analysis.hpp"
#include "polyelast/mesh_io.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace polyelast;

namespace {

const char* kCube = R"(POLYMESH 1
8 6 1
0 0 0
1 0 0
1 1 0
0 1 0
0 0 1
1 0 1
1 1 1
0 1 1
4 0 1 2 3
4 4 5 6 7
4 0 1 5 4
4 3 7 6 2
4 0 4 7 3
4 1 2 6 5
6 -1 2 3 4 5 6
)";

Mesh cube() {
  std::istringstream in(kCube);
  return parse_polymesh(in);
}

constexpr double kStep = 1e-5;

Mat3 fd_gradient(const VectorField& u, const Vec3& x) {
  Mat3 g;
  for (int b = 0; b < 3; ++b) {
    const Vec3 e = kStep * Vec3::Unit(b);
    g.col(b) = (u(x + e) - u(x - e)) / (2.0 * kStep);
  }
  return g;
}

// -div sigma by central differences of the exact stress
Vec3 fd_load(const ManufacturedCase& mc, const Vec3& x) {
  Vec3 f = Vec3::Zero();
  for (int b = 0; b < 3; ++b) {
    const Vec3 e = kStep * Vec3::Unit(b);
    f -= (mc.stress(x + e) - mc.stress(x - e)).col(b) / (2.0 * kStep);
  }
  return f;
}

const std::vector<Vec3> kSamples = {{0.1, 0.2, 0.3}, {0.77, 0.41, 0.05}, {0.5, 0.5, 0.5}, {0.93, 0.12, 0.66}};

}  // namespace

TEST(Manufactured, DerivativesMatchFiniteDifferences) {
  for (CaseId id : {CaseId::example1, CaseId::example2, CaseId::example3, CaseId::patch})
    for (double lambda : {1.0, 1e3}) {
      const ManufacturedCase mc = make_case(id, MaterialParams(1.5, lambda));
      for (const Vec3& x : kSamples) {
        const Mat3 g = mc.grad(x);
        EXPECT_LE((fd_gradient(mc.u, x) - g).norm(), 1e-5 * std::max(1.0, g.norm())) << to_string(id);
        EXPECT_NEAR(mc.div(x), g.trace(), 1e-12 * std::max(1.0, g.norm()));
        const Vec3 f = mc.f(x), fd = fd_load(mc, x);
        EXPECT_LE((fd - f).norm(), 1e-5 * std::max(1.0, f.norm())) << to_string(id) << " lambda " << lambda;
      }
    }
}

TEST(Manufactured, Example1IsDivergenceFreeAndExample2LambdaBounded) {
  const ManufacturedCase e1 = make_case(CaseId::example1, MaterialParams(1, 1));
  for (const Vec3& x : kSamples) EXPECT_EQ(e1.div(x), 0.0);
  const ManufacturedCase a = make_case(CaseId::example2, MaterialParams(1, 1e3));
  const ManufacturedCase b = make_case(CaseId::example2, MaterialParams(1, 1e8));
  for (const Vec3& x : kSamples) {
    EXPECT_NEAR(a.material.lambda * a.div(x), b.material.lambda * b.div(x), 1e-9);
    EXPECT_LE((a.u(x) - b.u(x)).norm(), 3e-3);
  }
  EXPECT_THROW(make_case(CaseId::example2, MaterialParams(1, 0)), std::invalid_argument);
  EXPECT_THROW(parse_case_id("example4"), std::invalid_argument);
  EXPECT_EQ(parse_case_id(to_string(CaseId::example3)), CaseId::example3);
}

TEST(Manufactured, Example3BoundarySplit) {
  const Mesh m = generate_structured_mesh(MeshKind::hex, 2);
  const auto bc = make_case(CaseId::example3, MaterialParams(1, 1)).boundary(m);
  const auto flags = bc.dirichlet_faces(m);
  int dirichlet = 0, neumann = 0;
  for (int f = 0; f < m.n_faces(); ++f) {
    if (!m.face(f).on_boundary) continue;
    (flags[f] ? dirichlet : neumann)++;
    EXPECT_EQ(flags[f], m.face(f).centroid.x() == 0.0);
  }
  EXPECT_EQ(dirichlet, 4);
  EXPECT_EQ(neumann, 20);
}

TEST(Rate, Formula) {
  EXPECT_NEAR(compute_rate(1.0, 1.0, 0.5, 0.5), 1.0, 1e-15);
  EXPECT_NEAR(compute_rate(1.0, 1.0, 0.25, 0.5), 2.0, 1e-15);
  // published (E, h) pairs of a Voronoi refinement with rate 1.0179
  EXPECT_NEAR(compute_rate(1.575633e-01, 3.053127e-01, 1.135921e-01, 2.213817e-01), 1.0179, 5e-5);
  EXPECT_THROW(compute_rate(1.0, 0.5, 0.5, 0.5), std::domain_error);
  EXPECT_THROW(compute_rate(0.0, 1.0, 0.5, 0.5), std::domain_error);
}

TEST(Errors, RelativeErrorOfIdenticalFunctionsIsZero) {
  const Mesh m = generate_structured_mesh(MeshKind::tet, 2);
  const DofMap d(m, true);
  const ManufacturedCase mc = make_case(CaseId::example1, MaterialParams(1, 1));
  const DiscreteFunction iu = interpolate(m, d, mc.u);
  EXPECT_EQ(relative_error(m, iu, iu, [&](const Vec3& x) { return mc.strain(x); }), 0.0);
  EXPECT_THROW(relative_error(m, iu, iu, [](const Vec3&) { return Mat3::Zero().eval(); }), std::domain_error);
}

TEST(Consistency, QuadraticOnUnitCube) {
  const Mesh m = cube();
  const DofMap d(m, true);
  const auto u = [](const Vec3& x) { return Vec3(x.x() * x.x(), 0, 0); };
  const auto grad = [](const Vec3& x) {
    Mat3 g = Mat3::Zero();
    g(0, 0) = 2.0 * x.x();
    return g;
  };
  // grad^K I u = e1 (x) e1 and S_K vanishes: C_D^2 = int (2x-1)^2 = 1/3
  EXPECT_NEAR(consistency_CD(m, grad, interpolate(m, d, u)), 1.0 / std::sqrt(3.0), 1e-14);
}

TEST(Consistency, AdjointResidualVanishesForAffineFields) {
  const Mesh m = generate_structured_mesh(MeshKind::tet, 3, 0.3);
  const DofMap d(m, true);
  const MaterialParams mat(1.0, 5.0);
  const ManufacturedCase mc = make_case(CaseId::patch, mat);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 4; ++i) {
    const DiscreteFunction v = random_interior_function(d, rng);
    EXPECT_NEAR(adjoint_residual(m, [&](const Vec3& x) { return mc.stress(x); }, mc.f, v), 0.0, 1e-12);
  }
}

TEST(Norms, AffineExample) {
  const Mesh m = cube();
  const DofMap d(m, true);
  const MaterialParams mat(1.0, 3.0);
  const DiscreteFunction v = interpolate(m, d, [](const Vec3& x) { return Vec3(x.x(), 0, 0); });
  const DiscreteNorms n = discrete_norms(m, v, mat);
  EXPECT_NEAR(n.h1, 1.0, 1e-14);
  EXPECT_NEAR(n.sD, 0.0, 1e-14);
  EXPECT_NEAR(n.eps_l2, 1.0, 1e-14);
  EXPECT_NEAR(n.energy * n.energy, 2.0 * mat.mu + mat.lambda, 1e-13);
}

TEST(Norms, EnergyDominatesScaledStrain) {
  const Mesh m = generate_structured_mesh(MeshKind::tet, 2, 0.3);
  const DofMap d(m, true);
  const MaterialParams mat(0.8, 2.0, 0.5);
  std::mt19937_64 rng(9);
  for (int i = 0; i < 8; ++i) {
    const DiscreteNorms n = discrete_norms(m, random_interior_function(d, rng), mat);
    EXPECT_GE(n.energy * n.energy, 2.0 * std::min(mat.mu, mat.mu1) * n.eps_l2 * n.eps_l2);
    EXPECT_GE(n.h1 * n.h1, n.eps_l2 * n.eps_l2);
  }
}

TEST(Stability, KornRatioBoundedBelowByOne) {
  const Mesh m = generate_structured_mesh(MeshKind::tet, 3);
  const RatioStats s = korn_ratio(m, DofMap(m, true), 16);
  EXPECT_GE(s.mean, 1.0);
  EXPECT_GE(s.max, s.mean);
  EXPECT_TRUE(std::isfinite(s.max));
}

TEST(Stability, DofBoundRatioMeshIndependent) {
  const Mesh coarse = generate_structured_mesh(MeshKind::tet, 2, 0.3);
  const Mesh fine = generate_structured_mesh(MeshKind::tet, 4, 0.3);
  const double a = dof_bound_ratio(coarse, DofMap(coarse, true), 16);
  const double b = dof_bound_ratio(fine, DofMap(fine, true), 16);
  EXPECT_GT(a, 0.0);
  EXPECT_LT(b, 2.0 * a);
}

TEST(MeshSourceParse, Forms) {
  const MeshSource a = parse_mesh_source("tet:4:0.25");
  ASSERT_TRUE(a.kind.has_value());
  EXPECT_EQ(*a.kind, MeshKind::tet);
  EXPECT_EQ(a.n, 4);
  EXPECT_EQ(a.perturb, 0.25);
  EXPECT_EQ(parse_mesh_source("hex:3").kind_label(), "hex");
  const MeshSource f = parse_mesh_source("voronoi.polymesh");
  EXPECT_FALSE(f.kind.has_value());
  EXPECT_EQ(f.kind_label(), "file");
  for (const char* bad : {"hex:0", "tet:x", "tet:4:1.5", "hex:4:0.2", "tet:4:", ""})
    EXPECT_THROW(parse_mesh_source(bad), std::invalid_argument) << bad;
}

TEST(Csv, HeaderAndRowFormat) {
  StudyConfig cfg;
  ConvergenceRecord r;
  r.case_id = CaseId::example2;
  r.mesh_kind = "tet";
  r.n = 8;
  r.h = std::sqrt(3.0) / 8.0;
  r.lambda = 1e6;
  r.mu = 1.0;
  r.bubbles = false;
  r.n_dofs = 1234;
  r.error_rel = 0.1234567;
  r.cg_iters = 42;
  r.seconds = 1.5;
  std::ostringstream out;
  write_csv(out, cfg, {r});
  std::istringstream in(out.str());
  std::string prov, header, row;
  std::getline(in, prov);
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(prov.rfind("# polyelast 1.0.0; perturb_seed=", 0), 0u);
  EXPECT_NE(prov.find("; cg_tol=1.00000e-10; max_iters=auto; preconditioner=diagonal;"), std::string::npos);
  EXPECT_EQ(header, "case,mesh_kind,n,h,lambda,mu,bubbles,n_dofs,error_rel,rate,cg_iters,seconds");
  EXPECT_EQ(row, "example2,tet,8,2.16506e-01,1.00000e+06,1.00000e+00,off,1234,1.23457e-01,,42,1.50000e+00");
  r.n = 0;
  r.mesh_kind = "file";
  r.rate = 1.25;
  std::ostringstream o2;
  write_csv_row(o2, r);
  EXPECT_EQ(o2.str(), "example2,file,,2.16506e-01,1.00000e+06,1.00000e+00,off,1234,1.23457e-01,1.25000e+00,42,1.50000e+00\n");
}

TEST(Study, RowsOrderedWithRatesPerLambda) {
  StudyConfig cfg;
  cfg.case_id = CaseId::example1;
  cfg.meshes = {parse_mesh_source("hex:2"), parse_mesh_source("hex:4")};
  cfg.lambdas = {1.0, 1e3};
  const auto rows = run_convergence_study(cfg);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_FALSE(rows[0].rate || rows[1].rate);
  ASSERT_TRUE(rows[2].rate && rows[3].rate);
  EXPECT_EQ(rows[2].lambda, 1.0);
  EXPECT_EQ(rows[3].lambda, 1e3);
  EXPECT_NEAR(*rows[2].rate, compute_rate(rows[0].error_rel, rows[0].h, rows[2].error_rel, rows[2].h), 1e-14);
  EXPECT_GT(*rows[2].rate, 0.5);
  EXPECT_EQ(rows[3].n, 4);
  EXPECT_EQ(rows[3].n_dofs, 3 * 125 + 240);
}
