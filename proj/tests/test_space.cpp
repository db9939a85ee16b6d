#include "polyelast/mesh_generator.hpp"
#include "polyelast/mesh_io.hpp"
#include "polyelast/space.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace polyelast;

namespace {

// unit cube; loop normals +z +z -y +y -x +x, so only face 1 enters with sign -1
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

DiscreteFunction random_function(const DofMap& dofs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  DiscreteFunction v(dofs);
  for (int s = 0; s < dofs.n_slots(); ++s) v.values()(s) = 2.0 * uniform01(rng) - 1.0;
  if (!dofs.bubbles_enabled())
    for (int f = 0; f < dofs.n_faces(); ++f) v.set_bubble(f, 0.0);
  return v;
}

std::vector<bool> no_dirichlet(const Mesh& m) { return std::vector<bool>(static_cast<std::size_t>(m.n_faces()), false); }

}  // namespace

TEST(DofMap, LayoutAndMasks) {
  const Mesh m = generate_structured_mesh(MeshKind::hex, 2);
  const DofMap on(m, true), off(m, false);
  EXPECT_EQ(on.total_dofs(), 3 * 27 + 36);
  EXPECT_EQ(off.total_dofs(), 3 * 27);
  EXPECT_EQ(off.n_slots(), on.n_slots());
  int dirichlet_vertex_slots = 0, dirichlet_bubbles = 0;
  for (int s = 0; s < on.n_slots(); ++s) {
    if (!on.is_dirichlet(s)) continue;
    (on.is_bubble(s) ? dirichlet_bubbles : dirichlet_vertex_slots)++;
  }
  EXPECT_EQ(dirichlet_vertex_slots, 3 * 26);  // all but the centre vertex
  EXPECT_EQ(dirichlet_bubbles, 24);           // boundary faces
  for (int f = 0; f < m.n_faces(); ++f) EXPECT_TRUE(off.is_constrained(off.face_offset(f)));
}

TEST(DofMap, InterfaceVerticesAreConstrained) {
  const Mesh m = generate_structured_mesh(MeshKind::hex, 2);
  std::vector<bool> flags(static_cast<std::size_t>(m.n_faces()), false);
  for (int f = 0; f < m.n_faces(); ++f) flags[f] = m.face(f).on_boundary && m.face(f).centroid.x() < 1e-12;
  const DofMap d(m, true, flags);
  for (int v = 0; v < m.n_vertices(); ++v)
    EXPECT_EQ(d.is_dirichlet(d.vertex_offset(v)), m.vertex(v).position.x() == 0.0);
  EXPECT_THROW(DofMap(m, true, std::vector<bool>(3, false)), std::invalid_argument);
}

TEST(MaterialParams, Validation) {
  EXPECT_THROW(MaterialParams(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(MaterialParams(1.0, -1.0), std::invalid_argument);
  EXPECT_EQ(MaterialParams(2.0, 3.0).mu1, 2.0);
}

TEST(FaceGradient, ConstantsAndLinearData) {
  const Mesh m = cube();
  const DofMap d(m, true, no_dirichlet(m));
  DiscreteFunction v(d);
  for (int s = 0; s < m.n_vertices(); ++s) v.set_vertex(s, Vec3(0.3, -1.2, 2.0));
  EXPECT_LE(face_gradient(m, 0, v).norm(), 1e-15);
  for (int s = 0; s < m.n_vertices(); ++s) v.set_vertex(s, Vec3(m.vertex(s).position.x(), 0, 0));
  Mat3 e11 = Mat3::Zero();
  e11(0, 0) = 1.0;
  EXPECT_LE((face_gradient(m, 0, v) - e11).norm(), 1e-15);
  for (int s = 0; s < m.n_vertices(); ++s) v.set_vertex(s, m.vertex(s).position);
  Mat3 proj = Mat3::Identity();
  proj(2, 2) = 0.0;
  EXPECT_LE((face_gradient(m, 0, v) - proj).norm(), 1e-15);
  EXPECT_LE((face_displacement(m, 0, v, m.face(0).centroid) - Vec3(0.5, 0.5, 0.0)).norm(), 1e-15);
}

TEST(FaceDisplacement, MeanPropertyForRandomData) {
  const Mesh m = generate_structured_mesh(MeshKind::tet, 2, 0.3);
  const DofMap d(m, true, no_dirichlet(m));
  const DiscreteFunction v = random_function(d, 11);
  for (int f = 0; f < m.n_faces(); ++f) {
    const Vec3 avg = integrate(face_rule(m, f, 4), [&](const Vec3& x) { return face_displacement(m, f, v, x); }) / m.face(f).area;
    EXPECT_LE((avg - face_mean(m, f, v)).norm(), 1e-13);
  }
}

TEST(CellReconstructions, UnitCubeExamples) {
  const Mesh m = cube();
  const DofMap d(m, true, no_dirichlet(m));
  DiscreteFunction v(d);
  for (int s = 0; s < m.n_vertices(); ++s) v.set_vertex(s, Vec3(1, 2, 3));
  auto r = cell_reconstructions(m, 0, v);
  EXPECT_LE(r.gradient.norm(), 1e-15);
  EXPECT_LE(std::abs(r.divergence), 1e-15);
  EXPECT_LE((r.displacement(Vec3(0.2, 0.9, 0.4)) - Vec3(1, 2, 3)).norm(), 1e-15);

  // bubble 1 on the face x = 1 (face 5, n = e1, w = +1)
  DiscreteFunction b(d);
  ASSERT_NEAR((m.face(5).normal - Vec3(1, 0, 0)).norm(), 0.0, 1e-15);
  b.set_bubble(5, 1.0);
  r = cell_reconstructions(m, 0, b);
  Mat3 e11 = Mat3::Zero();
  e11(0, 0) = 1.0;
  EXPECT_LE((r.gradient - e11).norm(), 1e-15);
  EXPECT_NEAR(r.divergence, 1.0, 1e-15);
  // vertex misfits |Pi^K v(x_s)|^2 = (x_s - 1/2)^2 = 1/4 at 8 vertices, plus the bubble term:
  // S_K = h_K (8/4 + 1) b^2 = 3 sqrt(3) b^2, of which h_K b^2 is the bubble penalty
  EXPECT_NEAR(stabilization_value(m, 0, b, b), 3.0 * std::sqrt(3.0), 1e-14);
  b.set_bubble(5, 2.5);
  EXPECT_NEAR(stabilization_value(m, 0, b, b), 3.0 * std::sqrt(3.0) * 6.25, 1e-13);
  double vertex_part = 0.0;
  for (int s = 0; s < 8; ++s) vertex_part += (cell_reconstructions(m, 0, b).displacement(m.vertex(s).position)).squaredNorm();
  EXPECT_NEAR(stabilization_value(m, 0, b, b) - std::sqrt(3.0) * vertex_part, std::sqrt(3.0) * 6.25, 1e-13);
  const MaterialParams mat(1.0, 1e6);
  r = cell_reconstructions(m, 0, b);
  EXPECT_LE((stress(r.strain, r.divergence, mat) - (2.0 * 2.5 * e11 + 1e6 * 2.5 * Mat3::Identity())).norm(), 1e-8);
}

TEST(CellReconstructions, LinearExactness) {
  const Mat3 a = (Mat3() << 0.3, -1.0, 0.2, 0.5, 0.1, 0.7, -0.4, 0.9, -0.6).finished();
  const Vec3 c(0.1, 0.2, -0.3);
  for (const char* which : {"cube", "hex", "tet"}) {
    const Mesh m = std::string(which) == "cube" ? cube()
                   : std::string(which) == "hex" ? generate_structured_mesh(MeshKind::hex, 2)
                                                 : generate_structured_mesh(MeshKind::tet, 2, 0.3);
    const DofMap d(m, true);
    const DiscreteFunction iu = interpolate(m, d, [&](const Vec3& x) { return Vec3(a * x + c); });
    for (int f = 0; f < m.n_faces(); ++f) EXPECT_LE(std::abs(iu.bubble(f)), 1e-13);
    for (int k = 0; k < m.n_cells(); ++k) {
      const auto r = cell_reconstructions(m, k, iu);
      EXPECT_LE((r.gradient - a).norm(), 1e-12) << which;
      EXPECT_NEAR(r.divergence, a.trace(), 1e-12);
      EXPECT_LE(stabilization_value(m, k, iu, iu), 1e-12);
      const Vec3 x = m.cell(k).centroid + Vec3(0.01, -0.02, 0.03);
      EXPECT_LE((r.displacement(x) - (a * x + c)).norm(), 1e-12);
    }
  }
}

TEST(Stress, ReferenceExamples) {
  const MaterialParams m0(1.0, 0.0), m1(1.0, 1.0);
  EXPECT_LE((stress(Mat3::Identity(), 3.0, m0) - 2.0 * Mat3::Identity()).norm(), 1e-15);
  EXPECT_LE((stress(Mat3::Identity(), 3.0, m1) - 5.0 * Mat3::Identity()).norm(), 1e-15);
}

// the matrix form and the direct formulas are independent code paths
TEST(CellOperator, MatchesDirectReconstructions) {
  const Mesh m = generate_structured_mesh(MeshKind::tet, 2, 0.3);
  for (bool bubbles : {true, false}) {
    const DofMap d(m, bubbles, no_dirichlet(m));
    const DiscreteFunction u = random_function(d, 3), v = random_function(d, 4);
    for (int k = 0; k < m.n_cells(); ++k) {
      const CellOperator op = cell_operator(m, d, k);
      const Eigen::VectorXd lu = op.gather(u), lv = op.gather(v);
      const auto r = cell_reconstructions(m, k, u);
      const Eigen::VectorXd g = op.gradient * lu;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) EXPECT_NEAR(g(3 * a + b), r.gradient(a, b), 1e-12);
      EXPECT_NEAR((op.divergence * lu)(0), r.divergence, 1e-12);
      EXPECT_LE((op.mean * lu - r.mean).norm(), 1e-14);
      const double s_mat = lu.dot(op.stabilization * lv);
      EXPECT_NEAR(s_mat, stabilization_value(m, k, u, v), 1e-12);
    }
  }
}

TEST(Stabilization, SymmetricPositiveSemidefinite) {
  const Mesh m = generate_structured_mesh(MeshKind::hex, 2);
  const DofMap d(m, true);
  for (int k = 0; k < m.n_cells(); ++k) {
    const Eigen::MatrixXd s = stabilization_local(m, d, k);
    EXPECT_LE((s - s.transpose()).cwiseAbs().maxCoeff(), 1e-13);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
  }
  const DiscreteFunction v = random_function(d, 9);
  for (int k = 0; k < m.n_cells(); ++k) EXPECT_GE(stabilization_value(m, k, v, v), 0.0);
}

TEST(BubblesDisabled, SameAsZeroBubbles) {
  const Mesh m = generate_structured_mesh(MeshKind::tet, 2, 0.3);
  const DofMap off(m, false, no_dirichlet(m)), on(m, true, no_dirichlet(m));
  DiscreteFunction a = random_function(on, 5);
  DiscreteFunction b(off, a.values());  // bubble slots hold nonzero garbage; disabled mode must ignore them
  for (int f = 0; f < m.n_faces(); ++f) a.set_bubble(f, 0.0);
  for (int k = 0; k < m.n_cells(); ++k) {
    const auto ra = cell_reconstructions(m, k, a), rb = cell_reconstructions(m, k, b);
    EXPECT_LE((ra.gradient - rb.gradient).norm(), 1e-15);
    EXPECT_NEAR(stabilization_value(m, k, a, a), stabilization_value(m, k, b, b), 1e-14);
    const CellOperator oa = cell_operator(m, on, k), ob = cell_operator(m, off, k);
    EXPECT_NEAR(oa.gather(a).dot(oa.stabilization * oa.gather(a)), ob.gather(b).dot(ob.stabilization * ob.gather(b)), 1e-13);
  }
}

TEST(Interpolate, QuadraticBubbleOnSquareFace) {
  const Mesh m = cube();
  const DofMap d(m, true);
  const DiscreteFunction iu = interpolate(m, d, [](const Vec3& x) { return Vec3(0, 0, x.x() * x.x()); });
  // face 0 is z = 0 with n = e3: 1/3 - 1/2
  EXPECT_NEAR(iu.bubble(0), -1.0 / 6.0, 1e-14);
  EXPECT_NEAR(interpolate_bubble(m, 0, [](const Vec3& x) { return Vec3(0, 0, x.x() * x.x()); }, 4), -1.0 / 6.0, 1e-14);
  for (int s = 0; s < m.n_vertices(); ++s) {
    const Vec3& x = m.vertex(s).position;
    EXPECT_EQ(iu.vertex(s), Vec3(0, 0, x.x() * x.x()));
  }
}

// |K| div_K(I u) = int_K div u; the oracle integrates div u in the volume,
// the scheme only sees face fluxes
TEST(Interpolate, CommutationWithDivergence) {
  auto u = [](const Vec3& x) {
    return Vec3(x.x() * x.y() * x.z() + x.y() * x.y(), x.x() * x.x() * x.x() - x.z(), x.y() * x.z() * x.z());
  };
  auto div = [](const Vec3& x) { return x.y() * x.z() + 0.0 + 2.0 * x.y() * x.z(); };
  for (const Mesh& m : {generate_structured_mesh(MeshKind::hex, 2), generate_structured_mesh(MeshKind::tet, 2, 0.3)}) {
    const DofMap d(m, true);
    const DiscreteFunction iu = interpolate(m, d, u);
    for (int k = 0; k < m.n_cells(); ++k) {
      const double lhs = m.cell(k).volume * cell_reconstructions(m, k, iu).divergence;
      const double rhs = integrate(cell_rule(m, k, 4), div);
      EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(std::abs(rhs), m.cell(k).volume));
    }
  }
}

TEST(Interpolate, BubblesDisabledLeavesZeroBubbles) {
  const Mesh m = generate_structured_mesh(MeshKind::hex, 2);
  const DofMap d(m, false);
  const DiscreteFunction iu = interpolate(m, d, [](const Vec3& x) { return Vec3(x.x() * x.x(), 0, 0); });
  for (int f = 0; f < m.n_faces(); ++f) EXPECT_EQ(iu.values()(d.face_offset(f)), 0.0);
}
