// Global system of the scheme: cell-wise elastic + stabilisation matrices,
// volume and Neumann loads, Dirichlet elimination by lifting.
#pragma once

#include "polyelast/space.hpp"

#include <Eigen/Sparse>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace polyelast {

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
/// Surface traction as a function of the point and the outward unit normal.
using TractionField = std::function<Vec3(const Vec3& x, const Vec3& n)>;

enum class BoundaryTag { dirichlet, neumann };

struct BoundaryConditions {
  /// One tag per mesh face; entries of interior faces are ignored.
  std::vector<BoundaryTag> tags;
  VectorField dirichlet_data;
  TractionField neumann_data;

  /// Dirichlet on every boundary face.
  static BoundaryConditions all_dirichlet(const Mesh& mesh, VectorField data) {
    BoundaryConditions bc;
    bc.tags.assign(static_cast<std::size_t>(mesh.n_faces()), BoundaryTag::dirichlet);
    bc.dirichlet_data = std::move(data);
    return bc;
  }

  /// Dirichlet on boundary faces whose centroid satisfies `is_dirichlet`,
  /// Neumann elsewhere.
  template <class Pred>
  static BoundaryConditions split(const Mesh& mesh, Pred&& is_dirichlet, VectorField data, TractionField traction) {
    BoundaryConditions bc;
    bc.tags.resize(static_cast<std::size_t>(mesh.n_faces()), BoundaryTag::dirichlet);
    for (int f = 0; f < mesh.n_faces(); ++f)
      if (mesh.face(f).on_boundary && !is_dirichlet(mesh.face(f).centroid)) bc.tags[f] = BoundaryTag::neumann;
    bc.dirichlet_data = std::move(data);
    bc.neumann_data = std::move(traction);
    return bc;
  }

  std::vector<bool> dirichlet_faces(const Mesh& mesh) const {
    std::vector<bool> flags(static_cast<std::size_t>(mesh.n_faces()), false);
    for (int f = 0; f < mesh.n_faces(); ++f)
      flags[f] = mesh.face(f).on_boundary && tags[static_cast<std::size_t>(f)] == BoundaryTag::dirichlet;
    return flags;
  }
};

/// Full and reduced systems. Unknowns are the free slots; the solution is
/// lifting + (correction on free slots).
struct SparseSystem {
  SparseMatrix full_matrix;
  Eigen::VectorXd full_load;
  /// Interpolant of the Dirichlet data on every active slot; its constrained
  /// entries are the Dirichlet values.
  Eigen::VectorXd lifting;
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  std::vector<int> free_slots;
  /// slot -> position in `free_slots`, or -1 if constrained
  std::vector<int> free_index;

  Eigen::Index n_free() const { return static_cast<Eigen::Index>(free_slots.size()); }

  Eigen::VectorXd expand(const Eigen::VectorXd& correction) const {
    Eigen::VectorXd x = lifting;
    for (std::size_t i = 0; i < free_slots.size(); ++i) x(free_slots[i]) += correction(static_cast<Eigen::Index>(i));
    return x;
  }
};

struct LocalSystem {
  CellOperator op;
  Eigen::MatrixXd matrix;
  Eigen::VectorXd load;
};

/// |K| (2 mu E^T E + lambda d d^T) + mu1 S over the cell DOFs; the load puts
/// w_s^K (int_K f) on each vertex and nothing on bubbles.
inline LocalSystem local_system(const Mesh& mesh, int k, const MaterialParams& mat, const DofMap& dofs,
                                const VectorField& f) {
  const Cell& cell = mesh.cell(k);
  LocalSystem ls;
  ls.op = cell_operator(mesh, dofs, k);
  const auto& op = ls.op;
  ls.matrix = cell.volume * (2.0 * mat.mu * op.strain.transpose() * op.strain +
                             mat.lambda * op.divergence.transpose() * op.divergence) +
              mat.mu1 * op.stabilization;
  ls.load = Eigen::VectorXd::Zero(op.size());
  if (f) {
    const Vec3 fk = integrate(cell_rule(mesh, k, kQuadratureDegree), f);
    for (std::size_t i = 0; i < cell.vertices.size(); ++i)
      ls.load.segment<3>(3 * static_cast<Eigen::Index>(i)) = cell.weights[i] * fk;
  }
  return ls;
}

/// Scalar factor of the face displacement for a unit DOF on loop vertex i:
/// Pi^sigma(e_a at vertex i)(x) = psi_i(x) e_a.
inline std::vector<double> face_shape_values(const Mesh& mesh, int f, const Vec3& x) {
  const Face& face = mesh.face(f);
  const std::size_t n = face.vertices.size();
  std::vector<double> psi(face.weights);
  const Vec3 dx = x - face.centroid;
  for (std::size_t e = 0; e < n; ++e) {
    const double c = 0.5 * face.edges[e].length * face.edges[e].normal.dot(dx) / face.area;
    psi[e] += c;
    psi[(e + 1) % n] += c;
  }
  return psi;
}

struct FaceLoad {
  std::vector<int> slots;
  std::vector<double> values;
};

/// Vertex slots receive int g . Pi^sigma(phi); the bubble receives int g . n_sigma.
inline FaceLoad neumann_load(const Mesh& mesh, const DofMap& dofs, int f, const TractionField& g) {
  const Face& face = mesh.face(f);
  if (!face.on_boundary) throw AssemblyError("neumann_load: face " + std::to_string(f) + " is not on the boundary");
  const int k = face.cells.front();
  int orientation = 1;
  for (const auto& cf : mesh.cell(k).faces)
    if (cf.face == f) orientation = cf.orientation;
  const Vec3 n_out = static_cast<double>(orientation) * face.normal;

  const std::size_t n = face.vertices.size();
  Eigen::MatrixXd vertex_load = Eigen::MatrixXd::Zero(3, static_cast<Eigen::Index>(n));
  double bubble_load = 0.0;
  for (const auto& q : face_rule(mesh, f, kQuadratureDegree)) {
    const Vec3 gq = g(q.point, n_out);
    const auto psi = face_shape_values(mesh, f, q.point);
    for (std::size_t i = 0; i < n; ++i) vertex_load.col(static_cast<Eigen::Index>(i)) += q.weight * psi[i] * gq;
    bubble_load += q.weight * gq.dot(face.normal);
  }

  FaceLoad out;
  for (std::size_t i = 0; i < n; ++i)
    for (int a = 0; a < 3; ++a) {
      out.slots.push_back(dofs.vertex_offset(face.vertices[i]) + a);
      out.values.push_back(vertex_load(a, static_cast<Eigen::Index>(i)));
    }
  if (dofs.bubbles_enabled()) {
    out.slots.push_back(dofs.face_offset(f));
    out.values.push_back(bubble_load);
  }
  return out;
}

namespace detail {

/// Every face-connected group of cells must touch a Dirichlet face.
inline void require_dirichlet_per_component(const Mesh& mesh, const DofMap& dofs) {
  std::vector<int> parent(static_cast<std::size_t>(mesh.n_cells()));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int c) {
    while (parent[c] != c) c = parent[c] = parent[parent[c]];
    return c;
  };
  for (const auto& face : mesh.faces())
    if (face.cells.size() == 2) parent[find(face.cells[0])] = find(face.cells[1]);
  std::vector<char> anchored(parent.size(), 0);
  for (int f = 0; f < mesh.n_faces(); ++f)
    if (dofs.is_dirichlet_face(f)) anchored[find(mesh.face(f).cells.front())] = 1;
  for (int k = 0; k < mesh.n_cells(); ++k)
    if (!anchored[find(k)])
      throw AssemblyError("singular system: no Dirichlet DOF in the component containing cell " + std::to_string(k));
}

}  // namespace detail

/// Sums the local systems in ascending cell order and eliminates the
/// constrained slots. The lifting interpolates the Dirichlet data on all
/// active slots, so the reduced unknown is a correction to the interpolant.
inline SparseSystem assemble(const Mesh& mesh, const DofMap& dofs, const MaterialParams& mat,
                             const BoundaryConditions& bc, const VectorField& f) {
  if (static_cast<int>(bc.tags.size()) != mesh.n_faces())
    throw AssemblyError("boundary tags do not match the mesh");
  for (int fi = 0; fi < mesh.n_faces(); ++fi)
    if (mesh.face(fi).on_boundary && dofs.is_dirichlet_face(fi) != (bc.tags[fi] == BoundaryTag::dirichlet))
      throw AssemblyError("DofMap Dirichlet faces disagree with the boundary tags");
  detail::require_dirichlet_per_component(mesh, dofs);

  const int n = dofs.n_slots();
  SparseSystem sys;
  sys.full_load = Eigen::VectorXd::Zero(n);

  std::vector<Eigen::Triplet<double>> triplets;
  for (int k = 0; k < mesh.n_cells(); ++k) {
    const LocalSystem ls = local_system(mesh, k, mat, dofs, f);
    const auto m = ls.op.size();
    for (Eigen::Index i = 0; i < m; ++i) {
      const int gi = ls.op.slots[static_cast<std::size_t>(i)];
      sys.full_load(gi) += ls.load(i);
      for (Eigen::Index j = 0; j < m; ++j)
        if (ls.matrix(i, j) != 0.0) triplets.emplace_back(gi, ls.op.slots[static_cast<std::size_t>(j)], ls.matrix(i, j));
    }
  }
  sys.full_matrix.resize(n, n);
  sys.full_matrix.setFromTriplets(triplets.begin(), triplets.end());

  for (int fi = 0; fi < mesh.n_faces(); ++fi) {
    if (!mesh.face(fi).on_boundary || bc.tags[fi] != BoundaryTag::neumann || !bc.neumann_data) continue;
    const FaceLoad fl = neumann_load(mesh, dofs, fi, bc.neumann_data);
    for (std::size_t i = 0; i < fl.slots.size(); ++i) sys.full_load(fl.slots[i]) += fl.values[i];
  }

  sys.lifting = Eigen::VectorXd::Zero(n);
  if (bc.dirichlet_data) sys.lifting = interpolate(mesh, dofs, bc.dirichlet_data).values();
  if (!sys.lifting.allFinite() || !sys.full_load.allFinite())
    throw AssemblyError("non-finite value in boundary data or load");

  sys.free_index.assign(static_cast<std::size_t>(n), -1);
  for (int s = 0; s < n; ++s)
    if (!dofs.is_constrained(s)) {
      sys.free_index[s] = static_cast<int>(sys.free_slots.size());
      sys.free_slots.push_back(s);
    }

  const Eigen::VectorXd residual = sys.full_load - sys.full_matrix * sys.lifting;
  const Eigen::Index nf = sys.n_free();
  sys.rhs.resize(nf);
  std::vector<Eigen::Triplet<double>> reduced;
  for (Eigen::Index i = 0; i < nf; ++i) {
    const int s = sys.free_slots[static_cast<std::size_t>(i)];
    sys.rhs(i) = residual(s);
    for (SparseMatrix::InnerIterator it(sys.full_matrix, s); it; ++it) {
      const int j = sys.free_index[static_cast<std::size_t>(it.col())];
      if (j >= 0) reduced.emplace_back(static_cast<int>(i), j, it.value());
    }
  }
  sys.matrix.resize(nf, nf);
  sys.matrix.setFromTriplets(reduced.begin(), reduced.end());
  return sys;
}

}  // namespace polyelast
