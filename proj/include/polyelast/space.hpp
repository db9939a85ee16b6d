// Discrete displacement space: one 3-vector per vertex plus one scalar normal
// bubble per face, together with the face/cell gradient and displacement
// reconstructions, the stabilisation form and the interpolator.
#pragma once

#include "polyelast/integration.hpp"
#include "polyelast/mesh.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace polyelast {

/// Space dimension; the stabilisation scales with h_K^(d-2).
inline constexpr int kDimension = 3;
/// Face quadrature degree used by the interpolator for bubble values.
inline constexpr int kInterpolationDegree = 16;
/// Degree of the cell/face rules used for loads, error norms and diagnostics.
inline constexpr int kQuadratureDegree = 4;

using VectorField = std::function<Vec3(const Vec3&)>;
using TensorField = std::function<Mat3(const Vec3&)>;
using ScalarField = std::function<double(const Vec3&)>;

struct MaterialParams {
  double mu = 1.0;
  double lambda = 0.0;
  double mu1 = 1.0;

  MaterialParams() = default;
  MaterialParams(double mu_, double lambda_) : MaterialParams(mu_, lambda_, mu_) {}
  MaterialParams(double mu_, double lambda_, double mu1_) : mu(mu_), lambda(lambda_), mu1(mu1_) {
    if (!(mu > 0.0)) throw std::invalid_argument("MaterialParams: mu must be > 0");
    if (!(lambda >= 0.0)) throw std::invalid_argument("MaterialParams: lambda must be >= 0");
    if (!(mu1 > 0.0)) throw std::invalid_argument("MaterialParams: mu1 must be > 0");
  }
};

/// DOF layout. Storage always holds 3 slots per vertex followed by one slot per
/// face; with bubbles disabled the face slots stay in storage but are pinned to
/// zero, which keeps a single assembly path for both modes.
class DofMap {
 public:
  /// `dirichlet_faces` flags faces carrying Dirichlet data; empty means every
  /// boundary face.
  DofMap(const Mesh& mesh, bool bubbles_enabled, std::vector<bool> dirichlet_faces = {})
      : n_vertices_(mesh.n_vertices()), n_faces_(mesh.n_faces()), bubbles_(bubbles_enabled) {
    if (dirichlet_faces.empty()) {
      dirichlet_faces.resize(static_cast<std::size_t>(n_faces_));
      for (int f = 0; f < n_faces_; ++f) dirichlet_faces[f] = mesh.face(f).on_boundary;
    }
    if (static_cast<int>(dirichlet_faces.size()) != n_faces_)
      throw std::invalid_argument("DofMap: dirichlet face flags do not match the mesh");
    dirichlet_.assign(static_cast<std::size_t>(n_slots()), false);
    for (int f = 0; f < n_faces_; ++f) {
      if (!dirichlet_faces[f]) continue;
      if (!mesh.face(f).on_boundary) throw std::invalid_argument("DofMap: Dirichlet flag on an interior face");
      dirichlet_[face_offset(f)] = true;
      for (int v : mesh.face(f).vertices)
        for (int d = 0; d < 3; ++d) dirichlet_[vertex_offset(v) + d] = true;
    }
    dirichlet_faces_ = std::move(dirichlet_faces);
  }

  int vertex_offset(int v) const { return 3 * v; }
  int face_offset(int f) const { return 3 * n_vertices_ + f; }
  int n_slots() const { return 3 * n_vertices_ + n_faces_; }
  /// Number of unknowns of the space (bubbles counted only when enabled).
  int total_dofs() const { return bubbles_ ? n_slots() : 3 * n_vertices_; }
  bool bubbles_enabled() const { return bubbles_; }
  int n_vertices() const { return n_vertices_; }
  int n_faces() const { return n_faces_; }

  bool is_bubble(int slot) const { return slot >= 3 * n_vertices_; }
  /// Dirichlet DOF: vertex on a Dirichlet face, or bubble of a Dirichlet face.
  bool is_dirichlet(int slot) const { return dirichlet_[static_cast<std::size_t>(slot)]; }
  /// Slot whose value is fixed: Dirichlet, or any bubble when bubbles are off.
  bool is_constrained(int slot) const { return is_dirichlet(slot) || (!bubbles_ && is_bubble(slot)); }
  bool is_dirichlet_face(int f) const { return dirichlet_faces_[static_cast<std::size_t>(f)]; }
  const std::vector<bool>& dirichlet_mask() const { return dirichlet_; }

 private:
  int n_vertices_;
  int n_faces_;
  bool bubbles_;
  std::vector<bool> dirichlet_;
  std::vector<bool> dirichlet_faces_;
};

/// Coefficient vector over the DofMap slots. Holds a pointer to the DofMap,
/// which must outlive it.
class DiscreteFunction {
 public:
  explicit DiscreteFunction(const DofMap& dofs) : dofs_(&dofs), values_(Eigen::VectorXd::Zero(dofs.n_slots())) {}
  DiscreteFunction(const DofMap& dofs, Eigen::VectorXd values) : dofs_(&dofs), values_(std::move(values)) {
    if (values_.size() != dofs.n_slots()) throw std::invalid_argument("DiscreteFunction: wrong coefficient length");
  }

  const DofMap& dofs() const { return *dofs_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }

  Vec3 vertex(int v) const { return values_.segment<3>(dofs_->vertex_offset(v)); }
  void set_vertex(int v, const Vec3& value) { values_.segment<3>(dofs_->vertex_offset(v)) = value; }
  /// Bubble value; reads as zero when bubbles are disabled.
  double bubble(int f) const { return dofs_->bubbles_enabled() ? values_(dofs_->face_offset(f)) : 0.0; }
  void set_bubble(int f, double value) { values_(dofs_->face_offset(f)) = value; }

 private:
  const DofMap* dofs_;
  Eigen::VectorXd values_;
};

inline Mat3 sym(const Mat3& m) { return 0.5 * (m + m.transpose()); }

//------------------------------------------------------------------------------
// Face operators
//------------------------------------------------------------------------------

/// Weighted vertex average of the face DOFs.
inline Vec3 face_mean(const Mesh& mesh, int f, const DiscreteFunction& v) {
  const Face& face = mesh.face(f);
  Vec3 mean = Vec3::Zero();
  for (std::size_t i = 0; i < face.vertices.size(); ++i) mean += face.weights[i] * v.vertex(face.vertices[i]);
  return mean;
}

/// Tangential gradient, constant on the face:
/// (1/|f|) sum_e |e| (v_s1 + v_s2)/2 (x) n_fe.
inline Mat3 face_gradient(const Mesh& mesh, int f, const DiscreteFunction& v) {
  const Face& face = mesh.face(f);
  Mat3 g = Mat3::Zero();
  for (const auto& e : face.edges) g += e.length * (0.5 * (v.vertex(e.v0) + v.vertex(e.v1))) * e.normal.transpose();
  return g / face.area;
}

/// Affine displacement on the face, evaluated at a point of its plane.
inline Vec3 face_displacement(const Mesh& mesh, int f, const DiscreteFunction& v, const Vec3& x) {
  return face_gradient(mesh, f, v) * (x - mesh.face(f).centroid) + face_mean(mesh, f, v);
}

//------------------------------------------------------------------------------
// Cell operators
//------------------------------------------------------------------------------

struct CellReconstruction {
  Mat3 gradient = Mat3::Zero();
  Mat3 strain = Mat3::Zero();
  double divergence = 0.0;
  Vec3 mean = Vec3::Zero();
  Vec3 centroid = Vec3::Zero();

  /// Affine displacement reconstruction.
  Vec3 displacement(const Vec3& x) const { return gradient * (x - centroid) + mean; }
};

inline CellReconstruction cell_reconstructions(const Mesh& mesh, int k, const DiscreteFunction& v) {
  const Cell& cell = mesh.cell(k);
  CellReconstruction r;
  double flux = 0.0;
  for (std::size_t j = 0; j < cell.faces.size(); ++j) {
    const CellFace& cf = cell.faces[j];
    const Face& face = mesh.face(cf.face);
    const Vec3 nk = mesh.outward_normal(k, static_cast<int>(j));
    const Vec3 vbar = face_mean(mesh, cf.face, v);
    const double vb = v.bubble(cf.face);
    r.gradient += face.area * (vbar + vb * face.normal) * nk.transpose();
    flux += face.area * (vbar.dot(nk) + cf.orientation * vb);
  }
  r.gradient /= cell.volume;
  r.strain = sym(r.gradient);
  r.divergence = flux / cell.volume;
  for (std::size_t i = 0; i < cell.vertices.size(); ++i) r.mean += cell.weights[i] * v.vertex(cell.vertices[i]);
  r.centroid = cell.centroid;
  return r;
}

inline Mat3 stress(const Mat3& strain, double divergence, const MaterialParams& mat) {
  return 2.0 * mat.mu * strain + mat.lambda * divergence * Mat3::Identity();
}

inline double stabilization_scale(const Cell& cell) { return std::pow(cell.diameter, kDimension - 2); }

/// S_K(u, v) evaluated directly from the reconstructions.
inline double stabilization_value(const Mesh& mesh, int k, const DiscreteFunction& u, const DiscreteFunction& v) {
  const Cell& cell = mesh.cell(k);
  const auto ru = cell_reconstructions(mesh, k, u);
  const auto rv = cell_reconstructions(mesh, k, v);
  double s = 0.0;
  for (int s_id : cell.vertices) {
    const Vec3& xs = mesh.vertex(s_id).position;
    s += (u.vertex(s_id) - ru.displacement(xs)).dot(v.vertex(s_id) - rv.displacement(xs));
  }
  for (const auto& cf : cell.faces) s += u.bubble(cf.face) * v.bubble(cf.face);
  return stabilization_scale(cell) * s;
}

/// Matrix form of the cell operators over the cell's local DOFs. Local order:
/// three components per cell vertex (in `Cell::vertices` order), then one
/// bubble per cell face (in `Cell::faces` order).
struct CellOperator {
  std::vector<int> slots;
  /// Row 3a+b gives entry (a,b) of the cell gradient.
  Eigen::MatrixXd gradient;
  /// Rows give the weighted vertex mean.
  Eigen::MatrixXd mean;
  Eigen::MatrixXd strain;
  Eigen::RowVectorXd divergence;
  Eigen::MatrixXd stabilization;

  Eigen::Index size() const { return static_cast<Eigen::Index>(slots.size()); }

  Eigen::VectorXd gather(const DiscreteFunction& v) const {
    Eigen::VectorXd local(size());
    for (Eigen::Index i = 0; i < size(); ++i) local(i) = v.values()(slots[static_cast<std::size_t>(i)]);
    return local;
  }
};

inline CellOperator cell_operator(const Mesh& mesh, const DofMap& dofs, int k) {
  const Cell& cell = mesh.cell(k);
  const auto nv = static_cast<Eigen::Index>(cell.vertices.size());
  const auto nf = static_cast<Eigen::Index>(cell.faces.size());
  const Eigen::Index n = 3 * nv + nf;

  CellOperator op;
  op.slots.reserve(static_cast<std::size_t>(n));
  for (int v : cell.vertices)
    for (int d = 0; d < 3; ++d) op.slots.push_back(dofs.vertex_offset(v) + d);
  for (const auto& cf : cell.faces) op.slots.push_back(dofs.face_offset(cf.face));

  op.gradient = Eigen::MatrixXd::Zero(9, n);
  for (Eigen::Index j = 0; j < nf; ++j) {
    const CellFace& cf = cell.faces[static_cast<std::size_t>(j)];
    const Face& face = mesh.face(cf.face);
    const Vec3 nk = mesh.outward_normal(k, static_cast<int>(j));
    const double scale = face.area / cell.volume;
    for (std::size_t i = 0; i < face.vertices.size(); ++i) {
      const Eigen::Index ls = cell.local_vertex(face.vertices[i]);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) op.gradient(3 * a + b, 3 * ls + a) += scale * face.weights[i] * nk(b);
    }
    if (dofs.bubbles_enabled())
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) op.gradient(3 * a + b, 3 * nv + j) += scale * face.normal(a) * nk(b);
  }

  op.strain.resize(9, n);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) op.strain.row(3 * a + b) = 0.5 * (op.gradient.row(3 * a + b) + op.gradient.row(3 * b + a));
  op.divergence = op.gradient.row(0) + op.gradient.row(4) + op.gradient.row(8);

  op.mean = Eigen::MatrixXd::Zero(3, n);
  for (Eigen::Index i = 0; i < nv; ++i)
    for (int a = 0; a < 3; ++a) op.mean(a, 3 * i + a) = cell.weights[static_cast<std::size_t>(i)];

  // vertex mismatch v_s - Pi^K v(x_s), one 3 x n block per vertex
  const double hk = stabilization_scale(cell);
  op.stabilization = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd mismatch(3, n);
  for (Eigen::Index i = 0; i < nv; ++i) {
    const Vec3 dx = mesh.vertex(cell.vertices[static_cast<std::size_t>(i)]).position - cell.centroid;
    mismatch = -op.mean;
    for (int a = 0; a < 3; ++a) {
      mismatch(a, 3 * i + a) += 1.0;
      for (int b = 0; b < 3; ++b) mismatch.row(a) -= dx(b) * op.gradient.row(3 * a + b);
    }
    op.stabilization.noalias() += hk * mismatch.transpose() * mismatch;
  }
  if (dofs.bubbles_enabled())
    for (Eigen::Index j = 0; j < nf; ++j) op.stabilization(3 * nv + j, 3 * nv + j) += hk;
  return op;
}

/// Local matrix of S_K over the cell DOFs (see CellOperator for the ordering).
inline Eigen::MatrixXd stabilization_local(const Mesh& mesh, const DofMap& dofs, int k) {
  return cell_operator(mesh, dofs, k).stabilization;
}

//------------------------------------------------------------------------------
// Interpolator
//------------------------------------------------------------------------------

/// Bubble value of the interpolant on face f:
/// (1/|f|) int_f u.n - (sum_s w_s u(x_s)).n
inline double interpolate_bubble(const Mesh& mesh, int f, const VectorField& u, int degree = kInterpolationDegree) {
  const Face& face = mesh.face(f);
  const double flux = integrate(face_rule(mesh, f, degree), [&](const Vec3& x) { return u(x).dot(face.normal); });
  Vec3 mean = Vec3::Zero();
  for (std::size_t i = 0; i < face.vertices.size(); ++i) mean += face.weights[i] * u(mesh.vertex(face.vertices[i]).position);
  return flux / face.area - mean.dot(face.normal);
}

inline DiscreteFunction interpolate(const Mesh& mesh, const DofMap& dofs, const VectorField& u,
                                    int degree = kInterpolationDegree) {
  DiscreteFunction v(dofs);
  for (int s = 0; s < mesh.n_vertices(); ++s) v.set_vertex(s, u(mesh.vertex(s).position));
  if (dofs.bubbles_enabled())
    for (int f = 0; f < mesh.n_faces(); ++f) v.set_bubble(f, interpolate_bubble(mesh, f, u, degree));
  return v;
}

}  // namespace polyelast
