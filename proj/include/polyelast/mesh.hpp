// Polyhedral mesh: connectivity, orientation and the geometric quantities
// consumed by the discrete operators.
//
// Faces carry a vertex loop whose right-hand orientation fixes the face normal.
// Cells list their faces with a sign w = +1 when the face normal points out of
// the cell and w = -1 otherwise. All derived geometry is computed once at
// construction; a constructed Mesh is immutable.
#pragma once

#include "polyelast/convex_weights.hpp"
#include "polyelast/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace polyelast {

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPlanarityTolerance = 1e-9;
inline constexpr double kDegenerateAreaTolerance = 1e-14;

struct Vertex {
  Vec3 position;
  bool on_boundary = false;
};

/// Consecutive pair of a face loop.
struct FaceEdge {
  int v0 = -1;
  int v1 = -1;
  double length = 0.0;
  Vec3 midpoint = Vec3::Zero();
  /// In-plane unit normal pointing out of the face.
  Vec3 normal = Vec3::Zero();
};

struct Face {
  std::vector<int> vertices;
  Vec3 normal = Vec3::Zero();
  double area = 0.0;
  Vec3 centroid = Vec3::Zero();
  double diameter = 0.0;
  std::vector<double> weights;  // aligned with `vertices`
  std::vector<FaceEdge> edges;
  std::vector<int> cells;
  bool on_boundary = false;
};

struct CellFace {
  int face = -1;
  int orientation = 1;
};

struct Cell {
  std::vector<CellFace> faces;
  std::vector<int> vertices;  // sorted
  double volume = 0.0;
  Vec3 centroid = Vec3::Zero();
  double diameter = 0.0;
  std::vector<double> weights;  // aligned with `vertices`

  /// Position of vertex `v` in `vertices`, or -1.
  int local_vertex(int v) const {
    auto it = std::lower_bound(vertices.begin(), vertices.end(), v);
    return (it != vertices.end() && *it == v) ? static_cast<int>(it - vertices.begin()) : -1;
  }
};

/// Raw connectivity. Cell faces are (0-based face id, orientation sign).
struct MeshTopology {
  std::vector<Vec3> positions;
  std::vector<std::vector<int>> face_loops;
  std::vector<std::vector<CellFace>> cell_faces;
};

class Mesh {
 public:
  Mesh() = default;
  explicit Mesh(MeshTopology topology);

  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const Vertex& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
  const Face& face(int i) const { return faces_[static_cast<std::size_t>(i)]; }
  const Cell& cell(int i) const { return cells_[static_cast<std::size_t>(i)]; }
  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_faces() const { return static_cast<int>(faces_.size()); }
  int n_cells() const { return static_cast<int>(cells_.size()); }
  /// max h_K
  double h() const { return h_; }

  /// Outward unit normal of cell `k` on its `j`-th face.
  Vec3 outward_normal(int k, int j) const {
    const CellFace& cf = cell(k).faces[static_cast<std::size_t>(j)];
    return static_cast<double>(cf.orientation) * face(cf.face).normal;
  }

  /// Connectivity as given at construction.
  MeshTopology topology() const;

 private:
  std::vector<Vertex> vertices_;
  std::vector<Face> faces_;
  std::vector<Cell> cells_;
  double h_ = 0.0;
};

namespace detail {

inline std::string cell_label(std::size_t k) { return "cell " + std::to_string(k); }
inline std::string face_label(std::size_t f) { return "face " + std::to_string(f); }

inline void compute_face_geometry(Face& face, const std::vector<Vec3>& x, std::size_t id) {
  const auto& loop = face.vertices;
  const std::size_t n = loop.size();

  // Newell normal, relative to the first vertex
  Vec3 normal = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 a = x[loop[i]] - x[loop[0]];
    const Vec3 b = x[loop[(i + 1) % n]] - x[loop[0]];
    normal += a.cross(b);
  }
  double diameter = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) diameter = std::max(diameter, (x[loop[i]] - x[loop[j]]).norm());
  face.diameter = diameter;
  if (normal.norm() < kDegenerateAreaTolerance * diameter * diameter || diameter == 0.0)
    throw MeshError("degenerate face: " + face_label(id));
  normal.normalize();

  // fan triangulation from the first loop vertex
  const Vec3& x0 = x[loop[0]];
  double area = 0.0;
  Vec3 moment = Vec3::Zero();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const Vec3& a = x[loop[i]];
    const Vec3& b = x[loop[i + 1]];
    const double t = 0.5 * (a - x0).cross(b - x0).dot(normal);
    area += t;
    moment += t * (x0 + a + b) / 3.0;
  }
  if (area < kDegenerateAreaTolerance * diameter * diameter)
    throw MeshError("degenerate face: " + face_label(id));
  face.normal = normal;
  face.area = area;
  face.centroid = moment / area;

  for (std::size_t i = 0; i < n; ++i) {
    const double dist = std::abs((x[loop[i]] - face.centroid).dot(normal));
    if (dist > kPlanarityTolerance * diameter)
      throw MeshError("non-planar face: " + face_label(id));
  }

  face.edges.clear();
  face.edges.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    FaceEdge e;
    e.v0 = loop[i];
    e.v1 = loop[(i + 1) % n];
    const Vec3 d = x[e.v1] - x[e.v0];
    e.length = d.norm();
    e.midpoint = 0.5 * (x[e.v0] + x[e.v1]);
    e.normal = (d / e.length).cross(normal);
    face.edges.push_back(e);
  }

  // weights in in-plane coordinates scaled by the face diameter
  Vec3 t1 = face.edges.front().normal.cross(normal);
  t1.normalize();
  const Vec3 t2 = normal.cross(t1);
  Eigen::MatrixXd pts(2, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 r = (x[loop[i]] - face.centroid) / diameter;
    pts(0, static_cast<Eigen::Index>(i)) = r.dot(t1);
    pts(1, static_cast<Eigen::Index>(i)) = r.dot(t2);
  }
  auto w = convex_weights(pts, Eigen::Vector2d::Zero());
  if (!w) throw MeshError("face centroid is not a convex combination of its vertices: " + face_label(id));
  face.weights = std::move(*w);
}

inline void compute_cell_geometry(Cell& cell, const std::vector<Face>& faces, const std::vector<Vec3>& x,
                                  std::size_t id) {
  cell.vertices.clear();
  for (const auto& cf : cell.faces)
    for (int v : faces[cf.face].vertices) cell.vertices.push_back(v);
  std::sort(cell.vertices.begin(), cell.vertices.end());
  cell.vertices.erase(std::unique(cell.vertices.begin(), cell.vertices.end()), cell.vertices.end());

  double diameter = 0.0;
  for (std::size_t i = 0; i < cell.vertices.size(); ++i)
    for (std::size_t j = i + 1; j < cell.vertices.size(); ++j)
      diameter = std::max(diameter, (x[cell.vertices[i]] - x[cell.vertices[j]]).norm());
  cell.diameter = diameter;

  // signed tets (p, fan triangle) with p the first cell vertex
  const Vec3& p = x[cell.vertices.front()];
  double volume = 0.0;
  Vec3 moment = Vec3::Zero();
  for (const auto& cf : cell.faces) {
    const auto& loop = faces[cf.face].vertices;
    const Vec3 a = x[loop[0]] - p;
    for (std::size_t i = 1; i + 1 < loop.size(); ++i) {
      const Vec3 b = x[loop[i]] - p;
      const Vec3 c = x[loop[i + 1]] - p;
      const double v = cf.orientation * a.dot(b.cross(c)) / 6.0;
      volume += v;
      moment += v * (a + b + c) / 4.0;
    }
  }
  if (!(volume > 0.0)) throw MeshError("signed faces do not enclose a positive volume: " + cell_label(id));
  cell.volume = volume;
  cell.centroid = p + moment / volume;

  const auto m = static_cast<Eigen::Index>(cell.vertices.size());
  Eigen::MatrixXd pts(3, m);
  for (Eigen::Index i = 0; i < m; ++i) pts.col(i) = (x[cell.vertices[i]] - cell.centroid) / diameter;
  auto w = convex_weights(pts, Eigen::Vector3d::Zero());
  if (!w) throw MeshError("cell centroid is not a convex combination of its vertices: " + cell_label(id));
  cell.weights = std::move(*w);
}

}  // namespace detail

inline Mesh::Mesh(MeshTopology topology) {
  const auto& x = topology.positions;
  const std::size_t nv = x.size();

  faces_.resize(topology.face_loops.size());
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    const auto& loop = topology.face_loops[f];
    if (loop.size() < 3) throw MeshError("face with fewer than 3 vertices: " + detail::face_label(f));
    for (int v : loop)
      if (v < 0 || static_cast<std::size_t>(v) >= nv) throw MeshError("dangling index: vertex " + std::to_string(v) + " in " + detail::face_label(f));
    faces_[f].vertices = loop;
    detail::compute_face_geometry(faces_[f], x, f);
  }

  cells_.resize(topology.cell_faces.size());
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    const auto& cfs = topology.cell_faces[k];
    if (cfs.size() < 4) throw MeshError("cell with fewer than 4 faces: " + detail::cell_label(k));
    for (const auto& cf : cfs) {
      if (cf.face < 0 || static_cast<std::size_t>(cf.face) >= faces_.size())
        throw MeshError("dangling index: face " + std::to_string(cf.face) + " in " + detail::cell_label(k));
      if (cf.orientation != 1 && cf.orientation != -1)
        throw MeshError("orientation must be +1 or -1 in " + detail::cell_label(k));
      faces_[cf.face].cells.push_back(static_cast<int>(k));
    }
    cells_[k].faces = cfs;
    detail::compute_cell_geometry(cells_[k], faces_, x, k);
    h_ = std::max(h_, cells_[k].diameter);
  }

  vertices_.resize(nv);
  for (std::size_t v = 0; v < nv; ++v) vertices_[v].position = x[v];
  for (auto& f : faces_) {
    f.on_boundary = f.cells.size() == 1;
    if (f.on_boundary)
      for (int v : f.vertices) vertices_[v].on_boundary = true;
  }
}

inline MeshTopology Mesh::topology() const {
  MeshTopology t;
  t.positions.reserve(vertices_.size());
  for (const auto& v : vertices_) t.positions.push_back(v.position);
  for (const auto& f : faces_) t.face_loops.push_back(f.vertices);
  for (const auto& c : cells_) t.cell_faces.push_back(c.faces);
  return t;
}

/// Build a mesh from cells given as vertex loops of their faces (any order or
/// orientation). Shared faces are matched by vertex set; a face's orientation
/// is fixed by its first occurrence and cell signs are deduced from the
/// position of the cell centroid. Intended for convex cells.
inline Mesh mesh_from_cell_polygons(std::vector<Vec3> positions,
                                    const std::vector<std::vector<std::vector<int>>>& cells) {
  MeshTopology t;
  t.positions = std::move(positions);
  std::map<std::vector<int>, int> face_ids;
  std::vector<std::vector<int>> per_cell_face_ids(cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    for (const auto& loop : cells[k]) {
      std::vector<int> key = loop;
      std::sort(key.begin(), key.end());
      auto [it, inserted] = face_ids.try_emplace(std::move(key), static_cast<int>(t.face_loops.size()));
      if (inserted) t.face_loops.push_back(loop);
      per_cell_face_ids[k].push_back(it->second);
    }
  }

  const auto& x = t.positions;
  t.cell_faces.resize(cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    Vec3 center = Vec3::Zero();
    int count = 0;
    for (const auto& loop : cells[k])
      for (int v : loop) center += x[v], ++count;
    center /= count;
    for (int f : per_cell_face_ids[k]) {
      const auto& loop = t.face_loops[f];
      Vec3 normal = Vec3::Zero();
      Vec3 fc = Vec3::Zero();
      for (std::size_t i = 0; i < loop.size(); ++i) {
        normal += x[loop[i]].cross(x[loop[(i + 1) % loop.size()]]);
        fc += x[loop[i]];
      }
      fc /= static_cast<double>(loop.size());
      t.cell_faces[k].push_back({f, normal.dot(fc - center) > 0.0 ? 1 : -1});
    }
  }
  return Mesh(std::move(t));
}

/// Result of validate_mesh: invariant violations plus shape-regularity proxies.
struct MeshReport {
  std::vector<std::string> violations;
  double min_volume_ratio = std::numeric_limits<double>::infinity();  // h_K^3 / |K|
  double max_volume_ratio = 0.0;
  double min_face_ratio = std::numeric_limits<double>::infinity();  // |sigma| / h_K^2
  double max_face_ratio = 0.0;

  bool ok() const { return violations.empty(); }
};

inline MeshReport validate_mesh(const Mesh& mesh) {
  MeshReport report;
  auto fail = [&](const std::string& what) { report.violations.push_back(what); };

  for (int f = 0; f < mesh.n_faces(); ++f) {
    const Face& face = mesh.face(f);
    const std::string label = detail::face_label(static_cast<std::size_t>(f));
    if (std::abs(face.normal.norm() - 1.0) > 1e-12) fail("unit normal: " + label);

    double wsum = 0.0;
    Vec3 wx = Vec3::Zero();
    for (std::size_t i = 0; i < face.vertices.size(); ++i) {
      if (face.weights[i] < 0.0) fail("nonnegative weights: " + label);
      wsum += face.weights[i];
      wx += face.weights[i] * mesh.vertex(face.vertices[i]).position;
    }
    if (std::abs(wsum - 1.0) > 1e-12) fail("weights sum to one: " + label);
    if ((wx - face.centroid).norm() > 1e-12 * face.diameter) fail("weights reproduce centroid: " + label);

    Vec3 closure = Vec3::Zero();
    for (const auto& e : face.edges) closure += e.length * e.normal;
    if (closure.norm() > 1e-12 * mesh.h()) fail("closed polygon identity: " + label);

    for (int v : face.vertices)
      if (std::abs((mesh.vertex(v).position - face.centroid).dot(face.normal)) > kPlanarityTolerance * face.diameter)
        fail("planarity: " + label);

    if (face.cells.empty() || face.cells.size() > 2) fail("face shared by 1 or 2 cells: " + label);
    if (face.on_boundary != (face.cells.size() == 1)) fail("boundary flag: " + label);
    if (face.cells.size() == 2) {
      int signs = 0;
      for (int k : face.cells)
        for (const auto& cf : mesh.cell(k).faces)
          if (cf.face == f) signs += cf.orientation;
      if (signs != 0) fail("opposite orientation on interior face: " + label);
    }
  }

  for (int k = 0; k < mesh.n_cells(); ++k) {
    const Cell& cell = mesh.cell(k);
    const std::string label = detail::cell_label(static_cast<std::size_t>(k));
    const double hk = cell.diameter;
    Vec3 closure = Vec3::Zero();
    for (std::size_t j = 0; j < cell.faces.size(); ++j)
      closure += mesh.face(cell.faces[j].face).area * mesh.outward_normal(k, static_cast<int>(j));
    if (closure.norm() > 1e-12 * hk * hk) fail("closed-surface identity: " + label);

    double wsum = 0.0;
    Vec3 wx = Vec3::Zero();
    for (std::size_t i = 0; i < cell.vertices.size(); ++i) {
      if (cell.weights[i] < 0.0) fail("nonnegative weights: " + label);
      wsum += cell.weights[i];
      wx += cell.weights[i] * mesh.vertex(cell.vertices[i]).position;
    }
    if (std::abs(wsum - 1.0) > 1e-12) fail("weights sum to one: " + label);
    if ((wx - cell.centroid).norm() > 1e-12 * hk) fail("weights reproduce centroid: " + label);
    if (!(cell.volume > 0.0)) fail("positive volume: " + label);

    const double vr = hk * hk * hk / cell.volume;
    report.min_volume_ratio = std::min(report.min_volume_ratio, vr);
    report.max_volume_ratio = std::max(report.max_volume_ratio, vr);
    for (const auto& cf : cell.faces) {
      const double fr = mesh.face(cf.face).area / (hk * hk);
      report.min_face_ratio = std::min(report.min_face_ratio, fr);
      report.max_face_ratio = std::max(report.max_face_ratio, fr);
    }
  }

  std::vector<char> on_bface(static_cast<std::size_t>(mesh.n_vertices()), 0);
  for (const auto& f : mesh.faces())
    if (f.on_boundary)
      for (int v : f.vertices) on_bface[static_cast<std::size_t>(v)] = 1;
  for (int v = 0; v < mesh.n_vertices(); ++v)
    if ((on_bface[static_cast<std::size_t>(v)] != 0) != mesh.vertex(v).on_boundary)
      fail("vertex boundary flag: vertex " + std::to_string(v));
  return report;
}

}  // namespace polyelast
