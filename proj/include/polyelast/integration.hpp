// Quadrature over mesh faces (fan triangulation from the first loop vertex)
// and cells (pyramids from the cell centroid over each face fan triangle).
#pragma once

#include "polyelast/mesh.hpp"
#include "polyelast/quadrature.hpp"

#include <type_traits>

namespace polyelast {

inline QuadratureRule face_rule(const Mesh& mesh, int f, int degree) {
  const Face& face = mesh.face(f);
  const Vec3& x0 = mesh.vertex(face.vertices[0]).position;
  QuadratureRule rule;
  for (std::size_t i = 1; i + 1 < face.vertices.size(); ++i) {
    const Vec3& a = mesh.vertex(face.vertices[i]).position;
    const Vec3& b = mesh.vertex(face.vertices[i + 1]).position;
    auto tri = triangle_rule(x0, a, b, degree);
    // fan triangles of a non-convex loop may be reversed
    if ((a - x0).cross(b - x0).dot(face.normal) < 0.0)
      for (auto& q : tri) q.weight = -q.weight;
    rule.insert(rule.end(), tri.begin(), tri.end());
  }
  return rule;
}

inline QuadratureRule cell_rule(const Mesh& mesh, int k, int degree) {
  const Cell& cell = mesh.cell(k);
  QuadratureRule rule;
  for (const auto& cf : cell.faces) {
    const auto& loop = mesh.face(cf.face).vertices;
    const Vec3& x0 = mesh.vertex(loop[0]).position;
    for (std::size_t i = 1; i + 1 < loop.size(); ++i) {
      const Vec3& a = mesh.vertex(loop[i]).position;
      const Vec3& b = mesh.vertex(loop[i + 1]).position;
      auto tet = cf.orientation > 0 ? tetrahedron_rule(cell.centroid, x0, a, b, degree)
                                    : tetrahedron_rule(cell.centroid, x0, b, a, degree);
      rule.insert(rule.end(), tet.begin(), tet.end());
    }
  }
  return rule;
}

template <class F>
auto integrate(const QuadratureRule& rule, F&& f) {
  using R = std::decay_t<decltype(f(rule.front().point))>;
  R sum;
  if constexpr (std::is_arithmetic_v<R>)
    sum = 0.0;
  else
    sum = R::Zero();
  for (const auto& q : rule) sum += q.weight * f(q.point);
  return sum;
}

}  // namespace polyelast
