// Quadrature rules on triangles and tetrahedra.
//
// Degree-4 triangles use the 6-point Dunavant rule. Every other request is
// served by a collapsed (Duffy) Gauss-Legendre product rule, which is exact
// for polynomials of the requested total degree and has positive weights.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace polyelast {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct QuadraturePoint {
  Vec3 point;
  double weight;
};

using QuadratureRule = std::vector<QuadraturePoint>;

namespace detail {
// Legendre polynomial P_n and its derivative at x in (-1,1).
inline void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = (n == 0) ? 1.0 : p1;
  dp = (n == 0) ? 0.0 : n * (x * p1 - p0) / (x * x - 1.0);
}
}  // namespace detail

/// Gauss-Legendre nodes and weights on [0,1].
inline void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_01: n must be >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p = 0.0, dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      detail::legendre(n, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    detail::legendre(n, x, p, dp);
    const double w = 1.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = 0.5 * (1.0 - x);
    nodes[n - 1 - i] = 0.5 * (1.0 + x);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

/// Barycentric point with a weight; reference weights sum to one.
struct BarycentricPoint {
  std::array<double, 4> bary;
  double weight;
};

namespace detail {

inline std::vector<BarycentricPoint> make_reference_triangle(int degree) {
  std::vector<BarycentricPoint> rule;
  if (degree <= 4) {
    // Dunavant, degree 4
    constexpr double a1 = 0.445948490915965, w1 = 0.223381589678011;
    constexpr double a2 = 0.091576213509771, w2 = 0.109951743655322;
    rule = {{{a1, a1, 1 - 2 * a1, 0}, w1}, {{a1, 1 - 2 * a1, a1, 0}, w1}, {{1 - 2 * a1, a1, a1, 0}, w1},
            {{a2, a2, 1 - 2 * a2, 0}, w2}, {{a2, 1 - 2 * a2, a2, 0}, w2}, {{1 - 2 * a2, a2, a2, 0}, w2}};
    return rule;
  }
  std::vector<double> x1, w1, x2, w2;
  gauss_legendre_01((degree + 3) / 2, x1, w1);
  gauss_legendre_01((degree + 2) / 2, x2, w2);
  for (std::size_t i = 0; i < x1.size(); ++i)
    for (std::size_t j = 0; j < x2.size(); ++j) {
      const double l1 = x1[i];
      const double l2 = (1.0 - x1[i]) * x2[j];
      rule.push_back({{1.0 - l1 - l2, l1, l2, 0.0}, 2.0 * w1[i] * w2[j] * (1.0 - x1[i])});
    }
  return rule;
}

inline std::vector<BarycentricPoint> make_reference_tetrahedron(int degree) {
  std::vector<double> x1, w1, x2, w2, x3, w3;
  gauss_legendre_01((degree + 4) / 2, x1, w1);
  gauss_legendre_01((degree + 3) / 2, x2, w2);
  gauss_legendre_01((degree + 2) / 2, x3, w3);
  std::vector<BarycentricPoint> rule;
  for (std::size_t i = 0; i < x1.size(); ++i)
    for (std::size_t j = 0; j < x2.size(); ++j)
      for (std::size_t k = 0; k < x3.size(); ++k) {
        const double l1 = x1[i];
        const double l2 = (1.0 - x1[i]) * x2[j];
        const double l3 = (1.0 - x1[i]) * (1.0 - x2[j]) * x3[k];
        const double jac = (1.0 - x1[i]) * (1.0 - x1[i]) * (1.0 - x2[j]);
        rule.push_back({{1.0 - l1 - l2 - l3, l1, l2, l3}, 6.0 * w1[i] * w2[j] * w3[k] * jac});
      }
  return rule;
}

// one cache per `Make` type
template <class Make>
const std::vector<BarycentricPoint>& cached_rule(int degree, Make make) {
  static std::mutex mutex;
  static std::map<int, std::vector<BarycentricPoint>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, make(degree)).first;
  return it->second;
}

}  // namespace detail

/// Reference rule on the unit triangle, exact for total degree `degree`.
inline const std::vector<BarycentricPoint>& reference_triangle_rule(int degree) {
  return detail::cached_rule(std::max(degree, 0), [](int d) { return detail::make_reference_triangle(d); });
}

/// Reference rule on the unit tetrahedron, exact for total degree `degree`.
inline const std::vector<BarycentricPoint>& reference_tetrahedron_rule(int degree) {
  return detail::cached_rule(std::max(degree, 0), [](int d) { return detail::make_reference_tetrahedron(d); });
}

/// Rule on the triangle (a,b,c); weights sum to its area.
inline QuadratureRule triangle_rule(const Vec3& a, const Vec3& b, const Vec3& c, int degree) {
  const double area = 0.5 * (b - a).cross(c - a).norm();
  const auto& ref = reference_triangle_rule(degree);
  QuadratureRule rule;
  rule.reserve(ref.size());
  for (const auto& q : ref) rule.push_back({q.bary[0] * a + q.bary[1] * b + q.bary[2] * c, q.weight * area});
  return rule;
}

/// Rule on the tetrahedron (a,b,c,d); weights sum to its signed volume.
inline QuadratureRule tetrahedron_rule(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, int degree) {
  const double vol = (b - a).dot((c - a).cross(d - a)) / 6.0;
  const auto& ref = reference_tetrahedron_rule(degree);
  QuadratureRule rule;
  rule.reserve(ref.size());
  for (const auto& q : ref)
    rule.push_back({q.bary[0] * a + q.bary[1] * b + q.bary[2] * c + q.bary[3] * d, q.weight * vol});
  return rule;
}

}  // namespace polyelast
