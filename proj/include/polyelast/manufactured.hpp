// Exact solutions used for verification: displacement, gradient, divergence,
// body force and stress, plus the boundary tagging of each case.
#pragma once

#include "polyelast/assembly.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace polyelast {

enum class CaseId { example1, example2, example3, patch };

inline std::string to_string(CaseId id) {
  switch (id) {
    case CaseId::example1: return "example1";
    case CaseId::example2: return "example2";
    case CaseId::example3: return "example3";
    case CaseId::patch: return "patch";
  }
  return "unknown";
}

inline CaseId parse_case_id(const std::string& s) {
  if (s == "example1") return CaseId::example1;
  if (s == "example2") return CaseId::example2;
  if (s == "example3") return CaseId::example3;
  if (s == "patch") return CaseId::patch;
  throw std::invalid_argument("unknown case '" + s + "'");
}

struct ManufacturedCase {
  CaseId id = CaseId::example1;
  MaterialParams material;
  VectorField u;
  TensorField grad;
  ScalarField div;
  VectorField f;

  Mat3 strain(const Vec3& x) const { return sym(grad(x)); }
  Mat3 stress(const Vec3& x) const {
    return 2.0 * material.mu * strain(x) + material.lambda * div(x) * Mat3::Identity();
  }

  /// Dirichlet everywhere, except example3: Dirichlet on x = 0 and the exact
  /// traction sigma(u) n on the other faces.
  BoundaryConditions boundary(const Mesh& mesh) const {
    if (id != CaseId::example3) return BoundaryConditions::all_dirichlet(mesh, u);
    auto sigma = [c = *this](const Vec3& x, const Vec3& n) -> Vec3 { return c.stress(x) * n; };
    return BoundaryConditions::split(
        mesh, [h = mesh.h()](const Vec3& c) { return std::abs(c.x()) < 1e-12 * (1.0 + h); }, u, sigma);
  }
};

namespace detail {

/// (-2 sin(kx)cos(ky)cos(kz), cos(kx)sin(ky)cos(kz), cos(kx)cos(ky)sin(kz)); divergence free.
inline Vec3 solenoidal(const Vec3& x, double k) {
  const double sx = std::sin(k * x.x()), cx = std::cos(k * x.x());
  const double sy = std::sin(k * x.y()), cy = std::cos(k * x.y());
  const double sz = std::sin(k * x.z()), cz = std::cos(k * x.z());
  return {-2.0 * sx * cy * cz, cx * sy * cz, cx * cy * sz};
}

inline Mat3 solenoidal_grad(const Vec3& x, double k) {
  const double sx = std::sin(k * x.x()), cx = std::cos(k * x.x());
  const double sy = std::sin(k * x.y()), cy = std::cos(k * x.y());
  const double sz = std::sin(k * x.z()), cz = std::cos(k * x.z());
  Mat3 g;
  g << -2.0 * k * cx * cy * cz, 2.0 * k * sx * sy * cz, 2.0 * k * sx * cy * sz,
      -k * sx * sy * cz, k * cx * cy * cz, -k * cx * sy * sz,
      -k * sx * cy * sz, -k * cx * sy * sz, k * cx * cy * cz;
  return g;
}

/// (sin(kx), sin(ky), sin(kz))
inline Vec3 gradient_field(const Vec3& x, double k) { return {std::sin(k * x.x()), std::sin(k * x.y()), std::sin(k * x.z())}; }

}  // namespace detail

/// Affine field used by the patch test; nonsymmetric gradient with nonzero trace.
inline Mat3 patch_gradient() {
  Mat3 a;
  a << 0.3, -0.2, 0.1,
       0.5, -0.1, 0.25,
       -0.4, 0.15, 0.2;
  return a;
}
inline Vec3 patch_offset() { return {0.1, -0.3, 0.2}; }

inline ManufacturedCase make_case(CaseId id, const MaterialParams& mat) {
  using std::numbers::pi;
  ManufacturedCase c;
  c.id = id;
  c.material = mat;
  const double mu = mat.mu;
  switch (id) {
    case CaseId::example1: {
      c.u = [](const Vec3& x) { return detail::solenoidal(x, pi); };
      c.grad = [](const Vec3& x) { return detail::solenoidal_grad(x, pi); };
      c.div = [](const Vec3&) { return 0.0; };
      // -div sigma = -mu Laplace(u) since div u = 0
      c.f = [mu](const Vec3& x) { return Vec3(3.0 * pi * pi * mu * detail::solenoidal(x, pi)); };
      break;
    }
    case CaseId::example2:
    case CaseId::example3: {
      if (!(mat.lambda > 0.0)) throw std::invalid_argument(to_string(id) + " requires lambda > 0");
      const double k = 2.0 * pi;
      const double il = 1.0 / mat.lambda;
      c.u = [k, il](const Vec3& x) { return Vec3(detail::solenoidal(x, k) + il * detail::gradient_field(x, k)); };
      c.grad = [k, il](const Vec3& x) {
        Mat3 g = detail::solenoidal_grad(x, k);
        g.diagonal() += il * k * Vec3(std::cos(k * x.x()), std::cos(k * x.y()), std::cos(k * x.z()));
        return g;
      };
      c.div = [k, il](const Vec3& x) { return il * k * (std::cos(k * x.x()) + std::cos(k * x.y()) + std::cos(k * x.z())); };
      // u = u0 + w / lambda with div u0 = 0, Laplace u0 = -3k^2 u0, Laplace w = grad div w = -k^2 w
      c.f = [k, mu, il](const Vec3& x) {
        return Vec3(3.0 * k * k * mu * detail::solenoidal(x, k) + k * k * (1.0 + 2.0 * mu * il) * detail::gradient_field(x, k));
      };
      break;
    }
    case CaseId::patch: {
      const Mat3 a = patch_gradient();
      const Vec3 b = patch_offset();
      c.u = [a, b](const Vec3& x) { return Vec3(a * x + b); };
      c.grad = [a](const Vec3&) { return a; };
      c.div = [a](const Vec3&) { return a.trace(); };
      c.f = [](const Vec3&) { return Vec3::Zero(); };
      break;
    }
  }
  return c;
}

}  // namespace polyelast
