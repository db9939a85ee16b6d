// Structured hexahedral and tetrahedral meshes of the unit cube.
#pragma once

#include "polyelast/mesh.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace polyelast {

enum class MeshKind { hex, tet };

/// Seed used for vertex jitter unless the caller supplies one.
inline constexpr std::uint64_t kDefaultPerturbSeed = 0x5eed2024u;

inline std::string to_string(MeshKind kind) { return kind == MeshKind::hex ? "hex" : "tet"; }

/// Uniform double in [0,1) from the top 53 bits; identical on every platform.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// (0,1)^3 split into n^3 cubes; kind=tet splits each cube into the six
/// Kuhn tetrahedra sharing its main diagonal, so neighbouring cubes match.
/// With perturb > 0 (tet only) each interior vertex coordinate is shifted by
/// a uniform offset in [-a, a], a = perturb / (2n).
inline Mesh generate_structured_mesh(MeshKind kind, int n, double perturb = 0.0,
                                     std::uint64_t seed = kDefaultPerturbSeed) {
  if (n < 1) throw std::invalid_argument("generate_structured_mesh: n must be >= 1");
  if (perturb < 0.0 || perturb >= 1.0) throw std::invalid_argument("generate_structured_mesh: perturb must lie in [0,1)");
  if (kind == MeshKind::hex && perturb > 0.0)
    throw std::invalid_argument("generate_structured_mesh: perturbation is only supported for tet meshes");

  const int np = n + 1;
  auto vid = [np](int i, int j, int k) { return i + np * (j + np * k); };

  std::vector<Vec3> x(static_cast<std::size_t>(np) * np * np);
  for (int k = 0; k < np; ++k)
    for (int j = 0; j < np; ++j)
      for (int i = 0; i < np; ++i) x[vid(i, j, k)] = Vec3(i, j, k) / static_cast<double>(n);

  if (perturb > 0.0) {
    std::mt19937_64 rng(seed);
    const double amp = perturb / (2.0 * n);
    for (int k = 1; k < n; ++k)
      for (int j = 1; j < n; ++j)
        for (int i = 1; i < n; ++i)
          for (int d = 0; d < 3; ++d) x[vid(i, j, k)](d) += amp * (2.0 * uniform01(rng) - 1.0);
  }

  std::vector<std::vector<std::vector<int>>> cells;
  if (kind == MeshKind::hex) {
    cells.reserve(static_cast<std::size_t>(n) * n * n);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const int c[8] = {vid(i, j, k),         vid(i + 1, j, k),         vid(i + 1, j + 1, k),
                            vid(i, j + 1, k),     vid(i, j, k + 1),         vid(i + 1, j, k + 1),
                            vid(i + 1, j + 1, k + 1), vid(i, j + 1, k + 1)};
          cells.push_back({{c[0], c[3], c[2], c[1]},
                           {c[4], c[5], c[6], c[7]},
                           {c[0], c[1], c[5], c[4]},
                           {c[3], c[7], c[6], c[2]},
                           {c[0], c[4], c[7], c[3]},
                           {c[1], c[2], c[6], c[5]}});
        }
  } else {
    static constexpr std::array<std::array<int, 3>, 6> perms = {
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    cells.reserve(static_cast<std::size_t>(6) * n * n * n);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          for (const auto& p : perms) {
            std::array<int, 3> idx = {i, j, k};
            std::array<int, 4> t{};
            t[0] = vid(idx[0], idx[1], idx[2]);
            for (int s = 0; s < 3; ++s) {
              ++idx[p[s]];
              t[s + 1] = vid(idx[0], idx[1], idx[2]);
            }
            cells.push_back({{t[0], t[2], t[1]}, {t[0], t[1], t[3]}, {t[0], t[3], t[2]}, {t[1], t[2], t[3]}});
          }
  }
  return mesh_from_cell_polygons(std::move(x), cells);
}

}  // namespace polyelast
