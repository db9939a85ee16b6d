// Legacy ASCII VTK output: every cell is written as VTK_POLYHEDRON (42) with
// an explicit face stream, so hexahedra, tetrahedra and imported polyhedra
// share one code path.
#pragma once

#include "polyelast/space.hpp"

#include <fstream>
#include <ostream>
#include <string>

namespace polyelast {

inline constexpr int kVtkPolyhedron = 42;

inline void write_vtk(std::ostream& out, const Mesh& mesh, const DiscreteFunction& u, const std::string& title = "polyelast") {
  out.precision(17);
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_vertices() << " double\n";
  for (const auto& v : mesh.vertices()) out << v.position.x() << ' ' << v.position.y() << ' ' << v.position.z() << '\n';

  // per cell: stream length, n_faces, then (n_pts, ids...) per face
  long total = 0;
  for (const auto& c : mesh.cells()) {
    total += 2;
    for (const auto& cf : c.faces) total += 1 + static_cast<long>(mesh.face(cf.face).vertices.size());
  }
  out << "CELLS " << mesh.n_cells() << ' ' << total << '\n';
  for (const auto& c : mesh.cells()) {
    long len = 1;
    for (const auto& cf : c.faces) len += 1 + static_cast<long>(mesh.face(cf.face).vertices.size());
    out << len << ' ' << c.faces.size();
    for (const auto& cf : c.faces) {
      const auto& loop = mesh.face(cf.face).vertices;
      out << ' ' << loop.size();
      // VTK expects each face loop oriented outward from the cell
      if (cf.orientation > 0)
        for (int v : loop) out << ' ' << v;
      else
        for (auto it = loop.rbegin(); it != loop.rend(); ++it) out << ' ' << *it;
    }
    out << '\n';
  }
  out << "CELL_TYPES " << mesh.n_cells() << '\n';
  for (int k = 0; k < mesh.n_cells(); ++k) out << kVtkPolyhedron << '\n';

  out << "POINT_DATA " << mesh.n_vertices() << "\nVECTORS displacement double\n";
  for (int s = 0; s < mesh.n_vertices(); ++s) {
    const Vec3 v = u.vertex(s);
    out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  }

  out << "CELL_DATA " << mesh.n_cells() << "\nSCALARS div_D double 1\nLOOKUP_TABLE default\n";
  std::vector<CellReconstruction> rec;
  rec.reserve(static_cast<std::size_t>(mesh.n_cells()));
  for (int k = 0; k < mesh.n_cells(); ++k) rec.push_back(cell_reconstructions(mesh, k, u));
  for (const auto& r : rec) out << r.divergence << '\n';
  out << "SCALARS displacement_magnitude double 1\nLOOKUP_TABLE default\n";
  for (const auto& r : rec) out << r.mean.norm() << '\n';
}

inline void write_vtk_file(const std::string& path, const Mesh& mesh, const DiscreteFunction& u) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open VTK output file: " + path);
  write_vtk(out, mesh, u);
  if (!out) throw std::runtime_error("failed writing VTK output file: " + path);
}

}  // namespace polyelast
