// POLYMESH text format:
//
//   POLYMESH 1
//   <n_v> <n_f> <n_c>
//   x y z                  (n_v lines)
//   k v1 ... vk            (n_f lines, 0-based vertex ids, CCW about the face normal)
//   m s1 ... sm            (n_c lines, signed 1-based face ids; + means outward)
//
// '#' starts a comment running to end of line; blank lines are ignored.
#pragma once

#include "polyelast/mesh.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace polyelast {

namespace detail {

inline std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
T parse_number(std::string_view tok, int line_no) {
  T value{};
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw MeshError("malformed number '" + std::string(tok) + "' on line " + std::to_string(line_no));
  return value;
}

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace detail

/// Parse a POLYMESH stream into a Mesh with all geometry computed.
inline Mesh parse_polymesh(std::istream& in) {
  std::vector<std::pair<int, std::vector<std::string_view>>> lines;
  std::vector<std::string> storage;
  {
    std::string raw;
    while (std::getline(in, raw)) {
      const auto hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      storage.push_back(raw);
    }
    // string_views into `storage` are taken after it stops growing
    for (std::size_t i = 0; i < storage.size(); ++i) {
      auto toks = detail::split_tokens(storage[i]);
      if (!toks.empty()) lines.emplace_back(static_cast<int>(i + 1), std::move(toks));
    }
  }

  std::size_t cur = 0;
  auto next = [&](const char* what) -> const std::pair<int, std::vector<std::string_view>>& {
    if (cur >= lines.size()) throw MeshError(std::string("unexpected end of file while reading ") + what);
    return lines[cur++];
  };

  {
    const auto& [no, toks] = next("header");
    if (toks.size() != 2 || toks[0] != "POLYMESH" || toks[1] != "1")
      throw MeshError("malformed header on line " + std::to_string(no) + ": expected 'POLYMESH 1'");
  }
  long nv = 0, nf = 0, nc = 0;
  {
    const auto& [no, toks] = next("counts");
    if (toks.size() != 3) throw MeshError("malformed counts on line " + std::to_string(no));
    nv = detail::parse_number<long>(toks[0], no);
    nf = detail::parse_number<long>(toks[1], no);
    nc = detail::parse_number<long>(toks[2], no);
    if (nv < 0 || nf < 0 || nc < 0) throw MeshError("malformed counts on line " + std::to_string(no));
  }

  MeshTopology t;
  t.positions.reserve(static_cast<std::size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    const auto& [no, toks] = next("vertices");
    if (toks.size() != 3) throw MeshError("vertex line " + std::to_string(no) + " must have 3 coordinates");
    t.positions.emplace_back(detail::parse_number<double>(toks[0], no), detail::parse_number<double>(toks[1], no),
                             detail::parse_number<double>(toks[2], no));
  }
  for (long f = 0; f < nf; ++f) {
    const auto& [no, toks] = next("faces");
    const long k = detail::parse_number<long>(toks[0], no);
    if (k < 3) throw MeshError("face with fewer than 3 vertices on line " + std::to_string(no));
    if (static_cast<long>(toks.size()) != k + 1) throw MeshError("face line " + std::to_string(no) + " has wrong length");
    std::vector<int> loop;
    for (long j = 1; j <= k; ++j) {
      const long v = detail::parse_number<long>(toks[j], no);
      if (v < 0 || v >= nv) throw MeshError("dangling index: vertex " + std::to_string(v) + " on line " + std::to_string(no));
      loop.push_back(static_cast<int>(v));
    }
    t.face_loops.push_back(std::move(loop));
  }
  for (long c = 0; c < nc; ++c) {
    const auto& [no, toks] = next("cells");
    const long m = detail::parse_number<long>(toks[0], no);
    if (m < 4) throw MeshError("cell with fewer than 4 faces on line " + std::to_string(no));
    if (static_cast<long>(toks.size()) != m + 1) throw MeshError("cell line " + std::to_string(no) + " has wrong length");
    std::vector<CellFace> cfs;
    for (long j = 1; j <= m; ++j) {
      const long s = detail::parse_number<long>(toks[j], no);
      const long f = (s > 0 ? s : -s) - 1;
      if (s == 0 || f >= nf) throw MeshError("dangling index: face " + std::to_string(s) + " on line " + std::to_string(no));
      cfs.push_back({static_cast<int>(f), s > 0 ? 1 : -1});
    }
    t.cell_faces.push_back(std::move(cfs));
  }
  if (cur != lines.size())
    throw MeshError("trailing content on line " + std::to_string(lines[cur].first));
  return Mesh(std::move(t));
}

inline Mesh read_polymesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file: " + path);
  return parse_polymesh(in);
}

/// Shortest round-trip decimal coordinates, so re-parsing is exact.
inline void write_polymesh(std::ostream& out, const Mesh& mesh) {
  out << "POLYMESH 1\n" << mesh.n_vertices() << ' ' << mesh.n_faces() << ' ' << mesh.n_cells() << '\n';
  for (const auto& v : mesh.vertices())
    out << detail::format_double(v.position.x()) << ' ' << detail::format_double(v.position.y()) << ' '
        << detail::format_double(v.position.z()) << '\n';
  for (const auto& f : mesh.faces()) {
    out << f.vertices.size();
    for (int v : f.vertices) out << ' ' << v;
    out << '\n';
  }
  for (const auto& c : mesh.cells()) {
    out << c.faces.size();
    for (const auto& cf : c.faces) out << ' ' << cf.orientation * (cf.face + 1);
    out << '\n';
  }
}

}  // namespace polyelast
