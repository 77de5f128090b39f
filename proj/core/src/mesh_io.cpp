#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "vef/error.hpp"
#include "vef/mesh.hpp"

namespace vef {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct LineReader {
  explicit LineReader(std::istream& in) : is(in) {}
  std::istream& is;
  int line = 0;
  std::istringstream cur;

  bool next() {
    std::string s;
    while (std::getline(is, s)) {
      ++line;
      if (s.find_first_not_of(" \t\r") == std::string::npos) continue;
      cur.clear();
      cur.str(s);
      return true;
    }
    return false;
  }
  void require(const char* what) {
    if (!next()) throw ParseError(std::string("unexpected end of file, expected ") + what, line + 1);
  }
  template <class T>
  T get(const char* what) {
    T v;
    if (!(cur >> v)) throw ParseError(std::string("expected ") + what, line);
    return v;
  }
  void end() {
    std::string extra;
    if (cur >> extra) throw ParseError("trailing token '" + extra + "'", line);
  }
};

}  // namespace

void write_mesh(const Mesh& mesh, std::ostream& os) {
  const auto tags = mesh.boundary_tags();
  os << "vefmesh 1 " << mesh.order() << ' ' << mesh.num_points() << ' ' << mesh.num_elements()
     << ' ' << tags.size() << '\n';
  for (const Vec2& p : mesh.points()) os << fmt17(p[0]) << ' ' << fmt17(p[1]) << '\n';
  for (int e = 0; e < mesh.num_elements(); ++e) {
    auto nodes = mesh.element_nodes(e);
    for (size_t i = 0; i < nodes.size(); ++i) os << (i ? " " : "") << nodes[i];
    os << '\n';
  }
  for (const BoundaryTag& t : tags) os << t.elem << ' ' << t.edge << ' ' << t.tag << '\n';
}

Mesh read_mesh(std::istream& is) {
  LineReader r(is);
  r.require("header");
  std::string magic;
  int version = 0;
  if (!(r.cur >> magic) || magic != "vefmesh") throw ParseError("malformed header", r.line);
  version = r.get<int>("format version");
  if (version != 1) throw ParseError("unsupported format version " + std::to_string(version), r.line);
  const int order = r.get<int>("order");
  const int np = r.get<int>("point count");
  const int ne = r.get<int>("element count");
  const int nb = r.get<int>("boundary face count");
  r.end();
  if (order < 1 || np < 1 || ne < 1 || nb < 0) throw ParseError("malformed header counts", r.line);

  std::vector<Vec2> pts(np);
  for (int i = 0; i < np; ++i) {
    r.require("control point");
    pts[i][0] = r.get<double>("x coordinate");
    pts[i][1] = r.get<double>("y coordinate");
    r.end();
  }
  const int npe = (order + 1) * (order + 1);
  std::vector<std::vector<int>> elems(ne);
  std::vector<bool> used(np, false);
  for (int e = 0; e < ne; ++e) {
    r.require("element");
    elems[e].resize(npe);
    for (int k = 0; k < npe; ++k) {
      const int id = r.get<int>("node id");
      if (id < 0 || id >= np)
        throw ParseError("element " + std::to_string(e) + " references missing node id " +
                             std::to_string(id),
                         r.line);
      elems[e][k] = id;
      used[id] = true;
    }
    r.end();
  }
  for (int i = 0; i < np; ++i)
    if (!used[i]) throw ParseError("control point " + std::to_string(i) + " is not referenced", r.line);
  std::vector<BoundaryTag> tags(nb);
  for (int b = 0; b < nb; ++b) {
    r.require("boundary face");
    tags[b].elem = r.get<int>("element id");
    tags[b].edge = r.get<int>("local edge");
    tags[b].tag = r.get<int>("tag");
    r.end();
    if (tags[b].elem < 0 || tags[b].elem >= ne || tags[b].edge < 0 || tags[b].edge > 3)
      throw ParseError("invalid boundary face entry", r.line);
  }
  if (r.next()) throw ParseError("unexpected content after boundary faces", r.line);
  try {
    return Mesh(order, std::move(pts), std::move(elems), std::move(tags));
  } catch (const ArgumentError& ex) {
    throw ParseError(ex.what(), r.line);
  }
}

void write_mesh_file(const Mesh& mesh, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  write_mesh(mesh, os);
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  return read_mesh(is);
}

}  // namespace vef
