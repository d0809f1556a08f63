#include "phasetop/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "phasetop/atomic_file.hpp"
#include "phasetop/errors.hpp"

namespace phasetop {

char tagLetter(EdgeTag tag) {
  switch (tag) {
    case EdgeTag::Dirichlet: return 'D';
    case EdgeTag::Neumann: return 'N';
    case EdgeTag::Free: return 'F';
  }
  return 'F';
}

double Mesh::signedArea(int t) const {
  const auto& tri = triangles[t];
  const Vec2 e1 = nodes[tri[1]] - nodes[tri[0]];
  const Vec2 e2 = nodes[tri[2]] - nodes[tri[0]];
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

double Mesh::totalArea() const {
  double a = 0.0;
  for (int t = 0; t < numTriangles(); ++t) a += signedArea(t);
  return a;
}

Vec2 Mesh::centroid(int t) const {
  const auto& tri = triangles[t];
  return (nodes[tri[0]] + nodes[tri[1]] + nodes[tri[2]]) / 3.0;
}

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

}  // namespace

void Mesh::validate() const {
  if (nodes.empty()) throw ValidationError("mesh has no nodes");
  if (triangles.empty()) throw ValidationError("mesh has no triangles");
  const int n = numNodes();
  for (const Vec2& x : nodes)
    if (!std::isfinite(x.x()) || !std::isfinite(x.y()))
      throw ValidationError("mesh node coordinates must be finite");

  std::map<EdgeKey, int> useCount;
  for (int t = 0; t < numTriangles(); ++t) {
    const auto& tri = triangles[t];
    for (int k = 0; k < 3; ++k)
      if (tri[k] < 0 || tri[k] >= n)
        throw ValidationError("triangle " + std::to_string(t) + " references missing node " +
                              std::to_string(tri[k]));
    if (!(signedArea(t) > 0.0))
      throw ValidationError("triangle " + std::to_string(t) +
                            " is clockwise or degenerate (orientation must be counter-clockwise)");
    for (int k = 0; k < 3; ++k) ++useCount[key(tri[k], tri[(k + 1) % 3])];
  }
  for (const auto& [edge, count] : useCount)
    if (count > 2)
      throw ValidationError("edge (" + std::to_string(edge.first) + ", " +
                            std::to_string(edge.second) + ") is shared by more than two triangles");

  std::map<EdgeKey, int> listed;
  bool hasDirichlet = false;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    if (e.a < 0 || e.a >= n || e.b < 0 || e.b >= n)
      throw ValidationError("boundary edge " + std::to_string(i) + " references a missing node");
    const auto it = useCount.find(key(e.a, e.b));
    if (it == useCount.end() || it->second != 1)
      throw ValidationError("boundary edge " + std::to_string(i) + " (" + std::to_string(e.a) +
                            ", " + std::to_string(e.b) +
                            ") does not belong to exactly one triangle");
    if (!listed.emplace(key(e.a, e.b), static_cast<int>(i)).second)
      throw ValidationError("boundary edge " + std::to_string(i) + " is listed twice");
    hasDirichlet = hasDirichlet || e.tag == EdgeTag::Dirichlet;
  }
  for (const auto& [edge, count] : useCount)
    if (count == 1 && !listed.count(edge))
      throw ValidationError("boundary edge (" + std::to_string(edge.first) + ", " +
                            std::to_string(edge.second) + ") has no tag");
  if (!hasDirichlet) throw ValidationError("empty Dirichlet boundary");
}

Mesh generateRectMesh(int nx, int ny, double lx, double ly, const RectTagSpec& tags, Split split) {
  if (nx < 1 || ny < 1) throw ValidationError("rectangle mesh needs nx, ny >= 1");
  if (!(lx > 0.0) || !(ly > 0.0)) throw ValidationError("rectangle mesh needs positive lengths");

  Mesh mesh;
  auto grid = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) mesh.nodes.emplace_back(lx * i / nx, ly * j / ny);

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int n00 = grid(i, j), n10 = grid(i + 1, j), n01 = grid(i, j + 1),
                n11 = grid(i + 1, j + 1);
      if (split == Split::Diagonal) {
        mesh.triangles.push_back({n00, n10, n11});
        mesh.triangles.push_back({n00, n11, n01});
      } else {
        const int c = mesh.numNodes();
        mesh.nodes.emplace_back(lx * (i + 0.5) / nx, ly * (j + 0.5) / ny);
        mesh.triangles.push_back({n00, n10, c});
        mesh.triangles.push_back({n10, n11, c});
        mesh.triangles.push_back({n11, n01, c});
        mesh.triangles.push_back({n01, n00, c});
      }
    }
  }

  auto tagFor = [](const SideTag& side, double along) {
    if (side.range && (along < side.range->first || along > side.range->second))
      return EdgeTag::Free;
    return side.tag;
  };
  for (int i = 0; i < nx; ++i) {
    const double mid = lx * (i + 0.5) / nx;
    mesh.edges.push_back({grid(i, 0), grid(i + 1, 0), tagFor(tags.bottom, mid)});
    mesh.edges.push_back({grid(i + 1, ny), grid(i, ny), tagFor(tags.top, mid)});
  }
  for (int j = 0; j < ny; ++j) {
    const double mid = ly * (j + 0.5) / ny;
    mesh.edges.push_back({grid(0, j + 1), grid(0, j), tagFor(tags.left, mid)});
    mesh.edges.push_back({grid(nx, j), grid(nx, j + 1), tagFor(tags.right, mid)});
  }
  return mesh;
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  /// Next non-empty line with comments stripped; false at end of input.
  bool next(std::istringstream& out) {
    std::string line;
    while (std::getline(in_, line)) {
      ++number_;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      out.clear();
      out.str(line);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ValidationError("mesh line " + std::to_string(number_) + ": " + msg);
  }

 private:
  std::istream& in_;
  int number_ = 0;
};

int readHeader(LineReader& reader, const std::string& word) {
  std::istringstream ls;
  if (!reader.next(ls)) reader.fail("unexpected end of file, expected '" + word + " COUNT'");
  std::string w;
  long count = -1;
  if (!(ls >> w >> count) || w != word || count < 0)
    reader.fail("expected '" + word + " COUNT'");
  std::string extra;
  if (ls >> extra) reader.fail("trailing characters after '" + word + "' header");
  return static_cast<int>(count);
}

}  // namespace

Mesh readMesh(std::istream& in) {
  LineReader reader(in);
  Mesh mesh;
  std::istringstream ls;
  std::string extra;

  const int n = readHeader(reader, "nodes");
  for (int i = 0; i < n; ++i) {
    double x, y;
    if (!reader.next(ls) || !(ls >> x >> y) || (ls >> extra)) reader.fail("expected 'x y'");
    mesh.nodes.emplace_back(x, y);
  }
  const int t = readHeader(reader, "triangles");
  for (int i = 0; i < t; ++i) {
    int a, b, c;
    if (!reader.next(ls) || !(ls >> a >> b >> c) || (ls >> extra)) reader.fail("expected 'i j k'");
    mesh.triangles.push_back({a, b, c});
  }
  const int e = readHeader(reader, "edges");
  for (int i = 0; i < e; ++i) {
    int a, b;
    std::string tag;
    if (!reader.next(ls) || !(ls >> a >> b >> tag) || (ls >> extra))
      reader.fail("expected 'i j TAG'");
    EdgeTag et;
    if (tag == "D")
      et = EdgeTag::Dirichlet;
    else if (tag == "N")
      et = EdgeTag::Neumann;
    else if (tag == "F")
      et = EdgeTag::Free;
    else
      reader.fail("unknown edge tag '" + tag + "' (expected D, N or F)");
    mesh.edges.push_back({a, b, et});
  }
  if (reader.next(ls)) reader.fail("unexpected content after edge list");
  mesh.validate();
  return mesh;
}

Mesh loadMesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open mesh file " + path);
  try {
    return readMesh(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void writeMesh(const Mesh& mesh, std::ostream& out) {
  out << std::setprecision(17);
  out << "nodes " << mesh.nodes.size() << '\n';
  for (const Vec2& x : mesh.nodes) out << x.x() << ' ' << x.y() << '\n';
  out << "triangles " << mesh.triangles.size() << '\n';
  for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "edges " << mesh.edges.size() << '\n';
  for (const auto& e : mesh.edges) out << e.a << ' ' << e.b << ' ' << tagLetter(e.tag) << '\n';
}

void saveMesh(const Mesh& mesh, const std::string& path) {
  writeFileAtomically(path, [&](std::ostream& out) { writeMesh(mesh, out); });
}

}  // namespace phasetop
