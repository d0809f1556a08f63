#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "phasetop/tensor.hpp"

namespace phasetop {

enum class EdgeTag { Dirichlet, Neumann, Free };

char tagLetter(EdgeTag tag);

struct BoundaryEdge {
  int a;
  int b;
  EdgeTag tag;
};

/// Triangulated 2D domain with tagged boundary. Triangles are counter-clockwise.
struct Mesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> edges;

  int numNodes() const { return static_cast<int>(nodes.size()); }
  int numTriangles() const { return static_cast<int>(triangles.size()); }

  double signedArea(int t) const;
  double totalArea() const;
  Vec2 centroid(int t) const;

  /// Checks every structural invariant; throws ValidationError naming the
  /// first violation.
  void validate() const;
};

/// Tag assignment for one side of a rectangle. Edges whose midpoint lies in
/// `range` (coordinate along the side) receive `tag`, the others are Free.
struct SideTag {
  EdgeTag tag = EdgeTag::Free;
  std::optional<std::pair<double, double>> range;
};

struct RectTagSpec {
  SideTag left{EdgeTag::Dirichlet, std::nullopt};
  SideTag right;
  SideTag bottom;
  SideTag top;
};

enum class Split { Diagonal, Crossed };

Mesh generateRectMesh(int nx, int ny, double lx, double ly, const RectTagSpec& tags,
                      Split split = Split::Diagonal);

Mesh readMesh(std::istream& in);
Mesh loadMesh(const std::string& path);
void writeMesh(const Mesh& mesh, std::ostream& out);
void saveMesh(const Mesh& mesh, const std::string& path);

}  // namespace phasetop
