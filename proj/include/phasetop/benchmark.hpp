#pragma once

#include "phasetop/fem.hpp"

namespace phasetop {

/// Cantilever on [0, lx] x [0, ly]: left edge clamped (w = 0), downward
/// traction of magnitude `load` on the right-edge window around mid-height.
struct CantileverSpec {
  int nx = 32;
  int ny = 16;
  double lx = 1.0;
  double ly = 1.0;
  double load = 1.0;
  double window = 0.25;  // window length as a fraction of ly
  Split split = Split::Diagonal;
};

struct Problem {
  Mesh mesh;
  LoadCase loads;
};

Problem cantilever(const CantileverSpec& spec);

/// Same mesh and tags with arbitrary uniform body force, traction and
/// Dirichlet data.
Problem rectangleProblem(const CantileverSpec& spec, const Vec2& f, const Vec2& g, const Vec2& w);

}  // namespace phasetop
