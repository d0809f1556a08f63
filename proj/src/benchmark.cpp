#include "phasetop/benchmark.hpp"

#include "phasetop/errors.hpp"

namespace phasetop {

Problem cantilever(const CantileverSpec& spec) {
  if (spec.nx < 1 || spec.ny < 1) throw ValidationError("cantilever: nx and ny must be positive");
  if (!(spec.window > 0.0 && spec.window <= 1.0))
    throw ValidationError("cantilever: window must lie in (0, 1]");
  RectTagSpec tags;
  const double half = 0.5 * spec.window * spec.ly;
  tags.right = {EdgeTag::Neumann, std::make_pair(0.5 * spec.ly - half, 0.5 * spec.ly + half)};
  Problem p;
  p.mesh = generateRectMesh(spec.nx, spec.ny, spec.lx, spec.ly, tags, spec.split);
  p.loads = LoadCase::uniform(p.mesh, Vec2::Zero(), Vec2(0.0, -spec.load), Vec2::Zero());
  return p;
}

Problem rectangleProblem(const CantileverSpec& spec, const Vec2& f, const Vec2& g, const Vec2& w) {
  Problem p = cantilever(spec);
  p.loads = LoadCase::uniform(p.mesh, f, g, w);
  return p;
}

}  // namespace phasetop
