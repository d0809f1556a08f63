#include "phasetop/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "phasetop/phasefield.hpp"

namespace phasetop {

OptimalityReport complementarityResiduals(const Assembler& fem, const MaterialLaws& laws,
                                          const Vector& z, double gamma,
                                          const std::vector<DevTensor2>& p,
                                          const std::vector<DevTensor2>& p_bar,
                                          const std::vector<DevTensor2>& rho,
                                          const std::vector<DevTensor2>& pi) {
  OptimalityReport r;
  r.gamma = gamma;
  r.max_rho_excess = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < fem.numTriangles(); ++t) {
    const double a = fem.area(t);
    const double d = laws.at(fem.elementPhase(z, t)).d;
    r.r1 += a * std::abs(pi[t].dot(p[t]));
    r.r2 += a * std::abs(rho[t].dot(p[t]) - d * p[t].norm());
    if (rho[t].norm() < (1.0 - kInactiveMargin) * d) r.r3 += a * p_bar[t].normSquared();
    r.max_rho_excess = std::max(r.max_rho_excess, rho[t].norm() - d);
  }
  return r;
}

OptimalityReport checkOptimality(const Assembler& fem, const MaterialLaws& laws,
                                 const LoadCase& loads, const Vector& z, const State& state,
                                 const AdjointState& adj, double gamma, const Vector& gradient,
                                 std::uint64_t seed) {
  OptimalityReport r =
      complementarityResiduals(fem, laws, z, gamma, state.p, adj.p_bar, adj.rho, adj.pi);
  r.projected_grad_norm = projectedGradientNorm(z, gradient, fem.phaseMatrices().lumped_mass);

  const Vector load = fem.assembleLoads(z, loads);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int nt = fem.numTriangles();
  for (int trial = 0; trial < 10; ++trial) {
    // Random admissible triple (v, Ev - q, q) with v = 0 on the Dirichlet part.
    Vector v = Vector::Zero(fem.layout().numDofs());
    for (int k = 0; k < fem.layout().numFree(); ++k) v[fem.layout().free_dofs[k]] = unit(rng);
    std::vector<DevTensor2> q(nt);
    for (auto& qt : q) qt = {unit(rng), unit(rng)};
    double res_state = -load.dot(v), scale_state = std::abs(load.dot(v));
    double res_adjoint = res_state, scale_adjoint = scale_state;
    for (int t = 0; t < nt; ++t) {
      const ScalarLaws s = laws.at(fem.elementPhase(z, t));
      const double a = fem.area(t);
      const SymTensor2 eta = fem.elementStrain(v, t) - q[t];
      const double terms_state[3] = {applyC(s, state.eps[t]).dot(eta), s.h * state.p[t].dot(q[t]),
                                 adj.rho[t].dot(q[t])};
      const double terms_adjoint[3] = {applyC(s, adj.eps_bar[t]).dot(eta), s.h * adj.p_bar[t].dot(q[t]),
                                 adj.pi[t].dot(q[t])};
      for (int k = 0; k < 3; ++k) {
        res_state += a * terms_state[k];
        scale_state += a * std::abs(terms_state[k]);
        res_adjoint += a * terms_adjoint[k];
        scale_adjoint += a * std::abs(terms_adjoint[k]);
      }
    }
    if (scale_state > 0.0) r.state_residual = std::max(r.state_residual, std::abs(res_state) / scale_state);
    if (scale_adjoint > 0.0) r.adjoint_residual = std::max(r.adjoint_residual, std::abs(res_adjoint) / scale_adjoint);
  }
  return r;
}

double projectedGradientNorm(const Vector& z, const Vector& g, const Vector& lumped_mass) {
  double sum = 0.0;
  for (int i = 0; i < z.size(); ++i) {
    const double r = g[i] / lumped_mass[i];
    if ((z[i] <= 0.0 && r > 0.0) || (z[i] >= 1.0 && r < 0.0)) continue;
    sum += lumped_mass[i] * r * r;
  }
  return std::sqrt(sum);
}

double thresholdPerimeter(const Mesh& mesh, const Vector& z, double level) {
  std::map<std::pair<int, int>, int> boundary;
  for (const auto& e : mesh.edges) boundary[{std::min(e.a, e.b), std::max(e.a, e.b)}] = 1;
  auto onBoundaryEdge = [&](int a, int b) {
    return boundary.count({std::min(a, b), std::max(a, b)}) > 0;
  };

  double length = 0.0;
  for (const auto& tri : mesh.triangles) {
    bool inside[3];
    int count = 0;
    for (int k = 0; k < 3; ++k) count += (inside[k] = z[tri[k]] >= level);
    if (count == 0 || count == 3) continue;
    // Crossing points on the two edges joining inside and outside nodes.
    Vec2 pts[2];
    int found = 0;
    int vertexHits[2] = {-1, -1};
    for (int k = 0; k < 3 && found < 2; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      if (inside[k] == inside[(k + 1) % 3]) continue;
      const double s = (level - z[a]) / (z[b] - z[a]);
      pts[found] = mesh.nodes[a] + s * (mesh.nodes[b] - mesh.nodes[a]);
      vertexHits[found] = (s == 0.0) ? a : (s == 1.0 ? b : -1);
      ++found;
    }
    if (found != 2) continue;
    if (vertexHits[0] >= 0 && vertexHits[1] >= 0 && vertexHits[0] != vertexHits[1] &&
        onBoundaryEdge(vertexHits[0], vertexHits[1]))
      continue;
    length += (pts[1] - pts[0]).norm();
  }
  return length;
}

ProfileEnergy modicaMortolaProfile(double delta, double h_ratio) {
  const double h_target = delta * h_ratio;
  const int nx = static_cast<int>(std::ceil(1.0 / h_target - 1e-9));
  const double h = 1.0 / nx;
  RectTagSpec tags;
  tags.left = {EdgeTag::Dirichlet, std::nullopt};
  const Mesh mesh = generateRectMesh(nx, 1, 1.0, h, tags);
  const Assembler fem(mesh);
  Vector z(mesh.numNodes());
  for (int i = 0; i < mesh.numNodes(); ++i)
    z[i] = 1.0 / (1.0 + std::exp(-(mesh.nodes[i].x() - 0.5) / delta));
  const double e = modicaMortolaEnergy(fem, fem.phaseMatrices().stiffness, z, delta) / h;
  return {delta, h, e, e - 1.0 / 6.0};
}

}  // namespace phasetop
