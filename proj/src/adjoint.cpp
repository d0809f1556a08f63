#include "phasetop/adjoint.hpp"

#include <algorithm>
#include <cmath>

#include "phasetop/phasefield.hpp"

namespace phasetop {

AdjointState solveAdjoint(const Assembler& fem, const MaterialLaws& laws, const LoadCase& loads,
                          const Vector& z, const State& state, double gamma, double linear_tol) {
  const Vector load = fem.assembleLoads(z, loads);
  const ResidualTangent rt = fem.assembleResidualAndTangent(laws, z, gamma, state.u, load);
  Vector free = Vector::Zero(fem.layout().numFree());
  solveSpd(rt.tangent, fem.restrictToFree(load), free, linear_tol);

  AdjointState adj;
  adj.u_bar = Vector::Zero(fem.layout().numDofs());
  fem.scatterFree(free, adj.u_bar);
  const int nt = fem.numTriangles();
  adj.eps_bar.resize(nt);
  adj.p_bar.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const ScalarLaws s = laws.at(fem.elementPhase(z, t));
    const SymTensor2 e = fem.elementStrain(adj.u_bar, t);
    const DevMap m = fluxJacobian(s, gamma, state.p[t]);
    adj.p_bar[t] = DevTensor2::fromCoords(m.ldlt().solve((e.dev() * (2.0 * s.mu)).coords()));
    adj.eps_bar[t] = e - adj.p_bar[t];
  }
  Multipliers mult = computeMultipliers(fem, laws, z, gamma, state, adj.p_bar);
  adj.rho = std::move(mult.rho);
  adj.pi = std::move(mult.pi);
  return adj;
}

Multipliers computeMultipliers(const Assembler& fem, const MaterialLaws& laws, const Vector& z,
                               double gamma, const State& state,
                               const std::vector<DevTensor2>& p_bar) {
  const int nt = fem.numTriangles();
  Multipliers m;
  m.rho.resize(nt);
  m.pi.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const ScalarLaws s = laws.at(fem.elementPhase(z, t));
    const HGamma hg = hGamma(gamma, state.p[t]);
    m.rho[t] = hg.grad * s.d;
    m.pi[t] = apply(hg.hess, p_bar[t]) * s.d;
  }
  return m;
}

double evaluateObjective(const Assembler& fem, const LoadCase& loads, const Vector& z,
                         const State& state, const ObjectiveWeights& w) {
  double j = fem.assembleLoads(z, loads).dot(state.u) +
             modicaMortolaEnergy(fem, fem.phaseMatrices().stiffness, z, w.delta);
  if (w.volume_penalty != 0.0) {
    double volume = 0.0;
    for (int t = 0; t < fem.numTriangles(); ++t)
      volume += fem.area(t) * smoothstep(fem.elementPhase(z, t)).value;
    j += w.volume_penalty * volume;
  }
  return j;
}

Vector phaseGradient(const Assembler& fem, const Vector& z, const ObjectiveWeights& w) {
  Vector g = w.delta * (fem.phaseMatrices().stiffness * z) + doubleWellGradient(fem, z, w.delta);
  if (w.volume_penalty != 0.0) {
    for (int t = 0; t < fem.numTriangles(); ++t) {
      const auto& tri = fem.mesh().triangles[t];
      const auto weights = fem.elementPhaseWeights(z, t);
      const double dl = smoothstep(fem.elementPhase(z, t)).derivative;
      for (int k = 0; k < 3; ++k) g[tri[k]] += w.volume_penalty * fem.area(t) * dl * weights[k];
    }
  }
  return g;
}

Vector reducedGradient(const Assembler& fem, const MaterialLaws& laws, const LoadCase& loads,
                       const Vector& z, const State& state, const AdjointState& adj, double gamma,
                       const ObjectiveWeights& w) {
  Vector g = phaseGradient(fem, z, w);
  const Vector both = state.u + adj.u_bar;
  for (int t = 0; t < fem.numTriangles(); ++t) {
    const auto& tri = fem.mesh().triangles[t];
    const ScalarLaws s = laws.at(fem.elementPhase(z, t));
    Vec2 f = Vec2::Zero();
    Vec2 v = Vec2::Zero();
    for (int k = 0; k < 3; ++k) {
      f += loads.body_force[tri[k]] / 3.0;
      v += Vec2(both[2 * tri[k]], both[2 * tri[k] + 1]) / 3.0;
    }
    const DevTensor2& p = state.p[t];
    const DevTensor2& pb = adj.p_bar[t];
    // Density of the derivative with respect to the element phase value.
    const double density = s.dell * f.dot(v) - applyCPrime(s, state.eps[t]).dot(adj.eps_bar[t]) -
                           s.dh * p.dot(pb) - s.dd * hGammaGrad(gamma, p).dot(pb);
    const auto weights = fem.elementPhaseWeights(z, t);
    for (int k = 0; k < 3; ++k) g[tri[k]] += fem.area(t) * density * weights[k];
  }
  return g;
}

GradientCheckReport fdGradientCheck(const Assembler& fem, const MaterialLaws& laws,
                                    const LoadCase& loads, const Vector& z,
                                    const std::vector<Vector>& directions, double gamma,
                                    const ObjectiveWeights& w, double step,
                                    const ForwardOptions& opts) {
  const State state = solveForward(fem, laws, loads, z, gamma, opts);
  const AdjointState adj = solveAdjoint(fem, laws, loads, z, state, gamma);
  const Vector g = reducedGradient(fem, laws, loads, z, state, adj, gamma, w);

  GradientCheckReport report;
  for (const Vector& phi : directions) {
    const Vector zp = z + step * phi;
    const Vector zm = z - step * phi;
    const State sp = solveForward(fem, laws, loads, zp, gamma, opts, &state.u);
    const State sm = solveForward(fem, laws, loads, zm, gamma, opts, &state.u);
    const double fd = (evaluateObjective(fem, loads, zp, sp, w) -
                       evaluateObjective(fem, loads, zm, sm, w)) / (2.0 * step);
    const double ad = g.dot(phi);
    const double scale = std::max({std::abs(fd), std::abs(ad), 1e-300});
    report.adjoint.push_back(ad);
    report.finite_diff.push_back(fd);
    report.relative_error.push_back(std::abs(ad - fd) / scale);
    report.max_relative_error = std::max(report.max_relative_error, report.relative_error.back());
  }
  return report;
}

}  // namespace phasetop
