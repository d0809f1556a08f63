#include "phasetop/forward.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "phasetop/errors.hpp"

namespace phasetop {

void recoverPlastic(const Assembler& fem, const MaterialLaws& laws, const Vector& z, double gamma,
                    const Vector& u, std::vector<SymTensor2>& eps, std::vector<DevTensor2>& p) {
  const int nt = fem.numTriangles();
  eps.resize(nt);
  p.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const ScalarLaws s = laws.at(fem.elementPhase(z, t));
    const SymTensor2 e = fem.elementStrain(u, t);
    p[t] = fluxFInverse(s, gamma, e.dev() * (2.0 * s.mu));
    eps[t] = e - p[t];
  }
}

State solveForward(const Assembler& fem, const MaterialLaws& laws, const LoadCase& loads,
                   const Vector& z, double gamma, const ForwardOptions& opts,
                   const Vector* initial_u) {
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  const Vector load = fem.assembleLoads(z, loads);
  const double threshold = opts.tol * (1.0 + fem.restrictToFree(load).norm());

  Vector u = fem.dirichletLift(loads);
  if (initial_u) {
    const Vector seed = fem.restrictToFree(*initial_u);
    fem.scatterFree(seed, u);
  }

  State state;
  state.gamma_used = gamma;
  Vector step = Vector::Zero(fem.layout().numFree());
  for (int it = 0;; ++it) {
    ResidualTangent rt = fem.assembleResidualAndTangent(laws, z, gamma, u, load);
    const double rnorm = rt.residual.norm();
    state.residual_norm = rnorm;
    state.newton_iterations = it;
    if (state.energy_history.empty()) state.energy_history.push_back(rt.energy);
    if (rnorm <= threshold) break;
    if (it >= opts.max_iterations)
      throw MaxIterations("Newton did not converge in " + std::to_string(it) +
                              " iterations (residual " + std::to_string(rnorm) + ")",
                          it, rnorm);

    step.setZero();
    solveSpd(rt.tangent, -rt.residual, step, opts.linear_tol);

    // Armijo backtracking on the convex reduced energy, whose gradient is the
    // residual. Rounding in the energy sum is allowed for near convergence.
    const double slope = rt.residual.dot(step);
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(rt.energy));
    double alpha = 1.0;
    Vector trial = u;
    double energy = 0.0;
    bool accepted = false;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
      trial = u;
      for (int k = 0; k < fem.layout().numFree(); ++k)
        trial[fem.layout().free_dofs[k]] += alpha * step[k];
      energy = fem.reducedEnergy(laws, z, gamma, trial, load);
      if (energy <= rt.energy + opts.armijo * alpha * slope + slack) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted)
      throw MaxIterations("line search failed at Newton iteration " + std::to_string(it), it,
                          rnorm);
    u = std::move(trial);
    state.energy_history.push_back(energy);
  }

  state.u = std::move(u);
  recoverPlastic(fem, laws, z, gamma, state.u, state.eps, state.p);
  return state;
}

double stateEnergy(const Assembler& fem, const MaterialLaws& laws, const LoadCase& loads,
                   const Vector& z, const State& state, double gamma) {
  double stored = 0.0;
  for (int t = 0; t < fem.numTriangles(); ++t) {
    const ScalarLaws s = laws.at(fem.elementPhase(z, t));
    const DevTensor2& p = state.p[t];
    const double dissipation = std::isinf(gamma) ? p.norm() : hGammaValue(gamma, p);
    stored += fem.area(t) * (0.5 * applyC(s, state.eps[t]).dot(state.eps[t]) +
                             0.5 * s.h * p.normSquared() + s.d * dissipation);
  }
  return stored - fem.assembleLoads(z, loads).dot(state.u);
}

double liftEnergy(const Assembler& fem, const MaterialLaws& laws, const LoadCase& loads,
                  const Vector& z, double gamma) {
  State lift;
  lift.u = fem.dirichletLift(loads);
  lift.eps.resize(fem.numTriangles());
  lift.p.assign(fem.numTriangles(), DevTensor2{});
  for (int t = 0; t < fem.numTriangles(); ++t) lift.eps[t] = fem.elementStrain(lift.u, t);
  return stateEnergy(fem, laws, loads, z, lift, gamma);
}

}  // namespace phasetop
