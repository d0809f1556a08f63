#pragma once

#include <optional>
#include <vector>

#include "phasetop/fem.hpp"

namespace phasetop {

struct ForwardOptions {
  double tol = 1e-10;  // relative to 1 + |loads|
  int max_iterations = 50;
  double linear_tol = 1e-10;
  double armijo = 1e-4;
  int max_backtracks = 40;
};

/// Discrete elastoplastic state (u, eps, p) with E u = eps + p per triangle.
struct State {
  Vector u;
  std::vector<SymTensor2> eps;
  std::vector<DevTensor2> p;
  double gamma_used = 0.0;
  double residual_norm = 0.0;
  int newton_iterations = 0;
  std::vector<double> energy_history;  // reduced energy after each accepted step
};

/// Per-triangle plastic strain p = F^{-1}(dev(C E u)) and eps = E u - p.
void recoverPlastic(const Assembler& fem, const MaterialLaws& laws, const Vector& z, double gamma,
                    const Vector& u, std::vector<SymTensor2>& eps, std::vector<DevTensor2>& p);

/// Newton's method with Armijo backtracking on the reduced energy.
/// `initial_u` (full dof vector) seeds the iteration; its Dirichlet entries
/// are overwritten by the prescribed data.
State solveForward(const Assembler& fem, const MaterialLaws& laws, const LoadCase& loads,
                   const Vector& z, double gamma, const ForwardOptions& opts = {},
                   const Vector* initial_u = nullptr);

/// Incremental energy of a state; gamma = +infinity evaluates the
/// unregularized dissipation |p|.
double stateEnergy(const Assembler& fem, const MaterialLaws& laws, const LoadCase& loads,
                   const Vector& z, const State& state, double gamma);

/// Energy of the admissible triple (w-lift, E w-lift, 0).
double liftEnergy(const Assembler& fem, const MaterialLaws& laws, const LoadCase& loads,
                  const Vector& z, double gamma);

}  // namespace phasetop
