#pragma once

#include <vector>

#include "phasetop/forward.hpp"

namespace phasetop {

/// Solution of the linear-quadratic adjoint problem at a forward state,
/// together with the multipliers rho = d grad h_gamma(p) and
/// pi = d hess h_gamma(p) p_bar.
struct AdjointState {
  Vector u_bar;  // full dof vector, zero on Dirichlet dofs
  std::vector<SymTensor2> eps_bar;
  std::vector<DevTensor2> p_bar;
  std::vector<DevTensor2> rho;
  std::vector<DevTensor2> pi;
};

struct Multipliers {
  std::vector<DevTensor2> rho;
  std::vector<DevTensor2> pi;
};

/// The adjoint operator is the forward consistent tangent at `state`; the
/// right-hand side is the load vector. p_bar is eliminated per triangle as
/// M^{-1} dev(C E u_bar) with M the flux Jacobian at p.
AdjointState solveAdjoint(const Assembler& fem, const MaterialLaws& laws, const LoadCase& loads,
                          const Vector& z, const State& state, double gamma,
                          double linear_tol = 1e-12);

Multipliers computeMultipliers(const Assembler& fem, const MaterialLaws& laws, const Vector& z,
                               double gamma, const State& state,
                               const std::vector<DevTensor2>& p_bar);

/// Objective weights: phase-field width delta and the optional volume
/// penalty nu * int ell(z) (zero unless requested).
struct ObjectiveWeights {
  double delta = 0.05;
  double volume_penalty = 0.0;
};

/// Reduced objective J(z, u) = loads . u + Modica-Mortola(z) [+ nu int ell(z)].
double evaluateObjective(const Assembler& fem, const LoadCase& loads, const Vector& z,
                         const State& state, const ObjectiveWeights& w);

/// Nodal derivative dJ/dz_i of the reduced objective (state eliminated).
Vector reducedGradient(const Assembler& fem, const MaterialLaws& laws, const LoadCase& loads,
                       const Vector& z, const State& state, const AdjointState& adj, double gamma,
                       const ObjectiveWeights& w);

/// Only the phase-field (and volume-penalty) part of the gradient.
Vector phaseGradient(const Assembler& fem, const Vector& z, const ObjectiveWeights& w);

struct GradientCheckReport {
  std::vector<double> adjoint;      // g . phi
  std::vector<double> finite_diff;  // central differences
  std::vector<double> relative_error;
  double max_relative_error = 0.0;
};

/// Compares g . phi with (J(z + h phi) - J(z - h phi)) / (2h), re-solving
/// the forward problem for each perturbation.
GradientCheckReport fdGradientCheck(const Assembler& fem, const MaterialLaws& laws,
                                    const LoadCase& loads, const Vector& z,
                                    const std::vector<Vector>& directions, double gamma,
                                    const ObjectiveWeights& w, double step,
                                    const ForwardOptions& opts);

}  // namespace phasetop
