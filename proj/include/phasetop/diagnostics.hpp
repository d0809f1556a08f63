#pragma once

#include <cstdint>

#include "phasetop/adjoint.hpp"

namespace phasetop {

/// Residuals of the limit optimality system evaluated at a regularized
/// solution. r1..r3 are area-weighted sums; the state/adjoint entries are the
/// largest normalized residuals over random admissible test triples.
struct OptimalityReport {
  double gamma = 0.0;
  double r1 = 0.0;              // sum |pi . p| |T|
  double r2 = 0.0;              // sum |rho . p - d |p|| |T|
  double r3 = 0.0;              // sum |p_bar|^2 |T| over {|rho| < 0.95 d}
  double max_rho_excess = 0.0;  // max (|rho| - d), signed
  double projected_grad_norm = 0.0;
  double state_residual = 0.0;
  double adjoint_residual = 0.0;
};

inline constexpr double kInactiveMargin = 0.05;

/// `gradient` is the reduced gradient at z (used for the projected norm).
OptimalityReport checkOptimality(const Assembler& fem, const MaterialLaws& laws,
                                 const LoadCase& loads, const Vector& z, const State& state,
                                 const AdjointState& adj, double gamma, const Vector& gradient,
                                 std::uint64_t seed = 7);

/// Same residual sums from stored per-triangle fields (no test triples).
OptimalityReport complementarityResiduals(const Assembler& fem, const MaterialLaws& laws,
                                          const Vector& z, double gamma,
                                          const std::vector<DevTensor2>& p,
                                          const std::vector<DevTensor2>& p_bar,
                                          const std::vector<DevTensor2>& rho,
                                          const std::vector<DevTensor2>& pi);

/// L2 norm of the lumped-mass Riesz representative of g with components
/// pushing into an active bound (z <= 0 with g > 0, z >= 1 with g < 0) removed.
double projectedGradientNorm(const Vector& z, const Vector& g, const Vector& lumped_mass);

/// Length of the {z = level} isoline of the P1 interpolant, excluding pieces
/// lying on the domain boundary.
double thresholdPerimeter(const Mesh& mesh, const Vector& z, double level = 0.5);

struct ProfileEnergy {
  double delta;
  double h;
  double energy;  // interfacial energy per unit interface length
  double error;   // energy - 1/6
};

/// Interfacial energy of the logistic profile 1/(1 + exp(-(x - 1/2)/delta))
/// on a one-cell-high strip of [0, 1], mesh size h = delta * h_ratio.
ProfileEnergy modicaMortolaProfile(double delta, double h_ratio = 0.125);

}  // namespace phasetop
