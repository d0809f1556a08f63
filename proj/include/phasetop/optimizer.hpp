#pragma once

#include <string>
#include <vector>

#include "phasetop/diagnostics.hpp"

namespace phasetop {

struct OptimizerConfig {
  double delta = 0.05;
  std::vector<double> gamma_schedule{10.0};
  double tau0 = 1.0;
  int max_iterations = 500;  // outer iterations over the whole schedule
  double grad_tol = 1e-5;    // relative to the initial projected-gradient norm
  double grad_atol = 1e-14;  // absolute floor
  double shrink = 0.5;
  double grow = 1.2;
  double min_tau = 1e-12;  // relative to tau0; smaller steps count as a stall
  double volume_penalty = 0.0;
  ForwardOptions forward;

  void validate() const;
  ObjectiveWeights weights() const { return {delta, volume_penalty}; }
};

struct HistoryEntry {
  int iteration = 0;
  double gamma = 0.0;
  double objective = 0.0;
  double grad_norm = 0.0;
  int newton_iterations = 0;
  double tau = 0.0;
};

enum class StopReason { Converged, MaxIterations, StepUnderflow };
const char* stopReasonName(StopReason r);

/// One semi-implicit projected step: solve (M + tau delta K) zeta =
/// M z - tau (g - delta K z) and clamp zeta to [0, 1]. The Laplacian part is
/// implicit, every other gradient contribution explicit.
Vector projectedStep(const Assembler& fem, const Vector& z, const Vector& gradient, double tau,
                     double delta);

struct OptimizeResult {
  Vector z;
  State state;
  AdjointState adjoint;
  Vector gradient;
  std::vector<HistoryEntry> history;
  StopReason stop = StopReason::MaxIterations;
  double initial_grad_norm = 0.0;
  double final_grad_norm = 0.0;
  double tau = 0.0;
  int iterations = 0;  // accepted steps
};

/// Descent at a fixed gamma. `reference_norm` (if positive) replaces the
/// initial projected-gradient norm in the relative stopping test and
/// `budget` caps the number of outer iterations.
OptimizeResult optimize(const Assembler& fem, const MaterialLaws& laws, const LoadCase& loads,
                        const Vector& z0, const OptimizerConfig& config, double gamma,
                        const Vector* warm_u = nullptr, double reference_norm = 0.0,
                        int budget = -1, double tau_start = 0.0);

struct StageReport {
  double gamma = 0.0;
  int iterations = 0;
  StopReason stop = StopReason::MaxIterations;
  double objective = 0.0;
  double grad_norm = 0.0;
  OptimalityReport optimality;
  double energy_gap = 0.0;  // E_inf(state) - E_gamma(state)
  double gap_bound = 0.0;   // M_d |Omega| / gamma
  double z_change_l2 = 0.0; // |z_stage - z_previous| in L2
};

struct ContinuationResult {
  OptimizeResult final;
  std::vector<HistoryEntry> history;
  std::vector<StageReport> stages;
  double initial_grad_norm = 0.0;
  bool converged() const { return final.stop == StopReason::Converged; }
};

/// Runs `optimize` along the gamma schedule, warm-starting z and u.
ContinuationResult gammaContinuation(const Assembler& fem, const MaterialLaws& laws,
                                     const LoadCase& loads, const Vector& z0,
                                     const OptimizerConfig& config);

/// L2 norm of a nodal field using the consistent mass matrix.
double l2Norm(const Assembler& fem, const Vector& v);

}  // namespace phasetop
