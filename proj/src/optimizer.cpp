#include "phasetop/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "phasetop/errors.hpp"

namespace phasetop {

void OptimizerConfig::validate() const {
  auto bad = [](const std::string& key, const std::string& why) {
    throw ValidationError(key + ": " + why);
  };
  if (!(delta > 0.0) || !std::isfinite(delta)) bad("delta", "must be positive");
  if (gamma_schedule.empty()) bad("gamma", "schedule is empty");
  for (std::size_t k = 0; k < gamma_schedule.size(); ++k) {
    if (!(gamma_schedule[k] > 0.0) || !std::isfinite(gamma_schedule[k]))
      bad("gamma", "entries must be positive and finite");
    if (k > 0 && !(gamma_schedule[k] > gamma_schedule[k - 1]))
      bad("gamma", "schedule must be strictly increasing");
  }
  if (!(tau0 > 0.0) || !std::isfinite(tau0)) bad("tau0", "must be positive");
  if (max_iterations < 0) bad("max_iterations", "must be nonnegative");
  if (!(grad_tol > 0.0)) bad("grad_tol", "must be positive");
  if (!(grad_atol >= 0.0)) bad("grad_atol", "must be nonnegative");
  if (!(shrink > 0.0 && shrink < 1.0)) bad("shrink", "must lie in (0, 1)");
  if (!(grow >= 1.0)) bad("grow", "must be at least 1");
  if (!(min_tau > 0.0)) bad("min_tau", "must be positive");
  if (!(volume_penalty >= 0.0) || !std::isfinite(volume_penalty))
    bad("volume_penalty", "must be nonnegative");
  if (!(forward.tol > 0.0)) bad("newton_tol", "must be positive");
  if (forward.max_iterations < 1) bad("newton_max_iterations", "must be positive");
  if (!(forward.linear_tol > 0.0)) bad("linear_tol", "must be positive");
}

const char* stopReasonName(StopReason r) {
  switch (r) {
    case StopReason::Converged: return "converged";
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::StepUnderflow: return "step_underflow";
  }
  return "unknown";
}

Vector projectedStep(const Assembler& fem, const Vector& z, const Vector& gradient, double tau,
                     double delta) {
  const PhaseMatrices& pm = fem.phaseMatrices();
  const Vector kz = pm.stiffness * z;
  const SparseMatrix a = pm.mass + (tau * delta) * pm.stiffness;
  const Vector rhs = pm.mass * z - tau * (gradient - delta * kz);
  Vector zeta = z;
  solveSpd(a, rhs, zeta, 1e-13);
  return zeta.cwiseMax(0.0).cwiseMin(1.0);
}

double l2Norm(const Assembler& fem, const Vector& v) {
  return std::sqrt(std::max(0.0, v.dot(fem.phaseMatrices().mass * v)));
}

namespace {

struct Evaluation {
  State state;
  AdjointState adjoint;
  Vector gradient;
  double objective;
  double grad_norm;
};

Evaluation evaluate(const Assembler& fem, const MaterialLaws& laws, const LoadCase& loads,
                    const Vector& z, const OptimizerConfig& config, double gamma,
                    const Vector* warm_u) {
  Evaluation e;
  e.state = solveForward(fem, laws, loads, z, gamma, config.forward, warm_u);
  e.adjoint = solveAdjoint(fem, laws, loads, z, e.state, gamma);
  e.gradient = reducedGradient(fem, laws, loads, z, e.state, e.adjoint, gamma, config.weights());
  e.objective = evaluateObjective(fem, loads, z, e.state, config.weights());
  e.grad_norm = projectedGradientNorm(z, e.gradient, fem.phaseMatrices().lumped_mass);
  return e;
}

}  // namespace

OptimizeResult optimize(const Assembler& fem, const MaterialLaws& laws, const LoadCase& loads,
                        const Vector& z0, const OptimizerConfig& config, double gamma,
                        const Vector* warm_u, double reference_norm, int budget,
                        double tau_start) {
  config.validate();
  if (z0.size() != fem.mesh().numNodes()) throw ValidationError("z0: wrong number of nodes");
  const int max_iter = budget < 0 ? config.max_iterations : budget;

  OptimizeResult out;
  // Out-of-range seeds give the same state as their clamp; the phase terms do not.
  out.z = z0.cwiseMax(0.0).cwiseMin(1.0);
  Evaluation cur = evaluate(fem, laws, loads, out.z, config, gamma, warm_u);
  out.initial_grad_norm = cur.grad_norm;
  const double ref = reference_norm > 0.0 ? reference_norm : cur.grad_norm;
  const double target = std::max(config.grad_tol * ref, config.grad_atol);
  double tau = tau_start > 0.0 ? std::min(tau_start, config.tau0) : config.tau0;
  out.history.push_back(
      {0, gamma, cur.objective, cur.grad_norm, cur.state.newton_iterations, 0.0});

  int iter = 0;
  while (true) {
    if (cur.grad_norm <= target) {
      out.stop = StopReason::Converged;
      break;
    }
    if (iter >= max_iter) {
      out.stop = StopReason::MaxIterations;
      break;
    }
    if (tau < config.min_tau * config.tau0) {
      out.stop = StopReason::StepUnderflow;
      break;
    }
    const Vector trial_z = projectedStep(fem, out.z, cur.gradient, tau, config.delta);
    State trial;
    try {
      trial = solveForward(fem, laws, loads, trial_z, gamma, config.forward, &cur.state.u);
    } catch (const SolverError&) {
      tau *= config.shrink;
      continue;
    }
    const double j = evaluateObjective(fem, loads, trial_z, trial, config.weights());
    if (!(j <= cur.objective)) {
      tau *= config.shrink;
      continue;
    }
    ++iter;
    out.z = trial_z;
    Evaluation next;
    next.state = std::move(trial);
    next.adjoint = solveAdjoint(fem, laws, loads, out.z, next.state, gamma);
    next.gradient =
        reducedGradient(fem, laws, loads, out.z, next.state, next.adjoint, gamma, config.weights());
    next.objective = j;
    next.grad_norm = projectedGradientNorm(out.z, next.gradient, fem.phaseMatrices().lumped_mass);
    cur = std::move(next);
    out.history.push_back(
        {iter, gamma, cur.objective, cur.grad_norm, cur.state.newton_iterations, tau});
    tau = std::min(tau * config.grow, config.tau0);
  }

  out.state = std::move(cur.state);
  out.adjoint = std::move(cur.adjoint);
  out.gradient = std::move(cur.gradient);
  out.final_grad_norm = cur.grad_norm;
  out.iterations = iter;
  out.tau = tau;
  return out;
}

ContinuationResult gammaContinuation(const Assembler& fem, const MaterialLaws& laws,
                                     const LoadCase& loads, const Vector& z0,
                                     const OptimizerConfig& config) {
  config.validate();
  ContinuationResult out;
  Vector z = z0.cwiseMax(0.0).cwiseMin(1.0);
  Vector u;
  double reference = 0.0;
  double tau = 0.0;
  int remaining = config.max_iterations;
  const double area = fem.mesh().totalArea();

  for (std::size_t k = 0; k < config.gamma_schedule.size(); ++k) {
    const double gamma = config.gamma_schedule[k];
    OptimizeResult r = optimize(fem, laws, loads, z, config, gamma, k == 0 ? nullptr : &u,
                                reference, remaining, tau);
    if (k == 0) {
      reference = r.initial_grad_norm;
      out.initial_grad_norm = reference;
    }
    remaining -= r.iterations;
    tau = r.tau;

    StageReport s;
    s.gamma = gamma;
    s.iterations = r.iterations;
    s.stop = r.stop;
    s.objective = r.history.back().objective;
    s.grad_norm = r.final_grad_norm;
    s.optimality =
        checkOptimality(fem, laws, loads, r.z, r.state, r.adjoint, gamma, r.gradient);
    s.energy_gap = stateEnergy(fem, laws, loads, r.z, r.state,
                               std::numeric_limits<double>::infinity()) -
                   stateEnergy(fem, laws, loads, r.z, r.state, gamma);
    s.gap_bound = laws.maxYield() * area / gamma;
    s.z_change_l2 = l2Norm(fem, r.z - z);
    out.stages.push_back(s);

    // Later stages continue the iteration count; their first row is the
    // warm start re-evaluated at the new gamma.
    const int offset = out.history.empty() ? 0 : out.history.back().iteration;
    for (std::size_t i = 0; i < r.history.size(); ++i) {
      HistoryEntry h = r.history[i];
      h.iteration += offset;
      out.history.push_back(h);
    }
    z = r.z;
    u = r.state.u;
    out.final = std::move(r);
  }
  return out;
}

}  // namespace phasetop
