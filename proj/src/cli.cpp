#include "phasetop/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <json.hpp>
#include <ostream>
#include <random>

#include "phasetop/atomic_file.hpp"
#include "phasetop/config.hpp"
#include "phasetop/output.hpp"
#include "phasetop/phasefield.hpp"
#include "phasetop/verify.hpp"

namespace phasetop {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

int threadsFromEnvironment() {
  const char* v = std::getenv("THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1 || n > 1024)
    throw ValidationError("THREADS must be an integer in [1, 1024], got '" + std::string(v) + "'");
  return static_cast<int>(n);
}

struct Context {
  RunConfig config;
  fs::path out;
  std::ostream& log;
  Problem problem;
  Assembler fem;

  Context(RunConfig c, fs::path dir, std::ostream& o)
      : config(std::move(c)), out(std::move(dir)), log(o), problem(buildProblem(config)),
        fem(problem.mesh, threadsFromEnvironment()) {
    problem.loads.validate(problem.mesh);
  }

  std::string path(const std::string& name) const { return (out / name).string(); }
  Vector initialDesign() const { return Vector::Constant(problem.mesh.numNodes(), config.z0); }
  void writeJson(const std::string& name, const json& j) const {
    writeFileAtomically(path(name), j.dump(2) + "\n");
  }
};

json optimalityJson(const OptimalityReport& r) {
  return {{"gamma", r.gamma},
          {"r1", r.r1},
          {"r2", r.r2},
          {"r3", r.r3},
          {"max_rho_excess", r.max_rho_excess},
          {"projected_grad_norm", r.projected_grad_norm},
          {"state_residual", r.state_residual},
          {"adjoint_residual", r.adjoint_residual}};
}

void printOptimality(std::ostream& o, const OptimalityReport& r) {
  o << "  r1 (pi.p)               " << r.r1 << "\n"
    << "  r2 (rho.p - d|p|)       " << r.r2 << "\n"
    << "  r3 (p_bar, inactive)    " << r.r3 << "\n"
    << "  max |rho| - d           " << r.max_rho_excess << "\n"
    << "  projected grad norm     " << r.projected_grad_norm << "\n"
    << "  state eq. residual      " << r.state_residual << "\n"
    << "  adjoint eq. residual    " << r.adjoint_residual << "\n";
}

int plasticCount(const State& s, double threshold = 1e-8) {
  int n = 0;
  for (const auto& p : s.p) n += p.norm() > threshold;
  return n;
}

int runForward(Context& c) {
  const Vector z = c.initialDesign();
  const State s = solveForward(c.fem, c.config.laws, c.problem.loads, z, c.config.gamma,
                               c.config.forward);
  const double energy = stateEnergy(c.fem, c.config.laws, c.problem.loads, z, s, c.config.gamma);
  const double compliance = c.fem.assembleLoads(z, c.problem.loads).dot(s.u);
  c.log << "forward: gamma " << c.config.gamma << ", " << s.newton_iterations
        << " Newton iterations, residual " << s.residual_norm << "\n"
        << "  energy " << energy << ", compliance " << compliance << ", plastic triangles "
        << plasticCount(s) << "/" << c.fem.numTriangles() << "\n";
  writeVtk(c.problem.mesh, {z, s.u, s.p, {}, {}, {}}, c.path("forward.vtk"));
  c.writeJson("forward.json", {{"gamma", c.config.gamma},
                               {"newton_iterations", s.newton_iterations},
                               {"residual_norm", s.residual_norm},
                               {"energy", energy},
                               {"compliance", compliance},
                               {"plastic_triangles", plasticCount(s)}});
  return kExitOk;
}

int runAdjoint(Context& c) {
  const Vector z = c.initialDesign();
  const double gamma = c.config.gamma;
  const ObjectiveWeights w = c.config.optimizer.weights();
  const State s = solveForward(c.fem, c.config.laws, c.problem.loads, z, gamma, c.config.forward);
  const AdjointState a = solveAdjoint(c.fem, c.config.laws, c.problem.loads, z, s, gamma);
  const Vector g = reducedGradient(c.fem, c.config.laws, c.problem.loads, z, s, a, gamma, w);
  const double j = evaluateObjective(c.fem, c.problem.loads, z, s, w);
  const double pg = projectedGradientNorm(z, g, c.fem.phaseMatrices().lumped_mass);
  c.log << "adjoint: gamma " << gamma << ", objective " << j << ", projected gradient norm " << pg
        << "\n";
  VtkFields f{z, s.u, s.p, a.p_bar, a.rho, a.pi};
  writeVtk(c.problem.mesh, f, c.path("adjoint.vtk"));
  std::string csv = "node,gradient\n";
  for (int i = 0; i < g.size(); ++i) csv += std::to_string(i) + "," + fmt17(g[i]) + "\n";
  writeFileAtomically(c.path("gradient.csv"), csv);
  c.writeJson("adjoint.json",
              {{"gamma", gamma}, {"objective", j}, {"projected_grad_norm", pg}});
  return kExitOk;
}

int runCheck(Context& c) {
  const Vector z = c.initialDesign();
  const double gamma = c.config.gamma;
  const ObjectiveWeights w = c.config.optimizer.weights();
  const auto& laws = c.config.laws;
  const auto& loads = c.problem.loads;
  const State s = solveForward(c.fem, laws, loads, z, gamma, c.config.forward);
  const AdjointState a = solveAdjoint(c.fem, laws, loads, z, s, gamma);
  const Vector g = reducedGradient(c.fem, laws, loads, z, s, a, gamma, w);
  const OptimalityReport rep = checkOptimality(c.fem, laws, loads, z, s, a, gamma, g, c.config.seed);
  c.log << "check: optimality residuals at gamma " << gamma << "\n";
  printOptimality(c.log, rep);

  std::mt19937_64 rng(c.config.seed);
  std::uniform_int_distribution<int> node(0, c.problem.mesh.numNodes() - 1);
  std::vector<Vector> dirs;
  for (int k = 0; k < c.config.fd_directions; ++k) {
    Vector d = Vector::Zero(z.size());
    d[node(rng)] = 1.0;
    dirs.push_back(d);
  }
  const GradientCheckReport fd =
      fdGradientCheck(c.fem, laws, loads, z, dirs, gamma, w, c.config.fd_step, c.config.forward);
  c.log << "  gradient vs central differences (" << dirs.size()
        << " directions): max relative error " << fd.max_relative_error << "\n";
  json j = optimalityJson(rep);
  j["fd_max_relative_error"] = fd.max_relative_error;
  c.writeJson("check.json", j);
  writeVtk(c.problem.mesh, {z, s.u, s.p, a.p_bar, a.rho, a.pi}, c.path("check.vtk"));
  return kExitOk;
}

void writeDesign(const Context& c, const OptimizeResult& r, const std::string& stem) {
  writeVtk(c.problem.mesh, {r.z, r.state.u, r.state.p, r.adjoint.p_bar, r.adjoint.rho, r.adjoint.pi},
           c.path(stem + ".vtk"));
}

int stopCode(StopReason r) { return r == StopReason::Converged ? kExitOk : kExitSolver; }

int runOptimize(Context& c) {
  const auto start = std::chrono::steady_clock::now();
  const OptimizeResult r = optimize(c.fem, c.config.laws, c.problem.loads, c.initialDesign(),
                                    c.config.optimizer, c.config.gamma);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  writeHistoryCsv(r.history, c.path("history.csv"));
  writeDesign(c, r, "design");
  c.log << "optimize: gamma " << c.config.gamma << ", " << r.iterations << " accepted steps, "
        << stopReasonName(r.stop) << "\n"
        << "  J " << r.history.front().objective << " -> " << r.history.back().objective
        << ", projected gradient " << r.initial_grad_norm << " -> " << r.final_grad_norm << "\n";
  c.writeJson("optimize.json", {{"gamma", c.config.gamma},
                                {"iterations", r.iterations},
                                {"stop", stopReasonName(r.stop)},
                                {"initial_objective", r.history.front().objective},
                                {"final_objective", r.history.back().objective},
                                {"initial_grad_norm", r.initial_grad_norm},
                                {"final_grad_norm", r.final_grad_norm},
                                {"seconds", secs}});
  if (r.stop != StopReason::Converged)
    c.log << "error: optimizer stopped without convergence (" << stopReasonName(r.stop)
          << "); last iterate written\n";
  return stopCode(r.stop);
}

int runGammaSweep(Context& c) {
  const ContinuationResult r =
      gammaContinuation(c.fem, c.config.laws, c.problem.loads, c.initialDesign(), c.config.optimizer);
  writeHistoryCsv(r.history, c.path("history.csv"));
  writeFileAtomically(c.path("gamma_report.csv"), formatStageCsv(r.stages));
  writeDesign(c, r.final, "design");
  c.log << "gamma-sweep: " << r.stages.size() << " stages\n";
  c.log << std::setw(10) << "gamma" << std::setw(6) << "iter" << std::setw(14) << "J"
        << std::setw(12) << "r1" << std::setw(12) << "r2" << std::setw(12) << "r3"
        << std::setw(12) << "gap" << std::setw(12) << "bound" << std::setw(12) << "|dz|" << "\n";
  json stages = json::array();
  bool gap_ok = true;
  for (const auto& s : r.stages) {
    c.log << std::setw(10) << s.gamma << std::setw(6) << s.iterations << std::setw(14)
          << s.objective << std::setw(12) << s.optimality.r1 << std::setw(12) << s.optimality.r2
          << std::setw(12) << s.optimality.r3 << std::setw(12) << s.energy_gap << std::setw(12)
          << s.gap_bound << std::setw(12) << s.z_change_l2 << "\n";
    gap_ok = gap_ok && s.energy_gap >= 0.0 && s.energy_gap <= s.gap_bound;
    json js = optimalityJson(s.optimality);
    js["iterations"] = s.iterations;
    js["stop"] = stopReasonName(s.stop);
    js["objective"] = s.objective;
    js["energy_gap"] = s.energy_gap;
    js["gap_bound"] = s.gap_bound;
    js["z_change_l2"] = s.z_change_l2;
    stages.push_back(js);
  }
  c.log << "  energy gap within bound at every stage: " << (gap_ok ? "yes" : "NO") << "\n";
  c.writeJson("gamma_sweep.json", {{"stages", stages},
                                   {"initial_grad_norm", r.initial_grad_norm},
                                   {"final_grad_norm", r.final.final_grad_norm},
                                   {"stop", stopReasonName(r.final.stop)}});
  if (!r.converged())
    c.log << "error: last stage stopped without convergence (" << stopReasonName(r.final.stop)
          << ")\n";
  return stopCode(r.final.stop);
}

int runDeltaSweep(Context& c) {
  std::string csv = "delta,h_over_delta,iterations,stop,objective,mm_gradient,mm_well,mm_total,"
                    "perimeter,perimeter_over_6,ratio\n";
  Vector z = c.initialDesign();
  const Vector* warm = nullptr;
  Vector u;
  double h = 0.0;
  for (int t = 0; t < c.fem.numTriangles(); ++t) {
    const auto& tri = c.problem.mesh.triangles[t];
    for (int k = 0; k < 3; ++k)
      h = std::max(h, (c.problem.mesh.nodes[tri[k]] - c.problem.mesh.nodes[tri[(k + 1) % 3]]).norm());
  }
  int code = kExitOk;
  c.log << "delta-sweep at gamma " << c.config.gamma << " (mesh size " << h << ")\n";
  for (double delta : c.config.delta_sweep) {
    OptimizerConfig oc = c.config.optimizer;
    oc.delta = delta;
    const OptimizeResult r =
        optimize(c.fem, c.config.laws, c.problem.loads, z, oc, c.config.gamma, warm);
    const ModicaMortolaParts mm =
        modicaMortolaParts(c.fem, c.fem.phaseMatrices().stiffness, r.z, delta);
    const double per = thresholdPerimeter(c.problem.mesh, r.z);
    const double ratio = per > 0.0 ? mm.total() / (per / 6.0) : 0.0;
    c.log << "  delta " << delta << " (h/delta " << h / delta << "): " << r.iterations
          << " steps, " << stopReasonName(r.stop) << ", interfacial " << mm.total()
          << ", Per/6 " << per / 6.0 << ", ratio " << ratio << "\n";
    csv += fmt17(delta) + "," + fmt17(h / delta) + "," + std::to_string(r.iterations) + "," +
           stopReasonName(r.stop) + "," + fmt17(r.history.back().objective) + "," +
           fmt17(mm.gradient) + "," + fmt17(mm.well) + "," + fmt17(mm.total()) + "," + fmt17(per) +
           "," + fmt17(per / 6.0) + "," + fmt17(ratio) + "\n";
    char stem[64];
    std::snprintf(stem, sizeof stem, "design_delta_%g", delta);
    writeDesign(c, r, stem);
    if (r.stop != StopReason::Converged) code = kExitSolver;
    z = r.z;
    u = r.state.u;
    warm = &u;
  }
  writeFileAtomically(c.path("delta_sweep.csv"), csv);
  return code;
}

int runMaterialVerify(Context& c) {
  const MaterialVerifyReport rep = verifyMaterial(c.config.laws, c.config.samples, c.config.seed);
  c.log << "material-verify: " << rep.samples << " draws in " << rep.seconds << " s\n";
  json items = json::array();
  for (const auto& i : rep.items) {
    c.log << "  " << (i.violations == 0 ? "pass" : "FAIL") << "  " << i.checked - i.violations
          << "/" << i.checked << "  " << i.name << "\n";
    items.push_back({{"name", i.name}, {"checked", i.checked}, {"violations", i.violations},
                     {"worst", i.worst}});
  }
  c.writeJson("material_verify.json", {{"samples", rep.samples}, {"seconds", rep.seconds},
                                       {"items", items}, {"ok", rep.ok()}});
  return rep.ok() ? kExitOk : kExitSolver;
}

int runMmProfile(Context& c) {
  const ProfileEnergy p = modicaMortolaProfile(c.config.profile_delta, c.config.profile_h_ratio);
  const ProfileEnergy half =
      modicaMortolaProfile(0.5 * c.config.profile_delta, c.config.profile_h_ratio);
  c.log << std::setprecision(12) << "mm-profile: delta " << p.delta << ", h " << p.h
        << ", interfacial energy " << p.energy << " (1/6 = " << 1.0 / 6.0 << ", error "
        << p.error << ")\n"
        << "  delta/2: energy " << half.energy << ", error " << half.error << ", ratio "
        << half.error / p.error << "\n"
        << std::setprecision(6);
  c.writeJson("mm_profile.json", {{"delta", p.delta}, {"h", p.h}, {"energy", p.energy},
                                  {"error", p.error}, {"half_delta_error", half.error}});
  return kExitOk;
}

}  // namespace

int cliMain(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phase-field topology optimization for incremental elastoplasticity"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  using Runner = int (*)(Context&);
  const std::vector<std::tuple<std::string, std::string, Runner>> commands = {
      {"forward", "solve the regularized state problem at z0", runForward},
      {"adjoint", "solve state and adjoint, write the reduced gradient", runAdjoint},
      {"optimize", "descent at the [solver] gamma", runOptimize},
      {"gamma-sweep", "continuation along gamma_schedule with optimality reports", runGammaSweep},
      {"delta-sweep", "re-optimize along delta_sweep and measure the interface", runDeltaSweep},
      {"check", "optimality residuals and finite-difference gradient check", runCheck},
      {"material-verify", "random battery of constitutive inequalities", runMaterialVerify},
      {"mm-profile", "interfacial energy of the 1D optimal profile", runMmProfile},
  };
  for (const auto& [name, help, run] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--out", out_dir, "output directory")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  if (!fs::exists(config_path)) {
    err << "error: config file '" << config_path << "' does not exist\n\n" << app.help();
    return kExitValidation;
  }

  Runner run = nullptr;
  for (const auto& [name, help, r] : commands)
    if (app.got_subcommand(name)) run = r;

  try {
    RunConfig config = loadConfig(config_path);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ValidationError("cannot create output directory '" + out_dir + "': " + ec.message());
    const std::string effective = formatConfig(config);
    writeFileAtomically((fs::path(out_dir) / "effective_config.ini").string(), effective);
    out << "# effective configuration\n" << effective << "\n";
    Context context(std::move(config), out_dir, out);
    return run(context);
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace phasetop
