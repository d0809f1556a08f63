#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "phasetop/benchmark.hpp"
#include "phasetop/diagnostics.hpp"
#include "phasetop/output.hpp"
#include "phasetop/phasefield.hpp"

using namespace phasetop;

namespace {

Mesh unitSquare(int n) {
  RectTagSpec tags;
  return generateRectMesh(n, n, 1.0, 1.0, tags);
}

std::string tempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("phasetop_test_" + name)).string();
}

}  // namespace

TEST_CASE("threshold perimeter: constants, straight split and circle") {
  const Mesh m = unitSquare(16);
  CHECK(thresholdPerimeter(m, Vector::Ones(m.numNodes())) == 0.0);
  CHECK(thresholdPerimeter(m, Vector::Zero(m.numNodes())) == 0.0);

  Vector split(m.numNodes());
  for (int i = 0; i < m.numNodes(); ++i) split[i] = m.nodes[i].x() < 0.45 ? 1.0 : 0.0;
  CHECK(std::abs(thresholdPerimeter(m, split) - 1.0) <= 1.0 / 16);

  const Mesh fine = unitSquare(128);
  Vector blob(fine.numNodes());
  for (int i = 0; i < fine.numNodes(); ++i) {
    const double r = (fine.nodes[i] - Vec2(0.5, 0.5)).norm();
    blob[i] = 1.0 / (1.0 + std::exp((r - 0.3) / 0.02));
  }
  const double exact = 2 * M_PI * 0.3;
  CHECK(std::abs(thresholdPerimeter(fine, blob) - exact) <= 0.05 * exact);
}

TEST_CASE("threshold perimeter skips interfaces along the boundary") {
  const Mesh m = unitSquare(8);
  Vector z = Vector::Zero(m.numNodes());
  for (int i = 0; i < m.numNodes(); ++i)
    if (m.nodes[i].x() == 0.0) z[i] = 0.5;
  CHECK(thresholdPerimeter(m, z) == 0.0);
}

TEST_CASE("Modica-Mortola profile energy") {
  const ProfileEnergy p = modicaMortolaProfile(0.02, 0.125);
  CHECK(p.h <= 0.02 / 8 + 1e-15);
  CHECK(std::abs(p.energy - 1.0 / 6.0) <= 2e-2);
  CHECK(p.error == doctest::Approx(p.energy - 1.0 / 6.0));
  // Refining the mesh at fixed delta reduces the discretization error.
  CHECK(std::abs(modicaMortolaProfile(0.02, 0.0625).error) < std::abs(p.error));
}

TEST_CASE("Modica-Mortola parts") {
  const Mesh m = unitSquare(10);
  const Assembler fem(m);
  Vector z(m.numNodes());
  for (int i = 0; i < m.numNodes(); ++i) z[i] = m.nodes[i].x();
  const ModicaMortolaParts parts = modicaMortolaParts(fem, fem.phaseMatrices().stiffness, z, 0.1);
  CHECK(parts.gradient == doctest::Approx(0.5 * 0.1).epsilon(1e-13));
  // The edge-midpoint rule approximates int x^2 (1-x)^2 / (2 delta) = 1 / (60 delta).
  CHECK(parts.well == doctest::Approx(1.0 / 6.0).epsilon(2e-2));
  CHECK(parts.total() == doctest::Approx(parts.gradient + parts.well));
  CHECK(doubleWell(0.5, 0.1) == doctest::Approx(0.0625 / 0.2));
  CHECK(doubleWellPrime(0.3, 0.1) ==
        doctest::Approx((doubleWell(0.3 + 1e-7, 0.1) - doubleWell(0.3 - 1e-7, 0.1)) / 2e-7).epsilon(1e-7));
}

TEST_CASE("projected gradient norm ignores components pushing into the bounds") {
  Vector z(4), g(4), m(4);
  z << 0.0, 1.0, 0.5, 1.0;
  g << 1.0, -1.0, 2.0, 3.0;
  m << 1.0, 1.0, 2.0, 1.0;
  // Nodes 0 and 1 are blocked; node 2 gives m (g/m)^2 = 2, node 3 gives 9.
  CHECK(projectedGradientNorm(z, g, m) == doctest::Approx(std::sqrt(11.0)));
}

TEST_CASE("optimality report and written fields agree") {
  CantileverSpec spec;
  spec.nx = 8;
  spec.ny = 6;
  const Problem p = cantilever(spec);
  const Assembler fem(p.mesh);
  MaterialLaws laws;
  Vector z(p.mesh.numNodes());
  for (int i = 0; i < z.size(); ++i) z[i] = 0.4 + 0.3 * p.mesh.nodes[i].y();
  const double gamma = 50.0;
  const State s = solveForward(fem, laws, p.loads, z, gamma);
  const AdjointState a = solveAdjoint(fem, laws, p.loads, z, s, gamma);
  const Vector g = reducedGradient(fem, laws, p.loads, z, s, a, gamma, {0.05, 0.0});
  const OptimalityReport rep = checkOptimality(fem, laws, p.loads, z, s, a, gamma, g);
  CHECK(rep.state_residual <= 1e-10);
  CHECK(rep.adjoint_residual <= 1e-10);
  CHECK(rep.max_rho_excess <= 0.0);
  CHECK(rep.r1 >= 0.0);
  CHECK(rep.r2 >= 0.0);
  CHECK(rep.r3 >= 0.0);

  const std::string path = tempPath("report.vtk");
  writeVtk(p.mesh, {z, s.u, s.p, a.p_bar, a.rho, a.pi}, path);
  const VtkData d = readVtk(path);
  REQUIRE(d.point_data.count("z"));
  const Vector zr = Eigen::Map<const Vector>(d.point_data.at("z").data(), d.num_points);
  const OptimalityReport back = complementarityResiduals(
      fem, laws, zr, gamma, unflattenDev(d.cell_data.at("p")), unflattenDev(d.cell_data.at("p_bar")),
      unflattenDev(d.cell_data.at("rho")), unflattenDev(d.cell_data.at("pi")));
  CHECK(std::abs(back.r1 - rep.r1) <= 1e-12 * (1 + rep.r1));
  CHECK(std::abs(back.r2 - rep.r2) <= 1e-12 * (1 + rep.r2));
  CHECK(std::abs(back.r3 - rep.r3) <= 1e-12 * (1 + rep.r3));
  CHECK(back.max_rho_excess == doctest::Approx(rep.max_rho_excess).epsilon(1e-12));
  std::filesystem::remove(path);
}

TEST_CASE("elastic regime: complementarity residual vanishes") {
  CantileverSpec spec;
  spec.nx = 8;
  spec.ny = 4;
  MaterialLaws laws;
  const double gamma = 1e4;
  // Driving stress far below the yield stress: with |dev C E u| <= 1e-4 d the
  // plastic radius is at most 1e-4 d / (d gamma) = 1e-8 (scalar oracle), so
  // r2 <= d |p| |Omega| stays below 1e-8 d |Omega|.
  spec.load = 1e-6;
  const Problem p = cantilever(spec);
  const Assembler fem(p.mesh);
  const Vector z = Vector::Constant(p.mesh.numNodes(), 1.0);
  const State s = solveForward(fem, laws, p.loads, z, gamma);
  double drive = 0.0;
  for (int t = 0; t < fem.numTriangles(); ++t)
    drive = std::max(drive, applyC(laws, 1.0, fem.elementStrain(s.u, t)).dev().norm());
  REQUIRE(drive <= 1e-4 * laws.minYield());
  const AdjointState a = solveAdjoint(fem, laws, p.loads, z, s, gamma);
  const OptimalityReport rep = complementarityResiduals(fem, laws, z, gamma, s.p, a.p_bar, a.rho, a.pi);
  CHECK(rep.r2 <= 1e-8 * laws.minYield() * p.mesh.totalArea());
}
