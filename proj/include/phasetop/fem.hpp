#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "phasetop/material.hpp"
#include "phasetop/mesh.hpp"

namespace phasetop {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using ElementB = Eigen::Matrix<double, 3, 6>;

/// Body force per unit density (per node), traction per boundary edge (read
/// on Neumann edges only) and Dirichlet displacement per node (read on
/// Dirichlet nodes only).
struct LoadCase {
  std::vector<Vec2> body_force;
  std::vector<Vec2> traction;
  std::vector<Vec2> dirichlet;

  static LoadCase uniform(const Mesh& mesh, const Vec2& f, const Vec2& g, const Vec2& w);
  void validate(const Mesh& mesh) const;
};

/// Degrees of freedom: two displacement unknowns per node, interleaved.
/// Nodes touching a Dirichlet edge are eliminated (Dirichlet wins on the
/// Dirichlet/Neumann interface).
struct DofLayout {
  std::vector<int> free_index;  // per displacement dof, -1 if eliminated
  std::vector<int> free_dofs;   // free number -> global dof
  std::vector<char> dirichlet_node;

  int numFree() const { return static_cast<int>(free_dofs.size()); }
  int numDofs() const { return static_cast<int>(free_index.size()); }
};

DofLayout makeLayout(const Mesh& mesh);

struct ResidualTangent {
  Vector residual;      // free dofs
  SparseMatrix tangent; // free x free, both triangles stored
  double energy;        // reduced energy sum_T |T| psi(E u) - loads . u
};

struct PhaseMatrices {
  SparseMatrix mass;
  SparseMatrix stiffness;
  Vector lumped_mass;
};

/// P1 triangle discretization: geometry, dof layout, and assembly of the
/// reduced elastoplastic equations and the phase-field matrices.
///
/// Material laws are evaluated once per triangle at the centroid of the P1
/// interpolant of the clamped nodal phase field. Element loops may run on
/// several threads; contributions are reduced in triangle order, so results
/// do not depend on the thread count.
class Assembler {
 public:
  explicit Assembler(Mesh mesh, int threads = 1);

  const Mesh& mesh() const { return mesh_; }
  const DofLayout& layout() const { return layout_; }
  int threads() const { return threads_; }
  void setThreads(int threads) { threads_ = threads < 1 ? 1 : threads; }

  int numTriangles() const { return mesh_.numTriangles(); }
  double area(int t) const { return area_[t]; }
  const ElementB& strainOperator(int t) const { return b_[t]; }
  const std::array<Vec2, 3>& shapeGradients(int t) const { return grad_[t]; }
  std::array<int, 6> elementDofs(int t) const;

  SymTensor2 elementStrain(const Vector& u, int t) const;
  double elementPhase(const Vector& z, int t) const;
  /// d(elementPhase)/dz_node for the three local nodes.
  std::array<double, 3> elementPhaseWeights(const Vector& z, int t) const;

  /// Full displacement vector with w on Dirichlet dofs and zero elsewhere.
  Vector dirichletLift(const LoadCase& loads) const;
  Vector restrictToFree(const Vector& full) const;
  void scatterFree(const Vector& free, Vector& full) const;

  /// Load vector over all dofs: centroid quadrature of ell(z) f phi_i plus
  /// two-point Gauss quadrature of g phi_i on Neumann edges.
  Vector assembleLoads(const Vector& z, const LoadCase& loads) const;
  Vector assembleBodyLoads(const Vector& z, const LoadCase& loads) const;
  Vector assembleTractionLoads(const LoadCase& loads) const;

  ResidualTangent assembleResidualAndTangent(const MaterialLaws& laws, const Vector& z,
                                             double gamma, const Vector& u,
                                             const Vector& loads) const;
  /// Residual only (free dofs) and reduced energy.
  std::pair<Vector, double> assembleResidual(const MaterialLaws& laws, const Vector& z,
                                             double gamma, const Vector& u,
                                             const Vector& loads) const;
  double reducedEnergy(const MaterialLaws& laws, const Vector& z, double gamma, const Vector& u,
                       const Vector& loads) const;

  /// P1 mass and stiffness on nodal scalars; computed once at construction.
  const PhaseMatrices& phaseMatrices() const { return phase_; }

  /// Zero matrix with the free-dof sparsity pattern.
  const SparseMatrix& pattern() const { return pattern_; }

 private:
  struct ElementOutput;
  PhaseMatrices buildPhaseMatrices() const;
  void evaluateElements(const MaterialLaws& laws, const Vector& z, double gamma, const Vector& u,
                        bool wantTangent, std::vector<ElementOutput>& out) const;

  Mesh mesh_;
  DofLayout layout_;
  int threads_;
  std::vector<double> area_;
  std::vector<ElementB> b_;
  std::vector<std::array<Vec2, 3>> grad_;
  SparseMatrix pattern_;
  PhaseMatrices phase_;
  std::vector<std::array<int, 36>> slots_;  // value index per local (i, j), -1 if eliminated
};

struct LinearSolveStats {
  int iterations;
  double backward_error;
};

/// Solves the SPD system a x = b (full symmetric storage) by sparse Cholesky
/// with one refinement step. Throws LinearSolveFailure if the factorization
/// fails or the normwise backward error stays above `tol`.
LinearSolveStats solveSpd(const SparseMatrix& a, const Vector& b, Vector& x, double tol = 1e-10);

}  // namespace phasetop
