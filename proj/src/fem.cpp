#include "phasetop/fem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SparseCholesky>

#include "phasetop/errors.hpp"
#include "phasetop/parallel.hpp"

namespace phasetop {

LoadCase LoadCase::uniform(const Mesh& mesh, const Vec2& f, const Vec2& g, const Vec2& w) {
  LoadCase c;
  c.body_force.assign(mesh.nodes.size(), f);
  c.traction.assign(mesh.edges.size(), g);
  c.dirichlet.assign(mesh.nodes.size(), w);
  return c;
}

void LoadCase::validate(const Mesh& mesh) const {
  if (body_force.size() != mesh.nodes.size())
    throw ValidationError("body force must have one entry per node");
  if (traction.size() != mesh.edges.size())
    throw ValidationError("traction must have one entry per boundary edge");
  if (dirichlet.size() != mesh.nodes.size())
    throw ValidationError("Dirichlet data must have one entry per node");
  auto finite = [](const std::vector<Vec2>& v) {
    return std::all_of(v.begin(), v.end(), [](const Vec2& x) { return x.allFinite(); });
  };
  if (!finite(body_force) || !finite(traction) || !finite(dirichlet))
    throw ValidationError("load data must be finite");
}

DofLayout makeLayout(const Mesh& mesh) {
  DofLayout layout;
  const int n = mesh.numNodes();
  layout.dirichlet_node.assign(n, 0);
  for (const auto& e : mesh.edges)
    if (e.tag == EdgeTag::Dirichlet) layout.dirichlet_node[e.a] = layout.dirichlet_node[e.b] = 1;
  layout.free_index.assign(2 * n, -1);
  for (int i = 0; i < n; ++i) {
    if (layout.dirichlet_node[i]) continue;
    for (int c = 0; c < 2; ++c) {
      layout.free_index[2 * i + c] = static_cast<int>(layout.free_dofs.size());
      layout.free_dofs.push_back(2 * i + c);
    }
  }
  return layout;
}

struct Assembler::ElementOutput {
  Eigen::Matrix<double, 6, 1> force;
  Eigen::Matrix<double, 6, 6> stiffness;
  double energy;
};

Assembler::Assembler(Mesh mesh, int threads) : mesh_(std::move(mesh)), threads_(std::max(1, threads)) {
  mesh_.validate();
  layout_ = makeLayout(mesh_);
  const int nt = mesh_.numTriangles();
  area_.resize(nt);
  b_.resize(nt);
  grad_.resize(nt);
  const double r = 1.0 / std::sqrt(2.0);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh_.triangles[t];
    const Vec2& x0 = mesh_.nodes[tri[0]];
    const Vec2& x1 = mesh_.nodes[tri[1]];
    const Vec2& x2 = mesh_.nodes[tri[2]];
    const double a = mesh_.signedArea(t);
    area_[t] = a;
    grad_[t] = {Vec2(x1.y() - x2.y(), x2.x() - x1.x()) / (2.0 * a),
                Vec2(x2.y() - x0.y(), x0.x() - x2.x()) / (2.0 * a),
                Vec2(x0.y() - x1.y(), x1.x() - x0.x()) / (2.0 * a)};
    ElementB& b = b_[t];
    b.setZero();
    for (int k = 0; k < 3; ++k) {
      const Vec2& g = grad_[t][k];
      b(0, 2 * k) = g.x();
      b(1, 2 * k + 1) = g.y();
      b(2, 2 * k) = r * g.y();
      b(2, 2 * k + 1) = r * g.x();
    }
  }

  const int nf = layout_.numFree();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(nt) * 36);
  for (int t = 0; t < nt; ++t) {
    const auto dofs = elementDofs(t);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        const int fi = layout_.free_index[dofs[i]], fj = layout_.free_index[dofs[j]];
        if (fi >= 0 && fj >= 0) trip.emplace_back(fi, fj, 0.0);
      }
  }
  pattern_.resize(nf, nf);
  pattern_.setFromTriplets(trip.begin(), trip.end());
  pattern_.makeCompressed();

  slots_.resize(nt);
  const int* outer = pattern_.outerIndexPtr();
  const int* inner = pattern_.innerIndexPtr();
  for (int t = 0; t < nt; ++t) {
    const auto dofs = elementDofs(t);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        const int fi = layout_.free_index[dofs[i]], fj = layout_.free_index[dofs[j]];
        int slot = -1;
        if (fi >= 0 && fj >= 0) {
          const int* first = inner + outer[fj];
          const int* last = inner + outer[fj + 1];
          slot = static_cast<int>(std::lower_bound(first, last, fi) - inner);
        }
        slots_[t][6 * i + j] = slot;
      }
  }
  phase_ = buildPhaseMatrices();
}

std::array<int, 6> Assembler::elementDofs(int t) const {
  const auto& tri = mesh_.triangles[t];
  return {2 * tri[0], 2 * tri[0] + 1, 2 * tri[1], 2 * tri[1] + 1, 2 * tri[2], 2 * tri[2] + 1};
}

SymTensor2 Assembler::elementStrain(const Vector& u, int t) const {
  const auto dofs = elementDofs(t);
  Eigen::Matrix<double, 6, 1> ue;
  for (int i = 0; i < 6; ++i) ue[i] = u[dofs[i]];
  return SymTensor2::fromMandel(b_[t] * ue);
}

double Assembler::elementPhase(const Vector& z, int t) const {
  const auto& tri = mesh_.triangles[t];
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += std::clamp(z[tri[k]], 0.0, 1.0);
  return s / 3.0;
}

std::array<double, 3> Assembler::elementPhaseWeights(const Vector& z, int t) const {
  const auto& tri = mesh_.triangles[t];
  std::array<double, 3> w{};
  for (int k = 0; k < 3; ++k) w[k] = (z[tri[k]] >= 0.0 && z[tri[k]] <= 1.0) ? 1.0 / 3.0 : 0.0;
  return w;
}

Vector Assembler::dirichletLift(const LoadCase& loads) const {
  Vector u = Vector::Zero(layout_.numDofs());
  for (int i = 0; i < mesh_.numNodes(); ++i)
    if (layout_.dirichlet_node[i]) {
      u[2 * i] = loads.dirichlet[i].x();
      u[2 * i + 1] = loads.dirichlet[i].y();
    }
  return u;
}

Vector Assembler::restrictToFree(const Vector& full) const {
  Vector f(layout_.numFree());
  for (int k = 0; k < layout_.numFree(); ++k) f[k] = full[layout_.free_dofs[k]];
  return f;
}

void Assembler::scatterFree(const Vector& free, Vector& full) const {
  for (int k = 0; k < layout_.numFree(); ++k) full[layout_.free_dofs[k]] = free[k];
}

Vector Assembler::assembleBodyLoads(const Vector& z, const LoadCase& loads) const {
  Vector l = Vector::Zero(layout_.numDofs());
  for (int t = 0; t < numTriangles(); ++t) {
    const auto& tri = mesh_.triangles[t];
    const Vec2 f = (loads.body_force[tri[0]] + loads.body_force[tri[1]] +
                    loads.body_force[tri[2]]) / 3.0;
    const double density = smoothstep(elementPhase(z, t)).value;
    const Vec2 share = f * (density * area_[t] / 3.0);
    for (int k = 0; k < 3; ++k) {
      l[2 * tri[k]] += share.x();
      l[2 * tri[k] + 1] += share.y();
    }
  }
  return l;
}

Vector Assembler::assembleTractionLoads(const LoadCase& loads) const {
  Vector l = Vector::Zero(layout_.numDofs());
  const double gp = 0.5 / std::sqrt(3.0);
  for (std::size_t e = 0; e < mesh_.edges.size(); ++e) {
    const auto& edge = mesh_.edges[e];
    if (edge.tag != EdgeTag::Neumann) continue;
    const double len = (mesh_.nodes[edge.b] - mesh_.nodes[edge.a]).norm();
    const Vec2& g = loads.traction[e];
    // Two-point Gauss rule at s = 1/2 -+ 1/(2 sqrt 3).
    for (double s : {0.5 - gp, 0.5 + gp}) {
      const double w = 0.5 * len;
      l[2 * edge.a] += w * (1.0 - s) * g.x();
      l[2 * edge.a + 1] += w * (1.0 - s) * g.y();
      l[2 * edge.b] += w * s * g.x();
      l[2 * edge.b + 1] += w * s * g.y();
    }
  }
  return l;
}

Vector Assembler::assembleLoads(const Vector& z, const LoadCase& loads) const {
  return assembleBodyLoads(z, loads) + assembleTractionLoads(loads);
}

void Assembler::evaluateElements(const MaterialLaws& laws, const Vector& z, double gamma,
                                 const Vector& u, bool wantTangent,
                                 std::vector<ElementOutput>& out) const {
  out.resize(numTriangles());
  parallelChunks(numTriangles(), threads_, [&](int begin, int end) {
    for (int t = begin; t < end; ++t) {
      const ScalarLaws s = laws.at(elementPhase(z, t));
      const SymTensor2 e = elementStrain(u, t);
      const ReducedFlux rf = reducedFlux(s, gamma, e);
      ElementOutput& o = out[t];
      o.force = area_[t] * b_[t].transpose() * rf.stress.mandel();
      if (wantTangent) o.stiffness = area_[t] * b_[t].transpose() * rf.tangent * b_[t];
      o.energy = area_[t] * pointwiseEnergy(s, gamma, e, rf.plastic);
    }
  });
}

ResidualTangent Assembler::assembleResidualAndTangent(const MaterialLaws& laws, const Vector& z,
                                                      double gamma, const Vector& u,
                                                      const Vector& loads) const {
  std::vector<ElementOutput> out;
  evaluateElements(laws, z, gamma, u, true, out);
  ResidualTangent rt;
  Vector force = Vector::Zero(layout_.numDofs());
  rt.tangent = pattern_;
  double* values = rt.tangent.valuePtr();
  double energy = 0.0;
  for (int t = 0; t < numTriangles(); ++t) {
    const auto dofs = elementDofs(t);
    for (int i = 0; i < 6; ++i) force[dofs[i]] += out[t].force[i];
    for (int k = 0; k < 36; ++k)
      if (slots_[t][k] >= 0) values[slots_[t][k]] += out[t].stiffness(k / 6, k % 6);
    energy += out[t].energy;
  }
  rt.residual = restrictToFree(force - loads);
  rt.energy = energy - loads.dot(u);
  return rt;
}

std::pair<Vector, double> Assembler::assembleResidual(const MaterialLaws& laws, const Vector& z,
                                                      double gamma, const Vector& u,
                                                      const Vector& loads) const {
  std::vector<ElementOutput> out;
  evaluateElements(laws, z, gamma, u, false, out);
  Vector force = Vector::Zero(layout_.numDofs());
  double energy = 0.0;
  for (int t = 0; t < numTriangles(); ++t) {
    const auto dofs = elementDofs(t);
    for (int i = 0; i < 6; ++i) force[dofs[i]] += out[t].force[i];
    energy += out[t].energy;
  }
  return {restrictToFree(force - loads), energy - loads.dot(u)};
}

double Assembler::reducedEnergy(const MaterialLaws& laws, const Vector& z, double gamma,
                                const Vector& u, const Vector& loads) const {
  std::vector<double> energy(numTriangles());
  parallelChunks(numTriangles(), threads_, [&](int begin, int end) {
    for (int t = begin; t < end; ++t) {
      const ScalarLaws s = laws.at(elementPhase(z, t));
      energy[t] = area_[t] * pointwiseEnergyMin(s, gamma, elementStrain(u, t)).value;
    }
  });
  double sum = 0.0;
  for (double e : energy) sum += e;
  return sum - loads.dot(u);
}

PhaseMatrices Assembler::buildPhaseMatrices() const {
  const int n = mesh_.numNodes();
  std::vector<Eigen::Triplet<double>> mt, kt;
  mt.reserve(9 * numTriangles());
  kt.reserve(9 * numTriangles());
  for (int t = 0; t < numTriangles(); ++t) {
    const auto& tri = mesh_.triangles[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        mt.emplace_back(tri[i], tri[j], area_[t] * (i == j ? 2.0 : 1.0) / 12.0);
        kt.emplace_back(tri[i], tri[j], area_[t] * grad_[t][i].dot(grad_[t][j]));
      }
  }
  PhaseMatrices pm;
  pm.mass.resize(n, n);
  pm.mass.setFromTriplets(mt.begin(), mt.end());
  pm.stiffness.resize(n, n);
  pm.stiffness.setFromTriplets(kt.begin(), kt.end());
  pm.lumped_mass = pm.mass * Vector::Ones(n);
  return pm;
}

LinearSolveStats solveSpd(const SparseMatrix& a, const Vector& b, Vector& x, double tol) {
  if (b.size() == 0) return {0, 0.0};
  if (b.norm() == 0.0) {
    x.setZero();
    return {0, 0.0};
  }
  // Sparse Cholesky with fill-reducing ordering; the 2D systems here are
  // small enough that a direct factorization beats Krylov methods, which
  // stall on the stiff/soft contrast of the phase field.
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt(a);
  if (llt.info() != Eigen::Success)
    throw LinearSolveFailure("Cholesky factorization failed (matrix not positive definite)", 0,
                             1.0);
  // Normwise backward error |b - A x| / (|A| |x| + |b|) in the max norm.
  double a_norm = 0.0;
  {
    Vector row_sums = Vector::Zero(a.rows());
    for (int k = 0; k < a.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(a, k); it; ++it) row_sums[it.row()] += std::abs(it.value());
    a_norm = row_sums.maxCoeff();
  }
  auto backwardError = [&](const Vector& sol) {
    const Vector r = b - a * sol;
    return r.lpNorm<Eigen::Infinity>() /
           (a_norm * sol.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>());
  };
  x = llt.solve(b);
  double err = backwardError(x);
  int steps = 1;
  if (err > tol && std::isfinite(err)) {
    x += llt.solve(b - a * x);
    err = backwardError(x);
    ++steps;
  }
  if (!x.allFinite() || !(err <= tol))
    throw LinearSolveFailure("linear solve backward error " + std::to_string(err) +
                                 " above tolerance " + std::to_string(tol),
                             steps, err);
  return {steps, err};
}

}  // namespace phasetop
