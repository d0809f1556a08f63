#include "phasetop/phasefield.hpp"

namespace phasetop {

double doubleWell(double z, double delta) {
  const double w = z * (1.0 - z);
  return w * w / (2.0 * delta);
}

double doubleWellPrime(double z, double delta) {
  return (z * (1.0 - z) * (1.0 - z) - z * z * (1.0 - z)) / delta;
}

ModicaMortolaParts modicaMortolaParts(const Assembler& fem, const SparseMatrix& stiffness,
                                      const Vector& z, double delta) {
  ModicaMortolaParts parts{0.5 * delta * z.dot(stiffness * z), 0.0};
  for (int t = 0; t < fem.numTriangles(); ++t) {
    const auto& tri = fem.mesh().triangles[t];
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) sum += doubleWell(0.5 * (z[tri[k]] + z[tri[(k + 1) % 3]]), delta);
    parts.well += fem.area(t) / 3.0 * sum;
  }
  return parts;
}

double modicaMortolaEnergy(const Assembler& fem, const SparseMatrix& stiffness, const Vector& z,
                           double delta) {
  return modicaMortolaParts(fem, stiffness, z, delta).total();
}

Vector doubleWellGradient(const Assembler& fem, const Vector& z, double delta) {
  Vector g = Vector::Zero(z.size());
  for (int t = 0; t < fem.numTriangles(); ++t) {
    const auto& tri = fem.mesh().triangles[t];
    const double w = fem.area(t) / 3.0;
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      const double share = 0.5 * w * doubleWellPrime(0.5 * (z[a] + z[b]), delta);
      g[a] += share;
      g[b] += share;
    }
  }
  return g;
}

}  // namespace phasetop
