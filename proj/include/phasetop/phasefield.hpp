#pragma once

#include "phasetop/fem.hpp"

namespace phasetop {

/// Double-well density z^2 (1 - z)^2 / (2 delta) and its derivative.
double doubleWell(double z, double delta);
double doubleWellPrime(double z, double delta);

/// Modica-Mortola energy int delta/2 |grad z|^2 + z^2 (1-z)^2 / (2 delta):
/// exact P1 gradient term, edge-midpoint rule for the double well.
double modicaMortolaEnergy(const Assembler& fem, const SparseMatrix& stiffness, const Vector& z,
                           double delta);
/// Interfacial part split into gradient and double-well contributions.
struct ModicaMortolaParts {
  double gradient;
  double well;
  double total() const { return gradient + well; }
};
ModicaMortolaParts modicaMortolaParts(const Assembler& fem, const SparseMatrix& stiffness,
                                      const Vector& z, double delta);

/// Nodal derivative of the double-well integral (same quadrature).
Vector doubleWellGradient(const Assembler& fem, const Vector& z, double delta);

}  // namespace phasetop
