#pragma once

#include <string>

#include "phasetop/tensor.hpp"

namespace phasetop {

/// Value and derivative of the material-density interpolant: the clamped
/// cubic smoothstep 3s^2 - 2s^3 on [0,1], constant outside.
struct Interpolant {
  double value;
  double derivative;
};

Interpolant smoothstep(double z);

/// Material coefficients at a single phase-field value, with their
/// derivatives in z.
struct ScalarLaws {
  double mu, lambda, h, d, ell;
  double dmu, dlambda, dh, dd, dell;
};

/// Two-phase interpolated material: c(z) = c0 + c1 * ell(z) for each of
/// mu, lambda, h (hardening modulus) and d (yield stress).
struct MaterialLaws {
  double mu1 = 1.0;
  double lambda1 = 1.0;
  double h1 = 0.1;
  double d1 = 0.1;
  double mu0 = 1.0e-3;
  double lambda0 = 1.0e-3;
  double h0 = 1.0e-4;
  double d0 = 0.1;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  ScalarLaws at(double z) const;

  // Uniform bounds over z (the laws are monotone in ell).
  double minMu() const { return mu0; }
  double minLambda() const { return lambda0; }
  double minHardening() const { return h0; }
  double maxMu() const { return mu0 + mu1; }
  double maxLambda() const { return lambda0 + lambda1; }
  double maxHardening() const { return h0 + h1; }
  double maxYield() const { return d0 + d1; }
  double minYield() const { return d0; }

  /// Strong-monotonicity constant of the plastic flux: 2 min(mu) + min(h).
  double fluxMonotonicity() const { return 2.0 * minMu() + minHardening(); }
  /// Lipschitz constant of the plastic flux at regularization gamma.
  double fluxLipschitz(double gamma) const {
    return 2.0 * maxMu() + maxHardening() + maxYield() * gamma;
  }
  /// Lipschitz constant of the reduced stress map (largest eigenvalue of C).
  double reducedLipschitz() const;
  /// Strong-monotonicity constant of the reduced stress map.
  double reducedMonotonicity() const;
};

SymTensor2 applyC(const ScalarLaws& s, const SymTensor2& e);
SymTensor2 applyC(const MaterialLaws& laws, double z, const SymTensor2& e);
/// Derivative of C in z applied to e.
SymTensor2 applyCPrime(const ScalarLaws& s, const SymTensor2& e);
SymMap elasticityMatrix(const ScalarLaws& s);

DevTensor2 applyH(const ScalarLaws& s, const DevTensor2& q);
DevTensor2 applyH(const MaterialLaws& laws, double z, const DevTensor2& q);

/// Regularized dissipation h_gamma(Q) = sqrt(|Q|^2 + gamma^-2) - 1/gamma.
struct HGamma {
  double value;
  DevTensor2 grad;
  DevMap hess;
};

HGamma hGamma(double gamma, const DevTensor2& q);
double hGammaValue(double gamma, const DevTensor2& q);
DevTensor2 hGammaGrad(double gamma, const DevTensor2& q);

/// F(Q) = (2 mu + h) Q + d grad h_gamma(Q).
DevTensor2 fluxF(const ScalarLaws& s, double gamma, const DevTensor2& q);
DevTensor2 fluxF(const MaterialLaws& laws, double z, double gamma, const DevTensor2& q);

/// Root s >= 0 of (2 mu + h) s + d s / sqrt(s^2 + gamma^-2) = r.
double fluxRadius(const ScalarLaws& s, double gamma, double r);

DevTensor2 fluxFInverse(const ScalarLaws& s, double gamma, const DevTensor2& r);
DevTensor2 fluxFInverse(const MaterialLaws& laws, double z, double gamma, const DevTensor2& r);

/// M = (2 mu + h) Id + d hess h_gamma(p): derivative of F at p.
DevMap fluxJacobian(const ScalarLaws& s, double gamma, const DevTensor2& p);

struct ReducedFlux {
  SymTensor2 stress;
  SymMap tangent;  // Mandel coordinates
  DevTensor2 plastic;
};

/// b(E) = C (E - F^{-1}(dev(C E))) with its consistent tangent.
ReducedFlux reducedFlux(const ScalarLaws& s, double gamma, const SymTensor2& e);
ReducedFlux reducedFlux(const MaterialLaws& laws, double z, double gamma, const SymTensor2& e);

struct PointwiseMinimum {
  DevTensor2 plastic;
  double value;
};

/// Minimizes 1/2 C(E-p).(E-p) + 1/2 h |p|^2 + d h_gamma(p) over deviatoric p.
PointwiseMinimum pointwiseEnergyMin(const ScalarLaws& s, double gamma, const SymTensor2& e);
PointwiseMinimum pointwiseEnergyMin(const MaterialLaws& laws, double z, double gamma,
                                    const SymTensor2& e);

/// Stored energy density 1/2 C(E-p).(E-p) + 1/2 h|p|^2 + d h_gamma(p) at a
/// given plastic strain; gamma = +infinity uses |p|.
double pointwiseEnergy(const ScalarLaws& s, double gamma, const SymTensor2& e,
                       const DevTensor2& p);

}  // namespace phasetop
