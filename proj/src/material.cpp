#include "phasetop/material.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace phasetop {

Interpolant smoothstep(double z) {
  if (z <= 0.0) return {0.0, 0.0};
  if (z >= 1.0) return {1.0, 0.0};
  return {z * z * (3.0 - 2.0 * z), 6.0 * z * (1.0 - z)};
}

void MaterialLaws::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string(name) + " must be positive and finite");
  };
  auto nonnegative = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string(name) + " must be nonnegative and finite");
  };
  positive(mu0, "mu0");
  positive(lambda0, "lambda0");
  positive(h0, "h0");
  positive(d0, "d0");
  nonnegative(mu1, "mu1");
  nonnegative(lambda1, "lambda1");
  nonnegative(h1, "h1");
  nonnegative(d1, "d1");
}

ScalarLaws MaterialLaws::at(double z) const {
  const Interpolant l = smoothstep(z);
  return {mu0 + mu1 * l.value,         lambda0 + lambda1 * l.value, h0 + h1 * l.value,
          d0 + d1 * l.value,           l.value,                     mu1 * l.derivative,
          lambda1 * l.derivative,      h1 * l.derivative,           d1 * l.derivative,
          l.derivative};
}

double MaterialLaws::reducedLipschitz() const {
  return std::max(2.0 * maxMu() + 2.0 * maxLambda(), 2.0 * maxMu());
}

double MaterialLaws::reducedMonotonicity() const {
  // On deviatoric directions the tangent is bounded below by 2 mu h / (2 mu + h),
  // increasing in both arguments; volumetric directions see 2 mu + 2 lambda.
  const double mu = minMu();
  const double h = minHardening();
  return std::min(2.0 * mu * h / (2.0 * mu + h), 2.0 * mu + 2.0 * minLambda());
}

SymTensor2 applyC(const ScalarLaws& s, const SymTensor2& e) {
  const double vol = s.lambda * e.trace();
  return {2.0 * s.mu * e.xx + vol, 2.0 * s.mu * e.yy + vol, 2.0 * s.mu * e.xy};
}

SymTensor2 applyC(const MaterialLaws& laws, double z, const SymTensor2& e) {
  return applyC(laws.at(z), e);
}

SymTensor2 applyCPrime(const ScalarLaws& s, const SymTensor2& e) {
  const double vol = s.dlambda * e.trace();
  return {2.0 * s.dmu * e.xx + vol, 2.0 * s.dmu * e.yy + vol, 2.0 * s.dmu * e.xy};
}

SymMap elasticityMatrix(const ScalarLaws& s) {
  SymMap c = 2.0 * s.mu * SymMap::Identity();
  c.topLeftCorner<2, 2>().array() += s.lambda;
  return c;
}

DevTensor2 applyH(const ScalarLaws& s, const DevTensor2& q) { return s.h * q; }

DevTensor2 applyH(const MaterialLaws& laws, double z, const DevTensor2& q) {
  return applyH(laws.at(z), q);
}

namespace {

double regularizedNorm(double gamma, double n2) { return std::sqrt(n2 + 1.0 / (gamma * gamma)); }

}  // namespace

double hGammaValue(double gamma, const DevTensor2& q) {
  const double n2 = q.normSquared();
  // sqrt(n2 + g^-2) - g^-1 without cancellation.
  return n2 / (regularizedNorm(gamma, n2) + 1.0 / gamma);
}

DevTensor2 hGammaGrad(double gamma, const DevTensor2& q) {
  return q * (1.0 / regularizedNorm(gamma, q.normSquared()));
}

HGamma hGamma(double gamma, const DevTensor2& q) {
  const double n2 = q.normSquared();
  const double root = regularizedNorm(gamma, n2);
  const Eigen::Vector2d c = q.coords();
  DevMap hess = (DevMap::Identity() - c * c.transpose() / (root * root)) / root;
  return {n2 / (root + 1.0 / gamma), q * (1.0 / root), hess};
}

DevTensor2 fluxF(const ScalarLaws& s, double gamma, const DevTensor2& q) {
  const double root = regularizedNorm(gamma, q.normSquared());
  return q * (2.0 * s.mu + s.h + s.d / root);
}

DevTensor2 fluxF(const MaterialLaws& laws, double z, double gamma, const DevTensor2& q) {
  return fluxF(laws.at(z), gamma, q);
}

double fluxRadius(const ScalarLaws& s, double gamma, double r) {
  if (r <= 0.0) return 0.0;
  const double a = 2.0 * s.mu + s.h;
  const double c2 = 1.0 / (gamma * gamma);
  auto residual = [&](double x) { return a * x + s.d * x / std::sqrt(x * x + c2) - r; };

  double lo = 0.0;
  double hi = r / a;
  // The residual is concave and increasing, so Newton from below stays below
  // the root; the bracket only guards against rounding.
  double x = r / (a + s.d * gamma);
  for (int it = 0; it < 200; ++it) {
    const double f = residual(x);
    if (f == 0.0) return x;
    if (f < 0.0)
      lo = std::max(lo, x);
    else
      hi = std::min(hi, x);
    const double root = std::sqrt(x * x + c2);
    const double slope = a + s.d * c2 / (root * root * root);
    // Step-based test: with a soft phase the slope is small and a residual
    // test alone would leave the root inaccurate.
    const double step = f / slope;
    if (std::abs(step) <= 1e-15 * (1.0 + x)) return std::clamp(x - step, lo, hi);
    double next = x - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 2.0 * std::numeric_limits<double>::epsilon() * std::abs(x))
      return next;
    x = next;
  }
  return x;
}

DevTensor2 fluxFInverse(const ScalarLaws& s, double gamma, const DevTensor2& r) {
  const double rn = r.norm();
  if (rn == 0.0) return {};
  return r * (fluxRadius(s, gamma, rn) / rn);
}

DevTensor2 fluxFInverse(const MaterialLaws& laws, double z, double gamma, const DevTensor2& r) {
  return fluxFInverse(laws.at(z), gamma, r);
}

DevMap fluxJacobian(const ScalarLaws& s, double gamma, const DevTensor2& p) {
  return (2.0 * s.mu + s.h) * DevMap::Identity() + s.d * hGamma(gamma, p).hess;
}

ReducedFlux reducedFlux(const ScalarLaws& s, double gamma, const SymTensor2& e) {
  const DevTensor2 drive = e.dev() * (2.0 * s.mu);  // dev(C E)
  const DevTensor2 p = fluxFInverse(s, gamma, drive);
  const SymTensor2 stress = applyC(s, e - p);
  const Eigen::Matrix<double, 2, 3> P = deviatoricProjector();
  const DevMap minv = fluxJacobian(s, gamma, p).inverse();
  SymMap tangent = elasticityMatrix(s) - 4.0 * s.mu * s.mu * P.transpose() * minv * P;
  tangent = 0.5 * (tangent + tangent.transpose()).eval();
  return {stress, tangent, p};
}

ReducedFlux reducedFlux(const MaterialLaws& laws, double z, double gamma, const SymTensor2& e) {
  return reducedFlux(laws.at(z), gamma, e);
}

double pointwiseEnergy(const ScalarLaws& s, double gamma, const SymTensor2& e,
                       const DevTensor2& p) {
  const SymTensor2 el = e - p;
  const double dissipation = std::isinf(gamma) ? p.norm() : hGammaValue(gamma, p);
  return 0.5 * applyC(s, el).dot(el) + 0.5 * s.h * p.normSquared() + s.d * dissipation;
}

PointwiseMinimum pointwiseEnergyMin(const ScalarLaws& s, double gamma, const SymTensor2& e) {
  const DevTensor2 p = fluxFInverse(s, gamma, e.dev() * (2.0 * s.mu));
  return {p, pointwiseEnergy(s, gamma, e, p)};
}

PointwiseMinimum pointwiseEnergyMin(const MaterialLaws& laws, double z, double gamma,
                                    const SymTensor2& e) {
  return pointwiseEnergyMin(laws.at(z), gamma, e);
}

}  // namespace phasetop
