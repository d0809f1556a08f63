#include "phasetop/verify.hpp"

#include <chrono>
#include <cmath>
#include <random>

namespace phasetop {

bool MaterialVerifyReport::ok() const {
  for (const auto& i : items)
    if (i.violations > 0 || i.checked == 0) return false;
  return true;
}

namespace {

// Records lhs <= rhs up to the rounding allowance.
void tally(InequalityTally& t, double lhs, double rhs) {
  ++t.checked;
  const double scale = std::abs(lhs) + std::abs(rhs);
  if (lhs > rhs + kVerifySlack * scale) ++t.violations;
  if (scale > 0.0) t.worst = std::max(t.worst, (lhs - rhs) / scale);
}

}  // namespace

MaterialVerifyReport verifyMaterial(const MaterialLaws& laws, long samples, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  laws.validate();
  MaterialVerifyReport rep;
  rep.samples = samples;
  enum { H1, H2, H3, E12, E13, E14, E15, Count };
  rep.items.resize(Count);
  rep.items[H1].name = "h1 (0 <= |Q| - h <= 1/gamma)";
  rep.items[H2].name = "h2 (h is 1-Lipschitz)";
  rep.items[H3].name = "h3 (grad h is 2 gamma-Lipschitz)";
  rep.items[E12].name = "e12 (flux strongly monotone, C1 = 2 min mu + min h)";
  rep.items[E13].name = "e13 (reduced stress Lipschitz)";
  rep.items[E14].name = "e14 (reduced stress strongly monotone)";
  rep.items[E15].name = "e15 (flux inverse Lipschitz, 1/C1)";

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> phase(-0.5, 1.5);
  std::normal_distribution<double> normal;
  const double gammas[3] = {1.0, 10.0, 1e3};
  const double bound = 10.0;

  auto dev = [&]() {
    const double r = bound * std::sqrt(unit(rng));
    const double a = 2.0 * M_PI * unit(rng);
    return DevTensor2::fromCoords(Eigen::Vector2d(r * std::cos(a), r * std::sin(a)));
  };
  auto sym = [&]() {
    Eigen::Vector3d v(normal(rng), normal(rng), normal(rng));
    v *= bound * std::cbrt(unit(rng)) / v.norm();
    return SymTensor2::fromMandel(v);
  };
  // Half of the second points are close to the first to probe local constants.
  auto nearby = [&](const DevTensor2& q) {
    if (unit(rng) < 0.5) return dev();
    const double scale = std::pow(10.0, -4.0 * unit(rng));
    const DevTensor2 d = dev();
    return q + DevTensor2{scale * d.xx, scale * d.xy};
  };

  const double c1 = laws.fluxMonotonicity();
  const double ctilde = 1.0 / c1;
  const double lip = laws.reducedLipschitz();
  const double mono = laws.reducedMonotonicity();

  for (long k = 0; k < samples; ++k) {
    const double z = phase(rng);
    const double gamma = gammas[k % 3];
    const ScalarLaws s = laws.at(z);

    const DevTensor2 q1 = dev();
    const DevTensor2 q2 = nearby(q1);
    const double dq = (q1 - q2).norm();

    const double h1 = hGammaValue(gamma, q1);
    tally(rep.items[H1], 0.0, q1.norm() - h1);
    tally(rep.items[H1], q1.norm() - h1, 1.0 / gamma);
    tally(rep.items[H2], std::abs(h1 - hGammaValue(gamma, q2)), dq);
    tally(rep.items[H3], (hGammaGrad(gamma, q1) - hGammaGrad(gamma, q2)).norm(), 2.0 * gamma * dq);

    const DevTensor2 f1 = fluxF(s, gamma, q1), f2 = fluxF(s, gamma, q2);
    tally(rep.items[E12], c1 * dq * dq, (f1 - f2).dot(q1 - q2));

    const DevTensor2 r1 = dev(), r2 = nearby(r1);
    tally(rep.items[E15], (fluxFInverse(s, gamma, r1) - fluxFInverse(s, gamma, r2)).norm(),
          ctilde * (r1 - r2).norm());

    const SymTensor2 e1 = sym();
    SymTensor2 e2 = sym();
    if (unit(rng) < 0.5) e2 = e1 + 1e-3 * unit(rng) * e2;
    const double de = (e1 - e2).norm();
    const SymTensor2 b1 = reducedFlux(s, gamma, e1).stress, b2 = reducedFlux(s, gamma, e2).stress;
    tally(rep.items[E13], (b1 - b2).norm(), lip * de);
    tally(rep.items[E14], mono * de * de, (b1 - b2).dot(e1 - e2));
  }
  // h_gamma(0) = 0 exactly.
  for (double g : gammas) tally(rep.items[H1], std::abs(hGammaValue(g, DevTensor2{})), 0.0);

  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace phasetop
