#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "phasetop/material.hpp"
#include "phasetop/verify.hpp"

using namespace phasetop;

TEST_CASE("smoothstep interpolant") {
  CHECK(smoothstep(0.0).value == 0.0);
  CHECK(smoothstep(1.0).value == 1.0);
  CHECK(smoothstep(0.5).value == doctest::Approx(0.5));
  CHECK(smoothstep(0.0).derivative == 0.0);
  CHECK(smoothstep(1.0).derivative == 0.0);
  CHECK(smoothstep(-0.3).value == 0.0);
  CHECK(smoothstep(1.7).value == 1.0);
  CHECK(smoothstep(1.7).derivative == 0.0);
  for (double z : {0.1, 0.37, 0.8}) {
    CHECK(smoothstep(z).value == doctest::Approx(oracle::ell(z)).epsilon(1e-15));
    const double fd = (oracle::ell(z + 1e-6) - oracle::ell(z - 1e-6)) / 2e-6;
    CHECK(smoothstep(z).derivative == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("material laws at the phase limits") {
  MaterialLaws laws;
  const ScalarLaws soft = laws.at(0.0), stiff = laws.at(1.0);
  CHECK(soft.mu == laws.mu0);
  CHECK(stiff.d == laws.d0 + laws.d1);
  CHECK(stiff.dmu == 0.0);
  const ScalarLaws mid = laws.at(0.5);
  CHECK(mid.dmu == doctest::Approx(laws.mu1 * 1.5));
}

TEST_CASE("law validation names the field") {
  MaterialLaws laws;
  laws.h0 = 0.0;
  CHECK_THROWS_WITH_AS(laws.validate(), doctest::Contains("h0"), std::invalid_argument);
  laws = MaterialLaws{};
  laws.d1 = -1.0;
  CHECK_THROWS_WITH_AS(laws.validate(), doctest::Contains("d1"), std::invalid_argument);
}

TEST_CASE("h_gamma at zero and its bounds") {
  for (double g : {1.0, 10.0, 1e4}) {
    const HGamma h = hGamma(g, {});
    CHECK(h.value == 0.0);
    CHECK(h.grad.norm() == 0.0);
    CHECK(h.hess(0, 0) == doctest::Approx(g));
    CHECK(h.hess(1, 1) == doctest::Approx(g));
    CHECK(h.hess(0, 1) == 0.0);
  }
  const DevTensor2 q{0.3, -0.2};
  const double v = hGammaValue(10.0, q);
  CHECK(v <= q.norm());
  CHECK(v >= q.norm() - 0.1);
  CHECK(v == doctest::Approx(std::sqrt(q.normSquared() + 0.01) - 0.1).epsilon(1e-14));
}

TEST_CASE("h_gamma gradient and Hessian match central differences") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double step = 1e-5;
  for (int trial = 0; trial < 50; ++trial) {
    const double gamma = trial % 2 ? 3.0 : 0.7;
    const Eigen::Vector2d c(u(rng), u(rng));
    const HGamma h = hGamma(gamma, DevTensor2::fromCoords(c));
    for (int i = 0; i < 2; ++i) {
      Eigen::Vector2d e = Eigen::Vector2d::Zero();
      e[i] = step;
      const double fd = (hGammaValue(gamma, DevTensor2::fromCoords(c + e)) -
                         hGammaValue(gamma, DevTensor2::fromCoords(c - e))) /
                        (2 * step);
      CHECK(h.grad.coords()[i] == doctest::Approx(fd).epsilon(1e-6));
      const Eigen::Vector2d gfd = (hGammaGrad(gamma, DevTensor2::fromCoords(c + e)).coords() -
                                   hGammaGrad(gamma, DevTensor2::fromCoords(c - e)).coords()) /
                                  (2 * step);
      for (int j = 0; j < 2; ++j)
        CHECK(h.hess(j, i) == doctest::Approx(gfd[j]).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("flux inverse against bisection and round trip") {
  MaterialLaws laws;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double z = 0.5 + u(rng);
    const double gamma = std::pow(10.0, 2.0 + 2.0 * u(rng));
    const ScalarLaws s = laws.at(z);
    const DevTensor2 r{5 * u(rng), 5 * u(rng)};
    const DevTensor2 p = fluxFInverse(s, gamma, r);
    const double t = oracle::plasticRadius(s.mu, s.h, s.d, gamma, r.norm());
    CHECK(std::abs(p.norm() - t) <= 1e-14 * (1 + t));
    CHECK((fluxF(s, gamma, p) - r).norm() <= 1e-10 * (1 + r.norm()));
    CHECK((fluxFInverse(s, gamma, fluxF(s, gamma, r)) - r).norm() <= 1e-10 * (1 + r.norm()));
  }
  CHECK(fluxFInverse(laws.at(0.3), 10.0, DevTensor2{}).norm() == 0.0);
}

TEST_CASE("flux is frame covariant") {
  MaterialLaws laws;
  const ScalarLaws s = laws.at(0.6);
  const DevTensor2 q{0.7, -0.4};
  for (double theta : {0.3, 1.1, 2.5}) {
    const oracle::M2 rot = oracle::rotation(theta);
    auto rotate = [&](const DevTensor2& a) {
      const oracle::M2 m{a.xx, a.xy, a.xy, -a.xx};
      const oracle::M2 r = oracle::mul(oracle::mul(rot, m), oracle::transpose(rot));
      return DevTensor2{r[0], r[1]};
    };
    const DevTensor2 lhs = fluxF(s, 10.0, rotate(q));
    const DevTensor2 rhs = rotate(fluxF(s, 10.0, q));
    CHECK((lhs - rhs).norm() <= 1e-12);
  }
}

TEST_CASE("reduced stress: volumetric strain stays elastic") {
  MaterialLaws laws;
  const ScalarLaws s = laws.at(0.8);
  const SymTensor2 e = 0.3 * SymTensor2::identity();
  const ReducedFlux b = reducedFlux(s, 100.0, e);
  CHECK(b.plastic.norm() == 0.0);
  CHECK((b.stress - applyC(s, e)).norm() <= 1e-15);
  const PointwiseMinimum m = pointwiseEnergyMin(s, 100.0, e);
  CHECK(m.plastic.norm() == 0.0);
  CHECK(m.value == doctest::Approx(0.5 * applyC(s, e).dot(e)));
}

TEST_CASE("reduced stress tangent matches finite differences") {
  MaterialLaws laws;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const ScalarLaws s = laws.at(0.5 + 0.5 * u(rng));
    const double gamma = trial % 2 ? 10.0 : 100.0;
    const Eigen::Vector3d e(u(rng), u(rng), u(rng));
    const SymMap tangent = reducedFlux(s, gamma, SymTensor2::fromMandel(e)).tangent;
    const double h = 1e-6;
    for (int j = 0; j < 3; ++j) {
      Eigen::Vector3d d = Eigen::Vector3d::Zero();
      d[j] = h;
      const Eigen::Vector3d col = (reducedFlux(s, gamma, SymTensor2::fromMandel(e + d)).stress.mandel() -
                                   reducedFlux(s, gamma, SymTensor2::fromMandel(e - d)).stress.mandel()) /
                                  (2 * h);
      CHECK((tangent.col(j) - col).norm() <= 1e-5 * std::max(1.0, col.norm()));
    }
    CHECK((tangent - tangent.transpose()).norm() <= 1e-14);
  }
}

TEST_CASE("pointwise minimum beats a brute-force lattice") {
  MaterialLaws laws;
  const ScalarLaws s = laws.at(0.7);
  const double gamma = 20.0;
  const SymTensor2 e{0.4, -0.1, 0.25};
  const PointwiseMinimum m = pointwiseEnergyMin(s, gamma, e);
  const double spacing = 2e-3;
  double best = std::numeric_limits<double>::infinity();
  DevTensor2 arg;
  for (int i = -300; i <= 300; ++i)
    for (int j = -300; j <= 300; ++j) {
      const DevTensor2 p{i * spacing, j * spacing};
      const double v = pointwiseEnergy(s, gamma, e, p);
      if (v < best) {
        best = v;
        arg = p;
      }
    }
  CHECK(m.value <= best + 1e-14);
  // Energy is quadratic near the minimizer: lattice error O(spacing^2).
  CHECK(best - m.value <= 10 * spacing * spacing);
  CHECK((m.plastic - arg).norm() <= spacing);
  CHECK(m.value == doctest::Approx(pointwiseEnergy(s, gamma, e, m.plastic)).epsilon(1e-14));
}

TEST_CASE("pointwise minimum decreases with the yield stress") {
  MaterialLaws a, b;
  b.d0 = 0.5 * a.d0;
  b.d1 = 0.5 * a.d1;
  const SymTensor2 e{0.4, -0.1, 0.25};
  CHECK(pointwiseEnergyMin(b, 0.6, 30.0, e).value < pointwiseEnergyMin(a, 0.6, 30.0, e).value);
}

TEST_CASE("inequality battery has no violations") {
  const MaterialVerifyReport rep = verifyMaterial(MaterialLaws{}, 20000, 3);
  CHECK(rep.ok());
  for (const auto& i : rep.items) {
    INFO(i.name);
    CHECK(i.violations == 0);
    CHECK(i.checked >= 20000);
  }
}

TEST_CASE("cross-phase flux bound has finite measured constants") {
  // (F(z1,Q1) - F(z2,Q2)).(Q1-Q2) >= C1 |dQ|^2 - (C2 |Q2| + C3) |dz| |dQ|
  // with C2 from the Lipschitz constants of mu and h and C3 from that of d.
  MaterialLaws laws;
  const double c1 = laws.fluxMonotonicity();
  const double c2 = 2 * laws.mu1 * 1.5 + laws.h1 * 1.5;
  const double c3 = laws.d1 * 1.5;
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 5000; ++trial) {
    const double z1 = 0.5 + u(rng), z2 = 0.5 + u(rng), gamma = 50.0;
    const DevTensor2 q1{3 * u(rng), 3 * u(rng)}, q2{3 * u(rng), 3 * u(rng)};
    const double dq = (q1 - q2).norm();
    const double lhs = (fluxF(laws, z1, gamma, q1) - fluxF(laws, z2, gamma, q2)).dot(q1 - q2);
    const double rhs = c1 * dq * dq - (c2 * q2.norm() + c3) * std::abs(z1 - z2) * dq;
    CHECK(lhs >= rhs - 1e-12 * (1 + std::abs(rhs)));
  }
}
