#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phasetop/material.hpp"

namespace phasetop {

struct InequalityTally {
  std::string name;
  long checked = 0;
  long violations = 0;
  double worst = -1.0;  // largest (lhs - rhs) / (|lhs| + |rhs|); negative means slack
};

struct MaterialVerifyReport {
  std::vector<InequalityTally> items;
  long samples = 0;
  double seconds = 0.0;
  bool ok() const;
};

/// Relative rounding allowance applied to every comparison.
inline constexpr double kVerifySlack = 1e-12;

/// Random battery over z in [-0.5, 1.5], gamma in {1, 10, 1e3} and tensors
/// of norm at most 10: bounds and Lipschitz estimates of h_gamma, strong
/// monotonicity of the flux, Lipschitz bounds of its inverse and of the
/// reduced stress, strong monotonicity of the reduced stress.
MaterialVerifyReport verifyMaterial(const MaterialLaws& laws, long samples, std::uint64_t seed);

}  // namespace phasetop
