#pragma once

#include <cmath>

#include "cmjlab/errors.hpp"

namespace cmjlab {

/// Collaboration-model parameters. An edge dies at hazard b + c*xi(t) where
/// xi(t) is its offspring count so far; each unit-rate birth event has jump
/// size 2 with probability p and 1 with probability q = 1-p.
struct ModelParams {
  double b = 1.0;  // baseline death hazard, 1/time
  double c = 1.0;  // hazard increment per offspring, 1/time
  double p = 0.5;  // probability of a jump-2 birth event

  double q() const { return 1.0 - p; }

  void validate() const {
    if (!std::isfinite(b) || b <= 0.0) throw ValidationError("ModelParams.b must be finite and > 0");
    if (!std::isfinite(c) || c <= 0.0) throw ValidationError("ModelParams.c must be finite and > 0");
    if (!std::isfinite(p) || p < 0.0 || p > 1.0)
      throw ValidationError("ModelParams.p must lie in [0,1]");
  }
};

}  // namespace cmjlab
