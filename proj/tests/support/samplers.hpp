#pragma once

#include <cmath>
#include <random>

#include "plheat/constitutive.hpp"

namespace plheat::testing {

inline constexpr double kExponents[] = {1.2, 1.5, 2.0, 3.0, 4.5};
inline constexpr double kShifts[] = {0.0, 0.1, 1.0};
inline constexpr double kDeltas[] = {0.1, 0.5};

/// Random vectors with log-uniform magnitude in [1e-2, 1e2] and uniform direction.
class VectorSampler {
 public:
  explicit VectorSampler(unsigned long seed) : rng_(seed) {}

  double magnitude() { return std::exp(log_mag_(rng_)); }

  Vec2 vector() {
    const double r = magnitude();
    const double a = angle_(rng_);
    return {r * std::cos(a), r * std::sin(a)};
  }

  double shift() { return kShifts[rng_() % 3]; }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> log_mag_{std::log(1e-2), std::log(1e2)};
  std::uniform_real_distribution<double> angle_{0.0, 2.0 * M_PI};
};

}  // namespace plheat::testing
