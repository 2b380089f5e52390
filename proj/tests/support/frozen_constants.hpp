#pragma once

// Generated by calibrate_constants (seed 20240601, 100000 samples per exponent).
// Bracket ends are widened by a factor 2.

namespace plheat::testing {

struct FrozenBracket {
  double p;
  double lo[3];
  double hi[3];
  double young[2];
  double shift[2];
};

inline constexpr FrozenBracket kFrozenBrackets[] = {
    {1.2, {0.278107, 0.207274, 0.509996}, {2.49997, 9.06337, 17.411}, {18.6083, 2.94558}, {5.36002, 2.76072}},
    {1.5, {0.444631, 0.509397, 0.506207}, {2.10312, 6.43276, 5.65685}, {9.64266, 1.47821}, {2.91097, 2.24919}},
    {2, {0.5, 1, 0.5}, {2, 4, 2}, {4.99826, 1}, {2, 2}},
    {3, {0.44475, 0.410536, 0.125}, {2.10313, 7.74714, 1.95191}, {54.4777, 1.47131}, {4.57779, 3.15294}},
    {4.5, {0.34621, 0.105617, 0.0252538}, {2.3192, 13.0676, 1.88343}, {2736.42, 6.49775}, {32.6652, 12.3815}},
};

}  // namespace plheat::testing
