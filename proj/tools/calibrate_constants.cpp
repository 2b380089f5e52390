// Samples the equivalence ratios and the Young / shift-change constants and
// prints a header with brackets widened by a factor 2.
#include <algorithm>
#include <cstdio>
#include <limits>

#include "../tests/support/samplers.hpp"
#include "plheat/constitutive.hpp"

using namespace plheat;

int main() {
  constexpr int kSamples = 100000;
  std::printf("#pragma once\n\n// Generated by calibrate_constants (seed 20240601, %d samples per exponent).\n", kSamples);
  std::printf("// Bracket ends are widened by a factor 2.\n\nnamespace plheat::testing {\n\n");
  std::printf("struct FrozenBracket {\n  double p;\n  double lo[3];\n  double hi[3];\n  double young[2];\n  double shift[2];\n};\n\n");
  std::printf("inline constexpr FrozenBracket kFrozenBrackets[] = {\n");
  for (double p : testing::kExponents) {
    testing::VectorSampler s(20240601);
    double lo[3], hi[3];
    std::fill(lo, lo + 3, std::numeric_limits<double>::infinity());
    std::fill(hi, hi + 3, 0.0);
    double young[2] = {0.0, 0.0}, shift[2] = {0.0, 0.0};
    for (int i = 0; i < kSamples; ++i) {
      const PLaplaceParams params{p, s.shift()};
      const Vec2 P = s.vector(), Q = s.vector(), R = s.vector();
      const auto r = equivalence_ratios(P, Q, params);
      for (int k = 0; k < 3; ++k) {
        lo[k] = std::min(lo[k], r[k]);
        hi[k] = std::max(hi[k], r[k]);
      }
      const double t = s.magnitude();
      for (int d = 0; d < 2; ++d) {
        young[d] = std::max(young[d], young_constant(P, Q, R, testing::kDeltas[d], params));
        shift[d] = std::max(shift[d], shift_change_constant(P, Q, t, testing::kDeltas[d], params));
      }
    }
    std::printf("    {%.17g, {%.6g, %.6g, %.6g}, {%.6g, %.6g, %.6g}, {%.6g, %.6g}, {%.6g, %.6g}},\n", p, lo[0] / 2,
                lo[1] / 2, lo[2] / 2, hi[0] * 2, hi[1] * 2, hi[2] * 2, young[0] * 2, young[1] * 2, shift[0] * 2,
                shift[1] * 2);
  }
  std::printf("};\n\n}  // namespace plheat::testing\n");
}
