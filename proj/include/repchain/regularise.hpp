#pragma once

// Evaluation across removable singularities in lambda.
//
// Several closed forms carry factors like 1/(lambda - q^k) whose poles cancel
// in the final quantity. Exactly at (or within 1e-9 of) such a point the
// individual coefficients are unusable; instead the quantity is evaluated at
// a few regular points around lambda and extrapolated back.

#include <array>
#include <cstddef>

namespace repchain {

// Smaller steps lose digits to cancellation (coefficients grow like 1/step),
// larger ones to truncation. With Richardson extrapolation of the symmetric
// average, 1e-4 gives errors around 1e-10 on the tested grid.
inline constexpr double kNudgeStep = 1e-4;

struct NudgeStencil {
  std::array<double, 4> offsets{};
  std::array<double, 4> weights{};
  std::size_t size = 0;
};

/// Symmetric Richardson stencil, or a one-sided quadratic one when lambda + 2h > 1.
inline NudgeStencil nudge_stencil(double lambda, double h = kNudgeStep) {
  if (lambda + 2.0 * h <= 1.0)
    return {{h, -h, 2.0 * h, -2.0 * h}, {2.0 / 3.0, 2.0 / 3.0, -1.0 / 6.0, -1.0 / 6.0}, 4};
  return {{-h, -2.0 * h, -3.0 * h, 0.0}, {3.0, -3.0, 1.0, 0.0}, 3};
}

/// sum_i w_i f(lambda + offset_i)
template <class F>
double apply_stencil(const NudgeStencil& s, double lambda, F&& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size; ++i) acc += s.weights[i] * f(lambda + s.offsets[i]);
  return acc;
}

}  // namespace repchain
