#pragma once

#include <functional>
#include <span>

#include "mmslu/matrix.hpp"

namespace mmslu {

/// Denominator floor for relative error, so entries whose true gradient is
/// ~0 are judged on absolute error instead.
inline constexpr double kGradCheckFloor = 1e-4;

/// |a - n| / max(|a|, |n|, floor)
double relative_error(double analytic, double numeric, double floor = kGradCheckFloor);

/// Compares `analytic[k]` against central differences of `loss` taken by
/// perturbing each entry of `values[k]` in place (restored afterwards).
/// Returns the worst relative error. eps must lie in [1e-7, 1e-3].
double grad_check(const std::function<double()>& loss, std::span<Matrix* const> values,
                  std::span<const Matrix* const> analytic, double eps = 1e-5);

}  // namespace mmslu
