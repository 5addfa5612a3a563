#include "mmslu/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mmslu/error.hpp"

namespace mmslu {

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

double grad_check(const std::function<double()>& loss, std::span<Matrix* const> values,
                  std::span<const Matrix* const> analytic, double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) {
    throw InvalidArgument("grad_check: eps " + std::to_string(eps) + " outside [1e-7, 1e-3]");
  }
  if (values.size() != analytic.size()) {
    throw ShapeError("grad_check: " + std::to_string(values.size()) + " value tensors but " +
                     std::to_string(analytic.size()) + " gradient tensors");
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!values[k]->same_shape(*analytic[k])) {
      throw ShapeError("grad_check: shape mismatch at tensor " + std::to_string(k));
    }
    auto v = values[k]->values();
    auto a = analytic[k]->values();
    for (std::size_t j = 0; j < v.size(); ++j) {
      const double original = v[j];
      v[j] = original + eps;
      const double plus = loss();
      v[j] = original - eps;
      const double minus = loss();
      v[j] = original;
      if (!std::isfinite(plus) || !std::isfinite(minus)) {
        throw NumericError("grad_check: non-finite loss at tensor " + std::to_string(k) +
                           ", entry " + std::to_string(j));
      }
      const double numeric = (plus - minus) / (2.0 * eps);
      worst = std::max(worst, relative_error(a[j], numeric));
    }
  }
  return worst;
}

}  // namespace mmslu
