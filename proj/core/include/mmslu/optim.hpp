#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mmslu/matrix.hpp"

namespace mmslu {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::size_t step = 0;
};

/// Zero accumulators shaped like `params`, t = 0.
AdamState make_adam_state(std::span<const Matrix* const> params, AdamConfig config = {});

/// One bias-corrected Adam update, applied to `params` in place.
void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads,
               AdamState& state);

}  // namespace mmslu
