#pragma once

#include <cstdint>

namespace mmslu::support {

// Each returns the worst relative error of analytic vs central-difference
// gradients for one randomly drawn instance.
double dense_gradient_error(std::uint64_t seed);
double softmax_ce_gradient_error(std::uint64_t seed);
double lstm_cell_gradient_error(std::uint64_t seed);
double bilstm_gradient_error(std::uint64_t seed);
double projection_gradient_error(std::uint64_t seed);
/// 2-token utterance, H = 4, lambda = 1, one utterance feature of dim 6
/// projected to 3, plus a trainable UNK row.
double end_to_end_gradient_error(std::uint64_t seed, bool fine_tune = false);

}  // namespace mmslu::support
