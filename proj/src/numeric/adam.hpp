#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "numeric/tensor.hpp"

namespace princ {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moment buffers keyed by parameter name, so parameters added mid-run (novel
// prototypes) start from zero moments.
struct AdamState {
  std::map<std::string, std::pair<Tensor, Tensor>> moments;
  std::uint64_t step = 0;
};

// One bias-corrected Adam update over params at step index state.step + 1.
// Gradients are zeroed afterwards.
void adam_step(std::span<Param* const> params, double lr, AdamState& state, const AdamConfig& cfg = {});

}  // namespace princ
