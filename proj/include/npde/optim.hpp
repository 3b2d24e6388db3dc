#pragma once

#include <cstdint>
#include <vector>

#include "npde/netcore.hpp"

namespace npde {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;

  AdamState() = default;
  explicit AdamState(std::size_t size) : m(size, 0.0), v(size, 0.0) {}
};

/// params <- params - lr * grads
void sgd_step(ResNetParams& params, const GradientBundle& grads, double lr);

/// One bias-corrected Adam update of params and state.
void adam_step(AdamState& state, ResNetParams& params,
               const GradientBundle& grads, const AdamConfig& cfg);

}  // namespace npde
