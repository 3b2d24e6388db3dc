#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "npde/netcore.hpp"
#include "npde/rng.hpp"

namespace npde::testing {

/// Every entry uniform in (-spread, spread); adaptive scale in (0.5, 1.5).
inline ResNetParams random_params(const NetworkConfig& cfg, std::uint64_t seed,
                                  double spread = 0.8) {
  ResNetParams p(cfg);
  Rng rng(seed);
  for (auto& v : p.flat()) v = rng.uniform(-spread, spread);
  if (cfg.adaptive) p.scale() = rng.uniform(0.5, 1.5);
  return p;
}

inline Eigen::MatrixXd random_points(int rows, Eigen::Index cols,
                                     std::uint64_t seed, double lo = -1.0,
                                     double hi = 1.0) {
  Rng rng(seed);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) out(r, c) = rng.uniform(lo, hi);
  }
  return out;
}

inline NetworkConfig net(int input_dim, int width, int blocks,
                         Activation act = Activation::Swish) {
  return {input_dim, width, blocks, act, act == Activation::AdaptiveSwish};
}

inline constexpr Activation kAllActivations[] = {
    Activation::Relu, Activation::Sigmoid, Activation::Swish,
    Activation::SinCubed, Activation::AdaptiveSwish};

}  // namespace npde::testing
