#include "npde/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace npde {

void AdamConfig::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  if (!(eps > 0.0)) throw std::invalid_argument("adam eps must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("adam betas must lie in [0, 1)");
  }
}

void sgd_step(ResNetParams& params, const GradientBundle& grads, double lr) {
  if (!params.congruent_with(grads)) {
    throw std::invalid_argument("gradient shape does not match parameters");
  }
  auto theta = params.flat();
  const auto g = grads.flat();
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= lr * g[i];
}

void adam_step(AdamState& state, ResNetParams& params,
               const GradientBundle& grads, const AdamConfig& cfg) {
  cfg.validate();
  if (!params.congruent_with(grads)) {
    throw std::invalid_argument("gradient shape does not match parameters");
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw std::invalid_argument("adam state shape does not match parameters");
  }
  const auto t = static_cast<double>(state.step + 1);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);

  auto theta = params.flat();
  const auto g = grads.flat();
  std::vector<double> next(theta.begin(), theta.end());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    next[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    if (!std::isfinite(next[i])) {
      throw NumericalFailure("adam update produced a non-finite parameter");
    }
  }
  std::copy(next.begin(), next.end(), theta.begin());
  ++state.step;
}

}  // namespace npde
