#include "npde/netcore.hpp"

#include <algorithm>
#include <cmath>

#include "npde/rng.hpp"

namespace npde {

namespace {

// Columns processed per kernel pass; keeps the per-chunk tape in cache.
constexpr Eigen::Index kChunk = 256;

using Array = Eigen::ArrayXXd;

void check_config(const ResNetParams& params, Eigen::Index rows) {
  if (rows != params.config().input_dim) {
    throw std::invalid_argument("network input has " + std::to_string(rows) +
                                " rows, expected " +
                                std::to_string(params.config().input_dim));
  }
}

// Values only.
void activate(Activation kind, double a, const Eigen::MatrixXd& z,
              Eigen::MatrixXd& out) {
  const auto za = z.array();
  switch (kind) {
    case Activation::Relu:
      out = za.max(0.0).matrix();
      break;
    case Activation::Sigmoid:
      out = (1.0 + (-za).exp()).inverse().matrix();
      break;
    case Activation::Swish:
      out = (za * (1.0 + (-za).exp()).inverse()).matrix();
      break;
    case Activation::SinCubed:
      out = za.sin().cube().matrix();
      break;
    case Activation::AdaptiveSwish: {
      const Array w = a * za;
      out = (w * (1.0 + (-w).exp()).inverse()).matrix();
      break;
    }
  }
}

// Values plus d/dz and (adaptive only) d/da.
void activate_with_deriv(Activation kind, double a, const Eigen::MatrixXd& z,
                         Eigen::MatrixXd& out, Eigen::MatrixXd& dz,
                         Eigen::MatrixXd& da) {
  const auto za = z.array();
  switch (kind) {
    case Activation::Relu:
      out = za.max(0.0).matrix();
      dz = (za > 0.0).cast<double>().matrix();
      break;
    case Activation::Sigmoid: {
      const Array s = (1.0 + (-za).exp()).inverse();
      out = s.matrix();
      dz = (s * (1.0 - s)).matrix();
      break;
    }
    case Activation::Swish: {
      const Array s = (1.0 + (-za).exp()).inverse();
      out = (za * s).matrix();
      dz = (s + za * s * (1.0 - s)).matrix();
      break;
    }
    case Activation::SinCubed: {
      const Array sn = za.sin();
      out = sn.cube().matrix();
      dz = (3.0 * sn.square() * za.cos()).matrix();
      break;
    }
    case Activation::AdaptiveSwish: {
      const Array w = a * za;
      const Array s = (1.0 + (-w).exp()).inverse();
      const Array inner = s + w * s * (1.0 - s);
      out = (w * s).matrix();
      dz = (a * inner).matrix();
      da = (za * inner).matrix();
      break;
    }
  }
}

double scale_of(const ResNetParams& params) {
  return params.config().adaptive ? params.scale() : 1.0;
}

// Forward pass over one chunk of columns; returns block outputs L(n).
Eigen::MatrixXd forward_chunk(const ResNetParams& params,
                              const Eigen::MatrixXd& x) {
  const auto& cfg = params.config();
  const double a = scale_of(params);
  Eigen::MatrixXd layer = params.w0() * x;
  layer.colwise() += params.b0();
  Eigen::MatrixXd z(cfg.width, x.cols());
  Eigen::MatrixXd act(cfg.width, x.cols());
  for (int i = 0; i < cfg.blocks; ++i) {
    z.noalias() = params.w1(i) * layer;
    z.colwise() += params.b1(i);
    activate(cfg.activation, a, z, act);
    z.noalias() = params.w2(i) * act;
    z.colwise() += params.b2(i);
    activate(cfg.activation, a, z, act);
    layer += act;
  }
  return layer;
}

}  // namespace

std::string_view to_string(Activation kind) {
  switch (kind) {
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Swish: return "swish";
    case Activation::SinCubed: return "sin3";
    case Activation::AdaptiveSwish: return "adaptive-swish";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  for (auto kind : {Activation::Relu, Activation::Sigmoid, Activation::Swish,
                    Activation::SinCubed, Activation::AdaptiveSwish}) {
    if (name == to_string(kind)) return kind;
  }
  throw std::invalid_argument("unknown activation '" + std::string(name) +
                              "'");
}

void NetworkConfig::validate() const {
  if (input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
  if (width < 1) throw std::invalid_argument("width must be >= 1");
  if (blocks < 1) throw std::invalid_argument("blocks must be >= 1");
  if (activation == Activation::AdaptiveSwish && !adaptive) {
    throw std::invalid_argument("adaptive-swish requires adaptive=true");
  }
}

std::size_t param_count(const NetworkConfig& cfg) {
  const auto d = static_cast<std::size_t>(cfg.input_dim);
  const auto m = static_cast<std::size_t>(cfg.width);
  const auto n = static_cast<std::size_t>(cfg.blocks);
  return m * (d + 1) + (2 * m * n + 1) * (m + 1) + (cfg.adaptive ? 1 : 0);
}

ParamSet::ParamSet(const NetworkConfig& cfg)
    : cfg_(cfg), values_(param_count(cfg), 0.0) {
  cfg_.validate();
}

std::size_t ParamSet::block_offset(int block) const {
  const auto d = static_cast<std::size_t>(cfg_.input_dim);
  const auto m = static_cast<std::size_t>(cfg_.width);
  return m * d + m + static_cast<std::size_t>(block) * (2 * m * m + 2 * m);
}

MatrixView ParamSet::w0() {
  return {values_.data(), cfg_.width, cfg_.input_dim};
}
ConstMatrixView ParamSet::w0() const {
  return {values_.data(), cfg_.width, cfg_.input_dim};
}
VectorView ParamSet::b0() {
  return {values_.data() + cfg_.width * cfg_.input_dim, cfg_.width};
}
ConstVectorView ParamSet::b0() const {
  return {values_.data() + cfg_.width * cfg_.input_dim, cfg_.width};
}
MatrixView ParamSet::w1(int block) {
  return {values_.data() + block_offset(block), cfg_.width, cfg_.width};
}
ConstMatrixView ParamSet::w1(int block) const {
  return {values_.data() + block_offset(block), cfg_.width, cfg_.width};
}
VectorView ParamSet::b1(int block) {
  return {values_.data() + block_offset(block) + cfg_.width * cfg_.width,
          cfg_.width};
}
ConstVectorView ParamSet::b1(int block) const {
  return {values_.data() + block_offset(block) + cfg_.width * cfg_.width,
          cfg_.width};
}
MatrixView ParamSet::w2(int block) {
  return {values_.data() + block_offset(block) + cfg_.width * (cfg_.width + 1),
          cfg_.width, cfg_.width};
}
ConstMatrixView ParamSet::w2(int block) const {
  return {values_.data() + block_offset(block) + cfg_.width * (cfg_.width + 1),
          cfg_.width, cfg_.width};
}
VectorView ParamSet::b2(int block) {
  return {values_.data() + block_offset(block) +
              cfg_.width * (2 * cfg_.width + 1),
          cfg_.width};
}
ConstVectorView ParamSet::b2(int block) const {
  return {values_.data() + block_offset(block) +
              cfg_.width * (2 * cfg_.width + 1),
          cfg_.width};
}
VectorView ParamSet::wout() {
  return {values_.data() + block_offset(cfg_.blocks), cfg_.width};
}
ConstVectorView ParamSet::wout() const {
  return {values_.data() + block_offset(cfg_.blocks), cfg_.width};
}
double& ParamSet::bout() {
  return values_[block_offset(cfg_.blocks) +
                 static_cast<std::size_t>(cfg_.width)];
}
double ParamSet::bout() const {
  return values_[block_offset(cfg_.blocks) +
                 static_cast<std::size_t>(cfg_.width)];
}
double& ParamSet::scale() {
  if (!cfg_.adaptive) throw std::logic_error("network has no scale parameter");
  return values_.back();
}
double ParamSet::scale() const {
  if (!cfg_.adaptive) throw std::logic_error("network has no scale parameter");
  return values_.back();
}

bool ParamSet::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

bool ParamSet::congruent_with(const ParamSet& other) const {
  return cfg_ == other.cfg_ && values_.size() == other.values_.size();
}

ResNetParams init_params(const NetworkConfig& cfg, std::uint64_t seed) {
  ResNetParams params(cfg);
  Rng rng(derive_seed(seed, "init"));
  auto fill = [&rng](auto&& w, int fan_in, int fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        w(r, c) = rng.uniform(-limit, limit);
      }
    }
  };
  fill(params.w0(), cfg.input_dim, cfg.width);
  for (int i = 0; i < cfg.blocks; ++i) {
    fill(params.w1(i), cfg.width, cfg.width);
    fill(params.w2(i), cfg.width, cfg.width);
  }
  fill(params.wout(), cfg.width, 1);
  if (cfg.adaptive) params.scale() = 1.0;
  return params;
}

double activation_eval(Activation kind, double z, double a) {
  switch (kind) {
    case Activation::Relu: return std::max(0.0, z);
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::Swish: return z / (1.0 + std::exp(-z));
    case Activation::SinCubed: {
      const double s = std::sin(z);
      return s * s * s;
    }
    case Activation::AdaptiveSwish: return a * z / (1.0 + std::exp(-a * z));
  }
  return 0.0;
}

ActivationDerivative activation_deriv(Activation kind, double z, double a) {
  switch (kind) {
    case Activation::Relu: return {z > 0.0 ? 1.0 : 0.0, 0.0};
    case Activation::Sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return {s * (1.0 - s), 0.0};
    }
    case Activation::Swish: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return {s + z * s * (1.0 - s), 0.0};
    }
    case Activation::SinCubed: {
      const double s = std::sin(z);
      return {3.0 * s * s * std::cos(z), 0.0};
    }
    case Activation::AdaptiveSwish: {
      const double w = a * z;
      const double s = 1.0 / (1.0 + std::exp(-w));
      const double inner = s + w * s * (1.0 - s);
      return {a * inner, z * inner};
    }
  }
  return {0.0, 0.0};
}

double forward(const ResNetParams& params, std::span<const double> x) {
  Eigen::MatrixXd input(static_cast<Eigen::Index>(x.size()), 1);
  std::copy(x.begin(), x.end(), input.data());
  return forward_batch(params, input)(0);
}

Eigen::VectorXd forward_batch(const ResNetParams& params,
                              const Eigen::MatrixXd& inputs) {
  check_config(params, inputs.rows());
  const Eigen::Index total = inputs.cols();
  Eigen::VectorXd out(total);
  for (Eigen::Index start = 0; start < total; start += kChunk) {
    const Eigen::Index cols = std::min(kChunk, total - start);
    const Eigen::MatrixXd layer =
        forward_chunk(params, inputs.middleCols(start, cols));
    out.segment(start, cols).noalias() = layer.transpose() * params.wout();
  }
  out.array() += params.bout();
  if (!out.allFinite()) {
    throw NumericalFailure("network forward produced a non-finite value");
  }
  return out;
}

ForwardTape::ForwardTape(const ResNetParams& params,
                         const Eigen::MatrixXd& inputs)
    : params_(&params), inputs_(inputs) {
  check_config(params, inputs.rows());
  const auto& cfg = params.config();
  const double a = scale_of(params);
  const Eigen::Index cols = inputs.cols();

  blocks_.resize(static_cast<std::size_t>(cfg.blocks));
  last_ = params.w0() * inputs_;
  last_.colwise() += params.b0();
  Eigen::MatrixXd z(cfg.width, cols);
  Eigen::MatrixXd act2(cfg.width, cols);
  for (int i = 0; i < cfg.blocks; ++i) {
    auto& t = blocks_[static_cast<std::size_t>(i)];
    t.input = last_;
    z.noalias() = params.w1(i) * last_;
    z.colwise() += params.b1(i);
    activate_with_deriv(cfg.activation, a, z, t.act1, t.d1, t.da1);
    z.noalias() = params.w2(i) * t.act1;
    z.colwise() += params.b2(i);
    activate_with_deriv(cfg.activation, a, z, act2, t.d2, t.da2);
    last_ += act2;
  }
  outputs_.noalias() = last_.transpose() * params.wout();
  outputs_.array() += params.bout();
  if (!outputs_.allFinite()) {
    throw NumericalFailure("network forward produced a non-finite value");
  }
}

void ForwardTape::accumulate_gradient(const Eigen::VectorXd& s,
                                      GradientBundle& grad) const {
  const auto& params = *params_;
  const auto& cfg = params.config();
  if (s.size() != inputs_.cols()) {
    throw std::invalid_argument("one sensitivity per input column required");
  }
  if (!grad.congruent_with(params)) {
    throw std::invalid_argument("gradient bundle shape does not match params");
  }
  const Eigen::Index cols = inputs_.cols();

  grad.wout().noalias() += last_ * s;
  grad.bout() += s.sum();

  // upstream(j, c) = d(sum s u) / d L(i)(j, c)
  Eigen::MatrixXd upstream = params.wout() * s.transpose();
  Eigen::MatrixXd dz2(cfg.width, cols);
  Eigen::MatrixXd dz1(cfg.width, cols);
  double grad_scale = 0.0;
  for (int i = cfg.blocks - 1; i >= 0; --i) {
    const auto& t = blocks_[static_cast<std::size_t>(i)];
    dz2 = upstream.cwiseProduct(t.d2);
    if (cfg.adaptive) grad_scale += upstream.cwiseProduct(t.da2).sum();
    grad.w2(i).noalias() += dz2 * t.act1.transpose();
    grad.b2(i) += dz2.rowwise().sum();
    dz1.noalias() = params.w2(i).transpose() * dz2;
    if (cfg.adaptive) grad_scale += dz1.cwiseProduct(t.da1).sum();
    dz1 = dz1.cwiseProduct(t.d1);
    grad.w1(i).noalias() += dz1 * t.input.transpose();
    grad.b1(i) += dz1.rowwise().sum();
    upstream.noalias() += params.w1(i).transpose() * dz1;
  }
  grad.w0().noalias() += upstream * inputs_.transpose();
  grad.b0() += upstream.rowwise().sum();
  if (cfg.adaptive) grad.scale() += grad_scale;
}

void accumulate_grad_theta(const ResNetParams& params,
                           const Eigen::MatrixXd& inputs,
                           const Eigen::VectorXd& sensitivities,
                           GradientBundle& grad) {
  check_config(params, inputs.rows());
  if (sensitivities.size() != inputs.cols()) {
    throw std::invalid_argument("one sensitivity per input column required");
  }
  if (!grad.congruent_with(params)) {
    throw std::invalid_argument("gradient bundle shape does not match params");
  }
  const Eigen::Index total = inputs.cols();
  for (Eigen::Index start = 0; start < total; start += kChunk) {
    const Eigen::Index cols = std::min(kChunk, total - start);
    const ForwardTape tape(params, inputs.middleCols(start, cols));
    tape.accumulate_gradient(sensitivities.segment(start, cols), grad);
  }
}

GradientBundle grad_theta(const ResNetParams& params,
                          const Eigen::MatrixXd& inputs,
                          const Eigen::VectorXd& sensitivities) {
  GradientBundle grad(params.config());
  accumulate_grad_theta(params, inputs, sensitivities, grad);
  if (!grad.all_finite()) {
    throw NumericalFailure("parameter gradient has non-finite entries");
  }
  return grad;
}

}  // namespace npde
