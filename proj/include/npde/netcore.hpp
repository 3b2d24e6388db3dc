#pragma once

// Dense residual network u(x; theta) with scalar output.
//
//   L0      = W0 x + b0
//   L(i+1)  = act(W2[i] act(W1[i] L(i) + b1[i]) + b2[i]) + L(i)
//   u       = Wout L(n) + bout
//
// All parameters live in one flat buffer in checkpoint order:
// W0 (row-major), b0, then per block W1, b1, W2, b2, then Wout, bout,
// and finally the activation scale a when the network is adaptive.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace npde {

/// Raised when a forward value, loss or gradient stops being finite.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Activation { Relu, Sigmoid, Swish, SinCubed, AdaptiveSwish };

std::string_view to_string(Activation kind);
Activation parse_activation(std::string_view name);

struct NetworkConfig {
  int input_dim = 1;
  int width = 1;
  int blocks = 1;
  Activation activation = Activation::Swish;
  bool adaptive = false;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
  bool operator==(const NetworkConfig&) const = default;
};

/// m(d+1) + (2mn+1)(m+1), plus one for the adaptive scale.
std::size_t param_count(const NetworkConfig& cfg);

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixView = Eigen::Map<RowMajorMatrix>;
using ConstMatrixView = Eigen::Map<const RowMajorMatrix>;
using VectorView = Eigen::Map<Eigen::VectorXd>;
using ConstVectorView = Eigen::Map<const Eigen::VectorXd>;

/// Flat parameter storage with structured views.  Used both for the
/// network parameters and for gradients, which share the same layout.
class ParamSet {
 public:
  ParamSet() = default;
  /// Zero-filled set for `cfg`.
  explicit ParamSet(const NetworkConfig& cfg);

  const NetworkConfig& config() const { return cfg_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> flat() { return values_; }
  std::span<const double> flat() const { return values_; }

  MatrixView w0();
  ConstMatrixView w0() const;
  VectorView b0();
  ConstVectorView b0() const;
  MatrixView w1(int block);
  ConstMatrixView w1(int block) const;
  VectorView b1(int block);
  ConstVectorView b1(int block) const;
  MatrixView w2(int block);
  ConstMatrixView w2(int block) const;
  VectorView b2(int block);
  ConstVectorView b2(int block) const;
  VectorView wout();
  ConstVectorView wout() const;
  double& bout();
  double bout() const;
  /// Activation scale a; only valid for adaptive configs.
  double& scale();
  double scale() const;

  bool all_finite() const;
  /// Same config and same number of entries.
  bool congruent_with(const ParamSet& other) const;

 private:
  std::size_t block_offset(int block) const;

  NetworkConfig cfg_;
  std::vector<double> values_;
};

using ResNetParams = ParamSet;
using GradientBundle = ParamSet;

/// Glorot-uniform weights, zero biases, a = 1.  Deterministic in `seed`.
ResNetParams init_params(const NetworkConfig& cfg, std::uint64_t seed);

/// Activation value for pre-activation z and scale a (a is ignored unless
/// kind is AdaptiveSwish).
double activation_eval(Activation kind, double z, double a = 1.0);

struct ActivationDerivative {
  double dz;
  double da;
};
ActivationDerivative activation_deriv(Activation kind, double z,
                                      double a = 1.0);

/// Network output for one input vector of length input_dim.
double forward(const ResNetParams& params, std::span<const double> x);

/// Outputs for every column of `inputs` (input_dim x N).
Eigen::VectorXd forward_batch(const ResNetParams& params,
                              const Eigen::MatrixXd& inputs);

/// Gradient of sum_i s_i * forward(params, x_i) with respect to every
/// parameter.  Columns of `inputs` are the x_i, `sensitivities` the s_i.
GradientBundle grad_theta(const ResNetParams& params,
                          const Eigen::MatrixXd& inputs,
                          const Eigen::VectorXd& sensitivities);

/// Forward pass over a set of columns that keeps what the reverse pass
/// needs, so outputs and parameter gradients share one evaluation.
class ForwardTape {
 public:
  ForwardTape(const ResNetParams& params, const Eigen::MatrixXd& inputs);

  const Eigen::VectorXd& outputs() const { return outputs_; }
  /// Adds grad_theta of sum_i s_i * output_i into `grad`.
  void accumulate_gradient(const Eigen::VectorXd& sensitivities,
                           GradientBundle& grad) const;

 private:
  struct Block {
    Eigen::MatrixXd input;  // L(i)
    Eigen::MatrixXd act1;   // act(W1 L(i) + b1)
    Eigen::MatrixXd d1, d2;
    Eigen::MatrixXd da1, da2;
  };

  const ResNetParams* params_;
  Eigen::MatrixXd inputs_;
  std::vector<Block> blocks_;
  Eigen::MatrixXd last_;  // L(n)
  Eigen::VectorXd outputs_;
};

/// Accumulating form of grad_theta: adds into `grad`.
void accumulate_grad_theta(const ResNetParams& params,
                           const Eigen::MatrixXd& inputs,
                           const Eigen::VectorXd& sensitivities,
                           GradientBundle& grad);

}  // namespace npde
