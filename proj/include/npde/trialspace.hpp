#pragma once

// Trial solutions built on top of the raw network.
//
//   Raw                 u(x) = N(x)
//   BallZeroDirichlet   u(x) = (1 - |x|) N(x)        zero on the unit sphere
//   PeriodicEmbed       u(x) = N(E(x))               E = sin/cos harmonics

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "npde/netcore.hpp"

namespace npde {

enum class TrialKind { Raw, BallZeroDirichlet, PeriodicEmbed };

struct TrialFunction {
  TrialKind kind = TrialKind::Raw;
  /// Periods p_i; a single entry applies to every coordinate.
  std::vector<double> periods;
  /// Number of harmonics k.
  int harmonics = 0;

  static TrialFunction raw() { return {}; }
  static TrialFunction ball() { return {TrialKind::BallZeroDirichlet, {}, 0}; }
  static TrialFunction periodic(std::vector<double> periods, int harmonics);

  double period(int axis) const;
  /// Width of the network input for a d-dimensional domain.
  int network_input_dim(int dim) const;
  /// Throws std::invalid_argument when `cfg` cannot back this trial in
  /// dimension `dim`.
  void check_compatible(const NetworkConfig& cfg, int dim) const;

  bool operator==(const TrialFunction&) const = default;
};

/// "raw", "ball", "periodic:k=3" or "periodic:k=3:p=2" ("p=2,4" per axis).
TrialFunction parse_trial(std::string_view text);
std::string to_string(const TrialFunction& trial);

/// Features (sin(j 2 pi x_i / p_i), cos(j 2 pi x_i / p_i)) for i outer,
/// j = 1..k inner, sin before cos.
Eigen::VectorXd periodic_embed(std::span<const double> x,
                               std::span<const double> periods, int harmonics);

/// Network inputs for every column of `points` (d x N).
Eigen::MatrixXd network_inputs(const TrialFunction& trial,
                               const Eigen::MatrixXd& points);

double trial_eval(const TrialFunction& trial, const ResNetParams& params,
                  std::span<const double> x);

Eigen::VectorXd trial_eval_batch(const TrialFunction& trial,
                                 const ResNetParams& params,
                                 const Eigen::MatrixXd& points);

/// Network-side points and sensitivities equivalent to the domain-side
/// pairs (points.col(i), weights(i)).
struct SensitivityPoints {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd weights;
};
SensitivityPoints trial_sensitivity_points(const TrialFunction& trial,
                                           const Eigen::MatrixXd& points,
                                           const Eigen::VectorXd& weights);

/// Adds grad_theta of sum_i weights(i) * u(points.col(i)) into `grad`.
void accumulate_trial_gradient(const TrialFunction& trial,
                               const ResNetParams& params,
                               const Eigen::MatrixXd& points,
                               const Eigen::VectorXd& weights,
                               GradientBundle& grad);

/// Trial values at a set of points, kept together with the network tape so
/// that a later gradient needs no second forward pass.
class TrialTape {
 public:
  TrialTape(const TrialFunction& trial, const ResNetParams& params,
            const Eigen::MatrixXd& points);

  const Eigen::VectorXd& values() const { return values_; }
  /// Adds grad_theta of sum_i weights(i) * u(points.col(i)) into `grad`.
  void accumulate_gradient(const Eigen::VectorXd& weights,
                           GradientBundle& grad) const;

 private:
  std::vector<ForwardTape> chunks_;
  Eigen::VectorXd factor_;  // empty unless the trial rescales the network
  Eigen::VectorXd values_;
};

}  // namespace npde
