#pragma once

// Monte-Carlo loss functionals with finite-difference derivatives.
//
// Every loss term is evaluated through a BatchField, i.e. a function from
// a d x K matrix of points to K values.  Alongside each value the losses
// return sensitivity blocks: the points that were evaluated and the
// derivative of the loss with respect to the field value at each of them.
// Parameter gradients follow by pushing those blocks through the trial
// wrapper into grad_theta.

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "npde/netcore.hpp"
#include "npde/problems.hpp"
#include "npde/sampling.hpp"
#include "npde/trialspace.hpp"

namespace npde {

enum class Method { DGM, DRM };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

struct LossConfig {
  Method method = Method::DGM;
  double fd_step = 1e-4;
  double lambda = 0.0;
  /// Periodic value and derivative mismatch weights.
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  /// False when the trial satisfies the boundary condition by construction.
  bool use_penalty = true;

  void validate() const;
};

using ScalarField = std::function<double(std::span<const double>)>;
using BatchField = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

struct SensitivityBlock {
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;
};
using Sensitivities = std::vector<SensitivityBlock>;

struct InteriorTerm {
  double value = 0.0;
  Sensitivities sensitivities;
};

struct PenaltyTerm {
  double penalty = 0.0;
  /// Derivative-matching term; periodic conditions only.
  std::optional<double> penalty2;
  Sensitivities sensitivities;
  Sensitivities sensitivities2;
};

struct LossValue {
  double total = 0.0;
  double interior = 0.0;
  std::optional<double> penalty;
  std::optional<double> penalty2;
  Sensitivities sensitivities;
};

/// Central differences (u(x + h e_j) - u(x - h e_j)) / 2h.
Eigen::VectorXd fd_gradient(const ScalarField& u, std::span<const double> x,
                            double h);
/// sum_j (u(x + h e_j) - 2 u(x) + u(x - h e_j)) / h^2.
double fd_laplacian(const ScalarField& u, std::span<const double> x, double h);

/// measure * mean of the squared residual (DGM) or energy density (DRM).
InteriorTerm interior_loss(Method method, const ProblemSpec& problem,
                           const BatchField& u, const SampleBatch& batch,
                           double h);

/// measure * mean of the squared boundary mismatch.  Dirichlet, Neumann and
/// Robin take one batch with normals; periodic takes one paired batch per
/// axis and returns the value and derivative terms separately.
PenaltyTerm boundary_penalty(const ProblemSpec& problem, const BatchField& u,
                             std::span<const SampleBatch> batches, double h);

LossValue total_loss(const LossConfig& cfg, const ProblemSpec& problem,
                     const BatchField& u, const SampleBatch& interior,
                     std::span<const SampleBatch> boundary);

/// Field view of a network trial function.
BatchField trial_field(const TrialFunction& trial, const ResNetParams& params);
/// Field view of the exact solution.
BatchField exact_field(const ProblemSpec& problem);

LossValue total_loss(const LossConfig& cfg, const ProblemSpec& problem,
                     const TrialFunction& trial, const ResNetParams& params,
                     const SampleBatch& interior,
                     std::span<const SampleBatch> boundary);

/// grad_theta of the loss whose sensitivities are given.
GradientBundle loss_gradient(const TrialFunction& trial,
                             const ResNetParams& params,
                             const Sensitivities& sensitivities);

struct LossAndGradient {
  LossValue loss;  // sensitivities left empty
  GradientBundle gradient;
};

/// total_loss and its parameter gradient from a single forward pass over
/// every stencil point.
LossAndGradient loss_and_gradient(const LossConfig& cfg,
                                  const ProblemSpec& problem,
                                  const TrialFunction& trial,
                                  const ResNetParams& params,
                                  const SampleBatch& interior,
                                  std::span<const SampleBatch> boundary);

}  // namespace npde
