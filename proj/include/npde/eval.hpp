#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "npde/losses.hpp"
#include "npde/problems.hpp"
#include "npde/trialspace.hpp"

namespace npde {

/// sqrt(sum (exact - approx)^2 / sum exact^2).  Throws std::domain_error
/// when the exact values are all zero.
double relative_l2(const Eigen::VectorXd& approx, const Eigen::VectorXd& exact);

/// Relative L2 error of `approx` against the exact solution over a fresh
/// interior batch of n points drawn with `seed`.
double relative_l2(const BatchField& approx, const ProblemSpec& problem,
                   Eigen::Index n, std::uint64_t seed);

double relative_l2(const TrialFunction& trial, const ResNetParams& params,
                   const ProblemSpec& problem, Eigen::Index n,
                   std::uint64_t seed);

}  // namespace npde
