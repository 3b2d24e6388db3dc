#include "npde/eval.hpp"

#include <cmath>
#include <stdexcept>

namespace npde {

double relative_l2(const Eigen::VectorXd& approx,
                   const Eigen::VectorXd& exact) {
  if (approx.size() != exact.size()) {
    throw std::invalid_argument("relative_l2: size mismatch");
  }
  const double denom = exact.squaredNorm();
  if (denom == 0.0) {
    throw std::domain_error("relative_l2: exact solution is zero on sample");
  }
  return std::sqrt((exact - approx).squaredNorm() / denom);
}

double relative_l2(const BatchField& approx, const ProblemSpec& problem,
                   Eigen::Index n, std::uint64_t seed) {
  const auto batch = sample_interior(problem, n, seed);
  return relative_l2(approx(batch.points), exact_u_batch(problem, batch.points));
}

double relative_l2(const TrialFunction& trial, const ResNetParams& params,
                   const ProblemSpec& problem, Eigen::Index n,
                   std::uint64_t seed) {
  return relative_l2(trial_field(trial, params), problem, n, seed);
}

}  // namespace npde
