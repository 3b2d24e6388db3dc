#pragma once

// Boundary-value problems with closed-form solutions.
//
//   LinearCosine     -lap u + pi^2 u = f,  u = sum_k cos(pi x_k)
//                    on (0,1)^d, or (-1,1)^d for the periodic boundary
//   PeriodicCosine2  -lap u + pi^2 u = f,  u = sum_k cos(pi x_k) cos(2 pi x_k)
//                    on (-1,1)^d, periodic
//   NonlinearBall    -lap u + u^3 = f,     u = sin(pi/2 (1 - |x|))
//                    on the unit ball, u = 0 on the sphere

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "npde/sampling.hpp"

namespace npde {

enum class ProblemKind { LinearCosine, PeriodicCosine2, NonlinearBall };
enum class BoundaryKind { Dirichlet, Neumann, Robin, Periodic };

std::string_view to_string(BoundaryKind bc);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::LinearCosine;
  int dim = 1;
  BoundaryKind bc = BoundaryKind::Dirichlet;

  static ProblemSpec linear_cosine(int dim, BoundaryKind bc);
  static ProblemSpec periodic_cosine2(int dim);
  static ProblemSpec nonlinear_ball(int dim);

  bool is_ball() const { return kind == ProblemKind::NonlinearBall; }
  /// Cube bounds (meaningless for the ball).
  double lo() const;
  double hi() const;

  void validate() const;
  bool operator==(const ProblemSpec&) const = default;
};

/// Accepts "linear-cosine:<bc>:d=N", "periodic-cosine2:d=N" and
/// "nonlinear-ball:d=N".
ProblemSpec parse_problem(std::string_view text);
std::string to_string(const ProblemSpec& problem);

double exact_u(const ProblemSpec& problem, std::span<const double> x);
Eigen::VectorXd exact_grad(const ProblemSpec& problem,
                           std::span<const double> x);
double forcing_f(const ProblemSpec& problem, std::span<const double> x);

/// Boundary data for Dirichlet, Neumann and Robin conditions.  Throws
/// std::logic_error for periodic problems, which carry no g.
double boundary_g(const ProblemSpec& problem, std::span<const double> x,
                  std::span<const double> normal);

/// Pre-square PDE residual  -laplace + c(u) - f.
double residual_operator(const ProblemSpec& problem, double u, double laplace,
                         double f);
/// d(residual)/du.
double residual_du(const ProblemSpec& problem, double u);

/// Ritz energy density for value u and squared gradient norm.
double energy_density(const ProblemSpec& problem, double u, double grad_sq,
                      double f);
double energy_density(const ProblemSpec& problem, double u,
                      std::span<const double> grad, double f);
/// d(energy)/du with the gradient held fixed.
double energy_du(const ProblemSpec& problem, double u, double f);

/// Column-wise evaluation helpers.
Eigen::VectorXd exact_u_batch(const ProblemSpec& problem,
                              const Eigen::MatrixXd& points);
Eigen::VectorXd forcing_batch(const ProblemSpec& problem,
                              const Eigen::MatrixXd& points);

/// Uniform interior points of the problem's domain.
SampleBatch sample_interior(const ProblemSpec& problem, Eigen::Index n,
                            std::uint64_t seed);
/// Boundary batches matching the problem's boundary condition: one batch
/// with normals, or one batch of face pairs per axis for periodic problems
/// (n is then split evenly across axes).
std::vector<SampleBatch> sample_boundary(const ProblemSpec& problem,
                                         Eigen::Index n, std::uint64_t seed);

}  // namespace npde
