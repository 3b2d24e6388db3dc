#include "npde/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace npde {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPi2 = kPi * kPi;

// Below this radius the ball forcing uses its analytic limit.
constexpr double kOriginRadius = 1e-8;

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

void check_point(const ProblemSpec& problem, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(problem.dim)) {
    throw std::invalid_argument("point dimension " + std::to_string(x.size()) +
                                " does not match problem dimension " +
                                std::to_string(problem.dim));
  }
}

}  // namespace

std::string_view to_string(BoundaryKind bc) {
  switch (bc) {
    case BoundaryKind::Dirichlet: return "dirichlet";
    case BoundaryKind::Neumann: return "neumann";
    case BoundaryKind::Robin: return "robin";
    case BoundaryKind::Periodic: return "periodic";
  }
  return "?";
}

ProblemSpec ProblemSpec::linear_cosine(int dim, BoundaryKind bc) {
  ProblemSpec p{ProblemKind::LinearCosine, dim, bc};
  p.validate();
  return p;
}

ProblemSpec ProblemSpec::periodic_cosine2(int dim) {
  ProblemSpec p{ProblemKind::PeriodicCosine2, dim, BoundaryKind::Periodic};
  p.validate();
  return p;
}

ProblemSpec ProblemSpec::nonlinear_ball(int dim) {
  ProblemSpec p{ProblemKind::NonlinearBall, dim, BoundaryKind::Dirichlet};
  p.validate();
  return p;
}

double ProblemSpec::lo() const {
  return bc == BoundaryKind::Periodic ? -1.0 : 0.0;
}

double ProblemSpec::hi() const { return 1.0; }

void ProblemSpec::validate() const {
  if (dim < 1) throw std::invalid_argument("problem dimension must be >= 1");
  if (kind == ProblemKind::PeriodicCosine2 && bc != BoundaryKind::Periodic) {
    throw std::invalid_argument("periodic-cosine2 is periodic only");
  }
  if (kind == ProblemKind::NonlinearBall && bc != BoundaryKind::Dirichlet) {
    throw std::invalid_argument("nonlinear-ball is Dirichlet only");
  }
}

ProblemSpec parse_problem(std::string_view text) {
  std::vector<std::string_view> parts;
  for (std::size_t start = 0;;) {
    const auto pos = text.find(':', start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  auto parse_dim = [&](std::string_view field) {
    if (!field.starts_with("d=")) {
      throw std::invalid_argument("expected d=N in problem '" +
                                  std::string(text) + "'");
    }
    return std::stoi(std::string(field.substr(2)));
  };
  if (parts[0] == "linear-cosine" && parts.size() == 3) {
    for (auto bc : {BoundaryKind::Dirichlet, BoundaryKind::Neumann,
                    BoundaryKind::Robin, BoundaryKind::Periodic}) {
      if (parts[1] == to_string(bc)) {
        return ProblemSpec::linear_cosine(parse_dim(parts[2]), bc);
      }
    }
  } else if (parts[0] == "periodic-cosine2" && parts.size() == 2) {
    return ProblemSpec::periodic_cosine2(parse_dim(parts[1]));
  } else if (parts[0] == "nonlinear-ball" && parts.size() == 2) {
    return ProblemSpec::nonlinear_ball(parse_dim(parts[1]));
  }
  throw std::invalid_argument("unknown problem '" + std::string(text) + "'");
}

std::string to_string(const ProblemSpec& problem) {
  const auto d = ":d=" + std::to_string(problem.dim);
  switch (problem.kind) {
    case ProblemKind::LinearCosine:
      return "linear-cosine:" + std::string(to_string(problem.bc)) + d;
    case ProblemKind::PeriodicCosine2: return "periodic-cosine2" + d;
    case ProblemKind::NonlinearBall: return "nonlinear-ball" + d;
  }
  return "?";
}

double exact_u(const ProblemSpec& problem, std::span<const double> x) {
  check_point(problem, x);
  double sum = 0.0;
  switch (problem.kind) {
    case ProblemKind::LinearCosine:
      for (double v : x) sum += std::cos(kPi * v);
      return sum;
    case ProblemKind::PeriodicCosine2:
      for (double v : x) sum += std::cos(kPi * v) * std::cos(2.0 * kPi * v);
      return sum;
    case ProblemKind::NonlinearBall:
      return std::sin(0.5 * kPi * (1.0 - norm(x)));
  }
  return 0.0;
}

Eigen::VectorXd exact_grad(const ProblemSpec& problem,
                           std::span<const double> x) {
  check_point(problem, x);
  Eigen::VectorXd g(problem.dim);
  switch (problem.kind) {
    case ProblemKind::LinearCosine:
      for (int k = 0; k < problem.dim; ++k) g(k) = -kPi * std::sin(kPi * x[k]);
      break;
    case ProblemKind::PeriodicCosine2:
      // cos(a)cos(2a) = (cos(a) + cos(3a)) / 2
      for (int k = 0; k < problem.dim; ++k) {
        g(k) = -0.5 * kPi * (std::sin(kPi * x[k]) +
                             3.0 * std::sin(3.0 * kPi * x[k]));
      }
      break;
    case ProblemKind::NonlinearBall: {
      const double r = norm(x);
      if (r == 0.0) {
        g.setZero();
        break;
      }
      const double du_dr = -0.5 * kPi * std::cos(0.5 * kPi * (1.0 - r));
      for (int k = 0; k < problem.dim; ++k) g(k) = du_dr * x[k] / r;
      break;
    }
  }
  return g;
}

double forcing_f(const ProblemSpec& problem, std::span<const double> x) {
  check_point(problem, x);
  double sum = 0.0;
  switch (problem.kind) {
    case ProblemKind::LinearCosine:
      for (double v : x) sum += std::cos(kPi * v);
      return 2.0 * kPi2 * sum;
    case ProblemKind::PeriodicCosine2:
      for (double v : x) {
        sum += kPi2 * std::cos(kPi * v) + 5.0 * kPi2 * std::cos(3.0 * kPi * v);
      }
      return sum;
    case ProblemKind::NonlinearBall: {
      const double r = norm(x);
      const double phase = 0.5 * kPi * (1.0 - r);
      const double s = std::sin(phase);
      // cos(phase) (d - 1) / r, with cos(phase) = sin(pi r / 2) ~ pi r / 2
      const double radial = r < kOriginRadius
                                ? 0.5 * kPi * (problem.dim - 1)
                                : std::cos(phase) * (problem.dim - 1) / r;
      return 0.25 * kPi2 * s + 0.5 * kPi * radial + s * s * s;
    }
  }
  return 0.0;
}

double boundary_g(const ProblemSpec& problem, std::span<const double> x,
                  std::span<const double> normal) {
  if (problem.bc == BoundaryKind::Periodic) {
    throw std::logic_error("periodic problems have no boundary data g");
  }
  if (problem.bc == BoundaryKind::Dirichlet) return exact_u(problem, x);
  if (normal.size() != x.size()) {
    throw std::invalid_argument("normal dimension mismatch");
  }
  const Eigen::VectorXd grad = exact_grad(problem, x);
  double dn = 0.0;
  for (std::size_t j = 0; j < normal.size(); ++j) {
    dn += grad(static_cast<Eigen::Index>(j)) * normal[j];
  }
  return problem.bc == BoundaryKind::Robin ? dn + exact_u(problem, x) : dn;
}

double residual_operator(const ProblemSpec& problem, double u, double laplace,
                         double f) {
  if (problem.kind == ProblemKind::NonlinearBall) {
    return -laplace + u * u * u - f;
  }
  return -laplace + kPi2 * u - f;
}

double residual_du(const ProblemSpec& problem, double u) {
  return problem.kind == ProblemKind::NonlinearBall ? 3.0 * u * u : kPi2;
}

double energy_density(const ProblemSpec& problem, double u, double grad_sq,
                      double f) {
  if (problem.kind == ProblemKind::NonlinearBall) {
    return 0.5 * grad_sq + 0.25 * u * u * u * u - f * u;
  }
  return 0.5 * (grad_sq + kPi2 * u * u) - f * u;
}

double energy_density(const ProblemSpec& problem, double u,
                      std::span<const double> grad, double f) {
  double grad_sq = 0.0;
  for (double g : grad) grad_sq += g * g;
  return energy_density(problem, u, grad_sq, f);
}

double energy_du(const ProblemSpec& problem, double u, double f) {
  if (problem.kind == ProblemKind::NonlinearBall) return u * u * u - f;
  return kPi2 * u - f;
}

Eigen::VectorXd exact_u_batch(const ProblemSpec& problem,
                              const Eigen::MatrixXd& points) {
  Eigen::VectorXd out(points.cols());
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    out(c) = exact_u(problem, {points.col(c).data(),
                               static_cast<std::size_t>(points.rows())});
  }
  return out;
}

Eigen::VectorXd forcing_batch(const ProblemSpec& problem,
                              const Eigen::MatrixXd& points) {
  Eigen::VectorXd out(points.cols());
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    out(c) = forcing_f(problem, {points.col(c).data(),
                                 static_cast<std::size_t>(points.rows())});
  }
  return out;
}

SampleBatch sample_interior(const ProblemSpec& problem, Eigen::Index n,
                            std::uint64_t seed) {
  if (problem.is_ball()) return sample_ball_interior(n, problem.dim, seed);
  return sample_cube_interior(n, problem.dim, problem.lo(), problem.hi(), seed);
}

std::vector<SampleBatch> sample_boundary(const ProblemSpec& problem,
                                         Eigen::Index n, std::uint64_t seed) {
  if (problem.is_ball()) return {sample_sphere(n, problem.dim, seed)};
  if (problem.bc == BoundaryKind::Periodic) {
    const auto per_axis = std::max<Eigen::Index>(
        1, static_cast<Eigen::Index>(std::llround(
               static_cast<double>(n) / problem.dim)));
    return sample_periodic_pairs(per_axis, problem.dim, problem.lo(),
                                 problem.hi(), seed);
  }
  return {sample_cube_boundary(n, problem.dim, problem.lo(), problem.hi(),
                               seed)};
}

}  // namespace npde
