#include "npde/sampling.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "npde/rng.hpp"

namespace npde {

namespace {

void check_args(Eigen::Index n, int dim) {
  if (n < 1) throw std::invalid_argument("sample count must be >= 1");
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
}

void check_range(double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("need lo < hi");
}

// Standard-normal column, redrawn in the (measure zero) event of a zero
// vector.
Eigen::VectorXd unit_direction(Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  double norm = 0.0;
  do {
    for (int j = 0; j < dim; ++j) v(j) = rng.normal();
    norm = v.norm();
  } while (norm == 0.0);
  return v / norm;
}

}  // namespace

double cube_volume(int dim, double lo, double hi) {
  return std::pow(hi - lo, dim);
}

double cube_surface(int dim, double lo, double hi) {
  return 2.0 * dim * std::pow(hi - lo, dim - 1);
}

double ball_volume(int dim) {
  return std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0);
}

double sphere_area(int dim) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

SampleBatch sample_cube_interior(Eigen::Index n, int dim, double lo, double hi,
                                 std::uint64_t seed) {
  check_args(n, dim);
  check_range(lo, hi);
  Rng rng(seed);
  SampleBatch batch;
  batch.points.resize(dim, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (int j = 0; j < dim; ++j) batch.points(j, c) = rng.uniform(lo, hi);
  }
  batch.measure = cube_volume(dim, lo, hi);
  return batch;
}

SampleBatch sample_cube_boundary(Eigen::Index n, int dim, double lo, double hi,
                                 std::uint64_t seed) {
  check_args(n, dim);
  check_range(lo, hi);
  Rng rng(seed);
  SampleBatch batch;
  batch.points.resize(dim, n);
  batch.normals = Eigen::MatrixXd::Zero(dim, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const auto face = rng.below(2 * static_cast<std::uint64_t>(dim));
    const auto axis = static_cast<int>(face / 2);
    const bool upper = face % 2 == 1;
    for (int j = 0; j < dim; ++j) batch.points(j, c) = rng.uniform(lo, hi);
    batch.points(axis, c) = upper ? hi : lo;
    (*batch.normals)(axis, c) = upper ? 1.0 : -1.0;
  }
  batch.measure = cube_surface(dim, lo, hi);
  return batch;
}

SampleBatch sample_ball_interior(Eigen::Index n, int dim, std::uint64_t seed) {
  check_args(n, dim);
  Rng rng(seed);
  SampleBatch batch;
  batch.points.resize(dim, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const Eigen::VectorXd dir = unit_direction(rng, dim);
    const double radius = std::pow(rng.open_unit(), 1.0 / dim);
    batch.points.col(c) = radius * dir;
  }
  batch.measure = ball_volume(dim);
  return batch;
}

SampleBatch sample_sphere(Eigen::Index n, int dim, std::uint64_t seed) {
  check_args(n, dim);
  Rng rng(seed);
  SampleBatch batch;
  batch.points.resize(dim, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    batch.points.col(c) = unit_direction(rng, dim);
  }
  batch.normals = batch.points;
  batch.measure = sphere_area(dim);
  return batch;
}

std::vector<SampleBatch> sample_periodic_pairs(Eigen::Index n, int dim,
                                               double lo, double hi,
                                               std::uint64_t seed) {
  check_args(n, dim);
  check_range(lo, hi);
  std::vector<SampleBatch> out;
  out.reserve(static_cast<std::size_t>(dim));
  for (int axis = 0; axis < dim; ++axis) {
    Rng rng(derive_seed(seed, "periodic-axis", static_cast<std::uint64_t>(axis)));
    SampleBatch batch;
    batch.points.resize(dim, n);
    for (Eigen::Index c = 0; c < n; ++c) {
      for (int j = 0; j < dim; ++j) {
        batch.points(j, c) = j == axis ? lo : rng.uniform(lo, hi);
      }
    }
    batch.partners = batch.points;
    batch.partners->row(axis).setConstant(hi);
    batch.pair_axis = axis;
    batch.measure = std::pow(hi - lo, dim - 1);
    out.push_back(std::move(batch));
  }
  return out;
}

}  // namespace npde
