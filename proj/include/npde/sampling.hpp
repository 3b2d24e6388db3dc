#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace npde {

/// Monte-Carlo points over one set, stored column-wise (d x n), together
/// with the Lebesgue measure of that set.
struct SampleBatch {
  Eigen::MatrixXd points;
  double measure = 0.0;
  /// Outward unit normals, one column per point (boundary sets only).
  std::optional<Eigen::MatrixXd> normals;
  /// Periodic face pairs: `points` lie on x_k = lo, `partners` on x_k = hi.
  std::optional<int> pair_axis;
  std::optional<Eigen::MatrixXd> partners;

  int dim() const { return static_cast<int>(points.rows()); }
  Eigen::Index size() const { return points.cols(); }
};

double cube_volume(int dim, double lo, double hi);
double cube_surface(int dim, double lo, double hi);
double ball_volume(int dim);
double sphere_area(int dim);

SampleBatch sample_cube_interior(Eigen::Index n, int dim, double lo, double hi,
                                 std::uint64_t seed);

/// Faces chosen uniformly; normals are +-e_j.
SampleBatch sample_cube_boundary(Eigen::Index n, int dim, double lo, double hi,
                                 std::uint64_t seed);

/// Gaussian direction with radius U^(1/d).
SampleBatch sample_ball_interior(Eigen::Index n, int dim, std::uint64_t seed);

SampleBatch sample_sphere(Eigen::Index n, int dim, std::uint64_t seed);

/// One batch per axis k of n opposite-face pairs.
std::vector<SampleBatch> sample_periodic_pairs(Eigen::Index n, int dim,
                                               double lo, double hi,
                                               std::uint64_t seed);

}  // namespace npde
