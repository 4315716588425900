#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmphi/matrix_kernel.hpp"

namespace mmphi {

/// Axis-aligned box [lower, upper] in R^d.
struct BoxDomain {
  Vec lower;
  Vec upper;

  BoxDomain() = default;
  BoxDomain(Vec lo, Vec hi);

  int dim() const { return static_cast<int>(lower.size()); }
  Vec center() const { return 0.5 * (lower + upper); }
  double volume() const { return (upper - lower).prod(); }
  bool contains(const Vec& x, double tol = 1e-12) const;
  /// lower + u (upper - lower), coordinate-wise.
  Vec from_unit(const Vec& u) const;
};

/// Finite set of candidate design points, one per row.
struct CandidatePool {
  enum class Provenance { grid, explicit_list };

  Mat points;
  Provenance provenance = Provenance::explicit_list;
  std::vector<int> resolution;  // per dimension, grid pools only

  Eigen::Index size() const { return points.rows(); }
  int dim() const { return static_cast<int>(points.cols()); }
  auto point(Eigen::Index i) const { return points.row(i).transpose(); }

  static CandidatePool from_points(Mat pts);
};

inline constexpr std::size_t kDefaultPoolCap = 10'000'000;

/// Full tensor grid with both endpoints in every dimension. The first
/// coordinate varies slowest.
CandidatePool grid_pool(const BoxDomain& domain, const std::vector<int>& resolution,
                        std::size_t max_points = kDefaultPoolCap);

/// Largest dimension with embedded direction numbers.
inline constexpr int kSobolMaxDim = 10;

/// Indexing of the generated sequence: point 0 is the origin; `skip` drops
/// that many leading points.
inline constexpr const char* kSobolConvention =
    "unscrambled Sobol, Joe-Kuo direction numbers, Gray-code order, index 0 = origin";

/// Points `skip`, ..., `skip + n - 1` of the d-dimensional Sobol sequence in
/// [0, 1)^d, one per row.
Mat sobol_points(int d, std::size_t n, std::size_t skip = 0);

/// Scaled Sobol points inside `box`, optionally followed by the box centroid.
std::vector<Vec> discretize_coefficient_box(const BoxDomain& box, std::size_t n_sobol,
                                            bool include_centroid, std::size_t skip = 0);

/// Tensor-product quadrature rule on a box, weights summing to one (a uniform
/// probability measure). Composite Simpson in every dimension with an odd
/// resolution, composite trapezoid otherwise.
struct QuadratureRule {
  Mat nodes;
  Vec weights;
};
QuadratureRule uniform_quadrature(const BoxDomain& domain, const std::vector<int>& resolution);

}  // namespace mmphi
