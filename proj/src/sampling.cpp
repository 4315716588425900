#include "mmphi/sampling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "mmphi/errors.hpp"

namespace mmphi {

BoxDomain::BoxDomain(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() < 1 || lower.size() != upper.size()) {
    throw InvalidArgument("box bounds must be non-empty and of equal length");
  }
  if (!lower.allFinite() || !upper.allFinite()) throw InvalidArgument("box bounds must be finite");
  if (((upper - lower).array() <= 0.0).any()) {
    throw InvalidArgument("box needs lower < upper in every coordinate");
  }
}

bool BoxDomain::contains(const Vec& x, double tol) const {
  if (x.size() != lower.size()) return false;
  return ((x - lower).array() >= -tol).all() && ((upper - x).array() >= -tol).all();
}

Vec BoxDomain::from_unit(const Vec& u) const {
  return lower + u.cwiseProduct(upper - lower);
}

CandidatePool CandidatePool::from_points(Mat pts) {
  if (pts.rows() < 1) throw InvalidArgument("candidate pool is empty");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(pts.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto lex_less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index k = 0; k < pts.cols(); ++k)
      if (pts(a, k) != pts(b, k)) return pts(a, k) < pts(b, k);
    return false;
  };
  std::sort(order.begin(), order.end(), lex_less);
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (!lex_less(order[i - 1], order[i])) throw InvalidArgument("candidate pool points must be distinct");
  }
  CandidatePool pool;
  pool.points = std::move(pts);
  pool.provenance = Provenance::explicit_list;
  return pool;
}

namespace {

std::vector<double> axis_nodes(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    v[static_cast<std::size_t>(k)] = (lo * static_cast<double>(n - 1 - k) + hi * static_cast<double>(k)) / static_cast<double>(n - 1);
  }
  v.back() = hi;
  return v;
}

std::vector<double> axis_weights(int n) {
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  const double h = 1.0 / static_cast<double>(n - 1);
  if (n % 2 == 1 && n >= 3) {
    for (int k = 0; k < n; ++k) {
      const double c = (k == 0 || k == n - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
      w[static_cast<std::size_t>(k)] = c * h / 3.0;
    }
  } else {
    for (int k = 0; k < n; ++k) {
      w[static_cast<std::size_t>(k)] = (k == 0 || k == n - 1) ? 0.5 * h : h;
    }
  }
  return w;
}

std::size_t checked_grid_size(const BoxDomain& domain, const std::vector<int>& resolution,
                              std::size_t cap) {
  if (static_cast<int>(resolution.size()) != domain.dim()) {
    throw DimensionMismatch("grid resolution needs one entry per domain dimension");
  }
  std::size_t total = 1;
  for (int r : resolution) {
    if (r < 2) throw InvalidArgument("grid resolution must be >= 2 in every dimension");
    total *= static_cast<std::size_t>(r);
    if (total > cap) {
      throw PoolTooLarge("grid pool would exceed " + std::to_string(cap) + " points");
    }
  }
  return total;
}

// Row-major odometer over the tensor grid; calls f(row, index-per-dim).
template <class F>
void for_each_grid_index(const std::vector<int>& resolution, std::size_t total, F&& f) {
  std::vector<int> idx(resolution.size(), 0);
  for (std::size_t row = 0; row < total; ++row) {
    f(static_cast<Eigen::Index>(row), idx);
    for (int j = static_cast<int>(resolution.size()) - 1; j >= 0; --j) {
      if (++idx[static_cast<std::size_t>(j)] < resolution[static_cast<std::size_t>(j)]) break;
      idx[static_cast<std::size_t>(j)] = 0;
    }
  }
}

}  // namespace

CandidatePool grid_pool(const BoxDomain& domain, const std::vector<int>& resolution,
                        std::size_t max_points) {
  const std::size_t total = checked_grid_size(domain, resolution, max_points);
  std::vector<std::vector<double>> axes;
  for (int j = 0; j < domain.dim(); ++j) {
    axes.push_back(axis_nodes(domain.lower[j], domain.upper[j], resolution[static_cast<std::size_t>(j)]));
  }
  CandidatePool pool;
  pool.points.resize(static_cast<Eigen::Index>(total), domain.dim());
  for_each_grid_index(resolution, total, [&](Eigen::Index row, const std::vector<int>& idx) {
    for (int j = 0; j < domain.dim(); ++j) {
      pool.points(row, j) = axes[static_cast<std::size_t>(j)][static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
    }
  });
  pool.provenance = CandidatePool::Provenance::grid;
  pool.resolution = resolution;
  return pool;
}

QuadratureRule uniform_quadrature(const BoxDomain& domain, const std::vector<int>& resolution) {
  const std::size_t total = checked_grid_size(domain, resolution, kDefaultPoolCap);
  QuadratureRule rule;
  rule.nodes = grid_pool(domain, resolution).points;
  std::vector<std::vector<double>> w;
  for (int r : resolution) w.push_back(axis_weights(r));
  rule.weights.resize(static_cast<Eigen::Index>(total));
  for_each_grid_index(resolution, total, [&](Eigen::Index row, const std::vector<int>& idx) {
    double v = 1.0;
    for (std::size_t j = 0; j < idx.size(); ++j) v *= w[j][static_cast<std::size_t>(idx[j])];
    rule.weights[row] = v;
  });
  rule.weights /= rule.weights.sum();
  return rule;
}

namespace {

// Primitive polynomial data (degree s, coefficient bits a, initial m_k) for
// dimensions 2..10 of the Joe-Kuo "new-joe-kuo-6.21201" table.
struct SobolPoly {
  int s;
  unsigned a;
  std::array<std::uint32_t, 5> m;
};
constexpr std::array<SobolPoly, kSobolMaxDim - 1> kSobolPolys{{
    {1, 0, {1, 0, 0, 0, 0}},
    {2, 1, {1, 3, 0, 0, 0}},
    {3, 1, {1, 3, 1, 0, 0}},
    {3, 2, {1, 1, 1, 0, 0}},
    {4, 1, {1, 1, 3, 3, 0}},
    {4, 4, {1, 3, 5, 13, 0}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
}};

constexpr int kSobolBits = 32;

std::array<std::uint32_t, kSobolBits> direction_numbers(int dim_index) {
  std::array<std::uint32_t, kSobolBits> v{};
  if (dim_index == 0) {
    for (int k = 0; k < kSobolBits; ++k) v[static_cast<std::size_t>(k)] = 1u << (kSobolBits - 1 - k);
    return v;
  }
  const SobolPoly& poly = kSobolPolys[static_cast<std::size_t>(dim_index - 1)];
  const int s = poly.s;
  for (int k = 0; k < s; ++k) {
    v[static_cast<std::size_t>(k)] = poly.m[static_cast<std::size_t>(k)] << (kSobolBits - 1 - k);
  }
  for (int k = s; k < kSobolBits; ++k) {
    auto& out = v[static_cast<std::size_t>(k)];
    out = v[static_cast<std::size_t>(k - s)] ^ (v[static_cast<std::size_t>(k - s)] >> s);
    for (int i = 1; i < s; ++i) {
      if ((poly.a >> (s - 1 - i)) & 1u) out ^= v[static_cast<std::size_t>(k - i)];
    }
  }
  return v;
}

}  // namespace

Mat sobol_points(int d, std::size_t n, std::size_t skip) {
  if (d < 1 || d > kSobolMaxDim) {
    throw UnsupportedDimension("Sobol sequence supports dimensions 1.." + std::to_string(kSobolMaxDim));
  }
  if (skip + n > (std::size_t{1} << kSobolBits) - 1) throw InvalidArgument("Sobol index range too large");
  std::vector<std::array<std::uint32_t, kSobolBits>> dirs;
  for (int j = 0; j < d; ++j) dirs.push_back(direction_numbers(j));

  Mat out(static_cast<Eigen::Index>(n), d);
  std::vector<std::uint32_t> x(static_cast<std::size_t>(d), 0u);
  constexpr double kScale = 1.0 / 4294967296.0;
  const std::size_t end = skip + n;
  for (std::size_t idx = 0; idx < end; ++idx) {
    if (idx > 0) {
      // Gray-code step: flip the direction number of the lowest zero bit of idx - 1.
      std::size_t c = 0;
      std::size_t v = idx - 1;
      while (v & 1u) {
        v >>= 1;
        ++c;
      }
      for (int j = 0; j < d; ++j) x[static_cast<std::size_t>(j)] ^= dirs[static_cast<std::size_t>(j)][c];
    }
    if (idx >= skip) {
      for (int j = 0; j < d; ++j) {
        out(static_cast<Eigen::Index>(idx - skip), j) = static_cast<double>(x[static_cast<std::size_t>(j)]) * kScale;
      }
    }
  }
  return out;
}

std::vector<Vec> discretize_coefficient_box(const BoxDomain& box, std::size_t n_sobol,
                                            bool include_centroid, std::size_t skip) {
  std::vector<Vec> out;
  const Mat u = sobol_points(box.dim(), n_sobol, skip);
  for (Eigen::Index i = 0; i < u.rows(); ++i) out.push_back(box.from_unit(u.row(i).transpose()));
  if (include_centroid) out.push_back(box.center());
  return out;
}

}  // namespace mmphi
