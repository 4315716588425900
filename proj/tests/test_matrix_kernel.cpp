#include <doctest.h>

#include <cmath>
#include <random>

#include "mmphi/matrix_kernel.hpp"

using namespace mmphi;

namespace {

Mat random_spd(int n, std::mt19937& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = z(rng);
  return a * a.transpose() + 0.5 * Mat::Identity(n, n);
}

// Cofactor expansion along the first row.
double cofactor_det(const Mat& m) {
  const auto n = m.rows();
  if (n == 1) return m(0, 0);
  double det = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    Mat minor(n - 1, n - 1);
    for (Eigen::Index i = 1; i < n; ++i) {
      Eigen::Index cc = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == c) continue;
        minor(i - 1, cc++) = m(i, j);
      }
    }
    det += ((c % 2) ? -1.0 : 1.0) * m(0, c) * cofactor_det(minor);
  }
  return det;
}

}  // namespace

TEST_CASE("factorize_spd on identity and diagonal matrices") {
  CHECK(factorize_spd(Mat::Identity(2, 2)).log_determinant() == doctest::Approx(0.0));
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 4.0;
  const auto f = factorize_spd(d);
  CHECK(f.log_determinant() == doctest::Approx(std::log(8.0)).epsilon(1e-14));
  CHECK(f.min_pivot() == doctest::Approx(2.0));
  CHECK(f.dim() == 2);
}

TEST_CASE("factorize_spd rejects singular and indefinite input") {
  Mat r(2, 2);
  r << 1, 1, 1, 1;
  CHECK_THROWS_AS(factorize_spd(r), NotPositiveDefinite);
  Mat ind(2, 2);
  ind << 1, 0, 0, -1;
  CHECK_THROWS_AS(factorize_spd(ind), NotPositiveDefinite);
  Mat tiny = Mat::Identity(2, 2);
  tiny(1, 1) = 1e-13;
  CHECK_THROWS_AS(factorize_spd(tiny), NotPositiveDefinite);
  CHECK_THROWS_AS(factorize_spd(Mat(2, 3)), InvalidArgument);
}

TEST_CASE("log determinant agrees with cofactor expansion") {
  std::mt19937 rng(7);
  for (int n = 1; n <= 3; ++n) {
    for (int rep = 0; rep < 10; ++rep) {
      const Mat m = random_spd(n, rng);
      const double det = cofactor_det(m);
      CHECK(std::exp(factorize_spd(m).log_determinant()) == doctest::Approx(det).epsilon(1e-10));
    }
  }
}

TEST_CASE("solve and inverse residuals") {
  std::mt19937 rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    const Mat m = random_spd(5, rng);
    const Vec b = Vec::Random(5);
    const auto f = factorize_spd(m);
    const Vec x = f.solve(b);
    CHECK((m * x - b).lpNorm<Eigen::Infinity>() <= 1e-10 * (1.0 + b.lpNorm<Eigen::Infinity>()));
    const Mat inv = f.inverse();
    CHECK((inv - inv.transpose()).norm() == 0.0);
    CHECK((m * inv - Mat::Identity(5, 5)).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK((f.lower() * f.lower().transpose() - m).norm() < 1e-10 * m.norm());
  }
}

TEST_CASE("only the lower triangle is read") {
  Mat m(2, 2);
  m << 2, 999, 1, 3;
  const auto f = factorize_spd(m);
  CHECK(std::exp(f.log_determinant()) == doctest::Approx(5.0));
  const Mat s = symmetrize(m);
  CHECK(s(0, 1) == 1.0);
}

TEST_CASE("trace_power examples") {
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 0.5;
  d(1, 1) = 0.25;
  CHECK(trace_power(d, 1.0) == doctest::Approx(0.75));
  CHECK(trace_power(d, 2.0) == doctest::Approx(0.3125));
  CHECK(trace_power(d, 0.5) == doctest::Approx(std::sqrt(0.5) + 0.5));
  CHECK(trace_power(d, 0.0) == 2.0);
  CHECK_THROWS_AS(trace_power(d, -1.0), InvalidArgument);

  Mat ind(2, 2);
  ind << 1, 0, 0, -1;
  CHECK_THROWS_AS(trace_power(ind, 0.5), NotPositiveDefinite);
  CHECK(trace_power(ind, 2.0) == doctest::Approx(2.0));
}

TEST_CASE("trace_power against direct products") {
  std::mt19937 rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const Mat m = random_spd(3, rng);
    const double direct2 = (m * m).trace();
    CHECK(trace_power(m, 2.0) == doctest::Approx(direct2).epsilon(1e-12));
    const double direct3 = (m * m * m).trace();
    CHECK(trace_power(m, 3.0) == doctest::Approx(direct3).epsilon(1e-12));
    CHECK(trace_power(m, 1.0) == doctest::Approx(m.trace()).epsilon(1e-12));
    CHECK(trace_power(m, 0.0) == 3.0);
    // Non-integer path against the integer path at nearby exponents.
    CHECK(trace_power(m, 2.0 + 1e-9) == doctest::Approx(direct2).epsilon(1e-7));
  }
}

TEST_CASE("symmetric eigen power reconstructs the matrix") {
  std::mt19937 rng(5);
  const Mat m = random_spd(4, rng);
  const SymmetricEigen<double> eig(m);
  CHECK((eig.power(1.0) - m).norm() < 1e-10 * m.norm());
  const Mat half = eig.power(0.5);
  CHECK((half * half - m).norm() < 1e-10 * m.norm());
  CHECK((eig.power(-1.0) * m - Mat::Identity(4, 4)).norm() < 1e-10);
  CHECK((integer_power(m, 3) - m * m * m).norm() < 1e-10 * (m * m * m).norm());
  CHECK((integer_power(m, 0) - Mat::Identity(4, 4)).norm() == 0.0);
}

TEST_CASE("kernel is templated on the scalar") {
  Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> m(2, 2);
  m << 2.0L, 0.5L, 0.5L, 1.0L;
  const auto f = factorize_spd(m);
  CHECK(static_cast<double>(std::exp(f.log_determinant())) == doctest::Approx(1.75));
  CHECK(static_cast<double>(trace_power(m, 2.0L)) == doctest::Approx(4.0 + 1.0 + 0.5));
  Eigen::MatrixXf mf = Eigen::MatrixXf::Identity(3, 3) * 2.0f;
  CHECK(factorize_spd(mf).log_determinant() == doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-6));
}
