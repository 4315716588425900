#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mmphi/glm.hpp"

using namespace mmphi;

namespace {

// Weight straight from its definition (dmu/deta)^2 / Var(Y) with a central
// difference of the inverse link.
double weight_by_definition(LinkKind k, double eta) {
  const double h = 1e-5;
  const double dmu = (inverse_link(k, eta + h) - inverse_link(k, eta - h)) / (2 * h);
  const double mu = inverse_link(k, eta);
  double var = 1.0;
  if (k == LinkKind::logit || k == LinkKind::probit || k == LinkKind::cloglog) var = mu * (1 - mu);
  if (k == LinkKind::log_poisson) var = mu;
  return dmu * dmu / var;
}

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("link weights at eta = 0") {
  CHECK(link_weight(LinkKind::logit, 0.0) == doctest::Approx(0.25));
  CHECK(link_weight(LinkKind::probit, 0.0) == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-12));
  CHECK(link_weight(LinkKind::log_poisson, 0.0) == doctest::Approx(1.0));
  CHECK(link_weight(LinkKind::identity_gaussian, 0.0) == 1.0);
  // cloglog at eta = 0: e^0 exp(-1) / (1 - exp(-1)).
  CHECK(link_weight(LinkKind::cloglog, 0.0) == doctest::Approx(std::exp(-1.0) / (1 - std::exp(-1.0))).epsilon(1e-12));
}

TEST_CASE("link weights match the variance definition") {
  for (LinkKind k : {LinkKind::logit, LinkKind::probit, LinkKind::cloglog, LinkKind::log_poisson}) {
    for (double eta : {-4.0, -1.3, -0.2, 0.0, 0.7, 2.5, 4.0}) {
      CAPTURE(static_cast<int>(k));
      CAPTURE(eta);
      // 1 - mu underflows for cloglog beyond this range.
      if (k == LinkKind::cloglog && eta > 3.0) continue;
      CHECK(link_weight(k, eta) == doctest::Approx(weight_by_definition(k, eta)).epsilon(1e-6));
    }
  }
}

TEST_CASE("logit symmetry and positivity over the clamp range") {
  for (double eta = -30.0; eta <= 30.0; eta += 0.37) {
    CHECK(link_weight(LinkKind::logit, eta) == doctest::Approx(link_weight(LinkKind::logit, -eta)).epsilon(1e-14));
    CHECK(link_weight(LinkKind::probit, eta) == doctest::Approx(link_weight(LinkKind::probit, -eta)).epsilon(1e-12));
    for (LinkKind k : {LinkKind::logit, LinkKind::probit, LinkKind::cloglog, LinkKind::log_poisson,
                       LinkKind::identity_gaussian}) {
      CHECK(link_weight(k, eta) > 0.0);
      CHECK(std::isfinite(link_weight(k, eta)));
    }
  }
}

TEST_CASE("probit weight in the far tail follows the Mills asymptote") {
  // phi^2/(Phi(a) Phi(-a)) ~ a phi(a) for large a.
  const double a = 30.0;
  const double asym = a * std::exp(-0.5 * a * a) / std::sqrt(2 * std::numbers::pi);
  CHECK(link_weight(LinkKind::probit, a) == doctest::Approx(asym).epsilon(2e-3));
}

TEST_CASE("eta is clamped and non-finite eta raises") {
  CHECK(link_weight(LinkKind::logit, 100.0) == link_weight(LinkKind::logit, 30.0));
  CHECK(link_weight(LinkKind::log_poisson, -1e6) == link_weight(LinkKind::log_poisson, -30.0));
  CHECK_THROWS_AS(link_weight(LinkKind::logit, std::nan("")), NumericOverflow);
  CHECK_THROWS_AS(link_weight(LinkKind::logit, INFINITY), NumericOverflow);
}

TEST_CASE("link names round trip") {
  for (LinkKind k : {LinkKind::logit, LinkKind::probit, LinkKind::cloglog, LinkKind::log_poisson,
                     LinkKind::identity_gaussian}) {
    CHECK(parse_link(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_link("tanh"), InvalidArgument);
}

TEST_CASE("basis evaluation and factories") {
  const Basis q = Basis::full_quadratic(2);
  CHECK(q.size() == 6);
  const Vec g = q.evaluate(vec({2.0, 3.0}));
  CHECK(g.isApprox(vec({1, 2, 3, 6, 4, 9})));
  CHECK(Basis::linear(3).size() == 4);
  CHECK(Basis::with_interactions(3).size() == 7);
  CHECK(Basis::full_quadratic(3).size() == 10);
  CHECK(Basis::full_quadratic(1).evaluate(vec({-0.5})).isApprox(vec({1, -0.5, 0.25})));
  CHECK_THROWS_AS(q.evaluate(vec({1.0})), DimensionMismatch);
  CHECK_THROWS_AS(Basis(std::vector<Basis::Term>{{0, 0}, {0, 0}}), InvalidArgument);
  CHECK_THROWS_AS(Basis(std::vector<Basis::Term>{{0, -1}}), InvalidArgument);
  CHECK_THROWS_AS(Basis(std::vector<Basis::Term>{{0, 1}, {1}}), InvalidArgument);
  CHECK_THROWS_AS(Basis(std::vector<Basis::Term>{}), InvalidArgument);
}

TEST_CASE("model spec validation") {
  const Basis b = Basis::linear(1);
  CHECK_THROWS_AS(ModelSpec(LinkKind::logit, b, vec({1.0})), DimensionMismatch);
  Mat bad(2, 2);
  bad << 1, 1, 1, 1;
  CHECK_THROWS_AS(ModelSpec(LinkKind::logit, b, vec({0, 1}), bad), InvalidArgument);
  Mat wide(1, 3);
  wide << 1, 0, 0;
  CHECK_THROWS_AS(ModelSpec(LinkKind::logit, b, vec({0, 1}), wide), DimensionMismatch);
  Mat row(1, 2);
  row << 0, 1;
  const ModelSpec m(LinkKind::logit, b, vec({0, 1}), row);
  CHECK(m.num_contrasts() == 1);
  CHECK_FALSE(m.identity_contrast());
  CHECK(ModelSpec(LinkKind::logit, b, vec({0, 1})).identity_contrast());
}

TEST_CASE("design validation and duplicate merging") {
  Mat p(3, 1);
  p << -1, 0, -1;
  const Design d(p, vec({0.25, 0.5, 0.25}));
  CHECK(d.size() == 2);
  CHECK(d.weights().sum() == doctest::Approx(1.0));
  CHECK(d.weights()[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(Design(p, vec({0.5, 0.5, 0.5})), InvalidArgument);
  CHECK_THROWS_AS(Design(p, vec({0.0, 0.5, 0.5})), InvalidArgument);
  CHECK_THROWS_AS(Design(p, vec({0.5, 0.5})), InvalidArgument);
  const Design u = Design::uniform(p.topRows(2));
  CHECK(u.weights()[1] == doctest::Approx(0.5));
  CHECK(Design::point_mass(vec({0.3})).size() == 1);
}

TEST_CASE("fisher information examples") {
  const Basis b = Basis::linear(1);
  const ModelSpec m01(LinkKind::logit, b, vec({0, 1}));
  Mat expect = Mat::Zero(2, 2);
  expect(0, 0) = 0.25;
  CHECK(fisher_info(m01, Design::point_mass(vec({0.0}))).isApprox(expect, 1e-15));

  const ModelSpec m00(LinkKind::logit, b, vec({0, 0}));
  Mat p(2, 1);
  p << -1, 1;
  CHECK(fisher_info(m00, Design::uniform(p)).isApprox(0.25 * Mat::Identity(2, 2), 1e-15));
}

TEST_CASE("fisher information matches term-by-term summation") {
  const ModelSpec m(LinkKind::logit, Basis::linear(1), vec({-1.4, 2.3}));
  Mat p(3, 1);
  p << -1, 0, 1;
  const Vec w = vec({0.3832, 0.2660, 0.3508});
  const Mat info = fisher_info(m, Design(p, w));
  Mat oracle = Mat::Zero(2, 2);
  for (int i = 0; i < 3; ++i) {
    const double x = p(i, 0);
    const double eta = -1.4 + 2.3 * x;
    const double mu = 1.0 / (1.0 + std::exp(-eta));
    const double wt = w[i] * mu * (1 - mu);
    oracle(0, 0) += wt;
    oracle(0, 1) += wt * x;
    oracle(1, 0) += wt * x;
    oracle(1, 1) += wt * x * x;
  }
  CHECK((info - oracle).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fisher information is affine in the design and PSD") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(-1, 1);
  const ModelSpec m(LinkKind::probit, Basis::full_quadratic(2), vec({0.3, -0.5, 1.0, 0.2, -0.4, 0.6}));
  for (int rep = 0; rep < 10; ++rep) {
    Mat p1(4, 2), p2(5, 2);
    for (int i = 0; i < p1.size(); ++i) p1.data()[i] = u(rng);
    for (int i = 0; i < p2.size(); ++i) p2.data()[i] = u(rng);
    Vec w1 = (Vec::Random(4).array() + 1.5).matrix();
    Vec w2 = (Vec::Random(5).array() + 1.5).matrix();
    w1 /= w1.sum();
    w2 /= w2.sum();
    const Design a(p1, w1), b(p2, w2);
    const double alpha = 0.5 * (u(rng) + 1.0);
    const Mat lhs = fisher_info(m, mix(a, b, alpha));
    const Mat rhs = (1 - alpha) * fisher_info(m, a) + alpha * fisher_info(m, b);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    const Vec ev = Eigen::SelfAdjointEigenSolver<Mat>(lhs).eigenvalues();
    CHECK(ev.minCoeff() >= -1e-10 * lhs.trace());
  }
}

TEST_CASE("information scales linearly with a point weight") {
  const ModelSpec m(LinkKind::cloglog, Basis::linear(1), vec({0.2, 0.8}));
  Mat p(1, 1);
  p << 0.4;
  const Mat one = fisher_info(m, p, vec({1.0}));
  CHECK(fisher_info(m, p, vec({0.3})).isApprox(0.3 * one, 1e-15));
}
