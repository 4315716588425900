#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mmphi/criterion.hpp"

using namespace mmphi;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Mat diag24() {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = 2.0;
  m(1, 1) = 4.0;
  return m;
}

ModelSpec gaussian_line() { return ModelSpec(LinkKind::identity_gaussian, Basis::linear(1), vec({0, 0})); }

Design random_design(std::mt19937& rng, int n, int dim = 1) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_real_distribution<double> w(0.1, 1.0);
  Mat p(n, dim);
  Vec wt(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < dim; ++k) p(i, k) = u(rng);
    wt[i] = w(rng);
  }
  return Design(p, wt / wt.sum());
}

std::vector<ModelSpec> example1_models() {
  return {ModelSpec(LinkKind::logit, Basis::linear(1), vec({-1.4, 2.3})),
          ModelSpec(LinkKind::logit, Basis::linear(1), vec({0.5, 1.2}))};
}

EiMeasure unit_measure(int res) { return EiMeasure{BoxDomain(vec({-1.0}), vec({1.0})), {res}}; }

}  // namespace

TEST_CASE("phi_p values on diag(2, 4)") {
  const ModelSpec m = gaussian_line();
  CHECK(criterion_terms(m, diag24(), CriterionSpec::a_optimal()).value == doctest::Approx(0.375).epsilon(1e-14));
  CHECK(criterion_terms(m, diag24(), CriterionSpec::d_optimal()).value ==
        doctest::Approx(std::log(0.125)).epsilon(1e-14));
  CHECK(criterion_terms(m, diag24(), CriterionSpec::phi(2.0)).value ==
        doctest::Approx(std::sqrt((0.25 + 0.0625) / 2)).epsilon(1e-14));
  CHECK(criterion_terms(m, diag24(), CriterionSpec::d_optimal(P0Convention::root_det)).value ==
        doctest::Approx(std::sqrt(0.125)).epsilon(1e-14));
}

TEST_CASE("criterion terms satisfy target == tr(core * I)") {
  std::mt19937 rng(1);
  const ModelSpec m(LinkKind::logit, Basis::full_quadratic(1), vec({0.2, -1.0, 0.7}));
  EiMeasure meas{BoxDomain(vec({-1.0}), vec({1.0})), {41}};
  const Mat a = ei_moment_matrix(m, meas);
  for (int rep = 0; rep < 5; ++rep) {
    const Mat info = fisher_info(m, random_design(rng, 5));
    for (const CriterionSpec& c : {CriterionSpec::d_optimal(), CriterionSpec::a_optimal(), CriterionSpec::phi(2.5),
                                   CriterionSpec::d_optimal(P0Convention::root_det), CriterionSpec::ei(meas)}) {
      const CriterionTerms t = criterion_terms(m, info, c, &a);
      CHECK(t.target == doctest::Approx((t.core * info).trace()).epsilon(1e-10));
    }
  }
}

TEST_CASE("contrast matrices select parameters") {
  Mat b(1, 2);
  b << 0, 1;
  const ModelSpec m(LinkKind::identity_gaussian, Basis::linear(1), vec({0, 0}), b);
  // F = B I^{-1} B^T = 1/4.
  CHECK(criterion_terms(m, diag24(), CriterionSpec::a_optimal()).value == doctest::Approx(0.25));
  CHECK(criterion_terms(m, diag24(), CriterionSpec::d_optimal()).value == doctest::Approx(std::log(0.25)));
}

TEST_CASE("singular information raises") {
  Mat s(2, 2);
  s << 1, 1, 1, 1;
  CHECK_THROWS_AS(criterion_terms(gaussian_line(), s, CriterionSpec::a_optimal()), NotPositiveDefinite);
  CHECK_THROWS_AS(criterion_terms(gaussian_line(), diag24(), CriterionSpec::ei(unit_measure(5))), InvalidArgument);
}

TEST_CASE("criterion spec validation") {
  CHECK_THROWS_AS(CriterionSpec::phi(-1.0).validate(), InvalidArgument);
  CriterionSpec ei = CriterionSpec::ei(unit_measure(5));
  ei.ei_measure.reset();
  CHECK_THROWS_AS(ei.validate(), InvalidArgument);
  CHECK_NOTHROW(CriterionSpec::a_optimal().validate());
}

TEST_CASE("EI moment matrix examples") {
  const Mat a = ei_moment_matrix(gaussian_line(), unit_measure(201));
  CHECK(a(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(a(0, 1)) < 1e-12);
  CHECK(a(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));

  const ModelSpec lg(LinkKind::logit, Basis::linear(1), vec({0, 0}));
  const Mat b = ei_moment_matrix(lg, unit_measure(201));
  CHECK(b(0, 0) == doctest::Approx(1.0 / 16).epsilon(1e-12));
  CHECK(b(1, 1) == doctest::Approx(1.0 / 48).epsilon(1e-10));
}

TEST_CASE("EI moments converge under grid refinement") {
  const ModelSpec m(LinkKind::logit, Basis::full_quadratic(1), vec({0.5, 2.0, -1.5}));
  const Mat coarse = ei_moment_matrix(m, unit_measure(21));
  const Mat fine = ei_moment_matrix(m, unit_measure(201));
  CHECK((coarse - fine).cwiseAbs().maxCoeff() <= 1e-3 * fine.cwiseAbs().maxCoeff());
}

TEST_CASE("model set validation") {
  const auto ms = example1_models();
  CHECK_THROWS_AS(ModelSet(ms, {1.0}), InvalidArgument);
  CHECK_THROWS_AS(ModelSet(ms, {1.0, -0.5}), NonPositiveCriterion);
  CHECK_THROWS_AS(ModelSet(ms, {1.0, 1.0}, {0.7, 0.7}), InvalidArgument);
  CHECK_THROWS_AS(ModelSet(ms, {1.0, 1.0}, {1.2, -0.2}), InvalidArgument);
  CHECK_THROWS_AS(ModelSet({}, {}), InvalidArgument);
  const ModelSet ok(ms, {1.0, 2.0});
  CHECK(ok.prior(1) == doctest::Approx(0.5));
  CHECK(ok.ei_moment(0) == nullptr);
  const ModelSpec two_d(LinkKind::logit, Basis::linear(2), vec({0, 1, 1}));
  CHECK_THROWS_AS(ModelSet({ms[0], two_d}, {1.0, 1.0}), DimensionMismatch);
}

TEST_CASE("se and lse at local optima") {
  Mat p(2, 1);
  p << -1, 1;
  const Design opt = Design::uniform(p);
  const ModelSpec m = gaussian_line();
  const CriterionSpec a = CriterionSpec::a_optimal();
  const double v = phi_p_value(m, opt, a);
  const SeLse one = se_lse(opt, ModelSet({m}, {v}), a);
  CHECK(one.se == doctest::Approx(std::exp(1.0)));
  CHECK(one.lse == doctest::Approx(1.0));
  CHECK(one.efficiencies[0] == doctest::Approx(1.0));
  const SeLse two = se_lse(opt, ModelSet({m, m}, {v, v}), a);
  CHECK(two.se == doctest::Approx(2 * std::exp(1.0)));
  CHECK(two.lse == doctest::Approx(1.0 + std::log(2.0)));
}

TEST_CASE("sandwich bound on random designs") {
  std::mt19937 rng(2024);
  const auto ms = example1_models();
  for (const CriterionSpec& c : {CriterionSpec::a_optimal(), CriterionSpec::d_optimal()}) {
    // phi_opt values from a reference design; any positive value exercises the bound.
    Mat p(3, 1);
    p << -1, 0, 1;
    const Design ref = Design::uniform(p);
    const ModelSet set(ms, {phi_p_value(ms[0], ref, c) * 0.8, phi_p_value(ms[1], ref, c) * 0.9});
    for (int rep = 0; rep < 50; ++rep) {
      const Design d = random_design(rng, 4);
      const SeLse s = se_lse(d, set, c);
      const double min_eff = *std::min_element(s.efficiencies.begin(), s.efficiencies.end());
      CHECK(1.0 / s.lse <= min_eff + 1e-12);
      if (s.lse > std::log(2.0)) CHECK(min_eff <= 1.0 / (s.lse - std::log(2.0)) + 1e-12);
    }
  }
}

TEST_CASE("se is convex along design mixtures") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  const auto ms = example1_models();
  for (const CriterionSpec& c : {CriterionSpec::a_optimal(), CriterionSpec::d_optimal(), CriterionSpec::phi(2.0)}) {
    Mat p(3, 1);
    p << -1, 0, 1;
    const Design ref = Design::uniform(p);
    const ModelSet set(ms, {phi_p_value(ms[0], ref, c), phi_p_value(ms[1], ref, c)});
    for (int rep = 0; rep < 20; ++rep) {
      const Design a = random_design(rng, 3), b = random_design(rng, 4);
      const double alpha = u(rng);
      const double lhs = se_lse(mix(a, b, alpha), set, c).se;
      const double rhs = (1 - alpha) * se_lse(a, set, c).se + alpha * se_lse(b, set, c).se;
      CHECK(lhs <= rhs + 1e-9);
    }
  }
}

TEST_CASE("phi_p_value is invariant under support permutation") {
  std::mt19937 rng(5);
  const ModelSpec m(LinkKind::probit, Basis::full_quadratic(2), vec({0.1, 0.5, -0.3, 0.2, -0.6, 0.4}));
  const Design d = random_design(rng, 8, 2);
  std::vector<int> perm(8);
  for (int i = 0; i < 8; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  Mat p(8, 2);
  Vec w(8);
  for (int i = 0; i < 8; ++i) {
    p.row(i) = d.points().row(perm[static_cast<std::size_t>(i)]);
    w[i] = d.weights()[perm[static_cast<std::size_t>(i)]];
  }
  const Design shuffled(p, w);
  for (const CriterionSpec& c : {CriterionSpec::a_optimal(), CriterionSpec::d_optimal(), CriterionSpec::phi(0.7)}) {
    CHECK(phi_p_value(m, shuffled, c) == doctest::Approx(phi_p_value(m, d, c)).epsilon(1e-12));
  }
}

TEST_CASE("root_det is the p -> 0+ limit") {
  std::mt19937 rng(8);
  const ModelSpec m(LinkKind::logit, Basis::full_quadratic(1), vec({0.3, 1.1, -0.8}));
  const Design d = random_design(rng, 5);
  const double root = phi_p_value(m, d, CriterionSpec::d_optimal(P0Convention::root_det));
  const double small = phi_p_value(m, d, CriterionSpec::phi(1e-6));
  CHECK(small == doctest::Approx(root).epsilon(1e-4));
}

TEST_CASE("efficiency of the reference point and overflow shift") {
  const auto ms = example1_models();
  Mat p(3, 1);
  p << -1, 0, 1;
  const Design d = Design::uniform(p);
  const CriterionSpec a = CriterionSpec::a_optimal();
  const ModelSet set(ms, {phi_p_value(ms[0], d, a), phi_p_value(ms[1], d, a)});
  CHECK(phi_efficiency(0, d, set, a) == doctest::Approx(1.0));
  CHECK(overflow_shift({1.0, 2.0}) == 0.0);
  CHECK(overflow_shift({1.0, 600.2}) == 101.0);

  // A huge ratio keeps lse exact while se overflows.
  const ModelSet tiny(ms, {phi_p_value(ms[0], d, a) / 800.0, phi_p_value(ms[1], d, a)});
  const SeLse s = se_lse(d, tiny, a);
  CHECK(std::isfinite(s.lse));
  CHECK(s.lse == doctest::Approx(800.0 + std::log1p(std::exp(1.0 - 800.0))));
}
