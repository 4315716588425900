#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmphi/errors.hpp"
#include "mmphi/matrix_kernel.hpp"

namespace mmphi {

enum class LinkKind { logit, probit, cloglog, log_poisson, identity_gaussian };

std::string_view to_string(LinkKind kind);
LinkKind parse_link(std::string_view name);

/// Linear predictors are clamped to [-kEtaClamp, kEtaClamp] before any link
/// evaluation.
inline constexpr double kEtaClamp = 30.0;

namespace detail {

template <class Scalar>
Scalar clamp_eta(Scalar eta) {
  if (!std::isfinite(static_cast<double>(eta))) {
    throw NumericOverflow("linear predictor is not finite");
  }
  return std::clamp(eta, Scalar(-kEtaClamp), Scalar(kEtaClamp));
}

template <class Scalar>
Scalar std_normal_pdf(Scalar x) {
  return std::exp(Scalar(-0.5) * x * x) / std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>);
}

/// Phi(x) through erfc so that both tails keep full relative precision.
template <class Scalar>
Scalar std_normal_cdf(Scalar x) {
  return Scalar(0.5) * std::erfc(-x / std::numbers::sqrt2_v<Scalar>);
}

}  // namespace detail

/// Inverse link mu(eta).
template <class Scalar>
Scalar inverse_link(LinkKind kind, Scalar eta) {
  eta = detail::clamp_eta(eta);
  switch (kind) {
    case LinkKind::logit:
      return Scalar(1) / (Scalar(1) + std::exp(-eta));
    case LinkKind::probit:
      return detail::std_normal_cdf(eta);
    case LinkKind::cloglog:
      return -std::expm1(-std::exp(eta));
    case LinkKind::log_poisson:
      return std::exp(eta);
    case LinkKind::identity_gaussian:
      return eta;
  }
  return eta;
}

/// d mu / d eta, the factor entering the prediction moment matrix.
template <class Scalar>
Scalar mean_derivative(LinkKind kind, Scalar eta) {
  eta = detail::clamp_eta(eta);
  switch (kind) {
    case LinkKind::logit: {
      const Scalar e = std::exp(-std::abs(eta));
      return e / ((Scalar(1) + e) * (Scalar(1) + e));
    }
    case LinkKind::probit:
      return detail::std_normal_pdf(eta);
    case LinkKind::cloglog:
      return std::exp(eta - std::exp(eta));
    case LinkKind::log_poisson:
      return std::exp(eta);
    case LinkKind::identity_gaussian:
      return Scalar(1);
  }
  return Scalar(1);
}

/// GLM weight w(eta) = [Var(Y) h'(mu)^2]^{-1} = (dmu/deta)^2 / Var(Y).
///
/// cloglog: mu = 1 - exp(-e^eta), dmu/deta = e^eta exp(-e^eta) and
/// Var = mu (1 - mu), so w = e^{2 eta} exp(-e^eta) / (1 - exp(-e^eta)).
/// The result is floored at the smallest normal number: for large positive eta
/// the cloglog weight is below anything representable.
template <class Scalar>
Scalar link_weight(LinkKind kind, Scalar eta) {
  eta = detail::clamp_eta(eta);
  Scalar w{};
  switch (kind) {
    case LinkKind::logit: {
      const Scalar e = std::exp(-std::abs(eta));
      w = e / ((Scalar(1) + e) * (Scalar(1) + e));
      break;
    }
    case LinkKind::probit: {
      // phi^2 / (Phi(a) Phi(-a)) with a = |eta|; the Mills ratio phi(a)/Phi(-a)
      // is formed first so neither factor underflows at |eta| = 30.
      const Scalar a = std::abs(eta);
      const Scalar pdf = detail::std_normal_pdf(a);
      const Scalar upper_tail = detail::std_normal_cdf(-a);
      w = pdf * (pdf / upper_tail) / detail::std_normal_cdf(a);
      break;
    }
    case LinkKind::cloglog: {
      const Scalar ee = std::exp(eta);
      w = std::exp(Scalar(2) * eta - ee - std::log(-std::expm1(-ee)));
      break;
    }
    case LinkKind::log_poisson:
      w = std::exp(eta);
      break;
    case LinkKind::identity_gaussian:
      w = Scalar(1);
      break;
  }
  return std::max(w, std::numeric_limits<Scalar>::min());
}

/// Monomial basis g(x) = (prod_j x_j^{e_kj})_k over d input variables.
class Basis {
 public:
  using Term = std::vector<int>;

  Basis() = default;
  explicit Basis(std::vector<Term> terms);

  /// Intercept plus the d linear terms.
  static Basis linear(int d);
  /// Linear plus all pairwise products x_i x_j (i < j).
  static Basis with_interactions(int d);
  /// Linear, pairwise products and squares; for d = 1 this is [1, x, x^2].
  static Basis full_quadratic(int d);

  int size() const { return static_cast<int>(terms_.size()); }
  int input_dim() const { return dim_; }
  const std::vector<Term>& terms() const { return terms_; }

  template <class Derived>
  VectorX<typename Derived::Scalar> evaluate(const Eigen::MatrixBase<Derived>& x) const {
    using Scalar = typename Derived::Scalar;
    if (x.size() != dim_) throw DimensionMismatch("basis evaluated at a point of the wrong dimension");
    VectorX<Scalar> g(size());
    for (int k = 0; k < size(); ++k) {
      Scalar v(1);
      for (int j = 0; j < dim_; ++j) {
        for (int e = 0; e < terms_[k][j]; ++e) v *= x[j];
      }
      g[k] = v;
    }
    return g;
  }

  bool operator==(const Basis&) const = default;

 private:
  std::vector<Term> terms_;
  int dim_ = 0;
};

/// One GLM hypothesis M = (h, g, beta) with linear contrast matrix B (q x l).
class ModelSpec {
 public:
  ModelSpec(LinkKind link, Basis basis, Vec beta, std::optional<Mat> contrast = std::nullopt);

  LinkKind link() const { return link_; }
  const Basis& basis() const { return basis_; }
  const Vec& beta() const { return beta_; }
  const Mat& contrast() const { return contrast_; }
  bool identity_contrast() const { return identity_contrast_; }
  int num_params() const { return basis_.size(); }
  int num_contrasts() const { return static_cast<int>(contrast_.rows()); }
  int input_dim() const { return basis_.input_dim(); }

  template <class Derived>
  double eta(const Eigen::MatrixBase<Derived>& x) const {
    return beta_.dot(basis_.evaluate(x));
  }
  template <class Derived>
  double weight(const Eigen::MatrixBase<Derived>& x) const {
    return link_weight(link_, eta(x));
  }

 private:
  LinkKind link_;
  Basis basis_;
  Vec beta_;
  Mat contrast_;
  bool identity_contrast_ = true;
};

/// Approximate design: distinct support points (rows of `points`) carrying
/// strictly positive weights that sum to one.
class Design {
 public:
  /// Coordinate tolerance under which two support points are the same point.
  static constexpr double kPointTolerance = 1e-12;

  Design() = default;
  /// Validates the weights and merges duplicate points (summing their weights).
  Design(const Mat& points, const Vec& weights);

  Eigen::Index size() const { return points_.rows(); }
  int input_dim() const { return static_cast<int>(points_.cols()); }
  const Mat& points() const { return points_; }
  const Vec& weights() const { return weights_; }
  auto point(Eigen::Index i) const { return points_.row(i).transpose(); }

  /// Single-point design (weight one) at x.
  static Design point_mass(const Vec& x);
  /// Uniform weights on the given points.
  static Design uniform(const Mat& points);

 private:
  Mat points_;
  Vec weights_;
};

/// Mixture (1 - alpha) xi + alpha xi'.
Design mix(const Design& xi, const Design& xi_prime, double alpha);

/// w(x, M).
template <class Derived>
double glm_weight(const ModelSpec& model, const Eigen::MatrixBase<Derived>& x) {
  return model.weight(x);
}

/// I(xi, M) = sum_i lambda_i w(x_i, M) g(x_i) g(x_i)^T.
Mat fisher_info(const ModelSpec& model, const Design& design);
/// Same sum with arbitrary (non-normalized) weights; used by the weight solver.
Mat fisher_info(const ModelSpec& model, const Mat& points, const Vec& weights);

}  // namespace mmphi
