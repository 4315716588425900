#pragma once

#include <optional>
#include <vector>

#include "mmphi/criterion.hpp"

namespace mmphi {

/// Which design objective the directional derivatives belong to.
///
///  maximin         se = sum_j exp(Phi_j / phi_opt_j)
///  phi_compromise  sum_j p_j Phi_j
///  eff_compromise  -sum_j p_j phi_opt_j / Phi_j   (minimized)
///  local           Phi_0 of the single model in the set
enum class Objective { maximin, phi_compromise, eff_compromise, local };

/// Rows sqrt(w_j(x)) g_j(x)^T for every model j and every point x, so that
/// information matrices and quadratic forms over a fixed point set reduce to
/// dense products.
class PoolCache {
 public:
  PoolCache(const ModelSet& set, const Mat& points);

  Eigen::Index size() const { return points_.rows(); }
  const Mat& points() const { return points_; }
  const Mat& rows(int model) const { return rows_[static_cast<std::size_t>(model)]; }

  /// sum_i weights_i w_j(x_i) g_j(x_i) g_j(x_i)^T.
  Mat information(int model, const Vec& weights) const;
  /// Cache restricted to the given point indices.
  PoolCache subset(const std::vector<Eigen::Index>& idx) const;

 private:
  PoolCache() = default;
  Mat points_;
  std::vector<Mat> rows_;
};

struct SensitivityOptions {
  Objective objective = Objective::maximin;
  /// Overrides the automatic overflow shift (maximin only).
  std::optional<double> forced_shift;
  bool fast_paths = true;
};

/// Cached per-model quantities at one design: Phi_j, the model weights
/// (Phi-tilde_j for maximin) and the cores M_j of the quadratic forms.
///
/// For the maximin objective every derivative is expressed in units of
/// exp(-shift); ratios such as phi / objective() are unaffected.
class SensitivityContext {
 public:
  SensitivityContext(const Design& design, const ModelSet& set, const CriterionSpec& crit,
                     SensitivityOptions opts = {});
  /// Design given as weights over cached points; zero weights are allowed.
  SensitivityContext(const PoolCache& support, const Vec& weights, const ModelSet& set,
                     const CriterionSpec& crit, SensitivityOptions opts = {});

  Objective objective_kind() const { return opts_.objective; }
  /// Objective value in the context's units (scaled se for maximin).
  double objective() const { return objective_; }
  double shift() const { return shift_; }
  /// se and lse in unscaled units (maximin only).
  double se() const { return std::exp(lse()); }
  double lse() const { return shift_ + std::log(objective_); }

  int num_models() const { return static_cast<int>(terms_.size()); }
  double value(int j) const { return terms_[static_cast<std::size_t>(j)].value; }
  std::vector<double> values() const;
  /// Phi-tilde_j (maximin) or the analogous chain-rule factor of the objective.
  double model_weight(int j) const { return weights_[static_cast<std::size_t>(j)]; }
  const CriterionTerms& terms(int j) const { return terms_[static_cast<std::size_t>(j)]; }
  std::vector<double> efficiencies() const;

  /// phi(x, xi).
  double dir_derivative_point(const Vec& x) const;
  /// phi(xi', xi), through tr(M_j I_j(xi')).
  double dir_derivative_design(const Design& xi_prime) const;
  /// d_p(x, xi), the positive part driving the multiplicative update.
  double dp_sensitivity(const Vec& x) const;

  /// phi over every cached point.
  Vec dir_derivative_over(const PoolCache& cache) const;
  /// d_p over every cached point.
  Vec dp_over(const PoolCache& cache) const;

  struct Scan {
    Vec phi;
    Eigen::Index argmin = 0;
    double min = 0.0;
  };
  /// phi over the cache with the lowest-index argmin.
  Scan scan(const PoolCache& cache) const;

  /// sum_j weight_j scale_j target_j, so that phi = constant - d_p / dp_normalizer.
  double constant() const { return constant_; }
  /// q^{1/p} for Phi_p with p > 0 (q of the first model), 1 otherwise.
  double dp_normalizer() const { return dp_norm_; }

 private:
  void finalize(const ModelSet& set, const CriterionSpec& crit);
  double quadratic_sum(const Vec& x) const;

  const ModelSet* set_ = nullptr;
  SensitivityOptions opts_;
  std::vector<CriterionTerms> terms_;
  std::vector<double> weights_;
  double objective_ = 0.0;
  double shift_ = 0.0;
  double constant_ = 0.0;
  double dp_norm_ = 1.0;
};

}  // namespace mmphi
