#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmphi/glm.hpp"
#include "mmphi/matrix_kernel.hpp"
#include "mmphi/sampling.hpp"

namespace mmphi {

enum class CriterionFamily { phi_p, ei };

/// How the p = 0 member of the family is scored: log det F, or the
/// geometric-mean form det(F)^{1/q}.
enum class P0Convention { logdet, root_det };

/// Prediction measure for EI: uniform on `domain` (the design region when
/// unset), integrated with a tensor rule at `resolution`.
struct EiMeasure {
  std::optional<BoxDomain> domain;
  std::vector<int> resolution;
};

struct CriterionSpec {
  CriterionFamily family = CriterionFamily::phi_p;
  double p = 0.0;
  P0Convention p0_convention = P0Convention::logdet;
  std::optional<EiMeasure> ei_measure;

  static CriterionSpec d_optimal(P0Convention conv = P0Convention::logdet) {
    return {CriterionFamily::phi_p, 0.0, conv, std::nullopt};
  }
  static CriterionSpec a_optimal() { return {CriterionFamily::phi_p, 1.0, P0Convention::logdet, std::nullopt}; }
  static CriterionSpec phi(double p) { return {CriterionFamily::phi_p, p, P0Convention::logdet, std::nullopt}; }
  static CriterionSpec ei(EiMeasure measure) {
    return {CriterionFamily::ei, 1.0, P0Convention::logdet, std::move(measure)};
  }

  bool is_ei() const { return family == CriterionFamily::ei; }
  bool is_p0() const { return family == CriterionFamily::phi_p && p == 0.0; }
  void validate() const;
  std::string describe() const;
};

/// Everything the sensitivity machinery needs from one model at one design.
///
/// Moving the design towards a unit mass at x changes the criterion at rate
///   scale * (target - w(x) g(x)^T core g(x)),
/// with target == tr(core * I).
struct CriterionTerms {
  double value = 0.0;
  double scale = 1.0;
  double target = 0.0;
  Mat core;
};

/// Evaluates Phi_p (or EI) and its first-order terms at information `info`.
/// `ei_moment` is required for the EI family. With `fast_paths`, identity
/// contrasts use I^{-1} / I^{-2} cores directly for D and A.
CriterionTerms criterion_terms(const ModelSpec& model, const Mat& info, const CriterionSpec& crit,
                               const Mat* ei_moment = nullptr, bool fast_paths = true);

/// A = sum_nodes weight * g g^T (dmu/deta)^2.
Mat ei_moment_matrix(const ModelSpec& model, const QuadratureRule& rule);
Mat ei_moment_matrix(const ModelSpec& model, const EiMeasure& measure);

/// Finite surrogate model set with cached local-optimum criterion values.
class ModelSet {
 public:
  ModelSet(std::vector<ModelSpec> models, std::vector<double> phi_opt,
           std::vector<double> prior = {}, std::vector<Mat> ei_moments = {});

  int size() const { return static_cast<int>(models_.size()); }
  const ModelSpec& model(int j) const { return models_[static_cast<std::size_t>(j)]; }
  const std::vector<ModelSpec>& models() const { return models_; }
  double phi_opt(int j) const { return phi_opt_[static_cast<std::size_t>(j)]; }
  const std::vector<double>& phi_opt() const { return phi_opt_; }
  double prior(int j) const { return prior_[static_cast<std::size_t>(j)]; }
  const std::vector<double>& prior() const { return prior_; }
  /// nullptr unless EI moments were attached.
  const Mat* ei_moment(int j) const {
    return ei_moments_.empty() ? nullptr : &ei_moments_[static_cast<std::size_t>(j)];
  }
  int max_params() const;
  int input_dim() const { return models_.front().input_dim(); }

 private:
  std::vector<ModelSpec> models_;
  std::vector<double> phi_opt_;
  std::vector<double> prior_;
  std::vector<Mat> ei_moments_;
};

/// Moment matrices for every model when `crit` is EI; empty otherwise.
std::vector<Mat> ei_moments_for(const std::vector<ModelSpec>& models, const CriterionSpec& crit);

double phi_p_value(const ModelSpec& model, const Design& design, const CriterionSpec& crit,
                   const Mat* ei_moment = nullptr);

/// phi_opt_j / Phi_p(xi, M_j).
double phi_efficiency(int j, const Design& design, const ModelSet& set, const CriterionSpec& crit);

/// Exponent shift applied before exponentiating ratios Phi_j / phi_opt_j:
/// zero unless the largest ratio exceeds 500.
double overflow_shift(const std::vector<double>& ratios);

struct SeLse {
  double se = 0.0;       ///< sum_j exp(ratio_j); may be +inf when the shift is active
  double lse = 0.0;      ///< log(se), exact even when se itself overflows
  double shift = 0.0;    ///< exponent shift c used in the evaluation
  double scaled_se = 0;  ///< sum_j exp(ratio_j - c)
  std::vector<double> values;
  std::vector<double> efficiencies;
};

SeLse se_lse(const Design& design, const ModelSet& set, const CriterionSpec& crit);

}  // namespace mmphi
