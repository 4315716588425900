#include "mmphi/sensitivity.hpp"

#include <cmath>

namespace mmphi {

PoolCache::PoolCache(const ModelSet& set, const Mat& points) : points_(points) {
  if (points.cols() != set.input_dim()) throw DimensionMismatch("point dimension differs from the model inputs");
  rows_.reserve(static_cast<std::size_t>(set.size()));
  for (int j = 0; j < set.size(); ++j) {
    const ModelSpec& mdl = set.model(j);
    Mat r(points.rows(), mdl.num_params());
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      const Vec g = mdl.basis().evaluate(points.row(i).transpose());
      const double w = link_weight(mdl.link(), mdl.beta().dot(g));
      r.row(i) = std::sqrt(w) * g.transpose();
    }
    rows_.push_back(std::move(r));
  }
}

Mat PoolCache::information(int model, const Vec& weights) const {
  const Mat& r = rows(model);
  Mat info = Mat::Zero(r.cols(), r.cols());
  info.selfadjointView<Eigen::Lower>().rankUpdate(r.transpose() * weights.cwiseSqrt().asDiagonal());
  return symmetrize(info);
}

PoolCache PoolCache::subset(const std::vector<Eigen::Index>& idx) const {
  PoolCache out;
  out.points_.resize(static_cast<Eigen::Index>(idx.size()), points_.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.points_.row(static_cast<Eigen::Index>(k)) = points_.row(idx[k]);
  for (const Mat& r : rows_) {
    Mat sub(static_cast<Eigen::Index>(idx.size()), r.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) sub.row(static_cast<Eigen::Index>(k)) = r.row(idx[k]);
    out.rows_.push_back(std::move(sub));
  }
  return out;
}

SensitivityContext::SensitivityContext(const Design& design, const ModelSet& set, const CriterionSpec& crit,
                                       SensitivityOptions opts)
    : set_(&set), opts_(opts) {
  terms_.reserve(static_cast<std::size_t>(set.size()));
  for (int j = 0; j < set.size(); ++j) {
    terms_.push_back(criterion_terms(set.model(j), fisher_info(set.model(j), design), crit, set.ei_moment(j),
                                     opts_.fast_paths));
  }
  finalize(set, crit);
}

SensitivityContext::SensitivityContext(const PoolCache& support, const Vec& weights, const ModelSet& set,
                                       const CriterionSpec& crit, SensitivityOptions opts)
    : set_(&set), opts_(opts) {
  terms_.reserve(static_cast<std::size_t>(set.size()));
  for (int j = 0; j < set.size(); ++j) {
    terms_.push_back(criterion_terms(set.model(j), support.information(j, weights), crit, set.ei_moment(j),
                                     opts_.fast_paths));
  }
  finalize(set, crit);
}

void SensitivityContext::finalize(const ModelSet& set, const CriterionSpec& crit) {
  const int m = set.size();
  weights_.assign(static_cast<std::size_t>(m), 0.0);
  objective_ = 0.0;
  shift_ = 0.0;
  switch (opts_.objective) {
    case Objective::maximin: {
      std::vector<double> ratios;
      for (int j = 0; j < m; ++j) ratios.push_back(value(j) / set.phi_opt(j));
      shift_ = opts_.forced_shift ? *opts_.forced_shift : overflow_shift(ratios);
      for (int j = 0; j < m; ++j) {
        const double e = std::exp(ratios[static_cast<std::size_t>(j)] - shift_);
        weights_[static_cast<std::size_t>(j)] = e / set.phi_opt(j);
        objective_ += e;
      }
      break;
    }
    case Objective::phi_compromise:
      for (int j = 0; j < m; ++j) {
        weights_[static_cast<std::size_t>(j)] = set.prior(j);
        objective_ += set.prior(j) * value(j);
      }
      break;
    case Objective::eff_compromise:
      for (int j = 0; j < m; ++j) {
        const double v = value(j);
        if (!(v > 0.0)) throw NonPositiveCriterion("eff-compromise needs positive criterion values");
        weights_[static_cast<std::size_t>(j)] = set.prior(j) * set.phi_opt(j) / (v * v);
        objective_ -= set.prior(j) * set.phi_opt(j) / v;
      }
      break;
    case Objective::local:
      if (m != 1) throw InvalidArgument("local objective needs a single-model set");
      weights_[0] = 1.0;
      objective_ = value(0);
      break;
  }
  constant_ = 0.0;
  for (int j = 0; j < m; ++j) {
    const auto& t = terms_[static_cast<std::size_t>(j)];
    constant_ += weights_[static_cast<std::size_t>(j)] * t.scale * t.target;
  }
  dp_norm_ = 1.0;
  if (!crit.is_ei() && crit.p > 0.0) {
    dp_norm_ = std::pow(static_cast<double>(set.model(0).num_contrasts()), 1.0 / crit.p);
  }
}

std::vector<double> SensitivityContext::values() const {
  std::vector<double> v;
  for (const auto& t : terms_) v.push_back(t.value);
  return v;
}

std::vector<double> SensitivityContext::efficiencies() const {
  std::vector<double> e;
  for (int j = 0; j < num_models(); ++j) e.push_back(set_->phi_opt(j) / value(j));
  return e;
}

double SensitivityContext::quadratic_sum(const Vec& x) const {
  double acc = 0.0;
  for (int j = 0; j < num_models(); ++j) {
    const ModelSpec& mdl = set_->model(j);
    const Vec g = mdl.basis().evaluate(x);
    const double w = link_weight(mdl.link(), mdl.beta().dot(g));
    const auto& t = terms_[static_cast<std::size_t>(j)];
    acc += weights_[static_cast<std::size_t>(j)] * t.scale * w * g.dot(t.core * g);
  }
  return acc;
}

double SensitivityContext::dir_derivative_point(const Vec& x) const {
  return constant_ - quadratic_sum(x);
}

double SensitivityContext::dp_sensitivity(const Vec& x) const {
  return dp_norm_ * quadratic_sum(x);
}

double SensitivityContext::dir_derivative_design(const Design& xi_prime) const {
  double acc = 0.0;
  for (int j = 0; j < num_models(); ++j) {
    const auto& t = terms_[static_cast<std::size_t>(j)];
    const Mat info_prime = fisher_info(set_->model(j), xi_prime);
    acc += weights_[static_cast<std::size_t>(j)] * t.scale * (t.target - (t.core * info_prime).trace());
  }
  return acc;
}

Vec SensitivityContext::dp_over(const PoolCache& cache) const {
  Vec acc = Vec::Zero(cache.size());
  for (int j = 0; j < num_models(); ++j) {
    const auto& t = terms_[static_cast<std::size_t>(j)];
    const Mat& r = cache.rows(j);
    const double factor = weights_[static_cast<std::size_t>(j)] * t.scale;
    acc.noalias() += factor * (r * t.core).cwiseProduct(r).rowwise().sum();
  }
  return dp_norm_ * acc;
}

Vec SensitivityContext::dir_derivative_over(const PoolCache& cache) const {
  return (Vec::Constant(cache.size(), constant_) - dp_over(cache) / dp_norm_).eval();
}

SensitivityContext::Scan SensitivityContext::scan(const PoolCache& cache) const {
  Scan s;
  s.phi = dir_derivative_over(cache);
  s.argmin = 0;
  s.min = s.phi.size() > 0 ? s.phi[0] : 0.0;
  for (Eigen::Index i = 1; i < s.phi.size(); ++i) {
    if (s.phi[i] < s.min) {
      s.min = s.phi[i];
      s.argmin = i;
    }
  }
  return s;
}

}  // namespace mmphi
