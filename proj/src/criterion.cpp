#include "mmphi/criterion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mmphi {

void CriterionSpec::validate() const {
  if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument("criterion exponent p must be finite and >= 0");
  if (family == CriterionFamily::ei && !ei_measure) {
    throw InvalidArgument("EI criterion requires a prediction measure");
  }
}

std::string CriterionSpec::describe() const {
  std::ostringstream os;
  if (family == CriterionFamily::ei) {
    os << "EI";
  } else if (p == 0.0) {
    os << "D (p=0, " << (p0_convention == P0Convention::logdet ? "logdet" : "root_det") << ")";
  } else if (p == 1.0) {
    os << "A (p=1)";
  } else {
    os << "Phi_p (p=" << p << ")";
  }
  return os.str();
}

CriterionTerms criterion_terms(const ModelSpec& model, const Mat& info, const CriterionSpec& crit,
                               const Mat* ei_moment, bool fast_paths) {
  const auto fac = factorize_spd(info);
  CriterionTerms t;

  if (crit.family == CriterionFamily::ei) {
    if (ei_moment == nullptr) throw InvalidArgument("EI criterion evaluated without a moment matrix");
    const Mat inv_a = fac.solve(*ei_moment);
    t.value = inv_a.trace();
    t.core = symmetrize(fac.solve(inv_a.transpose()));
    t.target = t.value;
    t.scale = 1.0;
    return t;
  }

  const int q = model.num_contrasts();
  const double qd = static_cast<double>(q);
  const bool identity = fast_paths && model.identity_contrast();

  if (crit.p == 0.0) {
    double logdet_f = 0.0;
    if (identity) {
      logdet_f = -fac.log_determinant();
      t.core = fac.inverse();
    } else {
      const Mat inv_bt = fac.solve(model.contrast().transpose());
      const Mat f = symmetrize(model.contrast() * inv_bt);
      const auto ffac = factorize_spd(f);
      logdet_f = ffac.log_determinant();
      t.core = symmetrize(inv_bt * ffac.solve(inv_bt.transpose()));
    }
    t.target = qd;
    if (crit.p0_convention == P0Convention::logdet) {
      t.value = logdet_f;
      t.scale = 1.0;
    } else {
      t.value = std::exp(logdet_f / qd);
      t.scale = t.value / qd;
    }
    return t;
  }

  const double p = crit.p;
  if (identity && p == 1.0) {
    const Mat inv = fac.inverse();
    t.target = inv.trace();
    t.core = inv * inv;
  } else {
    const Mat inv_bt = fac.solve(model.contrast().transpose());
    const Mat f = symmetrize(model.contrast() * inv_bt);
    Mat f_pm1;
    if (is_integer_power(p)) {
      t.target = trace_power(f, p);
      f_pm1 = integer_power(f, static_cast<int>(p) - 1);
    } else {
      const SymmetricEigen<double> eig(f);
      if ((eig.values.array() <= 0.0).any()) throw NotPositiveDefinite("F has a non-positive eigenvalue");
      t.target = eig.values.array().pow(p).sum();
      f_pm1 = eig.power(p - 1.0);
    }
    t.core = symmetrize(inv_bt * f_pm1 * inv_bt.transpose());
  }
  t.value = std::pow(t.target / qd, 1.0 / p);
  t.scale = std::pow(qd, -1.0 / p) * std::pow(t.target, 1.0 / p - 1.0);
  return t;
}

Mat ei_moment_matrix(const ModelSpec& model, const QuadratureRule& rule) {
  if (rule.nodes.cols() != model.input_dim()) throw DimensionMismatch("quadrature dimension differs from the model's inputs");
  const int l = model.num_params();
  Mat a = Mat::Zero(l, l);
  for (Eigen::Index i = 0; i < rule.nodes.rows(); ++i) {
    const Vec g = model.basis().evaluate(rule.nodes.row(i).transpose());
    const double dmu = mean_derivative(model.link(), model.beta().dot(g));
    a.selfadjointView<Eigen::Lower>().rankUpdate(g, rule.weights[i] * dmu * dmu);
  }
  return symmetrize(a);
}

Mat ei_moment_matrix(const ModelSpec& model, const EiMeasure& measure) {
  if (!measure.domain) throw InvalidArgument("EI measure has no domain");
  return ei_moment_matrix(model, uniform_quadrature(*measure.domain, measure.resolution));
}

ModelSet::ModelSet(std::vector<ModelSpec> models, std::vector<double> phi_opt, std::vector<double> prior,
                   std::vector<Mat> ei_moments)
    : models_(std::move(models)),
      phi_opt_(std::move(phi_opt)),
      prior_(std::move(prior)),
      ei_moments_(std::move(ei_moments)) {
  const std::size_t m = models_.size();
  if (m < 1) throw InvalidArgument("model set needs at least one model");
  if (phi_opt_.size() != m) throw InvalidArgument("model set needs one local-optimum value per model");
  for (std::size_t j = 0; j < m; ++j) {
    if (!(phi_opt_[j] > 0.0) || !std::isfinite(phi_opt_[j])) {
      throw NonPositiveCriterion("local-optimum criterion value of model " + std::to_string(j) +
                                 " is not positive; efficiency ratios are undefined");
    }
    if (models_[j].input_dim() != models_.front().input_dim()) {
      throw DimensionMismatch("models in a set must share the input dimension");
    }
  }
  if (prior_.empty()) prior_.assign(m, 1.0 / static_cast<double>(m));
  if (prior_.size() != m) throw InvalidArgument("prior needs one probability per model");
  if (std::any_of(prior_.begin(), prior_.end(), [](double v) { return !(v >= 0.0); })) {
    throw InvalidArgument("prior probabilities must be non-negative");
  }
  const double total = std::accumulate(prior_.begin(), prior_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("prior probabilities must sum to one");
  if (!ei_moments_.empty() && ei_moments_.size() != m) {
    throw InvalidArgument("EI moments need one matrix per model");
  }
}

int ModelSet::max_params() const {
  int l = 0;
  for (const auto& mdl : models_) l = std::max(l, mdl.num_params());
  return l;
}

std::vector<Mat> ei_moments_for(const std::vector<ModelSpec>& models, const CriterionSpec& crit) {
  std::vector<Mat> out;
  if (!crit.is_ei()) return out;
  if (!crit.ei_measure || !crit.ei_measure->domain) throw InvalidArgument("EI measure has no domain");
  const QuadratureRule rule = uniform_quadrature(*crit.ei_measure->domain, crit.ei_measure->resolution);
  out.reserve(models.size());
  for (const auto& mdl : models) out.push_back(ei_moment_matrix(mdl, rule));
  return out;
}

double phi_p_value(const ModelSpec& model, const Design& design, const CriterionSpec& crit,
                   const Mat* ei_moment) {
  Mat own;
  if (crit.is_ei() && ei_moment == nullptr) {
    if (!crit.ei_measure) throw InvalidArgument("EI criterion requires a prediction measure");
    own = ei_moment_matrix(model, *crit.ei_measure);
    ei_moment = &own;
  }
  return criterion_terms(model, fisher_info(model, design), crit, ei_moment).value;
}

double phi_efficiency(int j, const Design& design, const ModelSet& set, const CriterionSpec& crit) {
  const double v = phi_p_value(set.model(j), design, crit, set.ei_moment(j));
  if (!(v > 0.0)) throw NonPositiveCriterion("criterion value is not positive; efficiency undefined");
  return set.phi_opt(j) / v;
}

double overflow_shift(const std::vector<double>& ratios) {
  const double mx = *std::max_element(ratios.begin(), ratios.end());
  return mx > 500.0 ? std::ceil(mx - 500.0) : 0.0;
}

SeLse se_lse(const Design& design, const ModelSet& set, const CriterionSpec& crit) {
  SeLse out;
  std::vector<double> ratios;
  for (int j = 0; j < set.size(); ++j) {
    const double v = phi_p_value(set.model(j), design, crit, set.ei_moment(j));
    out.values.push_back(v);
    ratios.push_back(v / set.phi_opt(j));
    out.efficiencies.push_back(set.phi_opt(j) / v);
  }
  out.shift = overflow_shift(ratios);
  for (double r : ratios) out.scaled_se += std::exp(r - out.shift);
  out.lse = out.shift + std::log(out.scaled_se);
  out.se = std::exp(out.lse);
  return out;
}

}  // namespace mmphi
