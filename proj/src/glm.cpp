#include "mmphi/glm.hpp"

#include <algorithm>
#include <set>

namespace mmphi {

std::string_view to_string(LinkKind kind) {
  switch (kind) {
    case LinkKind::logit: return "logit";
    case LinkKind::probit: return "probit";
    case LinkKind::cloglog: return "cloglog";
    case LinkKind::log_poisson: return "log-poisson";
    case LinkKind::identity_gaussian: return "identity-gaussian";
  }
  return "unknown";
}

LinkKind parse_link(std::string_view name) {
  if (name == "logit" || name == "logistic") return LinkKind::logit;
  if (name == "probit") return LinkKind::probit;
  if (name == "cloglog") return LinkKind::cloglog;
  if (name == "log-poisson" || name == "poisson" || name == "log") return LinkKind::log_poisson;
  if (name == "identity-gaussian" || name == "identity" || name == "gaussian") {
    return LinkKind::identity_gaussian;
  }
  throw InvalidArgument("unknown link function '" + std::string(name) + "'");
}

Basis::Basis(std::vector<Term> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw InvalidArgument("basis needs at least one term");
  dim_ = static_cast<int>(terms_.front().size());
  if (dim_ < 1) throw InvalidArgument("basis terms need at least one input variable");
  std::set<Term> seen;
  for (const auto& t : terms_) {
    if (static_cast<int>(t.size()) != dim_) {
      throw InvalidArgument("basis terms have inconsistent input dimension");
    }
    if (std::any_of(t.begin(), t.end(), [](int e) { return e < 0; })) {
      throw InvalidArgument("basis exponents must be non-negative integers");
    }
    if (!seen.insert(t).second) throw InvalidArgument("basis terms must be distinct");
  }
}

Basis Basis::linear(int d) {
  std::vector<Term> terms{Term(d, 0)};
  for (int j = 0; j < d; ++j) {
    Term t(d, 0);
    t[j] = 1;
    terms.push_back(t);
  }
  return Basis(std::move(terms));
}

Basis Basis::with_interactions(int d) {
  auto terms = linear(d).terms();
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      Term t(d, 0);
      t[i] = t[j] = 1;
      terms.push_back(t);
    }
  }
  return Basis(std::move(terms));
}

Basis Basis::full_quadratic(int d) {
  auto terms = with_interactions(d).terms();
  for (int j = 0; j < d; ++j) {
    Term t(d, 0);
    t[j] = 2;
    terms.push_back(t);
  }
  return Basis(std::move(terms));
}

ModelSpec::ModelSpec(LinkKind link, Basis basis, Vec beta, std::optional<Mat> contrast)
    : link_(link), basis_(std::move(basis)), beta_(std::move(beta)) {
  const int l = basis_.size();
  if (l < 1) throw InvalidArgument("model basis is empty");
  if (beta_.size() != l) {
    throw DimensionMismatch("coefficient vector has length " + std::to_string(beta_.size()) +
                            " but the basis has " + std::to_string(l) + " terms");
  }
  if (contrast) {
    if (contrast->cols() != l) throw DimensionMismatch("contrast matrix column count differs from basis size");
    if (contrast->rows() < 1 || contrast->rows() > l) {
      throw InvalidArgument("contrast matrix needs 1..l rows");
    }
    Eigen::FullPivLU<Mat> lu(*contrast);
    if (lu.rank() != contrast->rows()) throw InvalidArgument("contrast matrix must have full row rank");
    contrast_ = *contrast;
    identity_contrast_ = contrast_.rows() == l && contrast_.isIdentity(0.0);
  } else {
    contrast_ = Mat::Identity(l, l);
    identity_contrast_ = true;
  }
}

Design::Design(const Mat& points, const Vec& weights) {
  if (points.rows() != weights.size() || points.rows() < 1) {
    throw InvalidArgument("design needs one weight per support point and at least one point");
  }
  if ((weights.array() <= 0.0).any() || !weights.allFinite()) {
    throw InvalidArgument("design weights must be strictly positive");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-12) {
    throw InvalidArgument("design weights must sum to one");
  }
  std::vector<Eigen::Index> keep;
  std::vector<double> merged;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    bool found = false;
    for (std::size_t k = 0; k < keep.size(); ++k) {
      if ((points.row(i) - points.row(keep[k])).cwiseAbs().maxCoeff() <= kPointTolerance) {
        merged[k] += weights[i];
        found = true;
        break;
      }
    }
    if (!found) {
      keep.push_back(i);
      merged.push_back(weights[i]);
    }
  }
  points_.resize(static_cast<Eigen::Index>(keep.size()), points.cols());
  weights_.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    points_.row(static_cast<Eigen::Index>(k)) = points.row(keep[k]);
    weights_[static_cast<Eigen::Index>(k)] = merged[k];
  }
}

Design Design::point_mass(const Vec& x) {
  return Design(x.transpose(), Vec::Ones(1));
}

Design Design::uniform(const Mat& points) {
  const auto n = points.rows();
  Vec w = Vec::Constant(n, 1.0 / static_cast<double>(n));
  w /= w.sum();
  return Design(points, w);
}

Design mix(const Design& xi, const Design& xi_prime, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("mixture weight must lie in [0, 1]");
  if (xi.input_dim() != xi_prime.input_dim()) throw DimensionMismatch("mixing designs of different dimension");
  if (alpha == 0.0) return xi;
  if (alpha == 1.0) return xi_prime;
  Mat pts(xi.size() + xi_prime.size(), xi.input_dim());
  pts << xi.points(), xi_prime.points();
  Vec w(pts.rows());
  w << (1.0 - alpha) * xi.weights(), alpha * xi_prime.weights();
  w /= w.sum();
  return Design(pts, w);
}

Mat fisher_info(const ModelSpec& model, const Mat& points, const Vec& weights) {
  if (points.cols() != model.input_dim()) throw DimensionMismatch("design dimension differs from the model's inputs");
  const int l = model.num_params();
  Mat info = Mat::Zero(l, l);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Vec g = model.basis().evaluate(points.row(i).transpose());
    const double w = link_weight(model.link(), model.beta().dot(g));
    info.selfadjointView<Eigen::Lower>().rankUpdate(g, weights[i] * w);
  }
  return symmetrize(info);
}

Mat fisher_info(const ModelSpec& model, const Design& design) {
  return fisher_info(model, design.points(), design.weights());
}

}  // namespace mmphi
