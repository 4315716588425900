#include "mmphi/model_sets.hpp"

#include <cmath>
#include <random>

namespace mmphi {

std::vector<ModelSpec> models_from_coefficients(LinkKind link, const Basis& basis, const std::vector<Vec>& betas) {
  std::vector<ModelSpec> out;
  out.reserve(betas.size());
  for (const auto& b : betas) out.emplace_back(link, basis, b);
  return out;
}

std::vector<ModelSpec> nested_polynomial_models(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> std_normal(0.0, 1.0);

  Vec b3(6);
  for (int k = 0; k < 6; ++k) b3[k] = std_normal(rng);
  auto perturb = [&](int n) {
    Vec b(n);
    for (int k = 0; k < n; ++k) b[k] = b3[k] + 0.5 * std::abs(b3[k]) * std_normal(rng);
    return b;
  };
  const Vec b2 = perturb(4);
  const Vec b1 = perturb(3);

  const Basis g1 = Basis::linear(2);
  const Basis g2 = Basis::with_interactions(2);
  const Basis g3 = Basis::full_quadratic(2);
  std::vector<ModelSpec> out;
  for (LinkKind link : {LinkKind::probit, LinkKind::logit}) {
    out.emplace_back(link, g1, b1);
    out.emplace_back(link, g2, b2);
    out.emplace_back(link, g3, b3);
  }
  return out;
}

}  // namespace mmphi
