#include "mmphi/evaluation.hpp"

#include <algorithm>
#include <vector>

namespace mmphi {

EfficiencySummary summarize(const Vec& effs) {
  if (effs.size() == 0) throw InvalidArgument("cannot summarize an empty efficiency column");
  std::vector<double> v(effs.data(), effs.data() + effs.size());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  EfficiencySummary s;
  s.min = v.front();
  s.median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  s.mean = effs.mean();
  return s;
}

Mat efficiency_matrix(const std::vector<Design>& designs, const ModelSet& set, const CriterionSpec& crit) {
  Mat out(set.size(), static_cast<Eigen::Index>(designs.size()));
  for (std::size_t k = 0; k < designs.size(); ++k) {
    for (int j = 0; j < set.size(); ++j) out(j, static_cast<Eigen::Index>(k)) = phi_efficiency(j, designs[k], set, crit);
  }
  return out;
}

Mat resample_efficiencies(const std::vector<Design>& designs, const std::vector<ModelSpec>& models,
                          const CandidatePool& pool, const CriterionSpec& crit, const SolverConfig& cfg) {
  Mat out(static_cast<Eigen::Index>(models.size()), static_cast<Eigen::Index>(designs.size()));
  for (std::size_t i = 0; i < models.size(); ++i) {
    const ModelSet single = prepare_model_set({models[i]}, pool, crit, cfg);
    for (std::size_t k = 0; k < designs.size(); ++k) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = phi_efficiency(0, designs[k], single, crit);
    }
  }
  return out;
}

}  // namespace mmphi
