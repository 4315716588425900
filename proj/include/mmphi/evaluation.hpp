#pragma once

#include <vector>

#include "mmphi/criterion.hpp"
#include "mmphi/sampling.hpp"
#include "mmphi/solver.hpp"

namespace mmphi {

struct EfficiencySummary {
  double min = 0.0;
  double median = 0.0;
  double mean = 0.0;
};
EfficiencySummary summarize(const Vec& effs);

/// phi_opt_j / Phi_p(design, M_j): one row per model, one column per design.
Mat efficiency_matrix(const std::vector<Design>& designs, const ModelSet& set, const CriterionSpec& crit);

/// Efficiencies against freshly computed local optima, one row per model
/// in `models`, one column per design.
Mat resample_efficiencies(const std::vector<Design>& designs, const std::vector<ModelSpec>& models,
                          const CandidatePool& pool, const CriterionSpec& crit, const SolverConfig& cfg);

}  // namespace mmphi
