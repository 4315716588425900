#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmphi/criterion.hpp"
#include "mmphi/sampling.hpp"
#include "mmphi/sensitivity.hpp"

namespace mmphi {

struct SolverConfig {
  double tol_eff = 0.99;
  int max_add_iters = 200;
  double weight_tol = 1e-15;
  int max_weight_iters = 200;
  /// Exponent of the multiplicative update; 1 for p = 0 and 0.5 otherwise when unset.
  std::optional<double> delta;
  double prune_weight = 1e-8;
  bool prune = true;
  /// Extra multiplicative sweeps spent at termination to settle the support weights (0 disables).
  int polish_iters = 20000;
  std::uint64_t seed = 0;
  /// Stopping level for the local solves that produce phi_opt.
  double local_tol_eff = 0.9999;
  double eff_compromise_threshold = 1e-6;

  void validate() const;
  double delta_for(const CriterionSpec& crit) const;
};

struct WeightResult {
  Vec weights;
  int iterations = 0;
  bool converged = false;    ///< max weight change reached weight_tol
  bool no_progress = false;  ///< delta halvings exhausted without descent
  double objective = 0.0;    ///< objective in context units at the returned weights
  double lse = 0.0;          ///< maximin only
  double max_support_phi = 0.0;  ///< max |phi(x_i)| over weights above prune_weight
};

/// Per-call settings of the weight procedure.
struct WeightRun {
  Objective objective = Objective::maximin;
  /// Starting weights; uniform when unset.
  std::optional<Vec> init;
  std::optional<double> forced_shift;
  /// Overrides cfg.max_weight_iters.
  std::optional<int> max_iters;
  /// Also stop once every support point above prune_weight has
  /// |phi| <= support_tol * |objective|.
  std::optional<double> support_tol;
};

/// Multiplicative weight procedure over a fixed support.
WeightResult optimize_weights(const PoolCache& support, const ModelSet& set, const CriterionSpec& crit,
                              const SolverConfig& cfg, const WeightRun& run = {});
WeightResult optimize_weights(const Mat& points, const ModelSet& set, const CriterionSpec& crit,
                              const SolverConfig& cfg, const WeightRun& run = {});

enum class SolveStatus { converged, max_iters_exceeded, stalled_at_support, no_progress };
std::string to_string(SolveStatus s);

struct TraceRow {
  int iter = 0;
  double se = 0.0;
  double lse = 0.0;
  double objective = 0.0;
  double eff_lower_bound = 0.0;
  int n_support = 0;
};

struct SolveReport {
  Design design;
  Objective objective = Objective::maximin;
  SolveStatus status = SolveStatus::converged;
  bool certified = true;  ///< false for the eff-compromise heuristic
  std::vector<double> values;
  std::vector<double> efficiencies;
  std::vector<TraceRow> trace;
  int outer_iterations = 0;
  int weight_iterations = 0;
  double wall_seconds = 0.0;
  double final_objective = 0.0;
  double final_se = 0.0;
  double final_lse = 0.0;
  double eff_lower_bound = 0.0;
  double min_phi = 0.0;
  double max_support_phi = 0.0;
  Mat audit_points;
  Vec audit_phi;
  std::vector<std::string> flags;

  bool converged() const { return status == SolveStatus::converged; }
};

/// Theorem-style bound 1 + 2 min_phi / se on the maximin efficiency.
inline double efficiency_lower_bound(double se_value, double min_phi) { return 1.0 + 2.0 * min_phi / se_value; }

/// Sequential maximin construction over the candidate pool.
SolveReport solve_maximin(const ModelSet& set, const CandidatePool& pool, const CriterionSpec& crit,
                          const SolverConfig& cfg);
/// Local Phi_p-optimal design; `ei_moment` is required for EI.
SolveReport solve_local(const ModelSpec& model, const CandidatePool& pool, const CriterionSpec& crit,
                        const SolverConfig& cfg, const Mat* ei_moment = nullptr);
/// Compromise baselines; `kind` is phi_compromise or eff_compromise.
SolveReport solve_compromise(const ModelSet& set, const CandidatePool& pool, const CriterionSpec& crit,
                             const SolverConfig& cfg, Objective kind);

/// Equivalence-theorem audit of a given design under `objective`: values,
/// efficiencies, the stopping bound and phi over the whole pool. The
/// status is converged when the bound reaches the configured level.
SolveReport audit_design(const Design& design, const ModelSet& set, const CandidatePool& pool,
                         const CriterionSpec& crit, const SolverConfig& cfg, Objective objective = Objective::maximin);

/// Local optimum criterion value of one model over the pool.
double local_optimum_value(const ModelSpec& model, const CandidatePool& pool, const CriterionSpec& crit,
                           const SolverConfig& cfg, const Mat* ei_moment = nullptr);

/// Builds a ModelSet with EI moments attached and phi_opt from local solves.
ModelSet prepare_model_set(std::vector<ModelSpec> models, const CandidatePool& pool, const CriterionSpec& crit,
                           const SolverConfig& cfg, std::vector<double> prior = {});

/// Deterministic initial support: the pool point nearest the centroid, then
/// greedy max-min distance, until every model's information is positive definite.
std::vector<Eigen::Index> initial_support(const ModelSet& set, const PoolCache& pool);

}  // namespace mmphi
