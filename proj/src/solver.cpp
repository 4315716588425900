#include "mmphi/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace mmphi {

void SolverConfig::validate() const {
  if (!(tol_eff > 0.0 && tol_eff < 1.0)) throw InvalidArgument("solver.tol_eff must lie in (0, 1)");
  if (!(local_tol_eff > 0.0 && local_tol_eff < 1.0)) throw InvalidArgument("solver.local_tol_eff must lie in (0, 1)");
  if (max_add_iters < 1) throw InvalidArgument("solver.max_add_iters must be positive");
  if (max_weight_iters < 1) throw InvalidArgument("solver.max_weight_iters must be positive");
  if (polish_iters < 0) throw InvalidArgument("solver.polish_iters must be non-negative");
  if (!(weight_tol > 0.0)) throw InvalidArgument("solver.weight_tol must be positive");
  if (!(prune_weight > 0.0 && prune_weight < 1.0)) throw InvalidArgument("solver.prune_weight must lie in (0, 1)");
  if (!(eff_compromise_threshold > 0.0)) throw InvalidArgument("solver.eff_compromise_threshold must be positive");
  if (delta && !(*delta > 0.0 && *delta <= 1.0)) throw InvalidArgument("solver.delta must lie in (0, 1]");
}

double SolverConfig::delta_for(const CriterionSpec& crit) const {
  if (delta) return *delta;
  return crit.is_p0() ? 1.0 : 0.5;
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iters_exceeded: return "max_iters_exceeded";
    case SolveStatus::stalled_at_support: return "stalled_at_support";
    case SolveStatus::no_progress: return "no_progress";
  }
  return "unknown";
}

namespace {

// Quantity compared across weight vectors: lse for maximin (shift-free), the
// objective itself otherwise.
double level(const SensitivityContext& ctx) {
  return ctx.objective_kind() == Objective::maximin ? ctx.lse() : ctx.objective();
}

bool increased(double next, double cur) {
  return next > cur + 1e-12 * std::max(1.0, std::abs(cur));
}

std::optional<SensitivityContext> try_context(const PoolCache& support, const Vec& w, const ModelSet& set,
                                              const CriterionSpec& crit, const SensitivityOptions& opts) {
  try {
    return SensitivityContext(support, w, set, crit, opts);
  } catch (const NotPositiveDefinite&) {
    return std::nullopt;
  } catch (const NonPositiveCriterion&) {
    return std::nullopt;
  }
}

double max_support_phi(const SensitivityContext& ctx, const Vec& dp, const Vec& w, double prune_weight) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] > prune_weight) worst = std::max(worst, std::abs(ctx.constant() - dp[i] / ctx.dp_normalizer()));
  }
  return worst;
}

}  // namespace

WeightResult optimize_weights(const PoolCache& support, const ModelSet& set, const CriterionSpec& crit,
                              const SolverConfig& cfg, const WeightRun& run) {
  const Eigen::Index n = support.size();
  if (n < 1) throw InvalidArgument("weight procedure needs at least one support point");
  Vec lam = run.init ? *run.init : Vec::Constant(n, 1.0 / static_cast<double>(n));
  if (lam.size() != n) throw DimensionMismatch("initial weights do not match the support size");

  SensitivityOptions opts;
  opts.objective = run.objective;
  opts.forced_shift = run.forced_shift;
  std::optional<SensitivityContext> ctx;
  try {
    ctx.emplace(support, lam, set, crit, opts);
  } catch (const NotPositiveDefinite& e) {
    throw SingularStart(std::string("information is singular at the starting weights: ") + e.what());
  }

  const int iters = run.max_iters.value_or(cfg.max_weight_iters);
  double delta = cfg.delta_for(crit);
  int halvings = 0;
  WeightResult res;
  Vec dp = ctx->dp_over(support);
  double cur = level(*ctx);
  for (int it = 0; it < iters; ++it) {
    if (run.support_tol &&
        max_support_phi(*ctx, dp, lam, cfg.prune_weight) <= *run.support_tol * std::abs(ctx->objective())) {
      res.converged = true;
      break;
    }
    Vec next = lam.cwiseProduct(dp.array().pow(delta).matrix());
    next /= next.sum();
    auto trial = try_context(support, next, set, crit, opts);
    ++res.iterations;
    if (!trial || increased(level(*trial), cur)) {
      if (halvings == 6) {
        res.no_progress = true;
        break;
      }
      delta *= 0.5;
      ++halvings;
      continue;
    }
    const double change = (next - lam).cwiseAbs().maxCoeff();
    lam = std::move(next);
    ctx.emplace(std::move(*trial));
    dp = ctx->dp_over(support);
    cur = level(*ctx);
    if (change <= cfg.weight_tol) {
      res.converged = true;
      break;
    }
  }
  res.weights = lam;
  res.objective = ctx->objective();
  res.lse = run.objective == Objective::maximin ? ctx->lse() : std::numeric_limits<double>::quiet_NaN();
  res.max_support_phi = max_support_phi(*ctx, dp, lam, cfg.prune_weight);
  return res;
}

WeightResult optimize_weights(const Mat& points, const ModelSet& set, const CriterionSpec& crit,
                              const SolverConfig& cfg, const WeightRun& run) {
  return optimize_weights(PoolCache(set, points), set, crit, cfg, run);
}

std::vector<Eigen::Index> initial_support(const ModelSet& set, const PoolCache& pool) {
  const Mat& pts = pool.points();
  const Eigen::Index n = pts.rows();
  if (n < 1) throw InvalidArgument("candidate pool is empty");
  const Vec center = 0.5 * (pts.colwise().minCoeff() + pts.colwise().maxCoeff()).transpose();

  auto lowest_argmin = [](const Vec& v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
      if (v[i] < v[best]) best = i;
    }
    return best;
  };
  const Vec to_center = (pts.rowwise() - center.transpose()).rowwise().squaredNorm();
  std::vector<Eigen::Index> idx{lowest_argmin(to_center)};
  Vec min_dist = (pts.rowwise() - pts.row(idx[0])).rowwise().squaredNorm();

  auto all_pd = [&]() {
    const PoolCache sub = pool.subset(idx);
    const Vec w = Vec::Constant(static_cast<Eigen::Index>(idx.size()), 1.0 / static_cast<double>(idx.size()));
    for (int j = 0; j < set.size(); ++j) {
      try {
        factorize_spd(sub.information(j, w));
      } catch (const NotPositiveDefinite&) {
        return false;
      }
    }
    return true;
  };

  const auto n0 = static_cast<std::size_t>(std::min<Eigen::Index>(set.max_params() + 1, n));
  while (idx.size() < n0 || !all_pd()) {
    if (static_cast<Eigen::Index>(idx.size()) == n) {
      throw SingularStart("no subset of the candidate pool gives positive definite information for every model");
    }
    const Eigen::Index next = lowest_argmin(-min_dist);
    idx.push_back(next);
    min_dist = min_dist.cwiseMin((pts.rowwise() - pts.row(next)).rowwise().squaredNorm());
  }
  return idx;
}

namespace {

double stop_measure(const SensitivityContext& ctx, double min_phi, const ModelSet& set, const CriterionSpec& crit) {
  switch (ctx.objective_kind()) {
    case Objective::maximin:
      return efficiency_lower_bound(ctx.objective(), min_phi);
    case Objective::local:
      if (crit.is_p0() && crit.p0_convention == P0Convention::logdet) {
        return std::exp(min_phi / static_cast<double>(set.model(0).num_contrasts()));
      }
      return 1.0 + min_phi / ctx.objective();
    case Objective::phi_compromise:
    case Objective::eff_compromise:
      return 1.0 + min_phi / std::abs(ctx.objective());
  }
  return 0.0;
}

double stop_level(Objective obj, const SolverConfig& cfg) {
  return obj == Objective::eff_compromise ? 1.0 - cfg.eff_compromise_threshold : cfg.tol_eff;
}

struct SupportState {
  std::vector<Eigen::Index> idx;
  PoolCache cache;
  Vec lam;
};

class Sequential {
 public:
  Sequential(const ModelSet& set, const CandidatePool& pool, const CriterionSpec& crit, const SolverConfig& cfg,
             Objective obj)
      : set_(set), crit_(crit), cfg_(cfg), obj_(obj), pool_(set, pool.points) {
    crit_.validate();
    cfg_.validate();
    opts_.objective = obj;
  }

  SolveReport run() {
    const auto t0 = std::chrono::steady_clock::now();
    SolveReport rep;
    rep.objective = obj_;
    rep.certified = obj_ != Objective::eff_compromise;

    auto idx = initial_support(set_, pool_);
    auto wr = weights(pool_.subset(idx), std::nullopt, std::nullopt);
    SupportState st{idx, pool_.subset(idx), wr.weights};
    prune(st);

    bool stalled_once = false;
    bool polished = false;
    rep.status = SolveStatus::max_iters_exceeded;
    int added = 0;
    for (;;) {
      const SensitivityContext ctx(st.cache, st.lam, set_, crit_, opts_);
      const auto scan = ctx.scan(pool_);
      const double bound = stop_measure(ctx, scan.min, set_, crit_);
      const bool ok = bound >= stop_level(obj_, cfg_);

      if (ok && !polished && cfg_.polish_iters > 0) {
        // One long settling run on the accepted support before the final audit.
        polished = true;
        auto pw = weights(st.cache, st.lam, cfg_.polish_iters, 1e-6);
        if (!increased(level_of(pw), level(ctx))) st.lam = pw.weights;
        prune(st);
        drop_inactive(st);
        continue;
      }

      TraceRow row;
      row.iter = added;
      row.objective = ctx.objective();
      row.se = obj_ == Objective::maximin ? ctx.se() : std::numeric_limits<double>::quiet_NaN();
      row.lse = obj_ == Objective::maximin ? ctx.lse() : std::numeric_limits<double>::quiet_NaN();
      row.eff_lower_bound = bound;
      row.n_support = static_cast<int>(st.idx.size());
      rep.trace.push_back(row);

      if (ok || added >= cfg_.max_add_iters) {
        rep.status = ok ? SolveStatus::converged : SolveStatus::max_iters_exceeded;
        finish(rep, st, ctx, scan, bound);
        break;
      }
      const Eigen::Index x_star = scan.argmin;
      if (std::find(st.idx.begin(), st.idx.end(), x_star) != st.idx.end()) {
        if (stalled_once) {
          rep.status = SolveStatus::stalled_at_support;
          rep.flags.push_back("stalled_at_support");
          finish(rep, st, ctx, scan, bound);
          break;
        }
        stalled_once = true;
        auto sw = cfg_.polish_iters > 0 ? weights(st.cache, st.lam, cfg_.polish_iters, 1e-6)
                                        : weights(st.cache, st.lam, std::nullopt);
        if (!increased(level_of(sw), level(ctx))) st.lam = sw.weights;
        continue;
      }
      stalled_once = false;
      polished = false;
      add_point(st, x_star, level(ctx));
      ++added;
    }
    rep.outer_iterations = added;
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
  }

 private:
  static double level_of(const WeightResult& w) {
    return std::isnan(w.lse) ? w.objective : w.lse;
  }

  WeightResult weights(const PoolCache& cache, std::optional<Vec> init, std::optional<int> iters,
                       std::optional<double> support_tol = std::nullopt) {
    WeightRun run;
    run.objective = obj_;
    run.init = std::move(init);
    run.max_iters = iters;
    run.support_tol = support_tol;
    auto res = optimize_weights(cache, set_, crit_, cfg_, run);
    weight_iters_ += res.iterations;
    if (res.no_progress) no_progress_ = true;
    return res;
  }

  void add_point(SupportState& st, Eigen::Index x_star, double base) {
    st.idx.push_back(x_star);
    st.cache = pool_.subset(st.idx);
    const auto n = static_cast<Eigen::Index>(st.idx.size());
    // Warm start: mix a fraction alpha of the new point into the current design.
    double alpha = 1.0 / static_cast<double>(n);
    Vec trial(n);
    for (int k = 0; k < 60; ++k, alpha *= 0.5) {
      trial.head(n - 1) = (1.0 - alpha) * st.lam;
      trial[n - 1] = alpha;
      auto ctx = try_context(st.cache, trial, set_, crit_, opts_);
      if (ctx && level(*ctx) < base) break;
    }
    auto wr = weights(st.cache, trial, std::nullopt);
    st.lam = wr.weights;
    prune(st);
  }

  void prune(SupportState& st) {
    if (!cfg_.prune) return;
    std::vector<Eigen::Index> keep_idx;
    std::vector<double> keep_w;
    for (std::size_t k = 0; k < st.idx.size(); ++k) {
      if (st.lam[static_cast<Eigen::Index>(k)] > cfg_.prune_weight) {
        keep_idx.push_back(st.idx[k]);
        keep_w.push_back(st.lam[static_cast<Eigen::Index>(k)]);
      }
    }
    if (keep_idx.size() == st.idx.size()) return;
    const auto before = try_context(st.cache, st.lam, set_, crit_, opts_);
    Vec w = Eigen::Map<Vec>(keep_w.data(), static_cast<Eigen::Index>(keep_w.size()));
    w /= w.sum();
    PoolCache cache = pool_.subset(keep_idx);
    if (!try_context(cache, w, set_, crit_, opts_)) return;
    auto wr = weights(cache, w, std::nullopt);
    if (before && increased(level_of(wr), level(*before))) return;
    st.idx = std::move(keep_idx);
    st.cache = std::move(cache);
    st.lam = wr.weights;
  }

  // Away steps: remove the lightest support point with positive phi while
  // the level does not increase.
  void drop_inactive(SupportState& st) {
    while (st.idx.size() > 1) {
      const SensitivityContext ctx(st.cache, st.lam, set_, crit_, opts_);
      const Vec phi = ctx.dir_derivative_over(st.cache);
      const double tol = 1e-6 * std::abs(ctx.objective());
      Eigen::Index victim = -1;
      for (Eigen::Index k = 0; k < phi.size(); ++k) {
        if (phi[k] > tol && (victim < 0 || st.lam[k] < st.lam[victim])) victim = k;
      }
      if (victim < 0) return;
      std::vector<Eigen::Index> keep_idx;
      Vec w(static_cast<Eigen::Index>(st.idx.size()) - 1);
      for (std::size_t k = 0, j = 0; k < st.idx.size(); ++k) {
        if (static_cast<Eigen::Index>(k) == victim) continue;
        keep_idx.push_back(st.idx[k]);
        w[static_cast<Eigen::Index>(j++)] = st.lam[static_cast<Eigen::Index>(k)];
      }
      w /= w.sum();
      PoolCache cache = pool_.subset(keep_idx);
      if (!try_context(cache, w, set_, crit_, opts_)) return;
      auto wr = weights(cache, w, cfg_.polish_iters, 1e-6);
      if (increased(level_of(wr), level(ctx))) return;
      st.idx = std::move(keep_idx);
      st.cache = std::move(cache);
      st.lam = wr.weights;
    }
  }

  void finish(SolveReport& rep, const SupportState& st, const SensitivityContext& ctx,
              const SensitivityContext::Scan& scan, double bound) const {
    Mat pts(static_cast<Eigen::Index>(st.idx.size()), pool_.points().cols());
    for (std::size_t k = 0; k < st.idx.size(); ++k) pts.row(static_cast<Eigen::Index>(k)) = pool_.points().row(st.idx[k]);
    rep.design = Design(pts, st.lam / st.lam.sum());
    rep.values = ctx.values();
    rep.efficiencies = ctx.efficiencies();
    rep.final_objective = ctx.objective();
    if (obj_ == Objective::maximin) {
      rep.final_se = ctx.se();
      rep.final_lse = ctx.lse();
    } else {
      rep.final_se = rep.final_lse = std::numeric_limits<double>::quiet_NaN();
    }
    rep.eff_lower_bound = bound;
    rep.min_phi = scan.min;
    rep.audit_points = pool_.points();
    rep.audit_phi = scan.phi;
    double worst = 0.0;
    for (std::size_t k = 0; k < st.idx.size(); ++k) {
      if (st.lam[static_cast<Eigen::Index>(k)] > cfg_.prune_weight) worst = std::max(worst, std::abs(scan.phi[st.idx[k]]));
    }
    rep.max_support_phi = worst;
    rep.weight_iterations = weight_iters_;
    if (no_progress_) rep.flags.push_back("no_progress");
    if (rep.status == SolveStatus::max_iters_exceeded) rep.flags.push_back("max_iters_exceeded");
    if (!rep.certified) rep.flags.push_back("non_certified");
  }

  const ModelSet& set_;
  CriterionSpec crit_;
  SolverConfig cfg_;
  Objective obj_;
  PoolCache pool_;
  SensitivityOptions opts_;
  int weight_iters_ = 0;
  bool no_progress_ = false;
};

std::vector<Mat> moments_for_single(const ModelSpec& model, const CriterionSpec& crit, const Mat* ei_moment) {
  if (!crit.is_ei()) return {};
  if (ei_moment != nullptr) return {*ei_moment};
  return ei_moments_for({model}, crit);
}

}  // namespace

SolveReport solve_maximin(const ModelSet& set, const CandidatePool& pool, const CriterionSpec& crit,
                          const SolverConfig& cfg) {
  return Sequential(set, pool, crit, cfg, Objective::maximin).run();
}

SolveReport solve_local(const ModelSpec& model, const CandidatePool& pool, const CriterionSpec& crit,
                        const SolverConfig& cfg, const Mat* ei_moment) {
  // phi_opt is not used by the local objective; 1 keeps the set valid.
  const ModelSet single({model}, {1.0}, {}, moments_for_single(model, crit, ei_moment));
  SolveReport rep = Sequential(single, pool, crit, cfg, Objective::local).run();
  rep.efficiencies = {1.0};
  return rep;
}

SolveReport solve_compromise(const ModelSet& set, const CandidatePool& pool, const CriterionSpec& crit,
                             const SolverConfig& cfg, Objective kind) {
  if (kind != Objective::phi_compromise && kind != Objective::eff_compromise) {
    throw InvalidArgument("compromise kind must be phi_compromise or eff_compromise");
  }
  return Sequential(set, pool, crit, cfg, kind).run();
}

SolveReport audit_design(const Design& design, const ModelSet& set, const CandidatePool& pool,
                         const CriterionSpec& crit, const SolverConfig& cfg, Objective objective) {
  const auto t0 = std::chrono::steady_clock::now();
  SensitivityOptions opts;
  opts.objective = objective;
  const SensitivityContext ctx(design, set, crit, opts);
  const PoolCache cache(set, pool.points);
  const auto scan = ctx.scan(cache);
  SolveReport rep;
  rep.design = design;
  rep.objective = objective;
  rep.certified = objective != Objective::eff_compromise;
  rep.values = ctx.values();
  rep.efficiencies = ctx.efficiencies();
  rep.final_objective = ctx.objective();
  rep.final_se = objective == Objective::maximin ? ctx.se() : std::numeric_limits<double>::quiet_NaN();
  rep.final_lse = objective == Objective::maximin ? ctx.lse() : std::numeric_limits<double>::quiet_NaN();
  rep.eff_lower_bound = stop_measure(ctx, scan.min, set, crit);
  rep.status = rep.eff_lower_bound >= stop_level(objective, cfg) ? SolveStatus::converged
                                                                 : SolveStatus::max_iters_exceeded;
  rep.min_phi = scan.min;
  rep.audit_points = pool.points;
  rep.audit_phi = scan.phi;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < design.size(); ++i) {
    if (design.weights()[i] > cfg.prune_weight) {
      worst = std::max(worst, std::abs(ctx.dir_derivative_point(design.point(i))));
    }
  }
  rep.max_support_phi = worst;
  TraceRow row;
  row.objective = rep.final_objective;
  row.se = rep.final_se;
  row.lse = rep.final_lse;
  row.eff_lower_bound = rep.eff_lower_bound;
  row.n_support = static_cast<int>(design.size());
  rep.trace.push_back(row);
  if (!rep.converged()) rep.flags.push_back("bound_below_tolerance");
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

double local_optimum_value(const ModelSpec& model, const CandidatePool& pool, const CriterionSpec& crit,
                           const SolverConfig& cfg, const Mat* ei_moment) {
  SolverConfig local = cfg;
  local.tol_eff = cfg.local_tol_eff;
  return solve_local(model, pool, crit, local, ei_moment).values.front();
}

ModelSet prepare_model_set(std::vector<ModelSpec> models, const CandidatePool& pool, const CriterionSpec& crit,
                           const SolverConfig& cfg, std::vector<double> prior) {
  std::vector<Mat> moments = ei_moments_for(models, crit);
  std::vector<double> phi_opt;
  phi_opt.reserve(models.size());
  for (std::size_t j = 0; j < models.size(); ++j) {
    phi_opt.push_back(local_optimum_value(models[j], pool, crit, cfg, moments.empty() ? nullptr : &moments[j]));
  }
  return ModelSet(std::move(models), std::move(phi_opt), std::move(prior), std::move(moments));
}

}  // namespace mmphi
