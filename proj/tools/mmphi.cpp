// mmphi: command-line front end for maximin Phi_p design construction.

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "mmphi/config.hpp"
#include "mmphi/evaluation.hpp"
#include "mmphi/io.hpp"
#include "mmphi/model_sets.hpp"
#include "mmphi/solver.hpp"

namespace fs = std::filesystem;
using namespace mmphi;

namespace {

struct Flags {
  bool strict_paper = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

RunConfig load(const std::string& path, const Flags& flags) {
  RunConfig rc = load_config(path);
  if (flags.strict_paper) rc.solver.prune = false;
  if (flags.seed) {
    rc.solver.seed = *flags.seed;
    rc.reseed_generators(*flags.seed);
  }
  if (flags.out_dir) rc.output_dir = *flags.out_dir;
  return rc;
}

ModelSet build_set(const RunConfig& rc, const CandidatePool& pool) {
  if (rc.phi_opt) return ModelSet(rc.models, *rc.phi_opt, rc.prior, ei_moments_for(rc.models, rc.criterion));
  return prepare_model_set(rc.models, pool, rc.criterion, rc.solver, rc.prior);
}

Objective objective_for(Task t) {
  switch (t) {
    case Task::eff_compromise: return Objective::eff_compromise;
    case Task::phi_compromise: return Objective::phi_compromise;
    case Task::local: return Objective::local;
    default: return Objective::maximin;
  }
}

void write_artifacts(const fs::path& dir, const RunConfig& rc, const ModelSet* set, const SolveReport& rep) {
  fs::create_directories(dir);
  write_design_csv(dir / "design.csv", rep.design);
  write_design_json(dir / "design.json", rep.design);
  write_trace_csv(dir / "trace.csv", rep.trace);
  write_audit_csv(dir / "audit.csv", rep.audit_points, rep.audit_phi);
  std::vector<EffTableRow> rows;
  for (std::size_t j = 0; j < rep.values.size(); ++j) {
    const double opt = set ? set->phi_opt(static_cast<int>(j)) : rep.values[j];
    rows.push_back({to_string(rc.task), static_cast<int>(j), rep.values[j], opt, rep.efficiencies[j]});
  }
  write_eff_table_csv(dir / "eff_table.csv", rows);
  Json j = report_to_json(rep);
  j["config"] = rc.resolved();
  if (set) j["phi_opt"] = set->phi_opt();
  write_json(dir / "report.json", j);
}

void print_summary(const SolveReport& rep) {
  std::cout << std::setprecision(6);
  std::cout << "status: " << to_string(rep.status) << "\n";
  std::cout << "outer iterations: " << rep.outer_iterations << "  support size: " << rep.design.size()
            << "  wall: " << rep.wall_seconds << " s\n";
  std::cout << "efficiency lower bound: " << rep.eff_lower_bound << "\n";
  std::cout << "efficiencies:";
  for (double e : rep.efficiencies) std::cout << ' ' << e;
  std::cout << "\n";
  for (const auto& f : rep.flags) std::cout << "flag: " << f << "\n";
}

int run_solve(const std::string& path, const Flags& flags) {
  const RunConfig rc = load(path, flags);
  const CandidatePool pool = rc.pool();
  SolveReport rep;
  std::optional<ModelSet> set;
  switch (rc.task) {
    case Task::local: {
      const auto moments = ei_moments_for(rc.models, rc.criterion);
      rep = solve_local(rc.models.front(), pool, rc.criterion, rc.solver, moments.empty() ? nullptr : &moments.front());
      break;
    }
    case Task::maximin:
      set.emplace(build_set(rc, pool));
      rep = solve_maximin(*set, pool, rc.criterion, rc.solver);
      break;
    case Task::eff_compromise:
    case Task::phi_compromise:
      set.emplace(build_set(rc, pool));
      rep = solve_compromise(*set, pool, rc.criterion, rc.solver, objective_for(rc.task));
      break;
    case Task::evaluate:
      set.emplace(build_set(rc, pool));
      rep = audit_design(Design(*rc.design_points, *rc.design_weights), *set, pool, rc.criterion, rc.solver);
      break;
    case Task::evaluate_weights: {
      set.emplace(build_set(rc, pool));
      const auto wr = optimize_weights(*rc.design_points, *set, rc.criterion, rc.solver);
      rep = audit_design(Design(*rc.design_points, wr.weights), *set, pool, rc.criterion, rc.solver);
      rep.weight_iterations = wr.iterations;
      if (wr.no_progress) rep.flags.push_back("no_progress");
      // Fixed support: the equivalence bound over the whole pool is not a stopping rule here.
      rep.status = SolveStatus::converged;
      std::erase(rep.flags, std::string("bound_below_tolerance"));
      break;
    }
  }
  write_artifacts(rc.output_dir, rc, set ? &*set : nullptr, rep);
  print_summary(rep);
  if (rc.task == Task::evaluate_weights) {
    std::cout << "weights:";
    for (Eigen::Index i = 0; i < rep.design.size(); ++i) std::cout << ' ' << std::setprecision(6) << rep.design.weights()[i];
    std::cout << "\n";
  }
  const bool flagged = !rep.converged() || std::count(rep.flags.begin(), rep.flags.end(), "no_progress");
  return flagged ? 2 : 0;
}

int run_compare(const std::string& path, const std::vector<std::string>& design_paths, const Flags& flags) {
  const RunConfig rc = load(path, flags);
  const CandidatePool pool = rc.pool();
  const ModelSet set = build_set(rc, pool);
  std::vector<Design> designs;
  for (const auto& p : design_paths) {
    Design d = read_design(p);
    if (d.input_dim() != set.input_dim()) throw DimensionMismatch(p + ": design dimension differs from the model inputs");
    designs.push_back(std::move(d));
  }
  const Mat eff = efficiency_matrix(designs, set, rc.criterion);
  fs::create_directories(rc.output_dir);
  std::vector<EffTableRow> rows;
  Json out{{"config", rc.resolved()}, {"designs", Json::array()}};
  std::cout << std::setprecision(4) << std::fixed;
  std::cout << "design";
  for (int j = 0; j < set.size(); ++j) std::cout << "\tM" << (j + 1);
  std::cout << "\tworst\tmean\tmedian\n";
  for (std::size_t k = 0; k < designs.size(); ++k) {
    const Vec col = eff.col(static_cast<Eigen::Index>(k));
    const auto s = summarize(col);
    std::cout << design_paths[k];
    for (int j = 0; j < set.size(); ++j) std::cout << '\t' << col[j];
    std::cout << '\t' << s.min << '\t' << s.mean << '\t' << s.median << "\n";
    for (int j = 0; j < set.size(); ++j) {
      rows.push_back({design_paths[k], j, phi_p_value(set.model(j), designs[k], rc.criterion, set.ei_moment(j)),
                      set.phi_opt(j), col[j]});
    }
    Json dj{{"path", design_paths[k]},
            {"efficiencies", std::vector<double>(col.data(), col.data() + col.size())},
            {"worst", s.min},
            {"mean", s.mean},
            {"median", s.median}};
    out["designs"].push_back(dj);
  }
  write_eff_table_csv(fs::path(rc.output_dir) / "compare_eff_table.csv", rows);

  if (rc.evaluation) {
    const auto betas = discretize_coefficient_box(rc.evaluation->box.box, rc.evaluation->box.count,
                                                  rc.evaluation->box.centroid, rc.evaluation->box.skip);
    const auto models = models_from_coefficients(rc.evaluation->link, rc.evaluation->basis, betas);
    const Mat res = resample_efficiencies(designs, models, pool, rc.criterion, rc.solver);
    std::cout << "resample over " << models.size() << " coefficient draws\n";
    std::cout << "design\tmin\tmedian\tmean\n";
    std::ofstream os(fs::path(rc.output_dir) / "resample_efficiencies.csv");
    os << std::setprecision(17);
    for (std::size_t k = 0; k < designs.size(); ++k) os << (k ? "," : "") << "design" << (k + 1);
    os << "\n";
    for (Eigen::Index i = 0; i < res.rows(); ++i) {
      for (Eigen::Index k = 0; k < res.cols(); ++k) os << (k ? "," : "") << res(i, k);
      os << "\n";
    }
    for (std::size_t k = 0; k < designs.size(); ++k) {
      const auto s = summarize(res.col(static_cast<Eigen::Index>(k)));
      std::cout << design_paths[k] << '\t' << s.min << '\t' << s.median << '\t' << s.mean << "\n";
      out["designs"][k]["resample"] = {{"min", s.min}, {"median", s.median}, {"mean", s.mean}, {"draws", models.size()}};
    }
  }
  write_json(fs::path(rc.output_dir) / "compare.json", out);
  return 0;
}

int run_audit(const std::string& path, const std::string& design_path, const Flags& flags) {
  const RunConfig rc = load(path, flags);
  const CandidatePool pool = rc.pool();
  const ModelSet set = build_set(rc, pool);
  const Design design = read_design(design_path);
  const Objective obj = rc.task == Task::local ? Objective::maximin : objective_for(rc.task);
  const SolveReport rep = audit_design(design, set, pool, rc.criterion, rc.solver, obj);
  fs::create_directories(rc.output_dir);
  write_audit_csv(fs::path(rc.output_dir) / "audit.csv", rep.audit_points, rep.audit_phi);
  Json j = report_to_json(rep);
  j["config"] = rc.resolved();
  write_json(fs::path(rc.output_dir) / "audit.json", j);
  std::cout << std::setprecision(6);
  std::cout << "objective: " << to_string(obj) << "\n";
  std::cout << "min phi over pool: " << rep.min_phi << "  (relative " << rep.min_phi / std::abs(rep.final_objective) << ")\n";
  std::cout << "max |phi| at support: " << rep.max_support_phi << "  (relative "
            << rep.max_support_phi / std::abs(rep.final_objective) << ")\n";
  std::cout << "efficiency lower bound: " << rep.eff_lower_bound << "\n";
  return rep.converged() ? 0 : 2;
}

int run_sobol(int dim, std::size_t count, std::size_t skip) {
  const Mat pts = sobol_points(dim, count, skip);
  std::cout << std::setprecision(17);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (Eigen::Index k = 0; k < pts.cols(); ++k) std::cout << (k ? "," : "") << pts(i, k);
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximin Phi_p-efficient designs for generalized linear models"};
  app.require_subcommand(1);
  Flags flags;
  std::uint64_t seed = 0;
  std::string out_dir;
  auto add_common = [&](CLI::App* sub) {
    sub->add_flag("--strict-paper", flags.strict_paper, "Disable weight pruning");
    sub->add_option("--seed", seed, "Seed for generated model sets and randomized fallbacks");
    sub->add_option("--out-dir", out_dir, "Output directory (overrides output.dir)");
  };

  std::string config;
  std::vector<std::string> designs;
  std::string design;

  auto* solve = app.add_subcommand("solve", "Run the task in a configuration file");
  solve->add_option("config", config, "YAML configuration")->required();
  add_common(solve);

  auto* compare = app.add_subcommand("compare", "Efficiency table of designs on the config's model set");
  compare->add_option("config", config, "YAML configuration")->required();
  compare->add_option("designs", designs, "Design files (.csv or .json)")->required()->expected(1, -1);
  add_common(compare);

  auto* audit = app.add_subcommand("audit", "Equivalence-theorem audit of a design");
  audit->add_option("config", config, "YAML configuration")->required();
  audit->add_option("design", design, "Design file (.csv or .json)")->required();
  add_common(audit);

  int dim = 1;
  std::size_t count = 0;
  std::size_t skip = 0;
  auto* sobol = app.add_subcommand("sobol", "Print Sobol points as CSV");
  sobol->add_option("--dim", dim, "Dimension (1..10)")->required();
  sobol->add_option("--count", count, "Number of points")->required();
  sobol->add_option("--skip", skip, "Leading points to skip");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  for (auto* sub : {solve, compare, audit}) {
    if (sub->parsed()) {
      if (sub->count("--seed")) flags.seed = seed;
      if (sub->count("--out-dir")) flags.out_dir = out_dir;
    }
  }

  try {
    if (solve->parsed()) return run_solve(config, flags);
    if (compare->parsed()) return run_compare(config, designs, flags);
    if (audit->parsed()) return run_audit(config, design, flags);
    if (sobol->parsed()) return run_sobol(dim, count, skip);
  } catch (const Error& e) {
    std::cerr << error_json(e.code(), e.what()).dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << error_json("InternalError", e.what()).dump() << "\n";
    return 1;
  }
  return 1;
}
