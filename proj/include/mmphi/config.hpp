#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mmphi/criterion.hpp"
#include "mmphi/glm.hpp"
#include "mmphi/io.hpp"
#include "mmphi/sampling.hpp"
#include "mmphi/solver.hpp"

namespace mmphi {

enum class Task { local, maximin, eff_compromise, phi_compromise, evaluate, evaluate_weights };
std::string to_string(Task t);

/// Coefficient vectors drawn as a scaled Sobol sample of a box.
struct CoefficientBox {
  BoxDomain box;
  std::size_t count = 0;
  bool centroid = false;
  std::size_t skip = 0;
};

/// Out-of-sample evaluation over a coefficient box (one model per draw).
struct EvaluationSpec {
  LinkKind link = LinkKind::logit;
  Basis basis;
  CoefficientBox box;
};

/// A parsed and validated solve configuration.
struct RunConfig {
  std::string source;
  BoxDomain domain;
  std::vector<int> resolution;
  std::optional<Mat> pool_points;
  std::vector<ModelSpec> models;
  CriterionSpec criterion;
  SolverConfig solver;
  Task task = Task::maximin;
  std::vector<double> prior;
  std::optional<std::vector<double>> phi_opt;
  std::optional<Mat> design_points;
  std::optional<Vec> design_weights;
  std::optional<EvaluationSpec> evaluation;
  std::string output_dir = "out";
  /// Positions in `models` produced by the nested_polynomial generator.
  struct Generated {
    std::size_t offset = 0;
    std::uint64_t seed = 0;
  };
  std::vector<Generated> generated;

  /// Redraws every generated model block from `seed`.
  void reseed_generators(std::uint64_t seed);

  CandidatePool pool() const;
  /// Full resolved configuration with defaults expanded.
  Json resolved() const;
};

/// Parses YAML text; errors name the source line and the offending field.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

}  // namespace mmphi
