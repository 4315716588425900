#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmphi/glm.hpp"
#include "mmphi/sampling.hpp"
#include "mmphi/solver.hpp"

namespace mmphi {

using Json = nlohmann::json;

/// Columns x1..xd, weight; values at 17 significant digits.
void write_design_csv(const std::filesystem::path& path, const Design& design);
Design read_design_csv(const std::filesystem::path& path);

Json design_to_json(const Design& design);
Design design_from_json(const Json& j);
void write_design_json(const std::filesystem::path& path, const Design& design);
Design read_design_json(const std::filesystem::path& path);
/// Dispatches on the extension (.json or .csv).
Design read_design(const std::filesystem::path& path);

/// iter, se, lse, objective, eff_lower_bound, n_support.
void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& trace);
/// Candidate coordinates and phi(x, xi_final).
void write_audit_csv(const std::filesystem::path& path, const Mat& points, const Vec& phi);
void write_pool_csv(const std::filesystem::path& path, const CandidatePool& pool);

/// Rows of per-model values for one or more designs.
struct EffTableRow {
  std::string design;
  int model = 0;
  double value = 0.0;
  double phi_opt = 0.0;
  double efficiency = 0.0;
};
void write_eff_table_csv(const std::filesystem::path& path, const std::vector<EffTableRow>& rows);

std::string to_string(Objective o);
Json report_to_json(const SolveReport& report);

/// {"error": {"code": ..., "message": ...}}.
Json error_json(const std::string& code, const std::string& message);

void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

}  // namespace mmphi
