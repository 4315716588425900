#include "mmphi/io.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "mmphi/errors.hpp"

namespace mmphi {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot open " + path.string() + " for writing");
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  return os;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open " + path.string());
  return is;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

void write_number(std::ostream& os, double v) {
  if (std::isnan(v)) {
    os << "nan";
  } else {
    os << v;
  }
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number_or_null(v[i]));
  return a;
}

}  // namespace

void write_design_csv(const fs::path& path, const Design& design) {
  auto os = open_out(path);
  for (int k = 0; k < design.input_dim(); ++k) os << 'x' << (k + 1) << ',';
  os << "weight\n";
  for (Eigen::Index i = 0; i < design.size(); ++i) {
    for (int k = 0; k < design.input_dim(); ++k) os << design.points()(i, k) << ',';
    os << design.weights()[i] << '\n';
  }
}

Design read_design_csv(const fs::path& path) {
  auto is = open_in(path);
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument(path.string() + ": empty design file");
  const auto header = split_csv(line);
  if (header.size() < 2 || header.back() != "weight") {
    throw InvalidArgument(path.string() + ": design header must end with a weight column");
  }
  const int d = static_cast<int>(header.size()) - 1;
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (static_cast<int>(cells.size()) != d + 1) {
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(d + 1) +
                            " columns");
    }
    std::vector<double> r;
    for (const auto& c : cells) {
      try {
        r.push_back(std::stod(c));
      } catch (const std::exception&) {
        throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": not a number: " + c);
      }
    }
    rows.push_back(std::move(r));
  }
  Mat pts(static_cast<Eigen::Index>(rows.size()), d);
  Vec w(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int k = 0; k < d; ++k) pts(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
    w[static_cast<Eigen::Index>(i)] = rows[i].back();
  }
  return Design(pts, w);
}

Json design_to_json(const Design& design) {
  Json pts = Json::array();
  for (Eigen::Index i = 0; i < design.size(); ++i) pts.push_back(vec_json(design.points().row(i).transpose()));
  return Json{{"dim", design.input_dim()}, {"points", pts}, {"weights", vec_json(design.weights())}};
}

Design design_from_json(const Json& j) {
  try {
    const auto& pts = j.at("points");
    const auto& ws = j.at("weights");
    if (pts.size() != ws.size() || pts.empty()) throw InvalidArgument("design JSON: points and weights differ in length");
    const auto d = static_cast<Eigen::Index>(pts.at(0).size());
    Mat p(static_cast<Eigen::Index>(pts.size()), d);
    Vec w(static_cast<Eigen::Index>(ws.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (static_cast<Eigen::Index>(pts[i].size()) != d) throw InvalidArgument("design JSON: ragged points");
      for (Eigen::Index k = 0; k < d; ++k) p(static_cast<Eigen::Index>(i), k) = pts[i][static_cast<std::size_t>(k)].get<double>();
      w[static_cast<Eigen::Index>(i)] = ws[i].get<double>();
    }
    return Design(p, w);
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("design JSON: ") + e.what());
  }
}

void write_design_json(const fs::path& path, const Design& design) { write_json(path, design_to_json(design)); }

Design read_design_json(const fs::path& path) {
  const Json j = read_json(path);
  return design_from_json(j.contains("design") ? j.at("design") : j);
}

Design read_design(const fs::path& path) {
  return path.extension() == ".json" ? read_design_json(path) : read_design_csv(path);
}

void write_trace_csv(const fs::path& path, const std::vector<TraceRow>& trace) {
  auto os = open_out(path);
  os << "iter,se,lse,objective,eff_lower_bound,n_support\n";
  for (const auto& r : trace) {
    os << r.iter << ',';
    write_number(os, r.se);
    os << ',';
    write_number(os, r.lse);
    os << ',';
    write_number(os, r.objective);
    os << ',';
    write_number(os, r.eff_lower_bound);
    os << ',' << r.n_support << '\n';
  }
}

void write_audit_csv(const fs::path& path, const Mat& points, const Vec& phi) {
  auto os = open_out(path);
  for (Eigen::Index k = 0; k < points.cols(); ++k) os << 'x' << (k + 1) << ',';
  os << "phi\n";
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index k = 0; k < points.cols(); ++k) os << points(i, k) << ',';
    write_number(os, phi[i]);
    os << '\n';
  }
}

void write_pool_csv(const fs::path& path, const CandidatePool& pool) {
  auto os = open_out(path);
  for (int k = 0; k < pool.dim(); ++k) os << (k ? "," : "") << 'x' << (k + 1);
  os << '\n';
  for (Eigen::Index i = 0; i < pool.size(); ++i) {
    for (int k = 0; k < pool.dim(); ++k) os << (k ? "," : "") << pool.points(i, k);
    os << '\n';
  }
}

void write_eff_table_csv(const fs::path& path, const std::vector<EffTableRow>& rows) {
  auto os = open_out(path);
  os << "design,model,value,phi_opt,efficiency\n";
  for (const auto& r : rows) {
    os << r.design << ',' << r.model << ',';
    write_number(os, r.value);
    os << ',';
    write_number(os, r.phi_opt);
    os << ',';
    write_number(os, r.efficiency);
    os << '\n';
  }
}

std::string to_string(Objective o) {
  switch (o) {
    case Objective::maximin: return "maximin";
    case Objective::phi_compromise: return "phi_compromise";
    case Objective::eff_compromise: return "eff_compromise";
    case Objective::local: return "local";
  }
  return "unknown";
}

Json report_to_json(const SolveReport& r) {
  Json trace = Json::array();
  for (const auto& t : r.trace) {
    trace.push_back({{"iter", t.iter},
                     {"se", number_or_null(t.se)},
                     {"lse", number_or_null(t.lse)},
                     {"objective", number_or_null(t.objective)},
                     {"eff_lower_bound", number_or_null(t.eff_lower_bound)},
                     {"n_support", t.n_support}});
  }
  Json values = Json::array();
  for (double v : r.values) values.push_back(number_or_null(v));
  Json effs = Json::array();
  for (double v : r.efficiencies) effs.push_back(number_or_null(v));
  return Json{{"objective", to_string(r.objective)},
              {"status", to_string(r.status)},
              {"certified", r.certified},
              {"flags", r.flags},
              {"design", design_to_json(r.design)},
              {"values", values},
              {"efficiencies", effs},
              {"outer_iterations", r.outer_iterations},
              {"weight_iterations", r.weight_iterations},
              {"wall_seconds", r.wall_seconds},
              {"final_objective", number_or_null(r.final_objective)},
              {"final_se", number_or_null(r.final_se)},
              {"final_lse", number_or_null(r.final_lse)},
              {"eff_lower_bound", number_or_null(r.eff_lower_bound)},
              {"audit",
               {{"min_phi", number_or_null(r.min_phi)},
                {"max_support_abs_phi", number_or_null(r.max_support_phi)},
                {"pool_size", r.audit_points.rows()}}},
              {"trace", trace}};
}

Json error_json(const std::string& code, const std::string& message) {
  return Json{{"error", {{"code", code}, {"message", message}}}};
}

void write_json(const fs::path& path, const Json& j) {
  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

Json read_json(const fs::path& path) {
  auto is = open_in(path);
  try {
    return Json::parse(is);
  } catch (const Json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

}  // namespace mmphi
