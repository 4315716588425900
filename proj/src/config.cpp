#include "mmphi/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "mmphi/errors.hpp"
#include "mmphi/model_sets.hpp"

namespace mmphi {

std::string to_string(Task t) {
  switch (t) {
    case Task::local: return "local";
    case Task::maximin: return "maximin";
    case Task::eff_compromise: return "eff_compromise";
    case Task::phi_compromise: return "phi_compromise";
    case Task::evaluate: return "evaluate";
    case Task::evaluate_weights: return "evaluate_weights";
  }
  return "unknown";
}

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& field, const std::string& msg) const {
    std::ostringstream os;
    os << source_;
    if (at.IsDefined() && at.Mark().line >= 0) os << ':' << (at.Mark().line + 1);
    os << ": field '" << field << "': " << msg;
    throw ConfigError(os.str());
  }

  void keys(const YAML::Node& map, const std::string& field, std::set<std::string> allowed) const {
    if (!map.IsMap()) fail(map, field, "expected a mapping");
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, join(field, key), "unknown key");
    }
  }

  static std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }
  static std::string index(const std::string& a, std::size_t i) { return a + "[" + std::to_string(i) + "]"; }

  template <class T>
  T scalar(const YAML::Node& n, const std::string& field, const char* what) const {
    if (!n.IsScalar()) fail(n, field, std::string("expected ") + what);
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, field, std::string("expected ") + what + ", got '" + n.Scalar() + "'");
    }
  }
  double real(const YAML::Node& n, const std::string& f) const { return scalar<double>(n, f, "a number"); }
  long long integer(const YAML::Node& n, const std::string& f) const {
    const double v = real(n, f);
    if (v != std::floor(v)) fail(n, f, "expected an integer, got '" + n.Scalar() + "'");
    return scalar<long long>(n, f, "an integer");
  }
  bool boolean(const YAML::Node& n, const std::string& f) const { return scalar<bool>(n, f, "true or false"); }
  std::string text(const YAML::Node& n, const std::string& f) const { return scalar<std::string>(n, f, "a string"); }

  Vec vec(const YAML::Node& n, const std::string& f) const {
    if (!n.IsSequence() || n.size() == 0) fail(n, f, "expected a non-empty list of numbers");
    Vec v(static_cast<Eigen::Index>(n.size()));
    for (std::size_t i = 0; i < n.size(); ++i) v[static_cast<Eigen::Index>(i)] = real(n[i], index(f, i));
    return v;
  }
  Mat mat(const YAML::Node& n, const std::string& f) const {
    if (!n.IsSequence() || n.size() == 0) fail(n, f, "expected a non-empty list of rows");
    const Vec first = vec(n[0], index(f, 0));
    Mat m(static_cast<Eigen::Index>(n.size()), first.size());
    for (std::size_t i = 0; i < n.size(); ++i) {
      const Vec r = vec(n[i], index(f, i));
      if (r.size() != first.size()) fail(n[i], index(f, i), "rows differ in length");
      m.row(static_cast<Eigen::Index>(i)) = r.transpose();
    }
    return m;
  }
  std::vector<int> ints(const YAML::Node& n, const std::string& f, int broadcast) const {
    if (n.IsScalar()) return std::vector<int>(static_cast<std::size_t>(broadcast), static_cast<int>(integer(n, f)));
    if (!n.IsSequence()) fail(n, f, "expected an integer or a list of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(static_cast<int>(integer(n[i], index(f, i))));
    return out;
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

Basis parse_basis(const Reader& rd, const YAML::Node& m, const std::string& f, int d) {
  const YAML::Node terms = m["terms"];
  const YAML::Node named = m["basis"];
  if (terms && named) rd.fail(m, f, "give either 'basis' or 'terms', not both");
  if (terms) {
    if (!terms.IsSequence() || terms.size() == 0) rd.fail(terms, Reader::join(f, "terms"), "expected a list of exponent vectors");
    std::vector<Basis::Term> ts;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const std::string tf = Reader::index(Reader::join(f, "terms"), i);
      const YAML::Node t = terms[i];
      if (!t.IsSequence() || static_cast<int>(t.size()) != d) {
        rd.fail(t, tf, "expected " + std::to_string(d) + " exponents");
      }
      Basis::Term term;
      for (std::size_t k = 0; k < t.size(); ++k) {
        const long long e = rd.integer(t[k], Reader::index(tf, k));
        if (e < 0) rd.fail(t[k], Reader::index(tf, k), "exponent must be a non-negative integer");
        term.push_back(static_cast<int>(e));
      }
      ts.push_back(std::move(term));
    }
    try {
      return Basis(std::move(ts));
    } catch (const Error& e) {
      rd.fail(terms, Reader::join(f, "terms"), e.what());
    }
  }
  if (!named) rd.fail(m, f, "missing 'basis' or 'terms'");
  const std::string name = rd.text(named, Reader::join(f, "basis"));
  if (name == "linear") return Basis::linear(d);
  if (name == "with_interactions" || name == "interactions") return Basis::with_interactions(d);
  if (name == "full_quadratic" || name == "quadratic") return Basis::full_quadratic(d);
  rd.fail(named, Reader::join(f, "basis"), "unknown basis '" + name + "' (linear, with_interactions, full_quadratic)");
}

LinkKind parse_link_field(const Reader& rd, const YAML::Node& n, const std::string& f) {
  if (!n) rd.fail(n, f, "missing link");
  try {
    return parse_link(rd.text(n, f));
  } catch (const InvalidArgument& e) {
    rd.fail(n, f, e.what());
  }
}

CoefficientBox parse_coefficient_box(const Reader& rd, const YAML::Node& n, const std::string& f) {
  rd.keys(n, f, {"lower", "upper", "count", "centroid", "skip"});
  CoefficientBox cb;
  try {
    cb.box = BoxDomain(rd.vec(n["lower"], Reader::join(f, "lower")), rd.vec(n["upper"], Reader::join(f, "upper")));
  } catch (const InvalidArgument& e) {
    rd.fail(n, f, e.what());
  }
  if (n["count"]) {
    const long long c = rd.integer(n["count"], Reader::join(f, "count"));
    if (c < 0) rd.fail(n["count"], Reader::join(f, "count"), "must be >= 0");
    cb.count = static_cast<std::size_t>(c);
  }
  if (n["centroid"]) cb.centroid = rd.boolean(n["centroid"], Reader::join(f, "centroid"));
  if (n["skip"]) {
    const long long s = rd.integer(n["skip"], Reader::join(f, "skip"));
    if (s < 0) rd.fail(n["skip"], Reader::join(f, "skip"), "must be >= 0");
    cb.skip = static_cast<std::size_t>(s);
  }
  if (cb.count == 0 && !cb.centroid) rd.fail(n, f, "box yields no coefficient vectors");
  return cb;
}

void parse_models(const Reader& rd, const YAML::Node& n, int d, RunConfig& cfg) {
  if (!n || !n.IsSequence() || n.size() == 0) rd.fail(n, "models", "expected a non-empty list");
  for (std::size_t i = 0; i < n.size(); ++i) {
    const std::string f = Reader::index("models", i);
    const YAML::Node m = n[i];
    if (m["generator"]) {
      rd.keys(m, f, {"generator", "seed"});
      const std::string gen = rd.text(m["generator"], Reader::join(f, "generator"));
      if (gen != "nested_polynomial") rd.fail(m["generator"], Reader::join(f, "generator"), "unknown generator '" + gen + "'");
      if (d != 2) rd.fail(m, f, "nested_polynomial models need a 2-dimensional domain");
      const auto seed = m["seed"] ? rd.integer(m["seed"], Reader::join(f, "seed")) : 0;
      cfg.generated.push_back({cfg.models.size(), static_cast<std::uint64_t>(seed)});
      for (auto& mdl : nested_polynomial_models(static_cast<std::uint64_t>(seed))) cfg.models.push_back(std::move(mdl));
      continue;
    }
    rd.keys(m, f, {"link", "basis", "terms", "beta", "contrast", "coefficient_box"});
    const LinkKind link = parse_link_field(rd, m["link"], Reader::join(f, "link"));
    const Basis basis = parse_basis(rd, m, f, d);
    const bool has_beta = static_cast<bool>(m["beta"]);
    const bool has_box = static_cast<bool>(m["coefficient_box"]);
    if (has_beta == has_box) rd.fail(m, f, "give exactly one of 'beta' or 'coefficient_box'");
    std::optional<Mat> contrast;
    if (m["contrast"]) contrast = rd.mat(m["contrast"], Reader::join(f, "contrast"));
    std::vector<Vec> betas;
    if (has_beta) {
      betas.push_back(rd.vec(m["beta"], Reader::join(f, "beta")));
    } else {
      const auto cb = parse_coefficient_box(rd, m["coefficient_box"], Reader::join(f, "coefficient_box"));
      betas = discretize_coefficient_box(cb.box, cb.count, cb.centroid, cb.skip);
    }
    for (const auto& b : betas) {
      try {
        cfg.models.emplace_back(link, basis, b, contrast);
      } catch (const Error& e) {
        rd.fail(m, f, e.what());
      }
    }
  }
}

CriterionSpec parse_criterion(const Reader& rd, const YAML::Node& n, const RunConfig& cfg) {
  if (!n) rd.fail(n, "criterion", "missing section");
  rd.keys(n, "criterion", {"family", "p", "p0_convention", "measure"});
  const std::string fam = n["family"] ? rd.text(n["family"], "criterion.family") : "phi_p";
  CriterionSpec crit;
  if (fam == "D" || fam == "d") {
    crit = CriterionSpec::d_optimal();
  } else if (fam == "A" || fam == "a") {
    crit = CriterionSpec::a_optimal();
  } else if (fam == "phi_p") {
    crit = CriterionSpec::phi(n["p"] ? rd.real(n["p"], "criterion.p") : 0.0);
  } else if (fam == "ei" || fam == "EI" || fam == "I") {
    EiMeasure meas;
    meas.domain = cfg.domain;
    meas.resolution = cfg.resolution;
    if (const YAML::Node m = n["measure"]) {
      rd.keys(m, "criterion.measure", {"lower", "upper", "resolution"});
      if (m["lower"] || m["upper"]) {
        try {
          meas.domain = BoxDomain(rd.vec(m["lower"], "criterion.measure.lower"), rd.vec(m["upper"], "criterion.measure.upper"));
        } catch (const InvalidArgument& e) {
          rd.fail(m, "criterion.measure", e.what());
        }
      }
      if (m["resolution"]) meas.resolution = rd.ints(m["resolution"], "criterion.measure.resolution", meas.domain->dim());
    }
    if (meas.resolution.empty()) rd.fail(n, "criterion.measure.resolution", "EI needs a quadrature resolution");
    crit = CriterionSpec::ei(meas);
  } else {
    rd.fail(n["family"], "criterion.family", "unknown family '" + fam + "' (phi_p, D, A, ei)");
  }
  if (fam != "phi_p" && n["p"]) rd.fail(n["p"], "criterion.p", "only valid with family phi_p");
  if (const YAML::Node c = n["p0_convention"]) {
    const std::string conv = rd.text(c, "criterion.p0_convention");
    if (conv == "logdet") {
      crit.p0_convention = P0Convention::logdet;
    } else if (conv == "root_det") {
      crit.p0_convention = P0Convention::root_det;
    } else {
      rd.fail(c, "criterion.p0_convention", "expected logdet or root_det");
    }
  }
  try {
    crit.validate();
  } catch (const Error& e) {
    rd.fail(n, "criterion", e.what());
  }
  return crit;
}

SolverConfig parse_solver(const Reader& rd, const YAML::Node& n) {
  SolverConfig s;
  if (!n) return s;
  rd.keys(n, "solver", {"tol_eff", "max_add_iters", "weight_tol", "max_weight_iters", "delta", "prune_weight",
                        "prune", "polish_iters", "seed", "local_tol_eff", "eff_compromise_threshold"});
  if (n["tol_eff"]) s.tol_eff = rd.real(n["tol_eff"], "solver.tol_eff");
  if (n["max_add_iters"]) s.max_add_iters = static_cast<int>(rd.integer(n["max_add_iters"], "solver.max_add_iters"));
  if (n["weight_tol"]) s.weight_tol = rd.real(n["weight_tol"], "solver.weight_tol");
  if (n["max_weight_iters"]) s.max_weight_iters = static_cast<int>(rd.integer(n["max_weight_iters"], "solver.max_weight_iters"));
  if (n["delta"]) s.delta = rd.real(n["delta"], "solver.delta");
  if (n["prune_weight"]) s.prune_weight = rd.real(n["prune_weight"], "solver.prune_weight");
  if (n["prune"]) s.prune = rd.boolean(n["prune"], "solver.prune");
  if (n["polish_iters"]) s.polish_iters = static_cast<int>(rd.integer(n["polish_iters"], "solver.polish_iters"));
  if (n["seed"]) s.seed = static_cast<std::uint64_t>(rd.integer(n["seed"], "solver.seed"));
  if (n["local_tol_eff"]) s.local_tol_eff = rd.real(n["local_tol_eff"], "solver.local_tol_eff");
  if (n["eff_compromise_threshold"]) {
    s.eff_compromise_threshold = rd.real(n["eff_compromise_threshold"], "solver.eff_compromise_threshold");
  }
  try {
    s.validate();
  } catch (const Error& e) {
    rd.fail(n, "solver", e.what());
  }
  return s;
}

Task parse_task(const Reader& rd, const YAML::Node& n) {
  if (!n) rd.fail(n, "task", "missing");
  const std::string t = rd.text(n, "task");
  for (Task k : {Task::local, Task::maximin, Task::eff_compromise, Task::phi_compromise, Task::evaluate,
                 Task::evaluate_weights}) {
    if (to_string(k) == t) return k;
  }
  rd.fail(n, "task", "unknown task '" + t + "'");
}

Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json mat_json(const Mat& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

Json terms_json(const Basis& b) {
  Json a = Json::array();
  for (const auto& t : b.terms()) a.push_back(t);
  return a;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  const Reader rd(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  rd.keys(root, "", {"domain", "models", "criterion", "solver", "task", "prior", "phi_opt", "design", "evaluation",
                     "output"});
  RunConfig cfg;
  cfg.source = source;

  const YAML::Node dom = root["domain"];
  if (!dom) rd.fail(root, "domain", "missing section");
  rd.keys(dom, "domain", {"lower", "upper", "resolution", "points"});
  try {
    cfg.domain = BoxDomain(rd.vec(dom["lower"], "domain.lower"), rd.vec(dom["upper"], "domain.upper"));
  } catch (const InvalidArgument& e) {
    rd.fail(dom, "domain", e.what());
  }
  const int d = cfg.domain.dim();
  if (dom["points"]) {
    cfg.pool_points = rd.mat(dom["points"], "domain.points");
    if (cfg.pool_points->cols() != d) rd.fail(dom["points"], "domain.points", "point dimension differs from the domain");
    for (Eigen::Index i = 0; i < cfg.pool_points->rows(); ++i) {
      if (!cfg.domain.contains(cfg.pool_points->row(i).transpose())) {
        rd.fail(dom["points"], Reader::index("domain.points", static_cast<std::size_t>(i)), "point lies outside the domain");
      }
    }
  }
  if (dom["resolution"]) {
    cfg.resolution = rd.ints(dom["resolution"], "domain.resolution", d);
    if (static_cast<int>(cfg.resolution.size()) != d) rd.fail(dom["resolution"], "domain.resolution", "needs one entry per dimension");
    for (int r : cfg.resolution) {
      if (r < 2) rd.fail(dom["resolution"], "domain.resolution", "must be >= 2");
    }
  } else if (!cfg.pool_points) {
    rd.fail(dom, "domain.resolution", "give a grid resolution or explicit points");
  }

  parse_models(rd, root["models"], d, cfg);
  cfg.criterion = parse_criterion(rd, root["criterion"], cfg);
  cfg.solver = parse_solver(rd, root["solver"]);
  cfg.task = parse_task(rd, root["task"]);

  const auto m = cfg.models.size();
  if (const YAML::Node p = root["prior"]) {
    const Vec v = rd.vec(p, "prior");
    if (static_cast<std::size_t>(v.size()) != m) rd.fail(p, "prior", "needs one weight per model (" + std::to_string(m) + ")");
    cfg.prior.assign(v.data(), v.data() + v.size());
  }
  if (const YAML::Node p = root["phi_opt"]) {
    const Vec v = rd.vec(p, "phi_opt");
    if (static_cast<std::size_t>(v.size()) != m) rd.fail(p, "phi_opt", "needs one value per model");
    cfg.phi_opt = std::vector<double>(v.data(), v.data() + v.size());
  }
  if (const YAML::Node ds = root["design"]) {
    rd.keys(ds, "design", {"points", "weights"});
    cfg.design_points = rd.mat(ds["points"], "design.points");
    if (cfg.design_points->cols() != d) rd.fail(ds["points"], "design.points", "point dimension differs from the domain");
    if (ds["weights"]) {
      cfg.design_weights = rd.vec(ds["weights"], "design.weights");
      if (cfg.design_weights->size() != cfg.design_points->rows()) {
        rd.fail(ds["weights"], "design.weights", "needs one weight per point");
      }
    }
  }
  if ((cfg.task == Task::evaluate || cfg.task == Task::evaluate_weights) && !cfg.design_points) {
    rd.fail(root, "design", "task " + to_string(cfg.task) + " needs design.points");
  }
  if (cfg.task == Task::evaluate && !cfg.design_weights) rd.fail(root["design"], "design.weights", "task evaluate needs weights");
  if (cfg.task == Task::local && m != 1) rd.fail(root["models"], "models", "task local needs exactly one model");

  if (const YAML::Node ev = root["evaluation"]) {
    rd.keys(ev, "evaluation", {"link", "basis", "terms", "coefficient_box"});
    EvaluationSpec es;
    es.link = parse_link_field(rd, ev["link"], "evaluation.link");
    es.basis = parse_basis(rd, ev, "evaluation", d);
    if (!ev["coefficient_box"]) rd.fail(ev, "evaluation.coefficient_box", "missing");
    es.box = parse_coefficient_box(rd, ev["coefficient_box"], "evaluation.coefficient_box");
    if (es.box.box.dim() != es.basis.size()) {
      rd.fail(ev["coefficient_box"], "evaluation.coefficient_box", "dimension differs from the basis size");
    }
    cfg.evaluation = es;
  }
  if (const YAML::Node out = root["output"]) {
    rd.keys(out, "output", {"dir"});
    if (out["dir"]) cfg.output_dir = rd.text(out["dir"], "output.dir");
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path.string());
}

CandidatePool RunConfig::pool() const {
  if (pool_points) return CandidatePool::from_points(*pool_points);
  return grid_pool(domain, resolution);
}

void RunConfig::reseed_generators(std::uint64_t seed) {
  for (auto& g : generated) {
    g.seed = seed;
    auto fresh = nested_polynomial_models(seed);
    for (std::size_t k = 0; k < fresh.size(); ++k) models[g.offset + k] = std::move(fresh[k]);
  }
}

Json RunConfig::resolved() const {
  Json models_j = Json::array();
  for (const auto& mdl : models) {
    Json mj{{"link", std::string(to_string(mdl.link()))}, {"terms", terms_json(mdl.basis())}, {"beta", vec_json(mdl.beta())}};
    if (!mdl.identity_contrast()) mj["contrast"] = mat_json(mdl.contrast());
    models_j.push_back(mj);
  }
  Json crit{{"family", criterion.is_ei() ? "ei" : "phi_p"},
            {"p", criterion.p},
            {"p0_convention", criterion.p0_convention == P0Convention::logdet ? "logdet" : "root_det"},
            {"description", criterion.describe()}};
  if (criterion.is_ei()) {
    crit["measure"] = {{"lower", vec_json(criterion.ei_measure->domain->lower)},
                       {"upper", vec_json(criterion.ei_measure->domain->upper)},
                       {"resolution", criterion.ei_measure->resolution},
                       {"quadrature", "tensor Simpson (odd resolution) or trapezoid, normalized"}};
  }
  Json solver_j{{"tol_eff", solver.tol_eff},
                {"max_add_iters", solver.max_add_iters},
                {"weight_tol", solver.weight_tol},
                {"max_weight_iters", solver.max_weight_iters},
                {"delta", solver.delta_for(criterion)},
                {"prune_weight", solver.prune_weight},
                {"prune", solver.prune},
                {"polish_iters", solver.polish_iters},
                {"seed", solver.seed},
                {"local_tol_eff", solver.local_tol_eff},
                {"eff_compromise_threshold", solver.eff_compromise_threshold}};
  Json j{{"source", source},
         {"domain", {{"lower", vec_json(domain.lower)}, {"upper", vec_json(domain.upper)}}},
         {"models", models_j},
         {"criterion", crit},
         {"solver", solver_j},
         {"task", to_string(task)},
         {"sobol_convention", kSobolConvention},
         {"output", {{"dir", output_dir}}}};
  if (pool_points) {
    j["domain"]["points"] = mat_json(*pool_points);
  } else {
    j["domain"]["resolution"] = resolution;
  }
  if (!prior.empty()) j["prior"] = prior;
  if (phi_opt) j["phi_opt"] = *phi_opt;
  if (design_points) {
    j["design"]["points"] = mat_json(*design_points);
    if (design_weights) j["design"]["weights"] = vec_json(*design_weights);
  }
  if (evaluation) {
    j["evaluation"] = {{"link", std::string(to_string(evaluation->link))},
                       {"terms", terms_json(evaluation->basis)},
                       {"coefficient_box",
                        {{"lower", vec_json(evaluation->box.box.lower)},
                         {"upper", vec_json(evaluation->box.box.upper)},
                         {"count", evaluation->box.count},
                         {"centroid", evaluation->box.centroid},
                         {"skip", evaluation->box.skip}}}};
  }
  return j;
}

}  // namespace mmphi
