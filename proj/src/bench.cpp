#include "arclp/bench.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/core.h>
#include <json.hpp>

namespace arclp {

namespace fs = std::filesystem;

PreparedProblem prepare_problem(const std::string& name, const GeneralLp& g,
                                const SolverConfig& cfg) {
  PreparedProblem p;
  p.name = name;
  p.general = g;
  p.standard = to_standard_form(g);
  p.presolved = presolve(p.standard.lp, cfg.presolve);
  const StandardLp& red = p.presolved.reduced;
  if (p.presolved.status == PresolveStatus::Reduced && red.rows() > 0 && red.cols() > 0) {
    NormalEquations kkt(red.A, normal_eq_options(cfg));
    p.start = initial_point(red, kkt);
  }
  return p;
}

PreparedProblem prepare_problem(const std::string& path, const SolverConfig& cfg) {
  const GeneralLp g = read_mps_file(path);
  return prepare_problem(fs::path(path).stem().string(), g, cfg);
}

RunResult run_prepared(const PreparedProblem& p, const SolverConfig& cfg) {
  RunResult out;
  const PresolveResult& pre = p.presolved;
  if (pre.status == PresolveStatus::Infeasible) {
    out.report.status = SolveStatus::Infeasible;
    return out;
  }
  if (pre.status == PresolveStatus::Unbounded) {
    out.report.status = SolveStatus::Unbounded;
    return out;
  }
  const StandardLp& red = pre.reduced;
  Vec x, lambda, s;
  if (red.rows() == 0 || red.cols() == 0) {
    // Nothing left for the interior point method: x = 0 is optimal unless a
    // remaining column has negative cost.
    if (red.cols() > 0 && red.c.minCoeff() < 0.0) {
      out.report.status = SolveStatus::Unbounded;
      return out;
    }
    x = Vec::Zero(red.cols());
    lambda = Vec::Zero(red.rows());
    s = red.c;
    out.report.status = SolveStatus::Optimal;
    out.report.objective_primal = red.objective_offset;
    out.report.objective_dual = red.objective_offset;
  } else {
    const SolveResult r = solve(red, cfg, p.start ? &*p.start : nullptr);
    out.report = r.report;
    out.start_hash = r.start.hash();
    x = r.final_point.x();
    lambda = r.final_point.lambda();
    s = r.final_point.s();
  }
  out.standard_point = postsolve(pre.trace, x, lambda, s);
  out.x = recover_solution(p.standard.map, out.standard_point.x);
  out.objective = general_objective(p.general, out.x);
  return out;
}

RunResult run_single(const std::string& path, const SolverConfig& cfg) {
  return run_prepared(prepare_problem(path, cfg), cfg);
}

BenchRecord make_record(const PreparedProblem& p, Algorithm alg, const RunResult& r) {
  BenchRecord rec;
  rec.problem = p.name;
  rec.algorithm = std::string(to_string(alg));
  rec.status = r.report.status;
  rec.iterations = r.report.iterations;
  rec.final_metric = r.report.final_metric;
  rec.wall_time = r.report.solve_seconds;
  rec.m_before = p.standard.lp.rows();
  rec.n_before = p.standard.lp.cols();
  rec.m_after = p.presolved.reduced.rows();
  rec.n_after = p.presolved.reduced.cols();
  rec.objective = r.objective;
  rec.start_hash = r.start_hash;
  return rec;
}

std::vector<BenchRecord> run_suite(const std::string& dir,
                                   const std::vector<Algorithm>& algorithms,
                                   const SolverConfig& cfg) {
  if (!fs::is_directory(dir))
    throw std::runtime_error(fmt::format("{}: not a directory", dir));
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return std::tolower(ch); });
    if (e.is_regular_file() && ext == ".mps") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<BenchRecord> records;
  for (const auto& file : files) {
    std::optional<PreparedProblem> prepared;
    try {
      prepared = prepare_problem(file.string(), cfg);
    } catch (const std::exception& ex) {
      fmt::print(stderr, "{}: {}\n", file.string(), ex.what());
      for (Algorithm alg : algorithms) {
        BenchRecord rec;
        rec.problem = file.stem().string();
        rec.algorithm = std::string(to_string(alg));
        records.push_back(rec);
      }
      continue;
    }
    for (Algorithm alg : algorithms) {
      SolverConfig c = cfg;
      c.algorithm = alg;
      try {
        records.push_back(make_record(*prepared, alg, run_prepared(*prepared, c)));
      } catch (const std::exception& ex) {
        fmt::print(stderr, "{} with {}: {}\n", prepared->name, to_string(alg), ex.what());
        RunResult failed;
        failed.report.status = SolveStatus::NumericalFailure;
        records.push_back(make_record(*prepared, alg, failed));
      }
    }
  }
  return records;
}

namespace {

constexpr const char* kRecordHeader =
    "problem,algorithm,status,iterations,final_metric,wall_time,m_before,n_before,"
    "m_after,n_after,objective,start_hash";

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    // stod rejects "inf" spellings on some libraries; accept them here.
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw ParseError(fmt::format("bad number '{}'", s), line);
  }
}

int parse_int(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(fmt::format("bad integer '{}'", s), line);
  }
}

}  // namespace

void write_records_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << kRecordHeader << '\n';
  for (const auto& r : records) {
    out << fmt::format("{},{},{},{},{:.17g},{:.17g},{},{},{},{},{:.17g},{:016x}\n",
                       r.problem, r.algorithm, to_string(r.status), r.iterations,
                       r.final_metric, r.wall_time, r.m_before, r.n_before, r.m_after,
                       r.n_after, r.objective, r.start_hash);
  }
}

std::vector<BenchRecord> read_records_csv(std::istream& in) {
  std::vector<BenchRecord> records;
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty results file", 1);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRecordHeader) throw ParseError("unexpected header", line_no);
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 12)
      throw ParseError(fmt::format("expected 12 fields, got {}", f.size()), line_no);
    BenchRecord r;
    r.problem = f[0];
    r.algorithm = f[1];
    const auto status = parse_status(f[2]);
    if (!status) throw ParseError(fmt::format("unknown status '{}'", f[2]), line_no);
    r.status = *status;
    r.iterations = parse_int(f[3], line_no);
    r.final_metric = parse_double(f[4], line_no);
    r.wall_time = parse_double(f[5], line_no);
    r.m_before = parse_int(f[6], line_no);
    r.n_before = parse_int(f[7], line_no);
    r.m_after = parse_int(f[8], line_no);
    r.n_after = parse_int(f[9], line_no);
    r.objective = parse_double(f[10], line_no);
    try {
      std::size_t used = 0;
      r.start_hash = std::stoull(f[11], &used, 16);
      if (used != f[11].size()) throw std::invalid_argument(f[11]);
    } catch (const std::exception&) {
      throw ParseError(fmt::format("bad hash '{}'", f[11]), line_no);
    }
    records.push_back(r);
  }
  return records;
}

std::vector<double> log_tau_grid(double tau_max, int points) {
  if (!(tau_max >= 1.0) || points < 1)
    throw std::invalid_argument("need tau_max >= 1 and at least one point");
  std::vector<double> taus(points);
  taus[0] = 1.0;
  for (int k = 1; k < points; ++k)
    taus[k] = std::pow(tau_max, static_cast<double>(k) / (points - 1));
  if (points > 1) taus.back() = tau_max;
  return taus;
}

PerformanceProfile performance_profile(const std::vector<BenchRecord>& records,
                                       const std::vector<double>& taus,
                                       ProfileMetric metric) {
  if (records.empty()) throw std::invalid_argument("no benchmark records");
  if (taus.empty()) throw std::invalid_argument("no tau values");
  constexpr double inf = std::numeric_limits<double>::infinity();

  PerformanceProfile prof;
  prof.taus = taus;
  std::map<std::string, std::map<std::string, double>> cost;  // problem -> alg -> cost
  for (const auto& r : records) {
    double v = inf;
    if (r.status == SolveStatus::Optimal)
      v = metric == ProfileMetric::Iterations ? static_cast<double>(r.iterations)
                                              : r.wall_time;
    cost[r.problem][r.algorithm] = v;
    if (std::find(prof.algorithms.begin(), prof.algorithms.end(), r.algorithm) ==
        prof.algorithms.end())
      prof.algorithms.push_back(r.algorithm);
  }
  std::sort(prof.algorithms.begin(), prof.algorithms.end());

  const double problems = static_cast<double>(cost.size());
  prof.rho.assign(prof.algorithms.size(), std::vector<double>(taus.size(), 0.0));
  for (std::size_t a = 0; a < prof.algorithms.size(); ++a) {
    std::vector<double> ratios;
    for (const auto& [problem, by_alg] : cost) {
      double best = inf;
      for (const auto& [alg, v] : by_alg) best = std::min(best, v);
      const auto it = by_alg.find(prof.algorithms[a]);
      const double v = it == by_alg.end() ? inf : it->second;
      double ratio = inf;
      if (std::isfinite(v)) ratio = v == best ? 1.0 : v / best;
      ratios.push_back(ratio);
    }
    for (std::size_t k = 0; k < taus.size(); ++k) {
      const auto solved =
          std::count_if(ratios.begin(), ratios.end(), [&](double r) { return r <= taus[k]; });
      prof.rho[a][k] = static_cast<double>(solved) / problems;
    }
  }
  return prof;
}

void write_profile_csv(std::ostream& out, const PerformanceProfile& profile) {
  out << "tau";
  for (const auto& a : profile.algorithms) out << ',' << a;
  out << '\n';
  for (std::size_t k = 0; k < profile.taus.size(); ++k) {
    out << fmt::format("{:.17g}", profile.taus[k]);
    for (std::size_t a = 0; a < profile.algorithms.size(); ++a)
      out << fmt::format(",{:.17g}", profile.rho[a][k]);
    out << '\n';
  }
}

namespace {

using nlohmann::json;

double number(const json& v, const std::string& key) {
  if (!v.is_number()) throw std::invalid_argument(fmt::format("'{}' must be a number", key));
  return v.get<double>();
}

int integer(const json& v, const std::string& key) {
  if (!v.is_number_integer())
    throw std::invalid_argument(fmt::format("'{}' must be an integer", key));
  return v.get<int>();
}

bool flag(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw std::invalid_argument(fmt::format("'{}' must be true or false", key));
  return v.get<bool>();
}

void apply_presolve(const json& obj, PresolveOptions& p) {
  if (!obj.is_object()) throw std::invalid_argument("'presolve' must be an object");
  for (const auto& [key, v] : obj.items()) {
    if (key == "enabled") p.enabled = flag(v, key);
    else if (key == "zero_rows") p.zero_rows = flag(v, key);
    else if (key == "zero_columns") p.zero_columns = flag(v, key);
    else if (key == "singleton_rows") p.singleton_rows = flag(v, key);
    else if (key == "duplicate_rows") p.duplicate_rows = flag(v, key);
    else if (key == "implied_free_singletons") p.implied_free_singletons = flag(v, key);
    else if (key == "scaling_ratio_threshold") p.scaling_ratio_threshold = number(v, key);
    else throw std::invalid_argument(fmt::format("unknown presolve setting '{}'", key));
  }
}

}  // namespace

SolverConfig config_from_json_text(const std::string& text, SolverConfig cfg) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(fmt::format("config is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, v] : doc.items()) {
    if (key == "algorithm") {
      const auto alg = v.is_string() ? parse_algorithm(v.get<std::string>()) : std::nullopt;
      if (!alg) throw std::invalid_argument("'algorithm' must be arc1, arc2 or mpc");
      cfg.algorithm = *alg;
    } else if (key == "epsilon") cfg.epsilon = number(v, key);
    else if (key == "sigma_min") cfg.sigma_min = number(v, key);
    else if (key == "sigma_max") cfg.sigma_max = number(v, key);
    else if (key == "rho") cfg.rho = number(v, key);
    else if (key == "theta_mode") {
      const std::string mode = v.is_string() ? v.get<std::string>() : "";
      if (mode == "initial_point") cfg.theta_rule = ThetaRule::InitialPoint;
      else if (mode == "fixed") cfg.theta_rule = ThetaRule::Fixed;
      else throw std::invalid_argument("'theta_mode' must be initial_point or fixed");
    } else if (key == "theta") cfg.theta_value = number(v, key);
    else if (key == "max_iterations") cfg.max_iterations = integer(v, key);
    else if (key == "bisection_tol") cfg.bisection_tol = number(v, key);
    else if (key == "max_backtracks") cfg.max_backtracks = integer(v, key);
    else if (key == "step_tol") cfg.step_tol = number(v, key);
    else if (key == "mu_floor") cfg.mu_floor = number(v, key);
    else if (key == "blowup_factor") cfg.blowup_factor = number(v, key);
    else if (key == "regularization_pivot_floor") cfg.regularization_pivot_floor = number(v, key);
    else if (key == "dense_threshold") cfg.dense_threshold = integer(v, key);
    else if (key == "iterative_refinement") cfg.iterative_refinement = flag(v, key);
    else if (key == "degenerate_handling") cfg.degenerate_handling = flag(v, key);
    else if (key == "time_limit_seconds") cfg.time_limit_seconds = number(v, key);
    else if (key == "presolve_enabled") cfg.presolve.enabled = flag(v, key);
    else if (key == "scaling_ratio_threshold") cfg.presolve.scaling_ratio_threshold = number(v, key);
    else if (key == "presolve") apply_presolve(v, cfg.presolve);
    else throw std::invalid_argument(fmt::format("unknown setting '{}'", key));
  }
  cfg.validate();
  return cfg;
}

SolverConfig load_config(const std::string& path, SolverConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("{}: cannot open config", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str(), std::move(base));
}

}  // namespace arclp
