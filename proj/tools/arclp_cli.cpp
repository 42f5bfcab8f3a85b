// Command-line front end: solve one MPS file, run a benchmark directory, or
// turn benchmark results into performance-profile data.

#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "arclp/bench.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kSolverFailure = 1;
constexpr int kInputError = 2;

struct CommonOptions {
  std::string config_path;
  std::optional<int> max_iter;
  std::optional<double> tol;
  std::optional<double> time_limit;
  bool no_presolve = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "JSON file with solver settings");
  cmd->add_option("--max-iter", o.max_iter, "iteration limit");
  cmd->add_option("--tol", o.tol, "stopping tolerance on the composite metric");
  cmd->add_option("--time-limit", o.time_limit, "seconds allowed per problem");
  cmd->add_flag("--no-presolve", o.no_presolve, "skip presolve reductions");
}

arclp::SolverConfig build_config(const CommonOptions& o) {
  arclp::SolverConfig cfg;
  if (!o.config_path.empty()) cfg = arclp::load_config(o.config_path, cfg);
  if (o.max_iter) cfg.max_iterations = *o.max_iter;
  if (o.tol) cfg.epsilon = *o.tol;
  if (o.time_limit) cfg.time_limit_seconds = *o.time_limit;
  if (o.no_presolve) cfg.presolve.enabled = false;
  cfg.validate();
  return cfg;
}

std::vector<arclp::Algorithm> parse_algorithms(const std::string& list) {
  std::vector<arclp::Algorithm> algs;
  std::stringstream ss(list);
  std::string name;
  while (std::getline(ss, name, ',')) {
    const auto alg = arclp::parse_algorithm(name);
    if (!alg) throw std::invalid_argument(fmt::format("unknown algorithm '{}'", name));
    algs.push_back(*alg);
  }
  if (algs.empty()) throw std::invalid_argument("no algorithms given");
  return algs;
}

int cmd_solve(const std::string& file, const std::string& alg_name, const CommonOptions& o,
              bool verbose) {
  arclp::SolverConfig cfg = build_config(o);
  if (!alg_name.empty()) {
    const auto alg = arclp::parse_algorithm(alg_name);
    if (!alg) throw std::invalid_argument(fmt::format("unknown algorithm '{}'", alg_name));
    cfg.algorithm = *alg;
  }
  const arclp::PreparedProblem p = arclp::prepare_problem(file, cfg);
  const arclp::RunResult r = arclp::run_prepared(p, cfg);
  if (verbose) {
    fmt::print("{:>4} {:>12} {:>12} {:>12} {:>10} {:>10}\n", "iter", "mu", "|rb|", "|rc|",
               "alpha", "sigma");
    int k = 0;
    for (const auto& rec : r.report.per_iteration)
      fmt::print("{:>4} {:>12.4e} {:>12.4e} {:>12.4e} {:>10.6f} {:>10.3e}\n", ++k, rec.mu,
                 rec.rb_norm, rec.rc_norm, rec.alpha, rec.sigma);
  }
  fmt::print("{} {} status={} iterations={} metric={:.3e} objective={:.12g} "
             "size={}x{}->{}x{} time={:.3f}s\n",
             p.name, arclp::to_string(cfg.algorithm), arclp::to_string(r.report.status),
             r.report.iterations, r.report.final_metric, r.objective,
             p.standard.lp.rows(), p.standard.lp.cols(), p.presolved.reduced.rows(),
             p.presolved.reduced.cols(), r.report.solve_seconds);
  return r.report.status == arclp::SolveStatus::Optimal ? kOk : kSolverFailure;
}

int cmd_bench(const std::string& dir, const std::string& algs, const std::string& out,
              const CommonOptions& o) {
  const arclp::SolverConfig cfg = build_config(o);
  const auto records = arclp::run_suite(dir, parse_algorithms(algs), cfg);
  fmt::print("{:<12} {:<6} {:<16} {:>5} {:>11} {:>9} {:>20}\n", "problem", "alg", "status",
             "iter", "metric", "time", "objective");
  bool all_optimal = true;
  for (const auto& r : records) {
    fmt::print("{:<12} {:<6} {:<16} {:>5} {:>11.3e} {:>9.3f} {:>20.12g}\n", r.problem,
               r.algorithm, arclp::to_string(r.status), r.iterations, r.final_metric,
               r.wall_time, r.objective);
    all_optimal = all_optimal && r.status == arclp::SolveStatus::Optimal;
  }
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw std::runtime_error(fmt::format("{}: cannot write", out));
    arclp::write_records_csv(f, records);
  }
  return all_optimal ? kOk : kSolverFailure;
}

int cmd_profile(const std::string& results, const std::string& out, double tau_max,
                int points, const std::string& metric) {
  std::ifstream in(results);
  if (!in) throw std::runtime_error(fmt::format("{}: cannot open", results));
  const auto records = arclp::read_records_csv(in);
  arclp::ProfileMetric m;
  if (metric == "iterations") m = arclp::ProfileMetric::Iterations;
  else if (metric == "time") m = arclp::ProfileMetric::WallTime;
  else throw std::invalid_argument("--metric must be iterations or time");
  const auto prof =
      arclp::performance_profile(records, arclp::log_tau_grid(tau_max, points), m);
  if (out.empty()) {
    arclp::write_profile_csv(std::cout, prof);
  } else {
    std::ofstream f(out);
    if (!f) throw std::runtime_error(fmt::format("{}: cannot write", out));
    arclp::write_profile_csv(f, prof);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Arc-search and predictor-corrector interior point LP solver"};
  app.require_subcommand(1);

  CommonOptions solve_opts, bench_opts;
  std::string file, alg, dir, algs = "arc1,arc2,mpc", bench_out, results, profile_out;
  bool verbose = false;
  double tau_max = 10.0;
  int points = 50;
  std::string metric = "iterations";

  auto* solve = app.add_subcommand("solve", "solve one MPS file");
  solve->add_option("file", file, "MPS file")->required();
  solve->add_option("--alg", alg, "arc1, arc2 or mpc (default arc2)");
  solve->add_flag("-v,--verbose", verbose, "print one line per iteration");
  add_common(solve, solve_opts);

  auto* bench = app.add_subcommand("bench", "run every MPS file in a directory");
  bench->add_option("dir", dir, "directory of MPS files")->required();
  bench->add_option("--algs", algs, "comma-separated algorithms");
  bench->add_option("--out", bench_out, "CSV file for the results");
  add_common(bench, bench_opts);

  auto* profile = app.add_subcommand("profile", "performance profile from results CSV");
  profile->add_option("results", results, "CSV written by bench")->required();
  profile->add_option("--out", profile_out, "CSV file for the profile (default stdout)");
  profile->add_option("--tau-max", tau_max, "largest ratio on the grid");
  profile->add_option("--points", points, "number of grid points");
  profile->add_option("--metric", metric, "iterations or time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  try {
    if (*solve) return cmd_solve(file, alg, solve_opts, verbose);
    if (*bench) return cmd_bench(dir, algs, bench_out, bench_opts);
    if (*profile) return cmd_profile(results, profile_out, tau_max, points, metric);
  } catch (const arclp::ParseError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInputError;
  } catch (const arclp::ModelError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInputError;
  } catch (const arclp::NumericalError& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return kSolverFailure;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInputError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kInputError;
  }
  return kInputError;
}
