#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "arclp/mps.hpp"
#include "arclp/presolve.hpp"
#include "arclp/problem.hpp"
#include "arclp/solver.hpp"

namespace arclp {

/// A problem read from disk, standardized and presolved, with the starting
/// point every algorithm will share.
struct PreparedProblem {
  std::string name;
  GeneralLp general;
  Standardized standard;
  PresolveResult presolved;
  std::optional<StartingPoint> start;  // empty when the reduced problem is empty
};

/// Throws ParseError or std::runtime_error (unreadable file), ModelError for
/// unsupported models.
PreparedProblem prepare_problem(const std::string& path, const SolverConfig& cfg);
PreparedProblem prepare_problem(const std::string& name, const GeneralLp& g,
                                const SolverConfig& cfg);

struct RunResult {
  SolveReport report;
  // Objective of the problem as written in the file (sign and constant
  // included), evaluated at the recovered point.
  double objective = 0.0;
  std::vector<double> x;  // values of the original variables
  PrimalDual standard_point;
  std::uint64_t start_hash = 0;
};

/// Solves an already prepared problem with cfg.algorithm and maps the result
/// back through postsolve and standardization.
RunResult run_prepared(const PreparedProblem& p, const SolverConfig& cfg);

/// parse, standardize, presolve, solve, postsolve.
RunResult run_single(const std::string& path, const SolverConfig& cfg);

struct BenchRecord {
  std::string problem;
  std::string algorithm;
  SolveStatus status = SolveStatus::NumericalFailure;
  int iterations = 0;
  double final_metric = 0.0;
  double wall_time = 0.0;
  int m_before = 0, n_before = 0;
  int m_after = 0, n_after = 0;
  double objective = 0.0;
  std::uint64_t start_hash = 0;

  bool operator==(const BenchRecord&) const = default;
};

/// Every .mps file in dir (sorted by name) with every algorithm. All
/// algorithms of one problem start from the same point. A problem that
/// cannot be read yields NumericalFailure records and the suite continues.
std::vector<BenchRecord> run_suite(const std::string& dir,
                                   const std::vector<Algorithm>& algorithms,
                                   const SolverConfig& cfg);

BenchRecord make_record(const PreparedProblem& p, Algorithm alg, const RunResult& r);

/// problem,algorithm,status,iterations,final_metric,wall_time,m_before,
/// n_before,m_after,n_after,objective,start_hash
void write_records_csv(std::ostream& out, const std::vector<BenchRecord>& records);
std::vector<BenchRecord> read_records_csv(std::istream& in);

enum class ProfileMetric { Iterations, WallTime };

struct PerformanceProfile {
  std::vector<double> taus;
  std::vector<std::string> algorithms;  // sorted
  // rho[a][k]: fraction of problems algorithm a solved within taus[k] times
  // the best algorithm on that problem.
  std::vector<std::vector<double>> rho;
};

/// tau_max^(k/(points-1)) for k = 0..points-1.
std::vector<double> log_tau_grid(double tau_max, int points);

/// Runs that did not end Optimal count as never solved. Throws
/// std::invalid_argument for an empty record set or an empty tau list.
PerformanceProfile performance_profile(const std::vector<BenchRecord>& records,
                                       const std::vector<double>& taus,
                                       ProfileMetric metric = ProfileMetric::Iterations);

/// tau,<alg1>,<alg2>,... with every value printed with %.17g.
void write_profile_csv(std::ostream& out, const PerformanceProfile& profile);

/// Reads a JSON object of solver settings on top of `base`. Unknown keys and
/// out-of-range values throw std::invalid_argument.
SolverConfig load_config(const std::string& path, SolverConfig base = {});
SolverConfig config_from_json_text(const std::string& text, SolverConfig base = {});

}  // namespace arclp
