#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arclp/types.hpp"

namespace arclp {

/// min c'x  s.t.  Ax = b, x >= 0, plus a constant objective offset that
/// accumulates from bound shifts and presolve substitutions.
struct StandardLp {
  SparseMatrix A;
  Vec b;
  Vec c;
  double objective_offset = 0.0;
  std::vector<std::string> row_names;
  std::vector<std::string> col_names;

  int rows() const { return static_cast<int>(A.rows()); }
  int cols() const { return static_cast<int>(A.cols()); }

  // Throws StructuralError when b, c, or the name tables disagree with A.
  void check_dimensions() const;
};

struct Residuals {
  Vec rb;  // A x - b
  Vec rc;  // A' lambda + s - c
};

Residuals compute_residuals(const StandardLp& lp, const Vec& x,
                            const Vec& lambda, const Vec& s);

double duality_measure(const Vec& x, const Vec& s);

/// Primal-dual point with residuals and duality measure computed once at
/// construction. There are no mutators: moving to a new point means building
/// a new Iterate, so the cached values are always those of (x, lambda, s).
class Iterate {
 public:
  Iterate() = default;
  Iterate(const StandardLp& lp, Vec x, Vec lambda, Vec s, double nu = 1.0);

  const Vec& x() const { return x_; }
  const Vec& lambda() const { return lambda_; }
  const Vec& s() const { return s_; }
  const Vec& rb() const { return rb_; }
  const Vec& rc() const { return rc_; }
  double mu() const { return mu_; }
  // Product of (1 - sin(alpha_j)) over the steps that produced this point.
  double nu() const { return nu_; }

  double rb_norm() const { return rb_.norm(); }
  double rc_norm() const { return rc_.norm(); }
  double min_complementarity() const;

 private:
  Vec x_, lambda_, s_, rb_, rc_;
  double mu_ = 0.0;
  double nu_ = 1.0;
};

struct StopMetricTerms {
  double rb_norm = 0.0;
  double rc_norm = 0.0;
  double mu = 0.0;
  double b_norm = 0.0;
  double c_norm = 0.0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
};

/// ||rb||/max(1,||b||) + ||rc||/max(1,||c||) + mu/max(1,|c'x|,|b'lambda|)
double composite_stop_metric(const StopMetricTerms& terms);
double composite_stop_metric(const StandardLp& lp, const Iterate& it);

enum class Algorithm { Arc1, Arc2, MehrotraPC };

std::string_view to_string(Algorithm alg);
std::optional<Algorithm> parse_algorithm(std::string_view name);

enum class ThetaRule {
  // min{1e-6, 0.1 * min(x0 .* s0) / mu0}, evaluated at the initial point.
  InitialPoint,
  Fixed,
};

struct PresolveOptions {
  bool enabled = true;
  bool zero_rows = true;
  bool zero_columns = true;
  bool singleton_rows = true;
  bool duplicate_rows = true;
  bool implied_free_singletons = true;
  // Above this max|a|/min|a| ratio the duplicate-row test switches to a
  // relative tolerance.
  double scaling_ratio_threshold = 1e8;
};

struct SolverConfig {
  Algorithm algorithm = Algorithm::Arc2;
  double epsilon = 1e-8;
  double sigma_min = 1e-6;
  // Unset means the per-algorithm default: 0.4 for Arc1, 0.3 for Arc2.
  std::optional<double> sigma_max;
  double rho = 0.01;
  ThetaRule theta_rule = ThetaRule::InitialPoint;
  double theta_value = 1e-6;
  int max_iterations = 150;
  double bisection_tol = 1e-8;
  int max_backtracks = 30;
  double step_tol = 1e-8;
  double mu_floor = 1e-8;
  double blowup_factor = 10.0;
  double regularization_pivot_floor = 1e-12;
  int dense_threshold = 200;
  bool iterative_refinement = true;
  bool degenerate_handling = false;
  double time_limit_seconds = 600.0;
  PresolveOptions presolve;

  double effective_sigma_max() const;
  // Throws std::invalid_argument when a parameter is outside its range.
  void validate() const;
};

enum class SolveStatus {
  Optimal,
  StepTooSmall,
  ResidualBlowup,
  MuConverged,
  IterationLimit,
  NumericalFailure,
  Infeasible,
  Unbounded,
};

std::string_view to_string(SolveStatus status);
std::optional<SolveStatus> parse_status(std::string_view name);

struct IterationRecord {
  double mu = 0.0;
  double rb_norm = 0.0;
  double rc_norm = 0.0;
  double alpha = 0.0;
  double sigma = 0.0;
  double wall_time = 0.0;  // seconds since the solve started
  double alpha_x = 0.0;
  double alpha_s = 0.0;
  double mu_affine = 0.0;  // predictor duality measure (Mehrotra only)
  int backtracks = 0;
  int regularized_pivots = 0;
};

struct SolveReport {
  SolveStatus status = SolveStatus::IterationLimit;
  int iterations = 0;
  std::vector<IterationRecord> per_iteration;
  double objective_primal = 0.0;
  double objective_dual = 0.0;
  double final_metric = 0.0;
  double theta = 0.0;
  double solve_seconds = 0.0;
  int factorizations = 0;
  int regularized_pivots = 0;
};

}  // namespace arclp
