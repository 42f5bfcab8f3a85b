#include "arclp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

namespace arclp {

void StandardLp::check_dimensions() const {
  if (b.size() != A.rows())
    throw StructuralError(
        fmt::format("b has length {}, A has {} rows", b.size(), A.rows()));
  if (c.size() != A.cols())
    throw StructuralError(
        fmt::format("c has length {}, A has {} columns", c.size(), A.cols()));
  if (!row_names.empty() && static_cast<Eigen::Index>(row_names.size()) != A.rows())
    throw StructuralError("row name table does not match A");
  if (!col_names.empty() && static_cast<Eigen::Index>(col_names.size()) != A.cols())
    throw StructuralError("column name table does not match A");
}

Residuals compute_residuals(const StandardLp& lp, const Vec& x,
                            const Vec& lambda, const Vec& s) {
  lp.check_dimensions();
  if (x.size() != lp.cols() || s.size() != lp.cols() ||
      lambda.size() != lp.rows())
    throw StructuralError(fmt::format(
        "point dimensions (x {}, lambda {}, s {}) do not match a {}x{} problem",
        x.size(), lambda.size(), s.size(), lp.rows(), lp.cols()));
  Residuals r;
  r.rb = lp.A * x - lp.b;
  r.rc = lp.A.transpose() * lambda + s - lp.c;
  return r;
}

double duality_measure(const Vec& x, const Vec& s) {
  if (x.size() == 0) throw StructuralError("duality measure of empty vectors");
  if (x.size() != s.size())
    throw StructuralError("x and s differ in length");
  return x.dot(s) / static_cast<double>(x.size());
}

Iterate::Iterate(const StandardLp& lp, Vec x, Vec lambda, Vec s, double nu)
    : x_(std::move(x)), lambda_(std::move(lambda)), s_(std::move(s)), nu_(nu) {
  auto r = compute_residuals(lp, x_, lambda_, s_);
  rb_ = std::move(r.rb);
  rc_ = std::move(r.rc);
  mu_ = duality_measure(x_, s_);
}

double Iterate::min_complementarity() const {
  return x_.cwiseProduct(s_).minCoeff();
}

double composite_stop_metric(const StopMetricTerms& t) {
  const double objective_scale =
      std::max({1.0, std::abs(t.primal_objective), std::abs(t.dual_objective)});
  return t.rb_norm / std::max(1.0, t.b_norm) +
         t.rc_norm / std::max(1.0, t.c_norm) + t.mu / objective_scale;
}

double composite_stop_metric(const StandardLp& lp, const Iterate& it) {
  StopMetricTerms t;
  t.rb_norm = it.rb_norm();
  t.rc_norm = it.rc_norm();
  t.mu = it.mu();
  t.b_norm = lp.b.norm();
  t.c_norm = lp.c.norm();
  t.primal_objective = lp.c.dot(it.x());
  t.dual_objective = lp.b.dot(it.lambda());
  return composite_stop_metric(t);
}

std::string_view to_string(Algorithm alg) {
  switch (alg) {
    case Algorithm::Arc1: return "arc1";
    case Algorithm::Arc2: return "arc2";
    case Algorithm::MehrotraPC: return "mpc";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  if (name == "arc1") return Algorithm::Arc1;
  if (name == "arc2") return Algorithm::Arc2;
  if (name == "mpc" || name == "mehrotra") return Algorithm::MehrotraPC;
  return std::nullopt;
}

double SolverConfig::effective_sigma_max() const {
  if (sigma_max) return *sigma_max;
  return algorithm == Algorithm::Arc1 ? 0.4 : 0.3;
}

void SolverConfig::validate() const {
  const double smax = effective_sigma_max();
  if (!(sigma_min > 0.0 && sigma_min < smax && smax <= 1.0))
    throw std::invalid_argument(fmt::format(
        "need 0 < sigma_min < sigma_max <= 1, got {} and {}", sigma_min, smax));
  if (!(rho > 0.0 && rho < 1.0))
    throw std::invalid_argument("rho must lie in (0, 1)");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (theta_rule == ThetaRule::Fixed && !(theta_value > 0.0 && theta_value < 1.0))
    throw std::invalid_argument("theta must lie in (0, 1)");
  if (!(bisection_tol > 0.0))
    throw std::invalid_argument("bisection tolerance must be positive");
  if (max_iterations < 0 || max_backtracks < 0)
    throw std::invalid_argument("iteration limits must be nonnegative");
  if (!(regularization_pivot_floor > 0.0))
    throw std::invalid_argument("pivot floor must be positive");
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::StepTooSmall: return "StepTooSmall";
    case SolveStatus::ResidualBlowup: return "ResidualBlowup";
    case SolveStatus::MuConverged: return "MuConverged";
    case SolveStatus::IterationLimit: return "IterationLimit";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
  }
  return "Unknown";
}

std::optional<SolveStatus> parse_status(std::string_view name) {
  for (auto s : {SolveStatus::Optimal, SolveStatus::StepTooSmall,
                 SolveStatus::ResidualBlowup, SolveStatus::MuConverged,
                 SolveStatus::IterationLimit, SolveStatus::NumericalFailure,
                 SolveStatus::Infeasible, SolveStatus::Unbounded}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

}  // namespace arclp
