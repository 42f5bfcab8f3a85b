#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "arclp/arc.hpp"
#include "arclp/normal_equations.hpp"
#include "arclp/problem.hpp"
#include "arclp/types.hpp"

namespace arclp {

struct StartingPoint {
  Vec x, lambda, s;
  // max{ ||Ax - b||, ||A'lambda + s - c||, mu } at this point.
  double metric = 0.0;
  std::string method;  // "least-squares" or "scaled-ones"

  // Hash of the bit patterns of x, lambda and s.
  std::uint64_t hash() const;
};

NormalEqOptions normal_eq_options(const SolverConfig& cfg);

double starting_point_metric(const StandardLp& lp, const Vec& x, const Vec& lambda,
                             const Vec& s);

/// Least-squares candidate with positivity shifts.
StartingPoint least_squares_start(const StandardLp& lp, NormalEquations& kkt);
/// x = s = xi e with xi = sqrt(max(1, ||b||inf / max(1, ||A||inf), ||c||inf)),
/// lambda = 0.
StartingPoint scaled_ones_start(const StandardLp& lp);

/// Returns whichever candidate has the smaller metric. Throws NumericalError
/// when neither is finite.
StartingPoint initial_point(const StandardLp& lp, NormalEquations& kkt);
StartingPoint initial_point(const StandardLp& lp);

/// min(0.9999 alpha, 0.99 pi/2).
double rescale_alpha(double alpha);

/// min{1e-6, 0.1 min(x0 .* s0) / mu0}.
double initial_theta(const Vec& x0, const Vec& s0);

struct TerminationInput {
  double metric = 0.0;
  double mu = 0.0;
  double rb_norm = 0.0;
  double rc_norm = 0.0;
  // Residual norms of the previous iterate; negative when there is none.
  double prev_rb_norm = -1.0;
  double prev_rc_norm = -1.0;
  // Growth is only counted as a blowup while the new residual is above
  // epsilon * max(1, ||b||) (or ||c||); below that it is roundoff.
  double b_norm = 0.0;
  double c_norm = 0.0;
  // Step lengths of the step that produced this iterate; negative when
  // there is none.
  double alpha_x = -1.0;
  double alpha_s = -1.0;
  int iteration = 0;
};

/// Checked in order: Optimal, StepTooSmall, ResidualBlowup, MuConverged,
/// IterationLimit. Empty when the iteration should continue.
std::optional<SolveStatus> check_termination(const TerminationInput& in,
                                             const SolverConfig& cfg);

struct AlgorithmState {
  Iterate iterate;
  int iteration = 0;
  double theta = 0.0;
  std::vector<IterationRecord> history;
};

struct StepOutcome {
  AlgorithmState state;
  // Set when no acceptable step was found; state is then unchanged.
  std::optional<SolveStatus> failure;
};

/// Shared per-problem data for the step functions. One numeric factorization
/// of kkt is done per step.
struct SolverContext {
  const StandardLp& lp;
  NormalEquations& kkt;
  const SolverConfig& cfg;
};

StepOutcome step_algorithm1(const SolverContext& ctx, const AlgorithmState& state);
StepOutcome step_algorithm2(const SolverContext& ctx, const AlgorithmState& state);
StepOutcome step_mehrotra(const SolverContext& ctx, const AlgorithmState& state);

struct SolveHooks {
  // Called after every accepted step.
  std::function<void(const AlgorithmState& before, const AlgorithmState& after)>
      on_step;
};

struct SolveResult {
  SolveReport report;
  Iterate final_point;
  StartingPoint start;
};

/// Runs cfg.algorithm from `start`, or from initial_point(lp) when none is
/// given. Throws std::invalid_argument for an invalid config and
/// StructuralError for a malformed problem.
SolveResult solve(const StandardLp& lp, const SolverConfig& cfg,
                  const StartingPoint* start = nullptr, const SolveHooks& hooks = {});

}  // namespace arclp
