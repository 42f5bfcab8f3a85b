#pragma once

#include <string>
#include <vector>

#include "arclp/problem.hpp"
#include "arclp/types.hpp"

namespace arclp {

/// One applied reduction, in original row/column indices, with the values
/// postsolve needs. `rhs` and `cost` are the values current when the step
/// was applied (earlier substitutions already folded in).
struct PresolveStep {
  enum class Kind {
    ZeroRow,               // empty row with zero right-hand side removed
    ZeroColumn,            // empty column fixed at zero (cost >= 0)
    SingletonRow,          // row with one entry fixes that variable
    DuplicateRow,          // row proportional to another row removed
    ImpliedFreeSingleton,  // column singleton whose sign bound is implied
  };
  Kind kind;
  int row = -1;
  int col = -1;
  double coef = 0.0;   // a(row, col)
  double value = 0.0;  // fixed x value, or the dual of a removed row
  double rhs = 0.0;
  double cost = 0.0;
  int other_row = -1;  // DuplicateRow: the row that is kept
  double ratio = 0.0;  // DuplicateRow: removed row = ratio * kept row
};

struct PresolveTrace {
  StandardLp original;
  std::vector<int> kept_rows;  // reduced row index -> original row
  std::vector<int> kept_cols;  // reduced column index -> original column
  std::vector<PresolveStep> steps;
  double scaling_ratio = 0.0;
  bool relaxed_duplicate_test = false;

  int reductions() const { return static_cast<int>(steps.size()); }
};

enum class PresolveStatus { Reduced, Infeasible, Unbounded };

struct PresolveResult {
  PresolveStatus status = PresolveStatus::Reduced;
  std::string message;  // reason for Infeasible/Unbounded
  StandardLp reduced;
  PresolveTrace trace;
};

/// Applies the enabled rules until none fires. Detected infeasibility or
/// unboundedness is reported in the status; `reduced` is then unspecified.
PresolveResult presolve(const StandardLp& lp, const PresolveOptions& options = {});

struct PrimalDual {
  Vec x;
  Vec lambda;
  Vec s;
};

/// Maps a point of the reduced problem back to the original one. The dual
/// slack is recomputed as c - A' lambda on the original data. Throws
/// StructuralError when the point does not match the trace.
PrimalDual postsolve(const PresolveTrace& trace, const Vec& x, const Vec& lambda,
                     const Vec& s);

/// max |a_ij| / min { |a_kl| : a_kl != 0 }. Throws StructuralError when A has
/// no nonzero.
double scaling_ratio(const SparseMatrix& A);

}  // namespace arclp
