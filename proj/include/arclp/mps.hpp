#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "arclp/problem.hpp"
#include "arclp/types.hpp"

namespace arclp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class RowType { Equal, LessEqual, GreaterEqual };

struct Bound {
  double lower = 0.0;
  double upper = kInfinity;
};

struct Coefficient {
  int row;
  int col;
  double value;
};

/// An LP as written in an MPS file: typed rows, bounded columns, one
/// objective row. Constraint rows exclude the objective and any extra free
/// rows, which are dropped while parsing.
struct GeneralLp {
  std::string name;
  std::string objective_name;
  std::vector<std::string> row_names;
  std::vector<RowType> row_types;
  std::vector<double> rhs;
  std::vector<double> ranges;  // NaN where a row has no RANGES entry
  std::vector<std::string> col_names;
  std::vector<double> objective;
  std::vector<Bound> bounds;
  // Sorted by (col, row); duplicate entries in the file are summed.
  std::vector<Coefficient> entries;
  // MPS convention: an RHS entry on the objective row contributes -value.
  double objective_constant = 0.0;
  bool maximize = false;

  int rows() const { return static_cast<int>(row_names.size()); }
  int cols() const { return static_cast<int>(col_names.size()); }
  bool has_ranges() const;
};

enum class MpsFormat { Free, Fixed };

/// Throws ParseError (carrying the 1-based line number) on unknown
/// sections, references to undeclared rows or columns, malformed numbers,
/// and integer markers.
GeneralLp parse_mps(std::istream& in, MpsFormat format = MpsFormat::Free);
GeneralLp parse_mps_string(std::string_view text,
                           MpsFormat format = MpsFormat::Free);
GeneralLp read_mps_file(const std::string& path,
                        MpsFormat format = MpsFormat::Free);

/// How one original variable is expressed through standard-form columns:
/// x = shift + sign * x_std[column] - x_std[negative_column].
struct VariableMap {
  enum class Kind { Shifted, Reflected, Split, Constant };
  Kind kind = Kind::Shifted;
  double shift = 0.0;
  int column = -1;
  int negative_column = -1;
};

struct StandardizeMap {
  std::vector<VariableMap> variables;
  int standard_cols = 0;
  // Standard-form slack column of each constraint row, -1 for equalities.
  std::vector<int> row_slack;
  // Standard-form rows added for finite upper bounds, one per bounded
  // variable, with the variable index they belong to.
  std::vector<int> upper_bound_rows;
  std::vector<int> upper_bound_vars;
  // Applied to objective values: +1 for minimization, -1 when the
  // original problem maximizes.
  double objective_sign = 1.0;
};

struct Standardized {
  StandardLp lp;
  StandardizeMap map;
};

/// Throws ModelError for RANGES rows and for bounds with lower > upper.
Standardized to_standard_form(const GeneralLp& g);

std::vector<double> recover_solution(const StandardizeMap& map,
                                     const Vec& x_std);

/// Objective of the original (possibly maximizing) problem, including the
/// objective constant.
double general_objective(const GeneralLp& g, const std::vector<double>& x);

/// Largest violation of rows and bounds of g at x.
double general_infeasibility(const GeneralLp& g, const std::vector<double>& x);

}  // namespace arclp
