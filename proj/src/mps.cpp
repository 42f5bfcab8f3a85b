#include "arclp/mps.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_map>

#include <fmt/core.h>

namespace arclp {

namespace {

enum class Section { None, Name, Rows, Columns, Rhs, Ranges, Bounds, ObjSense, End };

// Field start columns (0-based) of the fixed MPS layout.
constexpr int kFixedStart[] = {1, 4, 14, 24, 39, 49};
constexpr int kFixedWidth[] = {2, 8, 8, 12, 8, 12};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_free(std::string_view line) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

// Data line in fixed format. Empty fields are dropped so the result lines up
// with the free-format tokenization.
std::vector<std::string> split_fixed(std::string_view line) {
  std::vector<std::string> out;
  for (int f = 0; f < 6; ++f) {
    if (static_cast<size_t>(kFixedStart[f]) >= line.size()) break;
    auto field = trim(line.substr(kFixedStart[f], kFixedWidth[f]));
    if (!field.empty()) out.emplace_back(field);
  }
  return out;
}

class MpsReader {
 public:
  MpsReader(std::istream& in, MpsFormat format) : in_(in), format_(format) {}

  GeneralLp read() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.empty() || line[0] == '*') continue;
      if (trim(line).empty()) continue;
      if (line[0] != ' ' && line[0] != '\t') {
        header(line);
        if (section_ == Section::End) break;
        continue;
      }
      data(line);
    }
    finish();
    return std::move(lp_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_no_); }

  double number(std::string_view text) const {
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size())
      fail(fmt::format("malformed number '{}'", text));
    return v;
  }

  void header(const std::string& line) {
    auto tok = split_free(line);
    const std::string& key = tok[0];
    if (key == "NAME") {
      section_ = Section::Name;
      if (tok.size() > 1) lp_.name = tok[1];
    } else if (key == "ROWS") {
      section_ = Section::Rows;
    } else if (key == "COLUMNS") {
      section_ = Section::Columns;
    } else if (key == "RHS") {
      section_ = Section::Rhs;
    } else if (key == "RANGES") {
      section_ = Section::Ranges;
    } else if (key == "BOUNDS") {
      section_ = Section::Bounds;
    } else if (key == "OBJSENSE") {
      section_ = Section::ObjSense;
      if (tok.size() > 1) sense(tok[1]);
    } else if (key == "ENDATA") {
      section_ = Section::End;
    } else {
      fail(fmt::format("unknown section '{}'", key));
    }
  }

  void sense(const std::string& word) {
    if (word == "MAX" || word == "MAXIMIZE") lp_.maximize = true;
    else if (word == "MIN" || word == "MINIMIZE") lp_.maximize = false;
    else fail(fmt::format("unknown objective sense '{}'", word));
  }

  void data(const std::string& line) {
    auto tok = format_ == MpsFormat::Fixed ? split_fixed(line) : split_free(line);
    if (tok.empty()) return;
    switch (section_) {
      case Section::Rows: row(tok); break;
      case Section::Columns: column(tok); break;
      case Section::Rhs: rhs(tok); break;
      case Section::Ranges: range(tok); break;
      case Section::Bounds: bound(tok); break;
      case Section::ObjSense: sense(tok[0]); break;
      default: fail("data line outside of a section");
    }
  }

  void row(const std::vector<std::string>& tok) {
    if (tok.size() < 2) fail("ROWS entry needs a type and a name");
    const std::string& type = tok[0];
    const std::string& name = tok[1];
    if (row_index_.count(name) || name == lp_.objective_name)
      fail(fmt::format("row '{}' declared twice", name));
    if (type == "N") {
      if (lp_.objective_name.empty()) lp_.objective_name = name;
      else dropped_rows_.insert({name, 0});
      return;
    }
    RowType t;
    if (type == "E") t = RowType::Equal;
    else if (type == "L") t = RowType::LessEqual;
    else if (type == "G") t = RowType::GreaterEqual;
    else fail(fmt::format("unknown row type '{}'", type));
    row_index_.emplace(name, lp_.rows());
    lp_.row_names.push_back(name);
    lp_.row_types.push_back(t);
    lp_.rhs.push_back(0.0);
    lp_.ranges.push_back(std::nan(""));
  }

  // Returns -1 for the objective row, -2 for a dropped free row.
  int lookup_row(const std::string& name) const {
    if (name == lp_.objective_name) return -1;
    if (dropped_rows_.count(name)) return -2;
    auto it = row_index_.find(name);
    if (it == row_index_.end()) fail(fmt::format("undeclared row '{}'", name));
    return it->second;
  }

  int lookup_col(const std::string& name) const {
    auto it = col_index_.find(name);
    if (it == col_index_.end()) fail(fmt::format("undeclared column '{}'", name));
    return it->second;
  }

  void column(const std::vector<std::string>& tok) {
    if (tok.size() >= 3 && tok[1] == "'MARKER'")
      fail("integer markers are not supported");
    if (tok.size() != 3 && tok.size() != 5)
      fail("COLUMNS entry needs a column name and one or two (row, value) pairs");
    const std::string& name = tok[0];
    auto it = col_index_.find(name);
    int col;
    if (it == col_index_.end()) {
      col = lp_.cols();
      col_index_.emplace(name, col);
      lp_.col_names.push_back(name);
      lp_.objective.push_back(0.0);
      lp_.bounds.push_back(Bound{});
    } else {
      col = it->second;
    }
    for (size_t k = 1; k + 1 < tok.size(); k += 2) {
      const int r = lookup_row(tok[k]);
      const double v = number(tok[k + 1]);
      if (r == -1) lp_.objective[col] += v;
      else if (r >= 0) raw_.push_back({r, col, v});
    }
  }

  // RHS and RANGES share a layout: an optional set name, then pairs.
  template <class Apply>
  void pairs(const std::vector<std::string>& tok, const char* what, Apply apply) {
    size_t first = tok.size() % 2 == 1 ? 1 : 0;
    if (tok.size() < 2 || tok.size() > 5)
      fail(fmt::format("{} entry has {} fields", what, tok.size()));
    for (size_t k = first; k + 1 < tok.size(); k += 2) apply(tok[k], number(tok[k + 1]));
  }

  void rhs(const std::vector<std::string>& tok) {
    pairs(tok, "RHS", [&](const std::string& row, double v) {
      const int r = lookup_row(row);
      if (r == -1) lp_.objective_constant = -v;
      else if (r >= 0) lp_.rhs[r] = v;
    });
  }

  void range(const std::vector<std::string>& tok) {
    pairs(tok, "RANGES", [&](const std::string& row, double v) {
      const int r = lookup_row(row);
      if (r == -1) fail("RANGES entry on the objective row");
      if (r >= 0) lp_.ranges[r] = v;
    });
  }

  void bound(const std::vector<std::string>& tok) {
    if (tok.empty()) return;
    const std::string& type = tok[0];
    const bool needs_value = type == "UP" || type == "LO" || type == "FX";
    const bool no_value = type == "FR" || type == "MI" || type == "PL";
    if (type == "BV" || type == "LI" || type == "UI" || type == "SC")
      fail(fmt::format("integer bound type '{}' is not supported", type));
    if (!needs_value && !no_value) fail(fmt::format("unknown bound type '{}'", type));

    // type [set] column [value]
    const size_t expected = needs_value ? 3 : 2;
    size_t col_pos;
    if (tok.size() == expected) col_pos = 1;
    else if (tok.size() == expected + 1) col_pos = 2;
    else if (no_value && tok.size() == expected + 2) col_pos = 2;  // stray value
    else fail(fmt::format("BOUNDS entry has {} fields", tok.size()));

    Bound& b = lp_.bounds[lookup_col(tok[col_pos])];
    if (type == "FR") {
      b.lower = -kInfinity;
      b.upper = kInfinity;
    } else if (type == "MI") {
      b.lower = -kInfinity;
    } else if (type == "PL") {
      b.upper = kInfinity;
    } else {
      const double v = number(tok[col_pos + 1]);
      if (type == "UP") {
        b.upper = v;
        // Classic convention: a negative upper bound on a variable with the
        // default lower bound makes the variable unbounded below.
        if (v < 0.0 && b.lower == 0.0) b.lower = -kInfinity;
      } else if (type == "LO") {
        b.lower = v;
      } else {
        b.lower = v;
        b.upper = v;
      }
    }
  }

  void finish() {
    std::sort(raw_.begin(), raw_.end(), [](const Coefficient& a, const Coefficient& b) {
      return a.col != b.col ? a.col < b.col : a.row < b.row;
    });
    for (const auto& e : raw_) {
      if (!lp_.entries.empty() && lp_.entries.back().row == e.row &&
          lp_.entries.back().col == e.col) {
        lp_.entries.back().value += e.value;
      } else {
        lp_.entries.push_back(e);
      }
    }
  }

  std::istream& in_;
  MpsFormat format_;
  int line_no_ = 0;
  Section section_ = Section::None;
  GeneralLp lp_;
  std::unordered_map<std::string, int> row_index_;
  std::unordered_map<std::string, int> dropped_rows_;  // extra N rows
  std::unordered_map<std::string, int> col_index_;
  std::vector<Coefficient> raw_;
};

}  // namespace

bool GeneralLp::has_ranges() const {
  return std::any_of(ranges.begin(), ranges.end(), [](double r) { return !std::isnan(r); });
}

GeneralLp parse_mps(std::istream& in, MpsFormat format) {
  return MpsReader(in, format).read();
}

GeneralLp parse_mps_string(std::string_view text, MpsFormat format) {
  std::istringstream in{std::string(text)};
  return parse_mps(in, format);
}

GeneralLp read_mps_file(const std::string& path, MpsFormat format) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path));
  try {
    return parse_mps(in, format);
  } catch (const ParseError& e) {
    throw ParseError(e.message(), e.line(), path);
  }
}

Standardized to_standard_form(const GeneralLp& g) {
  if (g.has_ranges()) throw ModelError("RANGES rows are not supported");
  const int m0 = g.rows();
  const int n0 = g.cols();
  const double sense = g.maximize ? -1.0 : 1.0;

  Standardized out;
  StandardizeMap& map = out.map;
  map.objective_sign = sense;
  map.variables.resize(n0);

  std::vector<std::vector<std::pair<int, double>>> by_col(n0);
  for (const auto& e : g.entries) by_col[e.col].push_back({e.row, e.value});

  std::vector<Triplet> trip;
  std::vector<double> cost;
  std::vector<std::string> names;
  std::vector<double> rhs(g.rhs.begin(), g.rhs.end());
  double offset = sense * g.objective_constant;
  std::vector<int> bounded_vars;

  auto add_column = [&](const std::string& name, double c) {
    names.push_back(name);
    cost.push_back(c);
    return static_cast<int>(cost.size()) - 1;
  };

  for (int j = 0; j < n0; ++j) {
    const Bound& bd = g.bounds[j];
    const double c = sense * g.objective[j];
    VariableMap& vm = map.variables[j];
    if (bd.lower > bd.upper)
      throw ModelError(fmt::format("column '{}' has lower bound {} above upper bound {}",
                                   g.col_names[j], bd.lower, bd.upper));
    double sign = 1.0;
    if (std::isfinite(bd.lower) && bd.lower == bd.upper) {
      vm.kind = VariableMap::Kind::Constant;
      vm.shift = bd.lower;
    } else if (std::isfinite(bd.lower)) {
      vm.kind = VariableMap::Kind::Shifted;
      vm.shift = bd.lower;
      vm.column = add_column(g.col_names[j], c);
      if (std::isfinite(bd.upper)) bounded_vars.push_back(j);
    } else if (std::isfinite(bd.upper)) {
      vm.kind = VariableMap::Kind::Reflected;
      vm.shift = bd.upper;
      sign = -1.0;
      vm.column = add_column(g.col_names[j], -c);
    } else {
      vm.kind = VariableMap::Kind::Split;
      vm.column = add_column(g.col_names[j], c);
      vm.negative_column = add_column(g.col_names[j] + "_neg", -c);
    }
    offset += c * vm.shift;
    for (auto [r, a] : by_col[j]) {
      rhs[r] -= a * vm.shift;
      if (vm.column >= 0) trip.emplace_back(r, vm.column, sign * a);
      if (vm.negative_column >= 0) trip.emplace_back(r, vm.negative_column, -a);
    }
  }

  map.row_slack.assign(m0, -1);
  for (int i = 0; i < m0; ++i) {
    if (g.row_types[i] == RowType::Equal) continue;
    const int col = add_column("slack_" + g.row_names[i], 0.0);
    trip.emplace_back(i, col, g.row_types[i] == RowType::LessEqual ? 1.0 : -1.0);
    map.row_slack[i] = col;
  }

  std::vector<std::string> row_names(g.row_names.begin(), g.row_names.end());
  for (int j : bounded_vars) {
    const int row = static_cast<int>(rhs.size());
    const VariableMap& vm = map.variables[j];
    trip.emplace_back(row, vm.column, 1.0);
    const int col = add_column("ubslack_" + g.col_names[j], 0.0);
    trip.emplace_back(row, col, 1.0);
    rhs.push_back(g.bounds[j].upper - g.bounds[j].lower);
    row_names.push_back("ub_" + g.col_names[j]);
    map.upper_bound_rows.push_back(row);
    map.upper_bound_vars.push_back(j);
  }

  StandardLp& lp = out.lp;
  const int m = static_cast<int>(rhs.size());
  const int n = static_cast<int>(cost.size());
  lp.A.resize(m, n);
  lp.A.setFromTriplets(trip.begin(), trip.end());
  lp.A.makeCompressed();
  lp.b = Eigen::Map<const Vec>(rhs.data(), m);
  lp.c = Eigen::Map<const Vec>(cost.data(), n);
  lp.objective_offset = offset;
  lp.row_names = std::move(row_names);
  lp.col_names = std::move(names);
  map.standard_cols = n;
  return out;
}

std::vector<double> recover_solution(const StandardizeMap& map, const Vec& x_std) {
  if (x_std.size() != map.standard_cols)
    throw StructuralError(fmt::format("standard solution has length {}, map expects {}",
                                      x_std.size(), map.standard_cols));
  std::vector<double> x(map.variables.size());
  for (size_t j = 0; j < x.size(); ++j) {
    const VariableMap& vm = map.variables[j];
    switch (vm.kind) {
      case VariableMap::Kind::Constant: x[j] = vm.shift; break;
      case VariableMap::Kind::Shifted: x[j] = vm.shift + x_std[vm.column]; break;
      case VariableMap::Kind::Reflected: x[j] = vm.shift - x_std[vm.column]; break;
      case VariableMap::Kind::Split:
        x[j] = x_std[vm.column] - x_std[vm.negative_column];
        break;
    }
  }
  return x;
}

double general_objective(const GeneralLp& g, const std::vector<double>& x) {
  double v = g.objective_constant;
  for (int j = 0; j < g.cols(); ++j) v += g.objective[j] * x[j];
  return v;
}

double general_infeasibility(const GeneralLp& g, const std::vector<double>& x) {
  std::vector<double> ax(g.rows(), 0.0);
  for (const auto& e : g.entries) ax[e.row] += e.value * x[e.col];
  double worst = 0.0;
  for (int i = 0; i < g.rows(); ++i) {
    const double d = ax[i] - g.rhs[i];
    switch (g.row_types[i]) {
      case RowType::Equal: worst = std::max(worst, std::abs(d)); break;
      case RowType::LessEqual: worst = std::max(worst, d); break;
      case RowType::GreaterEqual: worst = std::max(worst, -d); break;
    }
  }
  for (int j = 0; j < g.cols(); ++j) {
    worst = std::max(worst, g.bounds[j].lower - x[j]);
    worst = std::max(worst, x[j] - g.bounds[j].upper);
  }
  return worst;
}

}  // namespace arclp
