#include "arclp/presolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include <fmt/core.h>

namespace arclp {

namespace {

using Entry = std::pair<int, double>;  // (index, value)

constexpr double kFeasTol = 1e-9;
constexpr double kExactDuplicateTol = 1e-14;
constexpr double kRelaxedDuplicateTol = 1e-9;

class Reducer {
 public:
  Reducer(const StandardLp& lp, const PresolveOptions& opt)
      : lp_(lp), opt_(opt), b_(lp.b), c_(lp.c), offset_(lp.objective_offset) {
    const int m = lp.rows(), n = lp.cols();
    rows_.resize(m);
    cols_.resize(n);
    for (int j = 0; j < n; ++j)
      for (SparseMatrix::InnerIterator it(lp.A, j); it; ++it) {
        if (it.value() == 0.0) continue;
        const int i = static_cast<int>(it.row());
        rows_[i].emplace_back(j, it.value());
        cols_[j].emplace_back(i, it.value());
      }
    row_alive_.assign(m, true);
    col_alive_.assign(n, true);
    row_count_.resize(m);
    col_count_.resize(n);
    for (int i = 0; i < m; ++i) row_count_[i] = static_cast<int>(rows_[i].size());
    for (int j = 0; j < n; ++j) col_count_[j] = static_cast<int>(cols_[j].size());
    b_scale_ = std::max(1.0, lp.b.size() ? lp.b.cwiseAbs().maxCoeff() : 0.0);
  }

  PresolveResult run() {
    PresolveResult res;
    res.trace.original = lp_;
    if (lp_.A.nonZeros() > 0) {
      bool any = false;
      for (int j = 0; j < lp_.A.outerSize() && !any; ++j)
        for (SparseMatrix::InnerIterator it(lp_.A, j); it; ++it)
          if (it.value() != 0.0) { any = true; break; }
      if (any) res.trace.scaling_ratio = scaling_ratio(lp_.A);
    }
    relaxed_ = res.trace.scaling_ratio > opt_.scaling_ratio_threshold;
    res.trace.relaxed_duplicate_test = relaxed_;

    if (opt_.enabled) {
      bool changed = true;
      while (changed && status_ == PresolveStatus::Reduced) {
        changed = false;
        if (opt_.zero_rows) changed |= zero_rows();
        if (status_ != PresolveStatus::Reduced) break;
        if (opt_.zero_columns) changed |= zero_columns();
        if (status_ != PresolveStatus::Reduced) break;
        if (opt_.singleton_rows) changed |= singleton_rows();
        if (status_ != PresolveStatus::Reduced) break;
        if (opt_.duplicate_rows) changed |= duplicate_rows();
        if (status_ != PresolveStatus::Reduced) break;
        if (opt_.implied_free_singletons) changed |= implied_free();
      }
    }

    res.status = status_;
    res.message = message_;
    res.trace.steps = std::move(steps_);
    if (status_ != PresolveStatus::Reduced) return res;
    build_reduced(res);
    return res;
  }

 private:
  void remove_row(int i) {
    row_alive_[i] = false;
    for (auto [j, v] : rows_[i])
      if (col_alive_[j]) --col_count_[j];
  }
  void remove_col(int j) {
    col_alive_[j] = false;
    for (auto [i, v] : cols_[j])
      if (row_alive_[i]) --row_count_[i];
  }
  void fail(PresolveStatus s, std::string msg) {
    status_ = s;
    message_ = std::move(msg);
  }

  bool zero_rows() {
    bool changed = false;
    for (int i = 0; i < static_cast<int>(rows_.size()); ++i) {
      if (!row_alive_[i] || row_count_[i] != 0) continue;
      if (std::abs(b_[i]) > kFeasTol * b_scale_) {
        fail(PresolveStatus::Infeasible,
             fmt::format("row {} has no entries but right-hand side {}", i, b_[i]));
        return changed;
      }
      PresolveStep st{PresolveStep::Kind::ZeroRow};
      st.row = i;
      st.rhs = b_[i];
      steps_.push_back(st);
      row_alive_[i] = false;
      changed = true;
    }
    return changed;
  }

  bool zero_columns() {
    bool changed = false;
    for (int j = 0; j < static_cast<int>(cols_.size()); ++j) {
      if (!col_alive_[j] || col_count_[j] != 0) continue;
      if (c_[j] < 0.0) {
        fail(PresolveStatus::Unbounded,
             fmt::format("column {} has no entries and negative cost {}", j, c_[j]));
        return changed;
      }
      PresolveStep st{PresolveStep::Kind::ZeroColumn};
      st.col = j;
      st.cost = c_[j];
      steps_.push_back(st);
      col_alive_[j] = false;
      changed = true;
    }
    return changed;
  }

  bool singleton_rows() {
    bool changed = false;
    for (int i = 0; i < static_cast<int>(rows_.size()); ++i) {
      if (!row_alive_[i] || row_count_[i] != 1) continue;
      int j = -1;
      double a = 0.0;
      for (auto [k, v] : rows_[i])
        if (col_alive_[k]) { j = k; a = v; break; }
      double x = b_[i] / a;
      if (x < -kFeasTol * std::max(1.0, std::abs(b_[i] / a))) {
        fail(PresolveStatus::Infeasible,
             fmt::format("row {} forces column {} to {} < 0", i, j, x));
        return changed;
      }
      x = std::max(x, 0.0);
      PresolveStep st{PresolveStep::Kind::SingletonRow};
      st.row = i;
      st.col = j;
      st.coef = a;
      st.value = x;
      st.rhs = b_[i];
      st.cost = c_[j];
      steps_.push_back(st);
      for (auto [r, v] : cols_[j])
        if (row_alive_[r] && r != i) b_[r] -= v * x;
      offset_ += c_[j] * x;
      row_alive_[i] = false;
      remove_col(j);
      changed = true;
    }
    return changed;
  }

  std::vector<Entry> active_row(int i) const {
    std::vector<Entry> out;
    for (auto e : rows_[i])
      if (col_alive_[e.first]) out.push_back(e);
    return out;
  }

  bool duplicate_rows() {
    bool changed = false;
    const double tol = relaxed_ ? kRelaxedDuplicateTol : kExactDuplicateTol;
    // Rows can only be proportional when they share a sparsity pattern.
    std::map<std::vector<int>, std::vector<int>> by_pattern;
    std::vector<std::vector<Entry>> active(rows_.size());
    for (int i = 0; i < static_cast<int>(rows_.size()); ++i) {
      if (!row_alive_[i] || row_count_[i] < 2) continue;
      active[i] = active_row(i);
      std::vector<int> pattern;
      for (auto [j, v] : active[i]) pattern.push_back(j);
      by_pattern[pattern].push_back(i);
    }
    for (auto& [pattern, group] : by_pattern) {
      for (std::size_t p = 0; p < group.size(); ++p) {
        const int keep = group[p];
        if (!row_alive_[keep]) continue;
        for (std::size_t q = p + 1; q < group.size(); ++q) {
          const int k = group[q];
          if (!row_alive_[k]) continue;
          const auto& ri = active[keep];
          const auto& rk = active[k];
          const double t = rk[0].second / ri[0].second;
          bool same = true;
          for (std::size_t e = 0; e < ri.size() && same; ++e)
            same = std::abs(rk[e].second - t * ri[e].second) <=
                   tol * std::abs(rk[e].second);
          if (!same) continue;
          const double rhs_gap = std::abs(b_[k] - t * b_[keep]);
          if (rhs_gap > kFeasTol * std::max({1.0, std::abs(b_[k]), std::abs(t * b_[keep])})) {
            fail(PresolveStatus::Infeasible,
                 fmt::format("rows {} and {} are proportional with inconsistent "
                             "right-hand sides",
                             keep, k));
            return changed;
          }
          PresolveStep st{PresolveStep::Kind::DuplicateRow};
          st.row = k;
          st.other_row = keep;
          st.ratio = t;
          st.rhs = b_[k];
          steps_.push_back(st);
          remove_row(k);
          changed = true;
        }
      }
    }
    return changed;
  }

  // A column singleton x_j in row i whose other coefficients all have the
  // opposite sign, with b_i/a_ij >= 0: the row then determines x_j >= 0 from
  // the remaining variables, so x_j and the row drop out together and
  // lambda_i = c_j / a_ij is folded into the other costs.
  bool implied_free() {
    bool changed = false;
    for (int j = 0; j < static_cast<int>(cols_.size()); ++j) {
      if (!col_alive_[j] || col_count_[j] != 1) continue;
      int i = -1;
      double a = 0.0;
      for (auto [r, v] : cols_[j])
        if (row_alive_[r]) { i = r; a = v; break; }
      if (row_count_[i] < 2) continue;
      if (b_[i] * a < 0.0) continue;
      bool ok = true;
      for (auto [k, v] : rows_[i])
        if (k != j && col_alive_[k] && v * a > 0.0) { ok = false; break; }
      if (!ok) continue;
      const double lambda = c_[j] / a;
      PresolveStep st{PresolveStep::Kind::ImpliedFreeSingleton};
      st.row = i;
      st.col = j;
      st.coef = a;
      st.value = lambda;
      st.rhs = b_[i];
      st.cost = c_[j];
      steps_.push_back(st);
      for (auto [k, v] : rows_[i])
        if (k != j && col_alive_[k]) c_[k] -= v * lambda;
      offset_ += lambda * b_[i];
      remove_col(j);
      remove_row(i);
      changed = true;
    }
    return changed;
  }

  void build_reduced(PresolveResult& res) const {
    auto& tr = res.trace;
    std::vector<int> row_new(rows_.size(), -1), col_new(cols_.size(), -1);
    for (int i = 0; i < static_cast<int>(rows_.size()); ++i)
      if (row_alive_[i]) {
        row_new[i] = static_cast<int>(tr.kept_rows.size());
        tr.kept_rows.push_back(i);
      }
    for (int j = 0; j < static_cast<int>(cols_.size()); ++j)
      if (col_alive_[j]) {
        col_new[j] = static_cast<int>(tr.kept_cols.size());
        tr.kept_cols.push_back(j);
      }
    const int m = static_cast<int>(tr.kept_rows.size());
    const int n = static_cast<int>(tr.kept_cols.size());
    std::vector<Triplet> trips;
    for (int j : tr.kept_cols)
      for (auto [i, v] : cols_[j])
        if (row_alive_[i]) trips.emplace_back(row_new[i], col_new[j], v);
    StandardLp& out = res.reduced;
    out.A.resize(m, n);
    out.A.setFromTriplets(trips.begin(), trips.end());
    out.A.makeCompressed();
    out.b.resize(m);
    out.c.resize(n);
    for (int r = 0; r < m; ++r) out.b[r] = b_[tr.kept_rows[r]];
    for (int k = 0; k < n; ++k) out.c[k] = c_[tr.kept_cols[k]];
    out.objective_offset = offset_;
    if (!lp_.row_names.empty())
      for (int i : tr.kept_rows) out.row_names.push_back(lp_.row_names[i]);
    if (!lp_.col_names.empty())
      for (int j : tr.kept_cols) out.col_names.push_back(lp_.col_names[j]);
  }

  const StandardLp& lp_;
  const PresolveOptions& opt_;
  std::vector<std::vector<Entry>> rows_, cols_;
  std::vector<bool> row_alive_, col_alive_;
  std::vector<int> row_count_, col_count_;
  Vec b_, c_;
  double offset_;
  double b_scale_ = 1.0;
  bool relaxed_ = false;
  std::vector<PresolveStep> steps_;
  PresolveStatus status_ = PresolveStatus::Reduced;
  std::string message_;
};

}  // namespace

PresolveResult presolve(const StandardLp& lp, const PresolveOptions& options) {
  lp.check_dimensions();
  return Reducer(lp, options).run();
}

PrimalDual postsolve(const PresolveTrace& trace, const Vec& x, const Vec& lambda,
                     const Vec& s) {
  const StandardLp& lp = trace.original;
  const auto m_red = static_cast<Eigen::Index>(trace.kept_rows.size());
  const auto n_red = static_cast<Eigen::Index>(trace.kept_cols.size());
  if (x.size() != n_red || s.size() != n_red || lambda.size() != m_red)
    throw StructuralError(fmt::format(
        "postsolve expects x, s of length {} and lambda of length {}, got {}, {}, {}",
        n_red, m_red, x.size(), s.size(), lambda.size()));

  PrimalDual out;
  out.x = Vec::Zero(lp.cols());
  out.lambda = Vec::Zero(lp.rows());
  for (Eigen::Index k = 0; k < n_red; ++k) out.x[trace.kept_cols[k]] = x[k];
  for (Eigen::Index r = 0; r < m_red; ++r) out.lambda[trace.kept_rows[r]] = lambda[r];

  const Eigen::SparseMatrix<double, Eigen::RowMajor, int> rowA = lp.A;
  // Rows and columns removed before a step have not been undone yet when
  // that step is reversed, so their entries in out.x / out.lambda are still
  // zero and drop out of the sums below.
  for (auto it = trace.steps.rbegin(); it != trace.steps.rend(); ++it) {
    const PresolveStep& st = *it;
    switch (st.kind) {
      case PresolveStep::Kind::ZeroRow:
      case PresolveStep::Kind::DuplicateRow:
        out.lambda[st.row] = 0.0;
        break;
      case PresolveStep::Kind::ZeroColumn:
        out.x[st.col] = 0.0;
        break;
      case PresolveStep::Kind::SingletonRow: {
        out.x[st.col] = st.value;
        double acc = st.cost;
        for (SparseMatrix::InnerIterator e(lp.A, st.col); e; ++e)
          if (e.row() != st.row) acc -= e.value() * out.lambda[e.row()];
        out.lambda[st.row] = acc / st.coef;
        break;
      }
      case PresolveStep::Kind::ImpliedFreeSingleton: {
        out.lambda[st.row] = st.value;
        double acc = st.rhs;
        for (decltype(rowA)::InnerIterator e(rowA, st.row); e; ++e)
          if (e.col() != st.col) acc -= e.value() * out.x[e.col()];
        out.x[st.col] = std::max(0.0, acc / st.coef);
        break;
      }
    }
  }
  out.s = lp.c - lp.A.transpose() * out.lambda;
  return out;
}

double scaling_ratio(const SparseMatrix& A) {
  double hi = 0.0, lo = std::numeric_limits<double>::infinity();
  for (int j = 0; j < A.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(A, j); it; ++it) {
      const double v = std::abs(it.value());
      if (v == 0.0) continue;
      hi = std::max(hi, v);
      lo = std::min(lo, v);
    }
  if (hi == 0.0) throw StructuralError("scaling ratio of a matrix with no nonzero");
  return hi / lo;
}

}  // namespace arclp
