#include "arclp/normal_equations.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/OrderingMethods>
#include <fmt/core.h>

namespace arclp {

namespace detail {

struct NormalEqSymbolic {
  SparseMatrix A;
  int m = 0;
  bool dense = false;
  std::vector<int> perm;   // original row -> factored position
  std::vector<int> iperm;  // factored position -> original row
  // Upper triangle of P A A' P' in compressed columns (rows <= column).
  std::vector<int> Bp, Bi;
  std::vector<int> diag_pos;
  // For column j of A, entries [Cp[j], Cp[j+1]) add d2_j * Cval to Bx[Cpos].
  std::vector<int> Cp, Cpos;
  std::vector<double> Cval;
  std::vector<int> parent, col_count, Lp;
  long lnz = 0;
};

}  // namespace detail

namespace {

using detail::NormalEqSymbolic;

std::uint64_t fnv1a(std::uint64_t h, std::int64_t v) {
  for (int b = 0; b < 8; ++b) {
    h ^= static_cast<std::uint64_t>(v >> (8 * b)) & 0xffu;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<int> amd_permutation(const std::vector<std::vector<int>>& pattern, int m) {
  std::vector<Triplet> trips;
  for (int k = 0; k < m; ++k)
    for (int i : pattern[k]) {
      trips.emplace_back(i, k, 1.0);
      if (i != k) trips.emplace_back(k, i, 1.0);
    }
  SparseMatrix S(m, m);
  S.setFromTriplets(trips.begin(), trips.end());
  Eigen::AMDOrdering<int> amd;
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> pinv;
  amd(S, pinv);
  // Same convention as Eigen's simplicial Cholesky: the ordering returns the
  // inverse permutation; P = pinv^{-1} maps row i to position P(i).
  const Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> P = pinv.inverse();
  std::vector<int> perm(m);
  for (int i = 0; i < m; ++i) perm[i] = P.indices()[i];
  return perm;
}

std::shared_ptr<NormalEqSymbolic> analyze(const SparseMatrix& A,
                                          const NormalEqOptions& opt) {
  auto sym = std::make_shared<NormalEqSymbolic>();
  sym->A = A;
  sym->A.makeCompressed();
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  sym->m = m;
  sym->dense = m <= opt.dense_threshold;

  // Pattern of A A' in original numbering, upper triangle by column.
  std::vector<std::vector<int>> upper(m);
  for (int k = 0; k < m; ++k) upper[k].push_back(k);
  std::vector<int> rows;
  for (int j = 0; j < n; ++j) {
    rows.clear();
    for (SparseMatrix::InnerIterator it(sym->A, j); it; ++it)
      rows.push_back(static_cast<int>(it.row()));
    for (std::size_t a = 0; a < rows.size(); ++a)
      for (std::size_t b = a; b < rows.size(); ++b) {
        const int r = std::min(rows[a], rows[b]), c = std::max(rows[a], rows[b]);
        upper[c].push_back(r);
      }
  }
  for (auto& col : upper) {
    std::sort(col.begin(), col.end());
    col.erase(std::unique(col.begin(), col.end()), col.end());
  }

  if (opt.ordering == Ordering::Amd && m > 1) {
    sym->perm = amd_permutation(upper, m);
  } else {
    sym->perm.resize(m);
    std::iota(sym->perm.begin(), sym->perm.end(), 0);
  }
  sym->iperm.resize(m);
  for (int i = 0; i < m; ++i) sym->iperm[sym->perm[i]] = i;

  // Permuted upper pattern.
  std::vector<std::vector<int>> pcols(m);
  for (int c = 0; c < m; ++c)
    for (int r : upper[c]) {
      const int pr = sym->perm[r], pc = sym->perm[c];
      pcols[std::max(pr, pc)].push_back(std::min(pr, pc));
    }
  sym->Bp.assign(m + 1, 0);
  sym->diag_pos.resize(m);
  for (int k = 0; k < m; ++k) {
    auto& col = pcols[k];
    std::sort(col.begin(), col.end());
    sym->Bp[k + 1] = sym->Bp[k] + static_cast<int>(col.size());
    for (int i : col) sym->Bi.push_back(i);
    sym->diag_pos[k] = sym->Bp[k + 1] - 1;  // the diagonal sorts last
  }
  auto position = [&](int r, int c) {
    const auto first = sym->Bi.begin() + sym->Bp[c];
    const auto last = sym->Bi.begin() + sym->Bp[c + 1];
    return static_cast<int>(std::lower_bound(first, last, r) - sym->Bi.begin());
  };

  sym->Cp.assign(n + 1, 0);
  std::vector<double> vals;
  for (int j = 0; j < n; ++j) {
    rows.clear();
    vals.clear();
    for (SparseMatrix::InnerIterator it(sym->A, j); it; ++it) {
      rows.push_back(sym->perm[it.row()]);
      vals.push_back(it.value());
    }
    for (std::size_t a = 0; a < rows.size(); ++a)
      for (std::size_t b = a; b < rows.size(); ++b) {
        const int r = std::min(rows[a], rows[b]), c = std::max(rows[a], rows[b]);
        sym->Cpos.push_back(position(r, c));
        sym->Cval.push_back(vals[a] * vals[b]);
      }
    sym->Cp[j + 1] = static_cast<int>(sym->Cpos.size());
  }

  // Elimination tree and column counts of L.
  sym->parent.assign(m, -1);
  sym->col_count.assign(m, 0);
  std::vector<int> flag(m, -1);
  for (int k = 0; k < m; ++k) {
    flag[k] = k;
    for (int p = sym->Bp[k]; p < sym->Bp[k + 1]; ++p) {
      int i = sym->Bi[p];
      if (i >= k) continue;
      for (; flag[i] != k; i = sym->parent[i]) {
        if (sym->parent[i] == -1) sym->parent[i] = k;
        ++sym->col_count[i];
        flag[i] = k;
      }
    }
  }
  sym->Lp.assign(m + 1, 0);
  for (int k = 0; k < m; ++k) sym->Lp[k + 1] = sym->Lp[k] + sym->col_count[k];
  sym->lnz = sym->Lp[m];
  return sym;
}

}  // namespace

NormalEquations::NormalEquations(const SparseMatrix& A, NormalEqOptions options)
    : sym_(analyze(A, options)), options_(options) {}

int NormalEquations::rows() const { return sym_->m; }
bool NormalEquations::dense() const { return sym_->dense; }
const std::vector<int>& NormalEquations::permutation() const { return sym_->perm; }
long NormalEquations::factor_nonzeros() const { return sym_->lnz; }

const std::vector<int>& NormalEqFactor::permutation() const { return sym_->perm; }

NormalEqFactor NormalEquations::factor(const Vec& d2) {
  const NormalEqSymbolic& sym = *sym_;
  const int m = sym.m;
  if (d2.size() != sym.A.cols())
    throw StructuralError(fmt::format("d2 has length {}, A has {} columns",
                                      d2.size(), sym.A.cols()));
  for (Eigen::Index j = 0; j < d2.size(); ++j)
    if (!std::isfinite(d2[j]) || d2[j] < 0.0)
      throw NumericalError(fmt::format("scaling entry {} is {}", j, d2[j]));
  ++factorizations_;

  NormalEqFactor f;
  f.sym_ = sym_;
  f.m_ = m;
  f.dense_ = sym.dense;
  f.refine_ = options_.iterative_refinement;
  f.d2_ = d2;
  f.diag_ = Vec::Zero(m);

  std::vector<double> Bx(sym.Bi.size(), 0.0);
  for (Eigen::Index j = 0; j < d2.size(); ++j) {
    const double dj = d2[j];
    for (int p = sym.Cp[j]; p < sym.Cp[j + 1]; ++p) Bx[sym.Cpos[p]] += dj * sym.Cval[p];
  }
  auto settle_pivot = [&](int k, double d) {
    if (!std::isfinite(d))
      throw NumericalError(fmt::format("pivot {} is not finite", k));
    // Compared with the row's own diagonal before elimination: a pivot that
    // lost all but a 1e-12 fraction of it marks a dependent row, whereas a
    // pivot that is merely small next to other rows is kept.
    if (d <= 0.0 || d < options_.pivot_floor * Bx[sym.diag_pos[k]]) {
      f.regularized_.push_back(sym.iperm[k]);
      d = kSkipPivot;
    }
    f.diag_[k] = d;
    return d;
  };

  std::uint64_t h = 1469598103934665603ull;
  if (sym.dense) {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k)
      for (int p = sym.Bp[k]; p < sym.Bp[k + 1]; ++p) {
        B(sym.Bi[p], k) = Bx[p];
        B(k, sym.Bi[p]) = Bx[p];
      }
    Eigen::MatrixXd& L = f.Ldense_;
    L = Eigen::MatrixXd::Identity(m, m);
    Vec w(m);
    for (int k = 0; k < m; ++k) {
      w.head(k) = L.row(k).head(k).transpose().cwiseProduct(f.diag_.head(k));
      const double d = settle_pivot(k, B(k, k) - L.row(k).head(k).dot(w.head(k)));
      const int below = m - k - 1;
      if (below > 0) {
        L.col(k).tail(below) =
            (B.col(k).tail(below) - L.block(k + 1, 0, below, k) * w.head(k)) / d;
      }
    }
    h = fnv1a(h, m);
  } else {
    f.Lp_ = sym.Lp;
    f.Li_.assign(sym.lnz, 0);
    f.Lx_.assign(sym.lnz, 0.0);
    std::vector<double> y(m, 0.0);
    std::vector<int> flag(m, -1), pattern(m), fill(m, 0);
    for (int k = 0; k < m; ++k) {
      int top = m;
      flag[k] = k;
      for (int p = sym.Bp[k]; p < sym.Bp[k + 1]; ++p) {
        int i = sym.Bi[p];
        y[i] += Bx[p];
        int len = 0;
        for (; flag[i] != k; i = sym.parent[i]) {
          pattern[len++] = i;
          flag[i] = k;
        }
        while (len > 0) pattern[--top] = pattern[--len];
      }
      double d = y[k];
      y[k] = 0.0;
      for (; top < m; ++top) {
        const int i = pattern[top];
        const double yi = y[i];
        y[i] = 0.0;
        const int p2 = f.Lp_[i] + fill[i];
        for (int p = f.Lp_[i]; p < p2; ++p) y[f.Li_[p]] -= f.Lx_[p] * yi;
        const double lki = yi / f.diag_[i];
        d -= lki * yi;
        f.Li_[p2] = k;
        f.Lx_[p2] = lki;
        ++fill[i];
      }
      settle_pivot(k, d);
    }
    for (int v : f.Lp_) h = fnv1a(h, v);
    for (int v : f.Li_) h = fnv1a(h, v);
  }
  f.pattern_hash_ = h;
  return f;
}

Vec NormalEqFactor::apply(const Vec& u) const {
  const SparseMatrix& A = sym_->A;
  Vec t = A.transpose() * u;
  t.array() *= d2_.array();
  return A * t;
}

Vec NormalEqFactor::solve_once(const Vec& v) const {
  const auto& perm = sym_->perm;
  Vec y(m_);
  for (int i = 0; i < m_; ++i) y[perm[i]] = v[i];
  if (dense_) {
    Ldense_.triangularView<Eigen::UnitLower>().solveInPlace(y);
    y.array() /= diag_.array();
    Ldense_.transpose().triangularView<Eigen::UnitUpper>().solveInPlace(y);
  } else {
    for (int j = 0; j < m_; ++j) {
      const double yj = y[j];
      for (int p = Lp_[j]; p < Lp_[j + 1]; ++p) y[Li_[p]] -= Lx_[p] * yj;
    }
    y.array() /= diag_.array();
    for (int j = m_ - 1; j >= 0; --j) {
      double yj = y[j];
      for (int p = Lp_[j]; p < Lp_[j + 1]; ++p) yj -= Lx_[p] * y[Li_[p]];
      y[j] = yj;
    }
  }
  Vec u(m_);
  for (int i = 0; i < m_; ++i) u[i] = y[perm[i]];
  return u;
}

Vec NormalEqFactor::solve(const Vec& v) const {
  if (v.size() != m_)
    throw StructuralError(
        fmt::format("right-hand side has length {}, system has {}", v.size(), m_));
  Vec u = solve_once(v);
  if (!refine_) return u;
  const Vec r = v - apply(u);
  Vec u2 = u + solve_once(r);
  // Keep the refined solution only when it actually helps; with skipped
  // pivots the correction can point away from the regularized solution.
  if ((v - apply(u2)).norm() < r.norm()) return u2;
  return u;
}

Eigen::MatrixXd NormalEqFactor::lower() const {
  if (dense_) return Ldense_;
  Eigen::MatrixXd L = Eigen::MatrixXd::Identity(m_, m_);
  for (int j = 0; j < m_; ++j)
    for (int p = Lp_[j]; p < Lp_[j + 1]; ++p) L(Li_[p], j) = Lx_[p];
  return L;
}

Eigen::MatrixXd NormalEqFactor::permuted_matrix() const {
  const Eigen::MatrixXd Ad = Eigen::MatrixXd(sym_->A);
  const Eigen::MatrixXd M = Ad * d2_.asDiagonal() * Ad.transpose();
  Eigen::MatrixXd B(m_, m_);
  const auto& perm = sym_->perm;
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j) B(perm[i], perm[j]) = M(i, j);
  return B;
}

}  // namespace arclp
