#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "arclp/types.hpp"

namespace arclp {

enum class Ordering { Amd, Natural };

struct NormalEqOptions {
  Ordering ordering = Ordering::Amd;
  // Systems with m at or below this size are factored as dense matrices.
  int dense_threshold = 200;
  // A pivot that is nonpositive or below floor times the diagonal entry of
  // A D A' it started from is replaced by kSkipPivot.
  double pivot_floor = 1e-12;
  bool iterative_refinement = true;
};

inline constexpr double kSkipPivot = 1e64;

namespace detail {
struct NormalEqSymbolic;
}

/// LDL' factorization of P (A diag(d2) A') P'. Immutable once built, so
/// several right-hand sides may be solved concurrently.
class NormalEqFactor {
 public:
  Vec solve(const Vec& v) const;
  // A diag(d2) A' u, without forming the matrix.
  Vec apply(const Vec& u) const;

  int size() const { return m_; }
  bool dense() const { return dense_; }
  const Vec& d2() const { return d2_; }
  const Vec& diagonal() const { return diag_; }
  // perm[i] is the position of original row i in the factored order.
  const std::vector<int>& permutation() const;
  const std::vector<int>& regularized_pivots() const { return regularized_; }
  // Hash of the nonzero structure of L as produced by this factorization.
  std::uint64_t pattern_hash() const { return pattern_hash_; }

  // Dense copies for inspection in tests.
  Eigen::MatrixXd lower() const;
  Eigen::MatrixXd permuted_matrix() const;

 private:
  friend class NormalEquations;
  Vec solve_once(const Vec& v) const;

  std::shared_ptr<const detail::NormalEqSymbolic> sym_;
  int m_ = 0;
  bool dense_ = false;
  bool refine_ = true;
  Vec d2_;
  Vec diag_;
  // Sparse L, column i holding rows below the diagonal.
  std::vector<int> Lp_, Li_;
  std::vector<double> Lx_;
  Eigen::MatrixXd Ldense_;
  std::vector<int> regularized_;
  std::uint64_t pattern_hash_ = 0;
};

/// Symbolic analysis of A A' (ordering, elimination tree, assembly map) done
/// once per matrix; factor() then only does numeric work on that pattern.
class NormalEquations {
 public:
  explicit NormalEquations(const SparseMatrix& A, NormalEqOptions options = {});

  /// d2 must be finite and nonnegative. Throws NumericalError when a pivot is
  /// not finite.
  NormalEqFactor factor(const Vec& d2);

  int rows() const;
  bool dense() const;
  const std::vector<int>& permutation() const;
  // Nonzeros strictly below the diagonal of L for the chosen ordering.
  long factor_nonzeros() const;
  int factorizations() const { return factorizations_; }
  const NormalEqOptions& options() const { return options_; }

 private:
  std::shared_ptr<const detail::NormalEqSymbolic> sym_;
  NormalEqOptions options_;
  int factorizations_ = 0;
};

}  // namespace arclp
