#pragma once

// Shared helpers for the unit and acceptance tests: random problem
// generators and dense reference computations that do not go through the
// library's own linear algebra.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "arclp/problem.hpp"
#include "arclp/types.hpp"

namespace testsupport {

using arclp::SparseMatrix;
using arclp::StandardLp;
using arclp::Vec;

inline std::string source_dir() { return ARCLP_SOURCE_DIR; }
inline std::string netlib_dir() { return source_dir() + "/data/netlib"; }
inline std::string fixture(const std::string& name) {
  return source_dir() + "/tests/fixtures/" + name;
}

inline const std::vector<std::string>& netlib_names() {
  static const std::vector<std::string> names{"afiro", "adlittle", "blend",
                                              "sc50a", "sc50b",    "share2b"};
  return names;
}

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

/// m x n matrix with entries in [-1, 1]; when density < 1 each row and column
/// still gets at least one entry. A diagonal block keeps it full row rank
/// with probability one.
inline SparseMatrix random_matrix(std::mt19937_64& rng, int m, int n, double density) {
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (u(rng) < density) D(i, j) = val(rng);
  for (int i = 0; i < m; ++i) D(i, i % n) = 1.0 + u(rng);
  for (int j = 0; j < n; ++j)
    if (D.col(j).cwiseAbs().maxCoeff() == 0.0) D(j % m, j) = val(rng);
  return D.sparseView();
}

/// Primal and dual feasible LP: b = A x_f with x_f > 0 and
/// c = A' l_f + s_f with s_f > 0, so an optimum exists.
inline StandardLp random_lp(std::mt19937_64& rng, int m, int n, double density) {
  std::uniform_real_distribution<double> pos(0.5, 2.0);
  std::uniform_real_distribution<double> any(-1.0, 1.0);
  StandardLp lp;
  lp.A = random_matrix(rng, m, n, density);
  Vec xf(n), sf(n), lf(m);
  for (int j = 0; j < n; ++j) {
    xf[j] = pos(rng);
    sf[j] = pos(rng);
  }
  for (int i = 0; i < m; ++i) lf[i] = any(rng);
  lp.b = lp.A * xf;
  lp.c = lp.A.transpose() * lf + sf;
  return lp;
}

struct RandomPoint {
  Vec x, lambda, s;
};

inline RandomPoint random_point(std::mt19937_64& rng, int m, int n) {
  std::uniform_real_distribution<double> any(-1.0, 1.0);
  RandomPoint p;
  p.x.resize(n);
  p.s.resize(n);
  p.lambda.resize(m);
  for (int j = 0; j < n; ++j) {
    p.x[j] = log_uniform(rng, 0.1, 10.0);
    p.s[j] = log_uniform(rng, 0.1, 10.0);
  }
  for (int i = 0; i < m; ++i) p.lambda[i] = any(rng);
  return p;
}

/// Solves the full (2n + m) Newton-type system
///   A dx = r1,  A' dl + ds = r2,  s.*dx + x.*ds = r3
/// with a dense LU factorization.
struct BlockSolution {
  Vec dx, dl, ds;
};

inline BlockSolution dense_block_solve(const SparseMatrix& As, const Vec& x, const Vec& s,
                                       const Vec& r1, const Vec& r2, const Vec& r3) {
  const Eigen::MatrixXd A(As);
  const int m = static_cast<int>(A.rows()), n = static_cast<int>(A.cols());
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(2 * n + m, 2 * n + m);
  K.block(0, 0, m, n) = A;
  K.block(m, n, n, m) = A.transpose();
  K.block(m, n + m, n, n) = Eigen::MatrixXd::Identity(n, n);
  K.block(m + n, 0, n, n) = s.asDiagonal();
  K.block(m + n, n + m, n, n) = x.asDiagonal();
  Vec rhs(2 * n + m);
  rhs << r1, r2, r3;
  const Vec sol = K.fullPivLu().solve(rhs);
  return {sol.head(n), sol.segment(n, m), sol.tail(n)};
}


/// Largest a in [0, pi/2] such that v - vdot sin(t) + vddot (1 - cos(t)) >= floor
/// for all t in [0, a], found by scanning a grid (which also contains the
/// stationary point of the curve, so short dips are not missed) and then
/// bisecting the first failing cell 60 times.
inline double scalar_alpha_oracle(double v, double floor, double vdot, double vddot,
                                  int grid = 512) {
  const double half_pi = std::acos(-1.0) / 2.0;
  auto ok = [&](double t) {
    return v - vdot * std::sin(t) + vddot * (1.0 - std::cos(t)) >= floor;
  };
  std::vector<double> pts;
  for (int k = 0; k <= grid; ++k) pts.push_back(half_pi * k / grid);
  const double stat = std::atan2(vdot, vddot);  // zero of the derivative
  for (double t : {stat, stat + std::acos(-1.0), stat - std::acos(-1.0)})
    if (t > 0.0 && t < half_pi) pts.push_back(t);
  std::sort(pts.begin(), pts.end());
  if (!ok(0.0)) return 0.0;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    if (ok(pts[k])) continue;
    double lo = pts[k - 1], hi = pts[k];
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (ok(mid) ? lo : hi) = mid;
    }
    return lo;
  }
  return half_pi;
}

inline double rel_diff(const Vec& a, const Vec& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

/// Sum with Neumaier compensation; used as an independent inner-product
/// reference.
inline double compensated_dot(const Vec& a, const Vec& b) {
  double sum = 0.0, comp = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double term = a[i] * b[i];
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) comp += (sum - t) + term;
    else comp += (term - t) + sum;
    sum = t;
  }
  return sum + comp;
}

}  // namespace testsupport
