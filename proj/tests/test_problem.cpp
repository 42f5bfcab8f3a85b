#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "arclp/problem.hpp"
#include "support.hpp"

using namespace arclp;
using testsupport::compensated_dot;

namespace {

StandardLp one_row() {
  StandardLp lp;
  lp.A = SparseMatrix(1, 2);
  lp.A.insert(0, 0) = 1.0;
  lp.A.insert(0, 1) = 1.0;
  lp.b = Vec::Ones(1);
  lp.c = Vec::Zero(2);
  return lp;
}

StandardLp identity2() {
  StandardLp lp;
  lp.A = SparseMatrix(2, 2);
  lp.A.setIdentity();
  lp.b = Vec::Ones(2);
  lp.c = Vec::Ones(2);
  return lp;
}

}  // namespace

TEST_CASE("residuals of a feasible primal point") {
  const auto r = compute_residuals(one_row(), Vec::Constant(2, 0.5), Vec::Zero(1),
                                   Vec::Ones(2));
  CHECK(r.rb[0] == 0.0);
  CHECK(r.rc[0] == 1.0);
  CHECK(r.rc[1] == 1.0);
}

TEST_CASE("residuals with identity A") {
  const auto r = compute_residuals(identity2(), Vec::Constant(2, 2.0), Vec::Zero(2),
                                   Vec::Ones(2));
  CHECK(r.rb == Vec::Ones(2));
  CHECK(r.rc == Vec::Zero(2));
}

TEST_CASE("residuals match dense products") {
  std::mt19937_64 rng(11);
  const StandardLp lp = testsupport::random_lp(rng, 5, 8, 0.5);
  const auto p = testsupport::random_point(rng, 5, 8);
  const auto r = compute_residuals(lp, p.x, p.lambda, p.s);
  const Eigen::MatrixXd A(lp.A);
  CHECK((r.rb - (A * p.x - lp.b)).norm() <= 1e-14 * (1 + lp.b.norm()));
  CHECK((r.rc - (A.transpose() * p.lambda + p.s - lp.c)).norm() <=
        1e-14 * (1 + lp.c.norm()));
}

TEST_CASE("residuals reject mismatched dimensions") {
  CHECK_THROWS_AS(compute_residuals(one_row(), Vec::Ones(3), Vec::Zero(1), Vec::Ones(2)),
                  StructuralError);
  StandardLp bad = one_row();
  bad.b = Vec::Ones(2);
  CHECK_THROWS_AS(bad.check_dimensions(), StructuralError);
}

TEST_CASE("duality measure") {
  CHECK(duality_measure(Vec::Ones(4), Vec::Ones(4)) == 1.0);
  Vec x(2), s(2);
  x << 2, 0.5;
  s << 0.5, 2;
  CHECK(duality_measure(x, s) == 1.0);
  CHECK_THROWS_AS(duality_measure(Vec(), Vec()), StructuralError);
  CHECK_THROWS_AS(duality_measure(Vec::Ones(2), Vec::Ones(3)), StructuralError);

  std::mt19937_64 rng(5);
  Vec a(50), b(50);
  for (int i = 0; i < 50; ++i) {
    a[i] = testsupport::log_uniform(rng, 1e-3, 1e3);
    b[i] = testsupport::log_uniform(rng, 1e-3, 1e3);
  }
  const double ref = compensated_dot(a, b) / 50.0;
  CHECK(std::abs(duality_measure(a, b) - ref) <= 1e-15 * ref * 4);
}

TEST_CASE("iterate caches") {
  std::mt19937_64 rng(3);
  const StandardLp lp = testsupport::random_lp(rng, 4, 9, 1.0);
  const auto p = testsupport::random_point(rng, 4, 9);
  const Iterate it(lp, p.x, p.lambda, p.s, 0.25);
  const auto r = compute_residuals(lp, p.x, p.lambda, p.s);
  CHECK(it.rb() == r.rb);
  CHECK(it.rc() == r.rc);
  CHECK(it.mu() == duality_measure(p.x, p.s));
  CHECK(it.nu() == 0.25);
  CHECK(it.min_complementarity() == p.x.cwiseProduct(p.s).minCoeff());
}

TEST_CASE("composite stop metric") {
  StopMetricTerms t;
  CHECK(composite_stop_metric(t) == 0.0);
  t.rb_norm = 2.0;
  t.b_norm = 0.5;
  t.primal_objective = 0.7;
  t.dual_objective = -0.3;
  CHECK(composite_stop_metric(t) == 2.0);

  std::mt19937_64 rng(17);
  const StandardLp lp = testsupport::random_lp(rng, 5, 8, 0.6);
  const auto p = testsupport::random_point(rng, 5, 8);
  const Iterate it(lp, p.x, p.lambda, p.s);
  const Eigen::MatrixXd A(lp.A);
  const double mu = p.x.dot(p.s) / 8.0;
  const double ref = (A * p.x - lp.b).norm() / std::max(1.0, lp.b.norm()) +
                     (A.transpose() * p.lambda + p.s - lp.c).norm() /
                         std::max(1.0, lp.c.norm()) +
                     mu / std::max({1.0, std::abs(lp.c.dot(p.x)),
                                    std::abs(lp.b.dot(p.lambda))});
  CHECK(std::abs(composite_stop_metric(lp, it) - ref) <= 1e-14 * ref);
  CHECK(composite_stop_metric(lp, it) >= 0.0);
}

TEST_CASE("config validation and defaults") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.effective_sigma_max() == 0.3);
  cfg.algorithm = Algorithm::Arc1;
  CHECK(cfg.effective_sigma_max() == 0.4);
  cfg.sigma_max = 1e-7;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.sigma_max.reset();
  cfg.rho = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.rho = 0.01;
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("enum names round trip") {
  for (auto a : {Algorithm::Arc1, Algorithm::Arc2, Algorithm::MehrotraPC})
    CHECK(parse_algorithm(to_string(a)) == a);
  CHECK_FALSE(parse_algorithm("simplex"));
  for (auto s : {SolveStatus::Optimal, SolveStatus::StepTooSmall, SolveStatus::ResidualBlowup,
                 SolveStatus::MuConverged, SolveStatus::IterationLimit,
                 SolveStatus::NumericalFailure, SolveStatus::Infeasible,
                 SolveStatus::Unbounded})
    CHECK(parse_status(to_string(s)) == s);
}
