#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "arclp/solver.hpp"
#include "support.hpp"

using namespace arclp;

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

SolverConfig config(Algorithm alg) {
  SolverConfig cfg;
  cfg.algorithm = alg;
  return cfg;
}

// Dense check of the KKT conditions of an LP at (x, lambda, s).
double kkt_violation(const StandardLp& lp, const Vec& x, const Vec& lambda, const Vec& s) {
  const Eigen::MatrixXd A(lp.A);
  const double primal = (A * x - lp.b).norm() / std::max(1.0, lp.b.norm());
  const double dual = (A.transpose() * lambda + s - lp.c).norm() / std::max(1.0, lp.c.norm());
  const double gap = std::abs(lp.c.dot(x) - lp.b.dot(lambda)) /
                     std::max(1.0, std::abs(lp.c.dot(x)));
  return std::max({primal, dual, gap, -x.minCoeff(), -s.minCoeff()});
}

}  // namespace

TEST_CASE("rescale") {
  CHECK(rescale_alpha(kHalfPi) == 0.99 * kHalfPi);
  CHECK(rescale_alpha(0.1) == doctest::Approx(0.09999).epsilon(1e-15));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(1e-12, kHalfPi);
  for (int k = 0; k < 1000; ++k) CHECK(std::sin(rescale_alpha(u(rng))) < 1.0);
}

TEST_CASE("theta from the initial point") {
  Vec x(3), s(3);
  x << 1, 2, 3;
  s << 1, 1, 1;
  CHECK(initial_theta(x, s) == 1e-6);
  x << 1e-9, 1, 1;
  const double mu = (1e-9 + 2.0) / 3.0;
  CHECK(initial_theta(x, s) == doctest::Approx(0.1 * 1e-9 / mu).epsilon(1e-15));
}

TEST_CASE("initial point selection") {
  StandardLp lp;
  lp.A = SparseMatrix(3, 3);
  lp.A.setIdentity();
  lp.b = Vec::Ones(3);
  lp.c = Vec::Ones(3);
  NormalEquations kkt(lp.A);
  const StartingPoint ls = least_squares_start(lp, kkt);
  const StartingPoint ones = scaled_ones_start(lp);
  const StartingPoint best = initial_point(lp, kkt);
  CHECK(std::isfinite(ls.metric));
  CHECK(std::isfinite(ones.metric));
  CHECK(ls.x.minCoeff() > 0.0);
  CHECK(ones.x.minCoeff() > 0.0);
  CHECK(best.metric == std::min(ls.metric, ones.metric));
  CHECK(ones.x == Vec::Ones(3));
  CHECK(ones.lambda == Vec::Zero(3));

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const StandardLp r = testsupport::random_lp(rng, 6, 10, 0.5);
    NormalEquations k(r.A);
    const StartingPoint a = least_squares_start(r, k);
    const StartingPoint b = scaled_ones_start(r);
    const StartingPoint chosen = initial_point(r, k);
    CHECK(chosen.x.minCoeff() > 0.0);
    CHECK(chosen.s.minCoeff() > 0.0);
    // Recompute the selection metric directly.
    const Eigen::MatrixXd A(r.A);
    auto metric = [&](const StartingPoint& p) {
      return std::max({(A * p.x - r.b).norm(), (A.transpose() * p.lambda + p.s - r.c).norm(),
                       p.x.dot(p.s) / 10.0});
    };
    CHECK(std::abs(metric(a) - a.metric) <= 1e-12 * a.metric);
    CHECK(std::abs(metric(b) - b.metric) <= 1e-12 * b.metric);
    CHECK(chosen.method == (metric(a) <= metric(b) ? a.method : b.method));
  }
}

TEST_CASE("termination truth table") {
  const SolverConfig cfg;
  struct Row {
    double metric, mu, rb, rc, prev_rb, prev_rc, ax, as;
    int iter;
    std::optional<SolveStatus> expect;
  };
  using S = SolveStatus;
  const std::vector<Row> rows = {
      // metric  mu     rb     rc     prb   prc   ax     as    it   status
      {0.0, 0.0, 0.0, 0.0, -1, -1, -1, -1, 0, S::Optimal},
      {5e-9, 1e-3, 0.0, 0.0, 1, 1, 1e-9, 1e-9, 3, S::Optimal},
      {1.0, 1.0, 1.0, 1.0, 1, 1, 1e-9, 1e-9, 3, S::StepTooSmall},
      {1.0, 1.0, 1.0, 1.0, 1, 1, 1e-9, 0.5, 3, std::nullopt},
      {1.0, 1.0, 20.0, 1.0, 1, 1, 0.5, 0.5, 3, S::ResidualBlowup},
      {1.0, 1.0, 1.0, 20.0, 1, 1, 0.5, 0.5, 3, S::ResidualBlowup},
      {1.0, 1.0, 10.0, 10.0, 1, 1, 0.5, 0.5, 3, std::nullopt},
      // growth below the roundoff floor is not a blowup
      {1e-3, 1e-3, 5e-9, 0.0, 1e-12, 0.0, 0.5, 0.5, 3, std::nullopt},
      {1e-3, 1e-9, 1.0, 1.0, 1, 1, 0.5, 0.5, 3, S::MuConverged},
      {1.0, 1.0, 1.0, 1.0, 1, 1, 0.5, 0.5, 150, S::IterationLimit},
      {1.0, 1.0, 1.0, 1.0, 1, 1, 0.5, 0.5, 149, std::nullopt},
      // order: step test before blowup, blowup before mu
      {1.0, 1e-9, 20.0, 1.0, 1, 1, 1e-9, 1e-9, 3, S::StepTooSmall},
      {1.0, 1e-9, 20.0, 1.0, 1, 1, 0.5, 0.5, 3, S::ResidualBlowup},
      {1.0, 1e-9, 1.0, 1.0, 1, 1, 0.5, 0.5, 150, S::MuConverged},
  };
  for (size_t k = 0; k < rows.size(); ++k) {
    const Row& r = rows[k];
    CAPTURE(k);
    TerminationInput in;
    in.metric = r.metric;
    in.mu = r.mu;
    in.rb_norm = r.rb;
    in.rc_norm = r.rc;
    in.prev_rb_norm = r.prev_rb;
    in.prev_rc_norm = r.prev_rc;
    in.alpha_x = r.ax;
    in.alpha_s = r.as;
    in.iteration = r.iter;
    CHECK(check_termination(in, cfg) == r.expect);
  }
}

TEST_CASE("one step of each arc algorithm") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 5; ++trial) {
    const StandardLp lp = testsupport::random_lp(rng, 6, 10, 0.6);
    NormalEquations kkt(lp.A);
    const StartingPoint start = initial_point(lp, kkt);
    AlgorithmState st;
    st.iterate = Iterate(lp, start.x, start.lambda, start.s);
    st.theta = initial_theta(start.x, start.s);

    const SolverConfig c1 = config(Algorithm::Arc1);
    const StepOutcome o1 = step_algorithm1({lp, kkt, c1}, st);
    const StepOutcome o2 = step_algorithm2({lp, kkt, c1}, st);
    REQUIRE_FALSE(o1.failure);
    REQUIRE_FALSE(o2.failure);
    // Same sigma range, fewer acceptance conditions.
    CHECK(o2.state.history.back().alpha >= o1.state.history.back().alpha);

    for (const StepOutcome* o : {&o1, &o2}) {
      const Iterate& nx = o->state.iterate;
      const double a = o->state.history.back().alpha;
      CHECK(nx.mu() < st.iterate.mu());
      CHECK(nx.x().minCoeff() > 0.0);
      CHECK(nx.s().minCoeff() > 0.0);
      CHECK((nx.rb() - (1 - std::sin(a)) * st.iterate.rb()).norm() <=
            1e-9 * (1 + st.iterate.rb().norm()));
      CHECK((nx.rc() - (1 - std::sin(a)) * st.iterate.rc()).norm() <=
            1e-9 * (1 + st.iterate.rc().norm()));
      CHECK(nx.nu() == doctest::Approx(1 - std::sin(a)).epsilon(1e-15));
      CHECK(o->state.iteration == 1);
    }
    CHECK(o1.state.iterate.min_complementarity() >= st.theta * o1.state.iterate.mu());
  }
}

TEST_CASE("Mehrotra keeps a feasible start feasible") {
  std::mt19937_64 rng(29);
  StandardLp lp = testsupport::random_lp(rng, 5, 12, 0.6);
  const auto p = testsupport::random_point(rng, 5, 12);
  lp.b = lp.A * p.x;
  lp.c = lp.A.transpose() * p.lambda + p.s;
  StartingPoint start;
  start.x = p.x;
  start.lambda = p.lambda;
  start.s = p.s;
  SolverConfig cfg = config(Algorithm::MehrotraPC);
  cfg.max_iterations = 8;
  cfg.epsilon = 1e-14;
  SolveHooks hooks;
  int steps = 0;
  hooks.on_step = [&](const AlgorithmState& before, const AlgorithmState& after) {
    ++steps;
    CHECK(after.iterate.rb().norm() <= 1e-10 * (1 + lp.b.norm()));
    CHECK(after.iterate.rc().norm() <= 1e-10 * (1 + lp.c.norm()));
    CHECK(after.iterate.mu() < before.iterate.mu());
    const IterationRecord& rec = after.history.back();
    CHECK(rec.sigma == std::pow(rec.mu_affine / before.iterate.mu(), 3));
  };
  const SolveResult r = solve(lp, cfg, &start, hooks);
  CHECK(steps > 0);
}

TEST_CASE("end to end on random feasible instances") {
  std::mt19937_64 rng(31);
  for (Algorithm alg : {Algorithm::Arc1, Algorithm::Arc2, Algorithm::MehrotraPC}) {
    CAPTURE(to_string(alg));
    for (int trial = 0; trial < 5; ++trial) {
      const StandardLp lp = testsupport::random_lp(rng, 6, 10, trial % 2 ? 0.4 : 1.0);
      const SolverConfig cfg = config(alg);
      const SolveResult r = solve(lp, cfg);
      REQUIRE(r.report.status == SolveStatus::Optimal);
      CHECK(r.report.final_metric < 1e-8);
      CHECK(r.report.iterations == static_cast<int>(r.report.per_iteration.size()));
      CHECK(r.report.factorizations == r.report.iterations);
      CHECK(kkt_violation(lp, r.final_point.x(), r.final_point.lambda(), r.final_point.s()) <
            1e-7);
      CHECK(composite_stop_metric(lp, r.final_point) == r.report.final_metric);
    }
  }
}

TEST_CASE("accepted iterates keep their invariants") {
  std::mt19937_64 rng(37);
  const StandardLp lp = testsupport::random_lp(rng, 8, 20, 0.4);
  for (Algorithm alg : {Algorithm::Arc1, Algorithm::Arc2}) {
    const SolverConfig cfg = config(alg);
    double nu_product = 1.0;
    Vec rb0;
    SolveHooks hooks;
    hooks.on_step = [&](const AlgorithmState& before, const AlgorithmState& after) {
      if (rb0.size() == 0) rb0 = before.iterate.rb();
      const double a = after.history.back().alpha;
      nu_product *= 1.0 - std::sin(a);
      CHECK(after.iterate.nu() == doctest::Approx(nu_product).epsilon(1e-12));
      CHECK(after.iterate.nu() < before.iterate.nu());
      CHECK(after.iterate.mu() < before.iterate.mu());
      if (rb0.norm() > 0)
        CHECK(std::abs(after.iterate.rb().norm() / rb0.norm() - after.iterate.nu()) <=
              1e-7 + 1e-9 * (1 + rb0.norm()) / rb0.norm());
      if (alg == Algorithm::Arc1)
        CHECK(after.iterate.min_complementarity() >= after.theta * after.iterate.mu());
    };
    const SolveResult r = solve(lp, cfg, nullptr, hooks);
    CHECK(r.report.status == SolveStatus::Optimal);
  }
}

TEST_CASE("runs are deterministic") {
  std::mt19937_64 rng(43);
  const StandardLp lp = testsupport::random_lp(rng, 10, 25, 0.3);
  const SolveResult a = solve(lp, config(Algorithm::Arc2));
  const SolveResult b = solve(lp, config(Algorithm::Arc2));
  CHECK(a.report.iterations == b.report.iterations);
  CHECK(a.report.status == b.report.status);
  CHECK(a.final_point.x() == b.final_point.x());
  CHECK(a.start.hash() == b.start.hash());
}

TEST_CASE("near optimal start finishes quickly") {
  // min x1 + 2 x2 s.t. x1 + x2 = 1; optimum x = (1, 0), lambda = 1, s = (0, 1).
  StandardLp lp;
  lp.A = SparseMatrix(1, 2);
  lp.A.insert(0, 0) = 1.0;
  lp.A.insert(0, 1) = 1.0;
  lp.b = Vec::Ones(1);
  lp.c = Vec(2);
  lp.c << 1, 2;
  StartingPoint start;
  start.x = Vec(2);
  start.x << 1.0 - 1e-5, 1e-5;
  start.lambda = Vec::Constant(1, 1.0 - 1e-5);
  start.s = Vec(2);
  start.s << 1e-5, 1.0 + 1e-5;
  for (Algorithm alg : {Algorithm::Arc1, Algorithm::Arc2, Algorithm::MehrotraPC}) {
    const SolveResult r = solve(lp, config(alg), &start);
    CHECK(r.report.status == SolveStatus::Optimal);
    CHECK(r.report.iterations <= 5);
    CHECK(r.report.objective_primal == doctest::Approx(1.0).epsilon(1e-7));
  }
}

TEST_CASE("bad inputs") {
  StandardLp lp;
  lp.A = SparseMatrix(1, 2);
  lp.b = Vec::Ones(2);
  lp.c = Vec::Ones(2);
  CHECK_THROWS_AS(solve(lp, SolverConfig{}), StructuralError);
  lp.b = Vec::Ones(1);
  SolverConfig bad;
  bad.rho = 2.0;
  CHECK_THROWS_AS(solve(lp, bad), std::invalid_argument);
}

TEST_CASE("iteration limit") {
  std::mt19937_64 rng(47);
  const StandardLp lp = testsupport::random_lp(rng, 6, 12, 0.5);
  SolverConfig cfg = config(Algorithm::Arc2);
  cfg.max_iterations = 2;
  const SolveResult r = solve(lp, cfg);
  CHECK(r.report.status == SolveStatus::IterationLimit);
  CHECK(r.report.iterations == 2);
}
