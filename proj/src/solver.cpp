#include "arclp/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>

#include <fmt/core.h>

namespace arclp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCorrectorFallback = 0.1;

std::uint64_t hash_vec(std::uint64_t h, const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::uint64_t bits;
    const double d = v[i];
    std::memcpy(&bits, &d, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  return h;
}

// x/s, with the optional degenerate handling that drops columns whose
// ratio is negligible next to the largest one.
Vec scaling(const Iterate& it, const SolverConfig& cfg) {
  Vec d2 = it.x().cwiseQuotient(it.s());
  if (cfg.degenerate_handling) {
    const double cut = 1e-14 * d2.maxCoeff();
    for (Eigen::Index i = 0; i < d2.size(); ++i)
      if (d2[i] < cut) d2[i] = 0.0;
  }
  return d2;
}

// Largest t with v + t dv >= 0, or +inf.
double max_step(const Vec& v, const Vec& dv) {
  double t = kInf;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) t = std::min(t, -v[i] / dv[i]);
  return t;
}

StepOutcome arc_step(const SolverContext& ctx, const AlgorithmState& state,
                     bool proximity) {
  const StandardLp& lp = ctx.lp;
  const SolverConfig& cfg = ctx.cfg;
  const Iterate& it = state.iterate;
  const double n = static_cast<double>(it.x().size());

  const NormalEqFactor f = ctx.kkt.factor(scaling(it, cfg));
  const ArcDerivatives d = arc_derivatives(lp, it, f);
  const StepThresholds t = thresholds(it, cfg.rho);
  const SigmaSearch search = select_sigma_alpha(
      it, d, t, cfg.sigma_min, cfg.effective_sigma_max(), cfg.bisection_tol);

  StepOutcome out;
  double alpha = rescale_alpha(search.step.alpha);
  int backtracks = 0;
  ArcPoint p;
  while (true) {
    if (!(alpha >= cfg.step_tol)) {
      out.state = state;
      out.failure = SolveStatus::StepTooSmall;
      return out;
    }
    p = ellipse_point(it, d, search.sigma, alpha);
    bool ok = p.x.minCoeff() > 0.0 && p.s.minCoeff() > 0.0;
    if (ok) {
      const double mu_new = p.x.dot(p.s) / n;
      ok = mu_of_sigma_alpha(it, d, search.sigma, alpha) < it.mu() && mu_new < it.mu();
      if (ok && proximity)
        ok = p.x.cwiseProduct(p.s).minCoeff() >= state.theta * mu_new;
    }
    if (ok) break;
    if (backtracks == cfg.max_backtracks) {
      out.state = state;
      out.failure = SolveStatus::StepTooSmall;
      return out;
    }
    alpha *= 0.5;
    ++backtracks;
  }

  const double nu = it.nu() * (1.0 - std::sin(alpha));
  out.state.iterate = Iterate(lp, std::move(p.x), std::move(p.lambda), std::move(p.s), nu);
  out.state.iteration = state.iteration + 1;
  out.state.theta = state.theta;
  out.state.history = state.history;
  IterationRecord rec;
  const Iterate& nxt = out.state.iterate;
  rec.mu = nxt.mu();
  rec.rb_norm = nxt.rb_norm();
  rec.rc_norm = nxt.rc_norm();
  rec.alpha = alpha;
  rec.alpha_x = alpha;
  rec.alpha_s = alpha;
  rec.sigma = search.sigma;
  rec.backtracks = backtracks;
  rec.regularized_pivots = static_cast<int>(f.regularized_pivots().size());
  out.state.history.push_back(rec);
  return out;
}

}  // namespace

NormalEqOptions normal_eq_options(const SolverConfig& cfg) {
  NormalEqOptions o;
  o.dense_threshold = cfg.dense_threshold;
  o.pivot_floor = cfg.regularization_pivot_floor;
  o.iterative_refinement = cfg.iterative_refinement;
  return o;
}

std::uint64_t StartingPoint::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  h = hash_vec(h, x);
  h = hash_vec(h, lambda);
  return hash_vec(h, s);
}

double starting_point_metric(const StandardLp& lp, const Vec& x, const Vec& lambda,
                             const Vec& s) {
  const Residuals r = compute_residuals(lp, x, lambda, s);
  return std::max({r.rb.norm(), r.rc.norm(), duality_measure(x, s)});
}

StartingPoint least_squares_start(const StandardLp& lp, NormalEquations& kkt) {
  const NormalEqFactor f = kkt.factor(Vec::Ones(lp.cols()));
  StartingPoint sp;
  sp.method = "least-squares";
  Vec x = lp.A.transpose() * f.solve(lp.b);
  sp.lambda = f.solve(lp.A * lp.c);
  Vec s = lp.c - lp.A.transpose() * sp.lambda;
  x.array() += std::max(-1.5 * x.minCoeff(), 0.0);
  s.array() += std::max(-1.5 * s.minCoeff(), 0.0);
  const double xs = x.dot(s);
  if (xs > 0.0 && std::isfinite(xs)) {
    const double dx = 0.5 * xs / s.sum();
    const double ds = 0.5 * xs / x.sum();
    x.array() += dx;
    s.array() += ds;
  } else {
    x.array() += 1.0;
    s.array() += 1.0;
  }
  sp.x = std::move(x);
  sp.s = std::move(s);
  sp.metric = starting_point_metric(lp, sp.x, sp.lambda, sp.s);
  return sp;
}

StartingPoint scaled_ones_start(const StandardLp& lp) {
  double a_inf = 0.0;
  {
    Vec row_sums = Vec::Zero(lp.rows());
    for (int j = 0; j < lp.A.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(lp.A, j); it; ++it)
        row_sums[it.row()] += std::abs(it.value());
    if (row_sums.size() > 0) a_inf = row_sums.maxCoeff();
  }
  const double b_inf = lp.b.size() ? lp.b.cwiseAbs().maxCoeff() : 0.0;
  const double c_inf = lp.c.size() ? lp.c.cwiseAbs().maxCoeff() : 0.0;
  const double xi = std::sqrt(std::max({1.0, b_inf / std::max(1.0, a_inf), c_inf}));
  StartingPoint sp;
  sp.method = "scaled-ones";
  sp.x = Vec::Constant(lp.cols(), xi);
  sp.s = Vec::Constant(lp.cols(), xi);
  sp.lambda = Vec::Zero(lp.rows());
  sp.metric = starting_point_metric(lp, sp.x, sp.lambda, sp.s);
  return sp;
}

StartingPoint initial_point(const StandardLp& lp, NormalEquations& kkt) {
  lp.check_dimensions();
  StartingPoint ls = least_squares_start(lp, kkt);
  StartingPoint ones = scaled_ones_start(lp);
  const bool ls_ok = std::isfinite(ls.metric) && ls.x.allFinite() && ls.s.allFinite() &&
                     ls.lambda.allFinite() && ls.x.minCoeff() > 0.0 &&
                     ls.s.minCoeff() > 0.0;
  const bool ones_ok = std::isfinite(ones.metric);
  if (!ls_ok && !ones_ok)
    throw NumericalError("no finite starting point candidate");
  if (!ls_ok) return ones;
  if (!ones_ok) return ls;
  return ls.metric <= ones.metric ? ls : ones;
}

StartingPoint initial_point(const StandardLp& lp) {
  NormalEquations kkt(lp.A);
  return initial_point(lp, kkt);
}

double rescale_alpha(double alpha) {
  return std::min(0.9999 * alpha, 0.99 * std::numbers::pi / 2.0);
}

double initial_theta(const Vec& x0, const Vec& s0) {
  const double mu0 = duality_measure(x0, s0);
  return std::min(1e-6, 0.1 * x0.cwiseProduct(s0).minCoeff() / mu0);
}

std::optional<SolveStatus> check_termination(const TerminationInput& in,
                                             const SolverConfig& cfg) {
  if (in.metric < cfg.epsilon) return SolveStatus::Optimal;
  if (in.alpha_x >= 0.0 && in.alpha_s >= 0.0 && in.alpha_x < cfg.step_tol &&
      in.alpha_s < cfg.step_tol)
    return SolveStatus::StepTooSmall;
  const double rb_noise = cfg.epsilon * std::max(1.0, in.b_norm);
  const double rc_noise = cfg.epsilon * std::max(1.0, in.c_norm);
  if ((in.prev_rb_norm >= 0.0 && in.rb_norm > rb_noise &&
       in.rb_norm > cfg.blowup_factor * in.prev_rb_norm) ||
      (in.prev_rc_norm >= 0.0 && in.rc_norm > rc_noise &&
       in.rc_norm > cfg.blowup_factor * in.prev_rc_norm))
    return SolveStatus::ResidualBlowup;
  if (in.mu < cfg.mu_floor) return SolveStatus::MuConverged;
  if (in.iteration >= cfg.max_iterations) return SolveStatus::IterationLimit;
  return std::nullopt;
}

StepOutcome step_algorithm1(const SolverContext& ctx, const AlgorithmState& state) {
  return arc_step(ctx, state, true);
}

StepOutcome step_algorithm2(const SolverContext& ctx, const AlgorithmState& state) {
  return arc_step(ctx, state, false);
}

StepOutcome step_mehrotra(const SolverContext& ctx, const AlgorithmState& state) {
  const StandardLp& lp = ctx.lp;
  const SolverConfig& cfg = ctx.cfg;
  const Iterate& it = state.iterate;
  const double n = static_cast<double>(it.x().size());

  // The affine direction is minus the first arc derivative, and the
  // corrector system's solution is sigma * p + q / 2, so one factor serves
  // both.
  const NormalEqFactor f = ctx.kkt.factor(scaling(it, cfg));
  const ArcDerivatives d = arc_derivatives(lp, it, f);
  const Vec dx_aff = -d.xdot;
  const Vec ds_aff = -d.sdot;
  const double ap_aff = std::min(1.0, max_step(it.x(), dx_aff));
  const double ad_aff = std::min(1.0, max_step(it.s(), ds_aff));
  const double mu_aff = (it.x() + ap_aff * dx_aff).dot(it.s() + ad_aff * ds_aff) / n;
  const double sigma = std::pow(mu_aff / it.mu(), 3);

  Vec dx = -d.xdot + sigma * d.px + 0.5 * d.qx;
  Vec dl = -d.ldot + sigma * d.pl + 0.5 * d.ql;
  Vec ds = -d.sdot + sigma * d.ps + 0.5 * d.qs;
  double ap = std::min(1.0, 0.9995 * max_step(it.x(), dx));
  double ad = std::min(1.0, 0.9995 * max_step(it.s(), ds));
  // Far from the central path the second-order term can dwarf the affine
  // step and push mu up by orders of magnitude. When the corrected step
  // collapses, fall back to the centered direction without it.
  if (std::min(ap, ad) < kCorrectorFallback &&
      std::min(ap, ad) < std::min(ap_aff, ad_aff)) {
    const double sig = std::min(sigma, 1.0);
    dx = -d.xdot + sig * d.px;
    dl = -d.ldot + sig * d.pl;
    ds = -d.sdot + sig * d.ps;
    ap = std::min(1.0, 0.9995 * max_step(it.x(), dx));
    ad = std::min(1.0, 0.9995 * max_step(it.s(), ds));
  }

  StepOutcome out;
  if (ap < cfg.step_tol && ad < cfg.step_tol) {
    out.state = state;
    out.failure = SolveStatus::StepTooSmall;
    return out;
  }
  out.state.iterate =
      Iterate(lp, it.x() + ap * dx, it.lambda() + ad * dl, it.s() + ad * ds, it.nu());
  out.state.iteration = state.iteration + 1;
  out.state.theta = state.theta;
  out.state.history = state.history;
  IterationRecord rec;
  const Iterate& nxt = out.state.iterate;
  rec.mu = nxt.mu();
  rec.rb_norm = nxt.rb_norm();
  rec.rc_norm = nxt.rc_norm();
  rec.alpha = std::min(ap, ad);
  rec.alpha_x = ap;
  rec.alpha_s = ad;
  rec.sigma = sigma;
  rec.mu_affine = mu_aff;
  rec.regularized_pivots = static_cast<int>(f.regularized_pivots().size());
  out.state.history.push_back(rec);
  return out;
}

SolveResult solve(const StandardLp& lp, const SolverConfig& cfg,
                  const StartingPoint* start, const SolveHooks& hooks) {
  using Clock = std::chrono::steady_clock;
  cfg.validate();
  lp.check_dimensions();
  if (lp.rows() < 1 || lp.cols() < 1)
    throw StructuralError(
        fmt::format("solver needs m >= 1 and n >= 1, got {}x{}", lp.rows(), lp.cols()));
  const auto t0 = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  NormalEquations kkt(lp.A, normal_eq_options(cfg));
  SolveResult result;
  result.start = start ? *start : initial_point(lp, kkt);
  const int base_factorizations = kkt.factorizations();

  AlgorithmState state;
  state.iterate = Iterate(lp, result.start.x, result.start.lambda, result.start.s, 1.0);
  state.theta = cfg.theta_rule == ThetaRule::Fixed
                    ? cfg.theta_value
                    : initial_theta(result.start.x, result.start.s);

  const SolverContext ctx{lp, kkt, cfg};
  SolveReport& rep = result.report;
  rep.theta = state.theta;
  double prev_rb = -1.0, prev_rc = -1.0;
  const double b_norm = lp.b.norm(), c_norm = lp.c.norm();
  while (true) {
    const Iterate& it = state.iterate;
    TerminationInput in;
    in.metric = composite_stop_metric(lp, it);
    in.mu = it.mu();
    in.rb_norm = it.rb_norm();
    in.rc_norm = it.rc_norm();
    in.prev_rb_norm = prev_rb;
    in.prev_rc_norm = prev_rc;
    in.b_norm = b_norm;
    in.c_norm = c_norm;
    if (!state.history.empty()) {
      in.alpha_x = state.history.back().alpha_x;
      in.alpha_s = state.history.back().alpha_s;
    }
    in.iteration = state.iteration;
    if (auto status = check_termination(in, cfg)) {
      rep.status = *status;
      break;
    }
    if (elapsed() > cfg.time_limit_seconds) {
      rep.status = SolveStatus::IterationLimit;
      break;
    }

    StepOutcome step;
    try {
      switch (cfg.algorithm) {
        case Algorithm::Arc1: step = step_algorithm1(ctx, state); break;
        case Algorithm::Arc2: step = step_algorithm2(ctx, state); break;
        case Algorithm::MehrotraPC: step = step_mehrotra(ctx, state); break;
      }
    } catch (const NumericalError&) {
      rep.status = SolveStatus::NumericalFailure;
      break;
    }
    if (step.failure) {
      rep.status = *step.failure;
      break;
    }
    if (!step.state.iterate.x().allFinite() || !step.state.iterate.s().allFinite() ||
        !step.state.iterate.lambda().allFinite()) {
      rep.status = SolveStatus::NumericalFailure;
      break;
    }
    step.state.history.back().wall_time = elapsed();
    if (hooks.on_step) hooks.on_step(state, step.state);
    prev_rb = it.rb_norm();
    prev_rc = it.rc_norm();
    state = std::move(step.state);
  }

  const Iterate& fin = state.iterate;
  rep.iterations = state.iteration;
  rep.per_iteration = state.history;
  rep.objective_primal = lp.c.dot(fin.x()) + lp.objective_offset;
  rep.objective_dual = lp.b.dot(fin.lambda()) + lp.objective_offset;
  rep.final_metric = composite_stop_metric(lp, fin);
  rep.solve_seconds = elapsed();
  rep.factorizations = kkt.factorizations() - base_factorizations;
  for (const auto& r : state.history) rep.regularized_pivots += r.regularized_pivots;
  result.final_point = fin;
  return result;
}

}  // namespace arclp
