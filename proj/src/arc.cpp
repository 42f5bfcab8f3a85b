#include "arclp/arc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/core.h>

namespace arclp {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

double checked_asin(double v) {
  if (v > 1.0 || v < -1.0) {
    if (std::abs(v) > 1.0 + 1e-12)
      throw NumericalError(fmt::format("asin argument {} outside [-1, 1]", v));
    v = std::clamp(v, -1.0, 1.0);
  }
  return std::asin(v);
}

double checked_acos(double v) {
  if (v > 1.0 || v < -1.0) {
    if (std::abs(v) > 1.0 + 1e-12)
      throw NumericalError(fmt::format("acos argument {} outside [-1, 1]", v));
    v = std::clamp(v, -1.0, 1.0);
  }
  return std::acos(v);
}

}  // namespace

void first_derivatives(const StandardLp& lp, const Iterate& it,
                       const NormalEqFactor& kkt, ArcDerivatives& d) {
  const Vec& d2 = kkt.d2();
  const Vec rhs = lp.A * d2.cwiseProduct(it.rc()) - lp.b;
  d.ldot = kkt.solve(rhs);
  d.sdot = it.rc() - lp.A.transpose() * d.ldot;
  d.xdot = it.x() - d2.cwiseProduct(d.sdot);
}

void second_derivative_split(const StandardLp& lp, const Iterate& it,
                             const NormalEqFactor& kkt, ArcDerivatives& d) {
  const Vec& d2 = kkt.d2();
  const Vec mu_over_s = it.s().cwiseInverse() * it.mu();
  d.pl = kkt.solve(-(lp.A * mu_over_s));
  d.ps = -(lp.A.transpose() * d.pl);
  d.px = mu_over_s - d2.cwiseProduct(d.ps);

  const Vec cross = d.xdot.cwiseProduct(d.sdot).cwiseQuotient(it.s());
  d.ql = kkt.solve(2.0 * (lp.A * cross));
  d.qs = -(lp.A.transpose() * d.ql);
  d.qx = -d2.cwiseProduct(d.qs) - 2.0 * cross;
}

ArcDerivatives arc_derivatives(const StandardLp& lp, const Iterate& it,
                               const NormalEqFactor& kkt) {
  ArcDerivatives d;
  first_derivatives(lp, it, kkt, d);
  second_derivative_split(lp, it, kkt, d);
  return d;
}

ArcPoint ellipse_point(const Iterate& it, const ArcDerivatives& d, double sigma,
                       double alpha) {
  const double sa = std::sin(alpha);
  const double ca = 1.0 - std::cos(alpha);
  ArcPoint p;
  p.x = it.x() - d.xdot * sa + d.xddot(sigma) * ca;
  p.lambda = it.lambda() - d.ldot * sa + d.lddot(sigma) * ca;
  p.s = it.s() - d.sdot * sa + d.sddot(sigma) * ca;
  return p;
}

MuCoefficients mu_coefficients(const Iterate& it, const ArcDerivatives& d,
                               double alpha) {
  const double n = static_cast<double>(it.x().size());
  const double nmu = n * it.mu();
  const double sa = std::sin(alpha);
  const double ca = 1.0 - std::cos(alpha);
  const double pcross = d.xdot.dot(d.ps) + d.sdot.dot(d.px);
  const double qcross = d.sdot.dot(d.qx) + d.xdot.dot(d.qs);
  const double xs_dot = d.xdot.dot(d.sdot);
  MuCoefficients m;
  m.a_u = nmu * ca - pcross * sa * ca;
  m.b_u = nmu * (1.0 - sa) - (xs_dot * ca * ca + qcross * sa * ca);
  return m;
}

double mu_of_sigma_alpha(const Iterate& it, const ArcDerivatives& d, double sigma,
                         double alpha) {
  const MuCoefficients m = mu_coefficients(it, d, alpha);
  return (m.a_u * sigma + m.b_u) / static_cast<double>(it.x().size());
}

double alpha_x_case(double x, double phi, double xdot, double xddot) {
  const double slack = x - phi;
  const double top = slack + xddot;  // x - phi + xddot
  if (xdot == 0.0 && xddot == 0.0) return kHalfPi;
  if (xdot == 0.0) {
    if (top >= 0.0) return kHalfPi;
    return checked_acos(top / xddot);
  }
  if (xddot == 0.0) {
    if (xdot <= slack) return kHalfPi;
    return std::max(0.0, checked_asin(slack / xdot));
  }
  const double r = std::hypot(xdot, xddot);
  if (xdot > 0.0 && xddot > 0.0) {
    if (top >= r) return kHalfPi;
    return std::max(0.0, checked_asin(top / r) - checked_asin(xddot / r));
  }
  if (xdot > 0.0 && xddot < 0.0) {
    if (top >= r) return kHalfPi;
    const double a = checked_asin(top / r) + checked_asin(-xddot / r);
    return std::clamp(a, 0.0, kHalfPi);
  }
  if (xdot < 0.0 && xddot < 0.0) {
    if (top >= 0.0) return kHalfPi;
    const double a =
        std::numbers::pi - checked_asin(-top / r) - checked_asin(-xddot / r);
    return std::clamp(a, 0.0, kHalfPi);
  }
  // xdot < 0 < xddot: the coordinate only grows along the arc.
  return kHalfPi;
}

double alpha_s_case(double s, double psi, double sdot, double sddot) {
  return alpha_x_case(s, psi, sdot, sddot);
}

StepThresholds thresholds(const Iterate& it, double rho) {
  StepThresholds t;
  t.phi = std::min(rho * it.x().minCoeff(), it.nu());
  t.psi = std::min(rho * it.s().minCoeff(), it.nu());
  return t;
}

StepLengths max_alpha_for_sigma(const Iterate& it, const ArcDerivatives& d,
                                const StepThresholds& t, double sigma) {
  StepLengths out;
  out.alpha_x = kHalfPi;
  out.alpha_s = kHalfPi;
  const Vec& x = it.x();
  const Vec& s = it.s();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out.alpha_x = std::min(
        out.alpha_x, alpha_x_case(x[i], t.phi, d.xdot[i], d.px[i] * sigma + d.qx[i]));
    out.alpha_s = std::min(
        out.alpha_s, alpha_s_case(s[i], t.psi, d.sdot[i], d.ps[i] * sigma + d.qs[i]));
  }
  out.alpha = std::min(out.alpha_x, out.alpha_s);
  return out;
}

namespace {

// Smallest alpha among coordinates with negative p and among those with
// positive p.
std::pair<double, double> split_minima(const Iterate& it, const ArcDerivatives& d,
                                       const StepThresholds& t, double sigma) {
  double neg = kInf, pos = kInf;
  auto note = [&](double p, double a) {
    if (p < 0.0) neg = std::min(neg, a);
    else if (p > 0.0) pos = std::min(pos, a);
  };
  const Vec& x = it.x();
  const Vec& s = it.s();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (d.px[i] != 0.0)
      note(d.px[i], alpha_x_case(x[i], t.phi, d.xdot[i], d.px[i] * sigma + d.qx[i]));
    if (d.ps[i] != 0.0)
      note(d.ps[i], alpha_s_case(s[i], t.psi, d.sdot[i], d.ps[i] * sigma + d.qs[i]));
  }
  return {neg, pos};
}

}  // namespace

SigmaSearch select_sigma_alpha(const Iterate& it, const ArcDerivatives& d,
                               const StepThresholds& t, double sigma_min,
                               double sigma_max, double tol) {
  SigmaSearch out;
  double lower = sigma_min;
  double width = sigma_max - sigma_min;
  out.widths.push_back(width);
  while (width > tol) {
    const double sigma = lower + 0.5 * width;
    const auto [neg, pos] = split_minima(it, d, t, sigma);
    if (neg > pos) lower = sigma;
    width *= 0.5;
    out.widths.push_back(width);
    ++out.bisections;
  }
  const StepLengths at_lower = max_alpha_for_sigma(it, d, t, lower);
  const StepLengths at_upper = max_alpha_for_sigma(it, d, t, lower + width);
  if (at_upper.alpha > at_lower.alpha) {
    out.sigma = lower + width;
    out.step = at_upper;
  } else {
    out.sigma = lower;
    out.step = at_lower;
  }
  return out;
}

}  // namespace arclp
