#pragma once

#include <vector>

#include "arclp/normal_equations.hpp"
#include "arclp/problem.hpp"
#include "arclp/types.hpp"

namespace arclp {

/// First derivatives of the central-path arc at the current iterate, and the
/// second derivatives split as xddot(sigma) = px*sigma + qx (same for lambda
/// and s), so sigma can be searched without another linear solve.
struct ArcDerivatives {
  Vec xdot, ldot, sdot;
  Vec px, pl, ps;
  Vec qx, ql, qs;

  Vec xddot(double sigma) const { return px * sigma + qx; }
  Vec lddot(double sigma) const { return pl * sigma + ql; }
  Vec sddot(double sigma) const { return ps * sigma + qs; }
};

/// Solves for (xdot, ldot, sdot) with the factor of A diag(x/s) A'.
void first_derivatives(const StandardLp& lp, const Iterate& it,
                       const NormalEqFactor& kkt, ArcDerivatives& d);

/// Fills p and q from the first derivatives already stored in d.
void second_derivative_split(const StandardLp& lp, const Iterate& it,
                             const NormalEqFactor& kkt, ArcDerivatives& d);

ArcDerivatives arc_derivatives(const StandardLp& lp, const Iterate& it,
                               const NormalEqFactor& kkt);

struct ArcPoint {
  Vec x, lambda, s;
};

/// x - xdot sin(alpha) + xddot(sigma) (1 - cos(alpha)), and likewise for
/// lambda and s.
ArcPoint ellipse_point(const Iterate& it, const ArcDerivatives& d, double sigma,
                       double alpha);

/// Duality measure at ellipse_point(sigma, alpha), from the closed form that
/// is affine in sigma. Uses only inner products of the derivative vectors.
double mu_of_sigma_alpha(const Iterate& it, const ArcDerivatives& d, double sigma,
                         double alpha);

/// The pieces of n*mu(sigma, alpha) = a_u(alpha) sigma + b_u(alpha).
struct MuCoefficients {
  double a_u = 0.0;
  double b_u = 0.0;
};
MuCoefficients mu_coefficients(const Iterate& it, const ArcDerivatives& d,
                               double alpha);

/// Largest alpha in [0, pi/2] with x - xdot sin(a) + xddot (1 - cos(a)) >= phi
/// for every a in [0, alpha]. Closed form, one branch per sign pattern of
/// (xdot, xddot).
double alpha_x_case(double x, double phi, double xdot, double xddot);
double alpha_s_case(double s, double psi, double sdot, double sddot);

struct StepThresholds {
  double phi = 0.0;
  double psi = 0.0;
};

/// phi = min(rho * min x, nu), psi = min(rho * min s, nu).
StepThresholds thresholds(const Iterate& it, double rho);

struct StepLengths {
  double alpha = 0.0;    // min(alpha_x, alpha_s)
  double alpha_x = 0.0;  // min over the x coordinates
  double alpha_s = 0.0;
};

StepLengths max_alpha_for_sigma(const Iterate& it, const ArcDerivatives& d,
                                const StepThresholds& t, double sigma);

struct SigmaSearch {
  double sigma = 0.0;
  StepLengths step;
  int bisections = 0;
  // Width of the sigma interval after each bisection, starting with the
  // initial sigma_max - sigma_min.
  std::vector<double> widths;
};

/// Bisection on sigma in [sigma_min, sigma_max] for the sigma that maximizes
/// the step length. At each trial sigma the smallest alpha over coordinates
/// whose p entry is negative is compared with the smallest over coordinates
/// whose p entry is positive (an empty class counts as +inf); the interval
/// moves up when the first is larger. Returns the better end of the final
/// interval.
SigmaSearch select_sigma_alpha(const Iterate& it, const ArcDerivatives& d,
                               const StepThresholds& t, double sigma_min,
                               double sigma_max, double tol);

}  // namespace arclp
