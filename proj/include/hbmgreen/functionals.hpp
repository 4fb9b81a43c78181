#pragma once

// Exponential functionals of Brownian motion with drift:
//   A_t = int_0^t exp(2 B_s^{(-mu)}) ds,
// the Hartman-Watson density theta(r, t), the joint density of (A_t, B_t),
// the lambda-potential Q and the killed Green function G of the pair
// (A, exp(B)), and the density q of A at the first hitting time of a level.

#include <memory>
#include <vector>

#include "hbmgreen/types.hpp"

namespace hbmgreen::functionals {

struct DriftParams {
  double mu = 0.0;
  double lambda = 0.0;

  /// nu = sqrt(2 lambda + mu^2). Validates mu >= 0 and lambda >= 0.
  static DriftParams make(double mu, double lambda);
  double nu() const;
  void validate() const;
};

struct FunctionalState {
  double x = 0.0;  // start of exp(B)
  double a = 0.0;  // barrier level
  double u = 0.0;  // value of the additive functional
};

/// 2 I_alpha(lam e^x) K_alpha(lam e^y) for x <= y; arguments are swapped when x > y.
EvalResult schrodinger_green(double alpha, double lam, double x, double y);

/// theta(r, t): the function whose Laplace transform in mu^2/2 is I_mu(r).
EvalResult hartman_watson_theta(double r, double t);
/// e^{-r} theta(r, t); finite for large r.
EvalResult hartman_watson_theta_scaled(double r, double t);

/// Joint density of (A_t^{(-mu)}, B_t^{(-mu)}) at (u, y) for B_0 = x.
EvalResult joint_density(const DriftParams& dp, double t, double x, double u, double y);

/// lambda-potential of (A^{(-mu)}, exp(B^{(-mu)})):
///   (1/y)(x/y)^mu exp(-(x^2+y^2)/(2u)) I_nu(xy/u) / u.
EvalResult q_potential(const DriftParams& dp, double x, double y, double u);

enum class Evaluation {
  Tabulated,  // cached table per (nu, x/a), reused through the scaling law
  Direct,     // fresh inversion at every call
};

/// Density at s of A^{(-nu)} at the first time exp(B^{(-nu)}) started at x hits a,
/// nu = dp.nu(). Laplace transform in r^2/2: (x/a)^nu K_nu(rx)/K_nu(ra).
EvalResult q_hitting_density(const DriftParams& dp, double x, double a, double s,
                             Evaluation mode = Evaluation::Tabulated);

/// Killed lambda-Green function of (A^{(-mu)}, exp(B^{(-mu)})) at level a:
///   (x/y)^{mu-nu} [Q_nu(x, y; u) - (Q_nu * q_nu^x)(a, y; u)].
/// Any x, y > a; the case x > y goes through the reference-measure symmetry.
EvalResult green_ab(const DriftParams& dp, const FunctionalState& st, double y,
                    Evaluation mode = Evaluation::Tabulated);

/// Closed-form Laplace transforms in r^2/2 used by the identity checks.
double q_potential_transform(const DriftParams& dp, double x, double y, double r);
double green_ab_transform(const DriftParams& dp, double x, double a, double y, double r);
double q_hitting_transform(double nu, double x, double a, double r);

// ---------------------------------------------------------------------------
// Lower-level pieces shared with the Bessel-process and hyperbolic modules.

/// Q_nu^0(x, y; u) for real nu >= 0, computed in scaled form.
double q_nu(double nu, double x, double y, double u);
/// log Q_nu^0(x, y; u); finite where Q_nu underflows.
double log_q_nu(double nu, double x, double y, double u);

/// Hitting density q_nu^{x,a}(s), x > a > 0, evaluated without tables or scaling:
/// contour inversion of (x/a)^nu K_nu(x sqrt(2p))/K_nu(a sqrt(2p)) for
/// s <= (x-a)^2, the branch-cut (Weber) integral above.
EvalResult hitting_density_direct(double nu, double x, double a, double s);

/// Tabulated q_nu^{xi,1}(s): Chebyshev interpolation of log(q / L) on panels in
/// log s, where L is the Brownian first-passage density scaled by xi^{nu-1/2}.
/// Exact asymptotics are used beyond the table in both directions.
class HittingTable {
 public:
  HittingTable(double nu, double xi);

  double operator()(double s) const;
  double log_value(double s) const;
  double nu() const noexcept { return nu_; }
  double xi() const noexcept { return xi_; }
  /// Largest relative discrepancy found when validating panels against direct
  /// evaluation.
  double validation_error() const noexcept { return validation_err_; }
  double s_min() const noexcept { return s_lo_; }
  double s_max() const noexcept { return s_hi_; }

 private:
  double log_lead(double s) const;  // log L(s)
  double g_at(double v) const;      // interpolated log(q/L) at v = log s

  double nu_, xi_;
  double s_lo_, s_hi_, v_lo_, v_hi_;
  std::vector<double> edges_;                // panel edges in v
  std::vector<std::vector<double>> values_;  // g at Chebyshev nodes per panel
  // Left extrapolation g = alpha s + beta s^2, right: tail model.
  double alpha_ = 0.0, beta_ = 0.0;
  double tail_c_ = 0.0, tail_r_ = 1.0, tail_kappa_ = 1.0;
  double validation_err_ = 0.0;
};

/// Shared, lazily built table for (nu, xi). Safe to call concurrently; a table
/// is published only after it is fully built.
std::shared_ptr<const HittingTable> hitting_table(double nu, double xi);

/// True when killing changes Q_nu(x, y; u) by less than about 1e-12 relative,
/// in which case the killed kernels return the free one.
bool killing_negligible(double nu, double x, double y, double a, double u);

/// Killed kernel relative to Q: G_nu(x, y; u) = Q_nu(x,y;u) - (Q_nu * q_nu^x)(a,y;u)
/// with x, y > a, computed by quadrature of the first-passage convolution.
/// The returned abs_err includes quadrature and table error. If given,
/// *log_value receives log G_nu, finite where the value itself underflows.
EvalResult killed_q_nu(double nu, double x, double y, double a, double u,
                       Evaluation mode = Evaluation::Tabulated, double* log_value = nullptr);

/// log(G_nu / Q_nu) as a smooth function of log u for fixed (nu, x, y, a),
/// tabulated for fast repeated integration over u.
class KilledProfile {
 public:
  KilledProfile(double nu, double x, double y, double a);

  /// log(G_nu(x,y;u) / Q_nu(x,y;u)); 0 where killing is negligible, the exact
  /// large-u limit beyond the table.
  double log_ratio(double u) const;
  double max_abs_err() const noexcept { return err_; }

 private:
  double nu_, x_, y_, a_;
  double v_lo_, v_hi_, limit_;
  std::vector<double> edges_;
  std::vector<std::vector<double>> values_;
  double err_ = 0.0;
};

/// Shared, lazily built profile for (nu, {x, y}, a); the ratio is symmetric in
/// (x, y). Same publication rules as hitting_table.
std::shared_ptr<const KilledProfile> killed_profile(double nu, double x, double y, double a);

}  // namespace hbmgreen::functionals
