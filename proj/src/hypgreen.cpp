#include "hbmgreen/hypgreen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "hbmgreen/besselproc.hpp"
#include "hbmgreen/functionals.hpp"
#include "hbmgreen/quadrature.hpp"

namespace hbmgreen::hypgreen {

namespace {

constexpr double kPi = std::numbers::pi;

void check_point(const ModelParams& p, const HyperbolicPoint& x) {
  if (x.dimension() != p.n)
    throw Error(ErrorCode::DimensionMismatch, "point has dimension " + std::to_string(x.dimension()) +
                                                  ", model has n = " + std::to_string(p.n));
  if (!(x.height > 0.0) || !std::isfinite(x.height))
    throw Error(ErrorCode::NonPositiveArgument, "height must be positive");
  for (double c : x.tilde)
    if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "non-finite coordinate");
}

double horizontal_sq(const HyperbolicPoint& x, const HyperbolicPoint& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.tilde.size(); ++i) s += (x.tilde[i] - y.tilde[i]) * (x.tilde[i] - y.tilde[i]);
  return s;
}

void check_inside(const ModelParams& p, const HyperbolicPoint& x) {
  if (!(p.a > 0.0)) throw Error(ErrorCode::DomainError, "Green function needs a barrier a > 0");
  if (!(x.height > p.a)) throw Error(ErrorCode::BelowBarrier, "point not above the barrier");
}

// int_0^inf exp(lf(w)) dw on the axis v = log w, walking out from v0.
template <class LogF>
EvalResult log_axis_integral(LogF&& lf, double v0) {
  double shift = v0 + lf(std::exp(v0));
  if (!std::isfinite(shift)) shift = 0.0;
  auto f = [&](double v) {
    double l = v + lf(std::exp(v)) - shift;
    return l < -745.0 ? 0.0 : std::exp(l);
  };
  quad::Result r = quad::line(f, v0, 1.0, 1e-10, 1e-16);
  if (!r.converged && r.abs_err > 1e-6 * std::abs(r.value))
    throw Error(ErrorCode::QuadratureNonConvergent, "outer integral did not converge");
  double s = std::exp(shift);
  return {r.value * s, r.abs_err * s, Method::Quadrature};
}

double log_gauss(int n, double rho2, double w) {
  return -0.5 * (n - 1) * std::log(2.0 * kPi * w) - rho2 / (2.0 * w);
}

// log(Phi(b) - Phi(a)), a < b, accurate in both tails.
double log_normal_mass(double a, double b) {
  const double r2 = std::numbers::sqrt2;
  double m;
  if (a > 0.0)
    m = 0.5 * (std::erfc(a / r2) - std::erfc(b / r2));
  else if (b < 0.0)
    m = 0.5 * (std::erfc(-b / r2) - std::erfc(-a / r2));
  else
    m = 1.0 - 0.5 * std::erfc(-a / r2) - 0.5 * std::erfc(b / r2);
  return m > 0.0 ? std::log(m) : -std::numeric_limits<double>::infinity();
}

// Via-functional integrand pieces for heights (x, y): log Q_nu + log(G/Q).
struct KilledLog {
  double nu, x, y, a;
  std::shared_ptr<const functionals::KilledProfile> prof;
  KilledLog(double nu_, double x_, double y_, double a_)
      : nu(nu_), x(x_), y(y_), a(a_), prof(functionals::killed_profile(nu_, x_, y_, a_)) {}
  double operator()(double w) const { return functionals::log_q_nu(nu, x, y, w) + prof->log_ratio(w); }
};

}  // namespace

ModelParams ModelParams::make(int n, double lambda, double a) {
  ModelParams p{n, lambda, a};
  p.validate();
  return p;
}

double ModelParams::nu() const { return std::sqrt(2.0 * lambda + mu() * mu()); }

void ModelParams::validate() const {
  if (n < 2) throw Error(ErrorCode::DimensionTooLow, "n must be >= 2");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error(ErrorCode::InvalidArgument, "lambda must be >= 0");
  if (!(a >= 0.0) || !std::isfinite(a)) throw Error(ErrorCode::InvalidArgument, "a must be >= 0");
}

const char* to_string(Route r) { return r == Route::ViaFunctional ? "via-functional" : "via-bessel"; }

double euclidean_sq(const HyperbolicPoint& x, const HyperbolicPoint& y) {
  if (x.tilde.size() != y.tilde.size()) throw Error(ErrorCode::DimensionMismatch, "points differ in dimension");
  return horizontal_sq(x, y) + (x.height - y.height) * (x.height - y.height);
}

double hyperbolic_distance(const HyperbolicPoint& x, const HyperbolicPoint& y) {
  // cosh d - 1 = 2 sinh^2(d/2), written without cancellation.
  double e2 = euclidean_sq(x, y);
  return 2.0 * std::asinh(std::sqrt(e2 / (4.0 * x.height * y.height)));
}

double boundary_distance(const ModelParams& p, const HyperbolicPoint& x) {
  if (!(p.a > 0.0)) throw Error(ErrorCode::DomainError, "boundary distance needs a > 0");
  if (x.height < p.a) throw Error(ErrorCode::BelowBarrier, "point below the barrier");
  return std::log(x.height / p.a);
}

HyperbolicPoint dilate(const HyperbolicPoint& x, double c) {
  if (!(c > 0.0)) throw Error(ErrorCode::NonPositiveArgument, "dilation factor must be positive");
  HyperbolicPoint y = x;
  for (double& v : y.tilde) v *= c;
  y.height *= c;
  return y;
}

ModelParams with_barrier(const ModelParams& p, double a) {
  ModelParams q = p;
  q.a = a;
  q.validate();
  return q;
}

EvalResult potential_kernel(const ModelParams& p, const HyperbolicPoint& x, const HyperbolicPoint& y) {
  p.validate();
  check_point(p, x);
  check_point(p, y);
  const double e2 = euclidean_sq(x, y);
  if (e2 == 0.0) throw Error(ErrorCode::DiagonalSingularity, "potential kernel is singular at x = y");
  const double mu = p.mu(), nu = p.nu(), rho2 = horizontal_sq(x, y);
  const double xn = x.height, yn = y.height;
  auto lf = [&](double w) { return log_gauss(p.n, rho2, w) + functionals::log_q_nu(nu, xn, yn, w); };
  EvalResult r = log_axis_integral(lf, std::log(e2 / p.n));
  double f = std::pow(yn, 2.0 * mu + 1.0) * std::pow(xn / yn, mu - nu);
  return {r.value * f, r.abs_err * f + 1e-13 * r.value * f, Method::Quadrature};
}

EvalResult potential_comparator(const ModelParams& p, const HyperbolicPoint& x, const HyperbolicPoint& y) {
  p.validate();
  check_point(p, x);
  check_point(p, y);
  const double e2 = euclidean_sq(x, y);
  if (e2 == 0.0) throw Error(ErrorCode::DiagonalSingularity, "comparator is singular at x = y");
  const double z = 2.0 * x.height * y.height / e2;
  double v = std::pow(std::min(1.0, z), p.nu() + 0.5);
  if (p.n >= 3) v *= std::pow(z, p.mu() - 0.5);
  return {v, 0.0, Method::ClosedForm};
}

EvalResult green_function(const ModelParams& p, const HyperbolicPoint& x, const HyperbolicPoint& y,
                          Route route) {
  p.validate();
  check_point(p, x);
  check_point(p, y);
  check_inside(p, x);
  check_inside(p, y);
  const double e2 = euclidean_sq(x, y);
  if (e2 == 0.0) throw Error(ErrorCode::DiagonalSingularity, "Green function is singular at x = y");
  const double mu = p.mu(), nu = p.nu(), rho2 = horizontal_sq(x, y);
  const double xn = x.height, yn = y.height, v0 = std::log(e2 / p.n);

  if (route == Route::ViaFunctional) {
    KilledLog kl(nu, xn, yn, p.a);
    auto lf = [&](double w) { return log_gauss(p.n, rho2, w) + kl(w); };
    EvalResult r = log_axis_integral(lf, v0);
    double f = std::pow(yn, 2.0 * mu + 1.0) * std::pow(xn / yn, mu - nu);
    return {r.value * f, (r.abs_err + (kl.prof->max_abs_err() + 1e-13) * r.value) * f, Method::Quadrature};
  }

  // (x_n y_n)^{mu-nu} int (2 pi u)^{-(n-1)/2} e^{-rho^2/2u} p_a(u, x_n, y_n) du.
  const auto idx = besselproc::BesselIndex::make(nu);
  double worst_rel = 0.0;
  auto lf = [&](double u) {
    besselproc::KernelQuery q{u, xn, yn, p.a, besselproc::Measure::Speed};
    besselproc::KernelValue k = besselproc::killed_density(idx, q, besselproc::KilledMethod::Resolvent);
    if (!(k.value > 0.0)) return -std::numeric_limits<double>::infinity();
    double lg = log_gauss(p.n, rho2, u);
    // Track relative error only where the integrand matters.
    if (lg + std::log(k.value) + std::log(u) > -700.0) worst_rel = std::max(worst_rel, k.abs_err / k.value);
    return lg + std::log(k.value);
  };
  EvalResult r = log_axis_integral(lf, v0);
  double f = std::pow(xn * yn, mu - nu);
  return {r.value * f, (r.abs_err + (worst_rel + 1e-13) * r.value) * f, Method::Quadrature};
}

EvalResult green_comparator(const ModelParams& p, const HyperbolicPoint& x, const HyperbolicPoint& y) {
  p.validate();
  if (p.n <= 2) throw Error(ErrorCode::DimensionTooLow, "Green comparator is stated for n > 2");
  check_point(p, x);
  check_point(p, y);
  if (!(x.height > p.a) || !(y.height > p.a)) throw Error(ErrorCode::BelowBarrier, "point not above the barrier");
  const double e2 = euclidean_sq(x, y);
  if (e2 == 0.0) throw Error(ErrorCode::DiagonalSingularity, "comparator is singular at x = y");
  const double z = 2.0 * x.height * y.height / e2;
  const double b = 2.0 * (x.height - p.a) * (y.height - p.a) / e2;
  double v = std::pow(z, p.mu() - 0.5) * std::min(1.0, b) * std::pow(std::min(1.0, z), p.nu() - 0.5);
  return {v, 0.0, Method::ClosedForm};
}

EvalResult green_comparator_distance(const ModelParams& p, const HyperbolicPoint& x,
                                     const HyperbolicPoint& y) {
  p.validate();
  if (p.n <= 2) throw Error(ErrorCode::DimensionTooLow, "distance form is stated for n > 2");
  if (!(p.lambda > 0.0)) throw Error(ErrorCode::DomainError, "distance form is stated for lambda > 0");
  check_point(p, x);
  check_point(p, y);
  if (!(x.height > p.a) || !(y.height > p.a)) throw Error(ErrorCode::BelowBarrier, "point not above the barrier");
  const double d = hyperbolic_distance(x, y);
  if (d == 0.0) throw Error(ErrorCode::DiagonalSingularity, "comparator is singular at x = y");
  const double dx = std::min(1.0, boundary_distance(p, x)), dy = std::min(1.0, boundary_distance(p, y));
  double v = std::pow(std::sinh(0.5 * d), 1.0 - 2.0 * p.mu()) * std::pow(std::cosh(d), -p.nu() - 0.5) *
             std::min(1.0, dx * dy / std::min(1.0, d * d));
  return {v, 0.0, Method::ClosedForm};
}

double cell_volume(const Cell& c) {
  double area = 1.0;
  for (std::size_t i = 0; i < c.lo.size(); ++i) area *= c.hi[i] - c.lo[i];
  const int n = static_cast<int>(c.lo.size()) + 1;
  // int y^{-n} dy over [h_lo, h_hi].
  return area * (std::pow(c.h_lo, 1.0 - n) - std::pow(c.h_hi, 1.0 - n)) / (n - 1);
}

EvalResult green_cell_integral(const ModelParams& p, const HyperbolicPoint& x, const Cell& cell) {
  p.validate();
  check_point(p, x);
  check_inside(p, x);
  if (static_cast<int>(cell.lo.size()) != p.n - 1 || cell.hi.size() != cell.lo.size())
    throw Error(ErrorCode::DimensionMismatch, "cell dimension does not match the model");
  if (!(cell.h_lo > p.a) || !(cell.h_hi > cell.h_lo)) throw Error(ErrorCode::BelowBarrier, "cell must lie above the barrier");
  bool inside = x.height >= cell.h_lo && x.height <= cell.h_hi;
  for (std::size_t i = 0; i < cell.lo.size(); ++i)
    inside = inside && x.tilde[i] >= cell.lo[i] && x.tilde[i] <= cell.hi[i];
  if (inside) throw Error(ErrorCode::DiagonalSingularity, "start point lies in the cell");

  const double mu = p.mu(), nu = p.nu(), xn = x.height;
  // Squared distance to the cell centre, for centring the w-integral.
  double c2 = 0.0;
  for (std::size_t i = 0; i < cell.lo.size(); ++i) {
    double c = 0.5 * (cell.lo[i] + cell.hi[i]) - x.tilde[i];
    c2 += c * c;
  }
  // dV = dy~ dy_n / y_n^n and y_n^{2mu+1} = y_n^n, so the height weight is (x_n/y_n)^{mu-nu}.
  auto slice = [&](double yn) {
    KilledLog kl(nu, xn, yn, p.a);
    auto lf = [&](double w) {
      double lb = 0.0, sw = std::sqrt(w);
      for (std::size_t i = 0; i < cell.lo.size(); ++i)
        lb += log_normal_mass((cell.lo[i] - x.tilde[i]) / sw, (cell.hi[i] - x.tilde[i]) / sw);
      return lb + kl(w);
    };
    double d2 = c2 + (xn - yn) * (xn - yn);
    EvalResult r = log_axis_integral(lf, std::log(d2 / p.n));
    double f = std::pow(xn / yn, mu - nu);
    return EvalResult{r.value * f, (r.abs_err + (kl.prof->max_abs_err() + 1e-13) * r.value) * f,
                      Method::Quadrature};
  };
  using GL = boost::math::quadrature::gauss<double, 15>;
  const double c = 0.5 * (cell.h_lo + cell.h_hi), h = 0.5 * (cell.h_hi - cell.h_lo);
  double total = 0.0, err = 0.0;
  const auto& xs = GL::abscissa();
  const auto& ws = GL::weights();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (int sgn : {1, -1}) {
      if (xs[i] == 0.0 && sgn < 0) continue;
      EvalResult s = slice(c + sgn * h * xs[i]);
      total += h * ws[i] * s.value;
      err += h * ws[i] * s.abs_err;
    }
  }
  return {total, err, Method::Quadrature};
}

}  // namespace hbmgreen::hypgreen
