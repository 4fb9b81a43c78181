#include "hbmgreen/besselproc.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/bessel.hpp>

#include "hbmgreen/functionals.hpp"
#include "hbmgreen/quadrature.hpp"
#include "hbmgreen/specfun.hpp"

namespace hbmgreen::besselproc {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw Error(ErrorCode::NonPositiveArgument, std::string(name) + " must be a positive finite number");
}

void check_killed(const KernelQuery& q) {
  check_positive(q.t, "t");
  check_positive(q.a, "a");
  if (!(q.x > q.a) || !(q.y > q.a))
    throw Error(ErrorCode::BelowBarrier, "killed kernel needs x > a and y > a");
}

// Speed-measure free kernel: (xy)^nu / t * exp(-(x^2+y^2)/2t) I_nu(xy/t) = y^{2nu+1} Q_nu.
double log_free_speed(double nu, double t, double x, double y) {
  return functionals::log_q_nu(nu, x, y, t) + (2.0 * nu + 1.0) * std::log(y);
}

// Image part of the killed resolvent,
//   h^(p) = 2 (xy)^nu K(rx) K(ry) I(ra) / K(ra),  r = sqrt(2p),
// so that p_a = p - h against the speed measure. Inverted on the parabola
// p = z^2/2, z = b + iy. With b = c/t, c = x + y - 2a, the phase of e^{pt - cz}
// vanishes identically; for large t the vertex is kept at least 1/sqrt(t)
// away from the branch point.
EvalResult image_term(double nu, double t, double x, double y, double a) {
  const double c = x + y - 2.0 * a, b = std::max(c / t, 1.0 / std::sqrt(t));
  const double L = 0.5 * b * b * t - b * c;
  const double pre = 2.0 * std::pow(x * y, nu);
  auto f = [&](double w) {
    cplx z(b, w);
    cplx g = specfun::bessel_k_scaled(nu, x * z) * specfun::bessel_k_scaled(nu, y * z) *
             specfun::bessel_i_scaled(nu, a * z) / specfun::bessel_k_scaled(nu, a * z);
    return (pre * g * z * std::exp(0.5 * t * z * z - c * z - L)).real();
  };
  quad::Result r = quad::gk(f, 0.0, std::sqrt(80.0 / t) + 2.0 * c / t, 1e-12);
  double scale = std::exp(L) / kPi;
  return {r.value * scale, (r.abs_err + 1e-14 * std::abs(r.value)) * scale, Method::Inversion};
}

// Spectral form of the killed kernel (Weber-Orr expansion), the branch-cut
// integral of the killed resolvent:
//   p_a = (xy)^nu int_0^inf e^{-k^2 t/2} psi(kx) psi(ky) / (J(ka)^2 + Y(ka)^2) k dk,
//   psi(kx) = J(kx) Y(ka) - Y(kx) J(ka).
// The integrand is free of the analytic part of the resolvent, so long times do
// not cancel. Written with w = k^2 t/2 and normalised by Y(ka).
EvalResult spectral_kernel(double nu, double t, double x, double y, double a) {
  using boost::math::cyl_bessel_j;
  using boost::math::cyl_neumann;
  auto f = [&](double w) {
    if (w <= 0.0) return 0.0;
    double k = std::sqrt(2.0 * w / t);
    double rho = cyl_bessel_j(nu, k * a) / cyl_neumann(nu, k * a);
    double px = cyl_bessel_j(nu, k * x) - cyl_neumann(nu, k * x) * rho;
    double py = cyl_bessel_j(nu, k * y) - cyl_neumann(nu, k * y) * rho;
    return std::exp(-w) * px * py / (1.0 + rho * rho);
  };
  quad::Result r = quad::gk(f, 0.0, 45.0, 1e-12);
  double pre = std::pow(x * y, nu) / t;
  return {r.value * pre, (r.abs_err + 1e-14 * std::abs(r.value)) * pre, Method::Quadrature};
}

}  // namespace

BesselIndex BesselIndex::make(double nu) {
  BesselIndex b{nu};
  b.validate();
  return b;
}

void BesselIndex::validate() const {
  if (!(nu > 0.0) || nu > specfun::kMaxOrder)
    throw Error(ErrorCode::OrderOutOfRange, "Bessel index needs 0 < nu <= 200");
}

const char* to_string(Measure m) { return m == Measure::Speed ? "speed" : "lebesgue"; }

double speed_density(double nu, double y) { return std::pow(y, 1.0 - 2.0 * nu); }

KernelValue convert(const KernelValue& k, double nu, double y, Measure to) {
  if (k.measure == to) return k;
  // p_speed m(y) dy = p_leb dy.
  double lf = (1.0 - 2.0 * nu) * std::log(y);
  if (to == Measure::Speed) lf = -lf;
  double f = std::exp(lf);
  return {k.value * f, k.abs_err * f, to, k.method, k.log_value + lf};
}

KernelValue free_density(const BesselIndex& idx, const KernelQuery& q) {
  idx.validate();
  check_positive(q.t, "t");
  check_positive(q.x, "x");
  check_positive(q.y, "y");
  double l = log_free_speed(idx.nu, q.t, q.x, q.y), v = std::exp(l);
  KernelValue k{v, 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + idx.nu) * v, Measure::Speed,
                Method::ClosedForm, l};
  return convert(k, idx.nu, q.y, q.measure);
}

double free_density_positive_index(double mu, double t, double x, double y) {
  if (!(mu >= 0.0) || mu > specfun::kMaxOrder) throw Error(ErrorCode::OrderOutOfRange, "index out of range");
  check_positive(t, "t");
  check_positive(y, "y");
  if (x < 0.0) throw Error(ErrorCode::NonPositiveArgument, "x must be >= 0");
  if (x == 0.0) {
    // 2 (2t)^{-mu-1} y^{2mu+1} e^{-y^2/2t} / Gamma(mu+1)
    double l = std::log(2.0) - (mu + 1.0) * std::log(2.0 * t) + (2.0 * mu + 1.0) * std::log(y) -
               y * y / (2.0 * t) - std::lgamma(mu + 1.0);
    return std::exp(l);
  }
  // (y/t)(y/x)^mu e^{-(x^2+y^2)/2t} I_mu(xy/t) = y^2 Q_{-mu} with the I-order |mu|.
  return std::exp(functionals::log_q_nu(mu, x, y, t) + 2.0 * mu * std::log(y / x) + 2.0 * std::log(y));
}

EvalResult hitting_density(const BesselIndex& idx, double x, double a, double s) {
  idx.validate();
  return functionals::q_hitting_density(functionals::DriftParams::make(idx.nu, 0.0), x, a, s);
}

KernelValue killed_density(const BesselIndex& idx, const KernelQuery& q, KilledMethod method) {
  idx.validate();
  check_killed(q);
  const double nu = idx.nu;
  KernelValue k{0.0, 0.0, Measure::Speed, Method::Quadrature};
  if (method == KilledMethod::Decomposition) {
    EvalResult g;
    double lg = 0.0;
    try {
      g = functionals::killed_q_nu(nu, q.x, q.y, q.a, q.t, functionals::Evaluation::Tabulated, &lg);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ConvolutionGridTooCoarse) throw;
      throw Error(ErrorCode::NegativeDensityBeyondTolerance, e.what());
    }
    double lf = (2.0 * nu + 1.0) * std::log(q.y), f = std::exp(lf);
    k = {g.value * f, g.abs_err * f, Measure::Speed, g.method, lg + lf};
  } else {
    double lfree = log_free_speed(nu, q.t, q.x, q.y), free = std::exp(lfree);
    if (functionals::killing_negligible(nu, q.x, q.y, q.a, q.t)) {
      k = {free, 1e-12 * free, Measure::Speed, Method::ClosedForm, lfree};
    } else if (q.t > std::pow(q.x + q.y - 2.0 * q.a, 2)) {
      EvalResult p = spectral_kernel(nu, q.t, q.x, q.y, q.a);
      if (p.value < -p.abs_err)
        throw Error(ErrorCode::NegativeDensityBeyondTolerance,
                    "killed kernel negative beyond error estimate at t=" + std::to_string(q.t));
      k = {std::max(p.value, 0.0), p.abs_err, Measure::Speed, Method::Quadrature, std::log(std::max(p.value, 0.0))};
    } else {
      EvalResult h = image_term(nu, q.t, q.x, q.y, q.a);
      double v = free - h.value, err = h.abs_err + 1e-14 * free;
      if (v < 0.0) {
        if (-v > err)
          throw Error(ErrorCode::NegativeDensityBeyondTolerance,
                      "killed kernel negative beyond error estimate at t=" + std::to_string(q.t));
        v = 0.0;
      }
      k = {v, err, Measure::Speed, Method::Inversion, std::log(v)};
    }
  }
  return convert(k, nu, q.y, q.measure);
}

double log_killed_density_comparator(const BesselIndex& idx, const KernelQuery& q) {
  idx.validate();
  if (q.a != 1.0) throw Error(ErrorCode::BarrierNotUnit, "comparator is stated for a = 1; rescale first");
  check_positive(q.t, "t");
  if (!(q.x > 1.0) || !(q.y > 1.0)) throw Error(ErrorCode::BelowBarrier, "comparator needs x, y > 1");
  const double t = q.t, x = q.x, y = q.y, nu = idx.nu;
  double l = std::log(std::min(1.0, (x - 1.0) * (y - 1.0) / t)) +
             (nu - 0.5) * (std::log(std::min(1.0, x * y / t)) + std::log(x * y)) - 0.5 * std::log(t) -
             (x - y) * (x - y) / (2.0 * t);
  return l;
}

EvalResult killed_density_comparator(const BesselIndex& idx, const KernelQuery& q) {
  return {std::exp(log_killed_density_comparator(idx, q)), 0.0, Method::ClosedForm};
}

}  // namespace hbmgreen::besselproc
