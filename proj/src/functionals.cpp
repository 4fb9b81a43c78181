#include "hbmgreen/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <string>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/tools/minima.hpp>

#include "hbmgreen/chebyshev.hpp"
#include "hbmgreen/laplace.hpp"
#include "hbmgreen/quadrature.hpp"
#include "hbmgreen/specfun.hpp"

namespace hbmgreen::functionals {

using laplace::cplx;

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kPi = std::numbers::pi;

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw Error(ErrorCode::NonPositiveArgument, std::string(name) + " must be a positive finite number");
}

void check_nu(double nu) {
  if (!(nu > 0.0) || nu > specfun::kMaxOrder)
    throw Error(ErrorCode::OrderOutOfRange, "hitting densities need 0 < nu <= 200");
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// log of e^{-z} I_nu(z), finite where the scaled value underflows.
double log_i_scaled(double nu, double z) {
  double v = specfun::bessel_i_scaled(nu, z);
  if (v > 1e-290) return std::log(v);
  // Leading series term; only reached for z far below nu.
  return nu * std::log(0.5 * z) - std::lgamma(nu + 1.0) - z;
}

// Large-s coefficient of the hitting density: q ~ C s^{-nu-1}.
double hitting_tail_coeff(double nu, double xi) {
  return std::expm1(2.0 * nu * std::log(xi)) / (std::pow(2.0, nu) * std::tgamma(nu));
}

// Branch-cut representation, valid for all s > 0:
//   q(s) = (xi^nu / (pi s)) int_0^inf e^{-w} W(sqrt(2w/s)) dw,
//   W(k) = [J(ak)Y(xk) - J(xk)Y(ak)] / [J(ak)^2 + Y(ak)^2].
EvalResult hitting_weber(double nu, double x, double a, double s) {
  auto g = [&](double w) {
    double k = std::sqrt(2.0 * w / s);
    double ja = boost::math::cyl_bessel_j(nu, a * k), ya = boost::math::cyl_neumann(nu, a * k);
    double jx = boost::math::cyl_bessel_j(nu, x * k), yx = boost::math::cyl_neumann(nu, x * k);
    double num = ja * yx - jx * ya, den = ja * ja + ya * ya;
    if (!std::isfinite(num) || !std::isfinite(den) || den == 0.0) return 0.0;
    return std::exp(-w) * num / den;
  };
  quad::Result r = quad::gk(g, 0.0, 45.0, 1e-11, 0.0, 200);
  double pre = std::pow(x / a, nu) / (kPi * s);
  return {pre * r.value, pre * r.abs_err + 1e-19 * pre * std::abs(r.value), Method::Quadrature};
}

}  // namespace

// ---------------------------------------------------------------------------

DriftParams DriftParams::make(double mu, double lambda) {
  DriftParams d{mu, lambda};
  d.validate();
  return d;
}

double DriftParams::nu() const { return std::sqrt(2.0 * lambda + mu * mu); }

void DriftParams::validate() const {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw Error(ErrorCode::InvalidArgument, "mu must be >= 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw Error(ErrorCode::InvalidArgument, "lambda must be >= 0");
  if (nu() > specfun::kMaxOrder) throw Error(ErrorCode::OrderOutOfRange, "nu exceeds the supported range");
}

EvalResult schrodinger_green(double alpha, double lam, double x, double y) {
  check_positive(alpha, "alpha");
  check_positive(lam, "lam");
  if (x > y) std::swap(x, y);
  const double p = lam * std::exp(x), q = lam * std::exp(y);
  specfun::Order o(alpha);
  auto i = specfun::bessel_i(o, p, specfun::Scaling::Exponential);
  auto k = specfun::bessel_k(o, q, specfun::Scaling::Exponential);
  double v = 2.0 * i.value * k.value * std::exp(p - q);
  double rel = (i.value > 0 ? i.abs_err / i.value : 0.0) + (k.value > 0 ? k.abs_err / k.value : 0.0);
  return {v, (rel + 4 * kEps) * v, Method::ClosedForm};
}

namespace {

// log(e^{-r} theta(r, t)) and its relative error.
using LogValue = std::pair<double, double>;

// Bromwich integral in the order variable: s = nu^2/2 on Re nu = c, where c
// minimises t c^2/2 + log Ihat_c(r) (the real saddle). Suited to r t < pi/2.
LogValue hw_parabola(double r, double t) {
  auto phi = [&](double c) { return 0.5 * t * c * c + specfun::log_bessel_i_scaled(cplx(c, 0.0), r).real(); };
  double hi = 1.0;
  while (phi(2.0 * hi) < phi(hi) && hi < 1e8) hi *= 2.0;
  auto [c, L] = boost::math::tools::brent_find_minima(phi, 0.0, 2.0 * hi, 40);
  c = std::max(c, 1e-3);
  L = phi(c);
  auto f = [&](double y) {
    cplx nu(c, y);
    cplx l = 0.5 * t * nu * nu + specfun::log_bessel_i_scaled(nu, r) - L;
    return (std::exp(l) * nu).real();
  };
  const double y_max = (0.5 * kPi + std::sqrt(0.25 * kPi * kPi + 120.0 * t)) / t;
  quad::Result q = quad::gk(f, 0.0, y_max, 1e-12);
  if (!(q.value > 0.0)) return {-std::numeric_limits<double>::infinity(), HUGE_VAL};
  return {L + std::log(q.value / kPi), q.abs_err / q.value};
}

// Yor's integral
//   theta = r/sqrt(2 pi^3 t) Im int_0^inf exp(-(xi - i pi)^2/2t - r cosh xi) sinh xi d eta
// on the line xi = eta + i b. The vertical leg from 0 to ib is real and drops
// out; b solves (pi - b)/t = r sin b, the saddle, when r t >= pi/2.
LogValue hw_yor(double r, double t, double b) {
  const double L = (kPi - b) * (kPi - b) / (2.0 * t) - r * std::cos(b) - r;
  auto f = [&](double eta) {
    cplx xi(eta, b), d = xi - cplx(0.0, kPi);
    cplx e = -d * d / (2.0 * t) - r * std::cosh(xi) - r - L;
    if (e.real() < -745.0) return 0.0;
    return (std::exp(e) * std::sinh(xi)).imag();
  };
  const double w = 1.0 / std::sqrt(1.0 / t + r * std::max(std::cos(b), 0.0));
  quad::Result q = quad::line(f, 0.0, 2.0 * w, 1e-12, 1e-17, 0.0, 800.0);
  if (!(q.value > 0.0)) return {-std::numeric_limits<double>::infinity(), HUGE_VAL};
  return {L + std::log(q.value) + std::log(r / std::sqrt(2.0 * kPi * kPi * kPi * t)), q.abs_err / q.value};
}

LogValue hw_log_scaled(double r, double t) {
  const double k = r * t;
  if (k >= 0.5 * kPi) {
    // Saddle height on (0, pi/2].
    double lo = 0.0, hi = 0.5 * kPi;
    for (int i = 0; i < 60; ++i) {
      double m = 0.5 * (lo + hi);
      (kPi - m - k * std::sin(m) > 0.0 ? lo : hi) = m;
    }
    return hw_yor(r, t, 0.5 * (lo + hi));
  }
  LogValue p = hw_parabola(r, t);
  if (p.second <= 1e-8 || k < 1.0) return p;
  // Near the peak for large r both rules lose digits; keep the better one.
  LogValue y = hw_yor(r, t, 0.5 * kPi);
  return y.second < p.second ? y : p;
}

}  // namespace

EvalResult hartman_watson_theta_scaled(double r, double t) {
  check_positive(r, "r");
  check_positive(t, "t");
  auto [lv, rel] = hw_log_scaled(r, t);
  if (!(rel <= 1e-6))
    throw Error(ErrorCode::InversionUnstable, "theta(r=" + std::to_string(r) + ", t=" + std::to_string(t) +
                                                  ") not resolved; relative error " + std::to_string(rel));
  double v = std::exp(lv);
  return {v, rel * v, Method::Inversion};
}

EvalResult hartman_watson_theta(double r, double t) {
  EvalResult s = hartman_watson_theta_scaled(r, t);
  double e = std::exp(r);
  return {s.value * e, s.abs_err * e, s.method};
}

EvalResult joint_density(const DriftParams& dp, double t, double x, double u, double y) {
  dp.validate();
  check_positive(t, "t");
  check_positive(u, "u");
  const double ex = std::exp(x), ey = std::exp(y);
  const double r = ex * ey / u;
  auto [lth, rel] = hw_log_scaled(r, t);
  if (!(rel <= 1e-6)) throw Error(ErrorCode::InversionUnstable, "joint density: theta not resolved");
  // exp(-(e^{2x}+e^{2y})/2u) theta(r) = exp(-(e^x-e^y)^2/2u) e^{-r} theta(r).
  double logf = -0.5 * dp.mu * dp.mu * t - dp.mu * (y - x) - (ex - ey) * (ex - ey) / (2.0 * u) - std::log(u);
  double v = std::exp(logf + lth);
  return {v, rel * v, Method::Inversion};
}

double log_q_nu(double nu, double x, double y, double u) {
  if (u <= 0.0) return -std::numeric_limits<double>::infinity();
  const double z = x * y / u;
  return -std::log(y * u) + nu * std::log(x / y) - (x - y) * (x - y) / (2.0 * u) + log_i_scaled(nu, z);
}

double q_nu(double nu, double x, double y, double u) {
  if (u <= 0.0) return 0.0;
  const double z = x * y / u;
  return std::pow(x / y, nu) * std::exp(-(x - y) * (x - y) / (2.0 * u)) * specfun::bessel_i_scaled(nu, z) /
         (y * u);
}

EvalResult q_potential(const DriftParams& dp, double x, double y, double u) {
  dp.validate();
  check_positive(x, "x");
  check_positive(y, "y");
  check_positive(u, "u");
  const double nu = dp.nu();
  double v = std::pow(x / y, dp.mu - nu) * q_nu(nu, x, y, u);
  return {v, 64.0 * kEps * (1.0 + nu) * v, Method::ClosedForm};
}

double q_potential_transform(const DriftParams& dp, double x, double y, double r) {
  const double nu = dp.nu();
  const double lo = std::min(x, y), hi = std::max(x, y);
  return (2.0 / y) * std::pow(x / y, dp.mu) * specfun::bessel_i_scaled(nu, r * lo) *
         specfun::bessel_k_scaled(nu, r * hi) * std::exp(-r * (hi - lo));
}

double q_hitting_transform(double nu, double x, double a, double r) {
  return std::pow(x / a, nu) * specfun::bessel_k_scaled(nu, r * x) / specfun::bessel_k_scaled(nu, r * a) *
         std::exp(-r * (x - a));
}

double green_ab_transform(const DriftParams& dp, double x, double a, double y, double r) {
  const double nu = dp.nu(), mu = dp.mu;
  const double lo = std::min(x, y), hi = std::max(x, y);
  // 2 (xy)^mu K(r hi)/K(ra) S(r lo, ra) m^{(-mu)}(y), all in scaled form.
  double s = specfun::bracket_s(specfun::Order(nu), r * lo, r * a, specfun::Scaling::Exponential).value;
  double k = specfun::bessel_k_scaled(nu, r * hi) / specfun::bessel_k_scaled(nu, r * a);
  return 2.0 * std::pow(x * y, mu) * std::pow(y, -2.0 * mu - 1.0) * k * s * std::exp(-r * (hi - lo));
}

// ---------------------------------------------------------------------------
// Hitting density

namespace {

// Bromwich integral along the parabola p = z^2/2, z = d/s + iy (d = x - a),
// which passes through the saddle of e^{ps - d sqrt(2p)}. On it the phase of
// e^{ps} e^{-dz} cancels exactly, so
//   q(s) = e^{-d^2/2s}/pi int_0^inf e^{-s y^2/2} Re[G(z) z] dy,
//   G(z) = (x/a)^nu Khat(xz)/Khat(az),
// with no oscillation at small s. Returns log q and its relative error.
std::pair<double, double> hitting_log_parabola(double nu, double x, double a, double s) {
  const double d = x - a, zs = d / s, c = std::pow(x / a, nu);
  auto f = [&](double y) {
    cplx z(zs, y);
    cplx G = c * specfun::bessel_k_scaled(nu, x * z) / specfun::bessel_k_scaled(nu, a * z);
    return std::exp(-0.5 * s * y * y) * (G * z).real();
  };
  quad::Result r = quad::gk(f, 0.0, std::sqrt(80.0 / s), 1e-12);
  if (!(r.value > 0.0)) throw Error(ErrorCode::InversionUnstable, "hitting density lost positivity");
  return {-d * d / (2.0 * s) + std::log(r.value / kPi), r.abs_err / r.value + 1e-14};
}

constexpr double kParabolaSigma = 10.0;  // parabola below s = 10 (x-a)^2, Weber above

std::pair<double, double> hitting_log_direct(double nu, double x, double a, double s) {
  if (s <= kParabolaSigma * (x - a) * (x - a)) return hitting_log_parabola(nu, x, a, s);
  EvalResult w = hitting_weber(nu, x, a, s);
  if (!(w.value > 0.0)) throw Error(ErrorCode::InversionUnstable, "hitting density lost positivity");
  return {std::log(w.value), w.abs_err / w.value};
}

}  // namespace

EvalResult hitting_density_direct(double nu, double x, double a, double s) {
  check_nu(nu);
  check_positive(a, "a");
  check_positive(s, "s");
  if (!(x > a)) throw Error(ErrorCode::InvalidArgument, "hitting density needs x > a");
  auto [lq, rel] = hitting_log_direct(nu, x, a, s);
  double v = std::exp(lq);
  return {v, rel * v, s <= kParabolaSigma * (x - a) * (x - a) ? Method::Inversion : Method::Quadrature};
}

namespace {
constexpr double kTableTol = 1e-10;   // panel validation, absolute on log q
constexpr double kSigmaLo = 1e-3;     // table start in units of (xi-1)^2
constexpr double kTailSpan = 1e8;     // table end in units of max(1, (xi-1)^2)
}  // namespace

double HittingTable::log_lead(double s) const {
  const double d = xi_ - 1.0;
  return (nu_ - 0.5) * std::log(xi_) + std::log(d) - 0.5 * std::log(2.0 * kPi * s * s * s) - d * d / (2.0 * s);
}

HittingTable::HittingTable(double nu, double xi) : nu_(nu), xi_(xi) {
  check_nu(nu);
  if (!(xi > 1.0) || !std::isfinite(xi)) throw Error(ErrorCode::InvalidArgument, "table needs xi > 1");
  const double d2 = (xi - 1.0) * (xi - 1.0);
  s_lo_ = kSigmaLo * d2;
  s_hi_ = kTailSpan * std::max(1.0, d2);
  v_lo_ = std::log(s_lo_);
  v_hi_ = std::log(s_hi_);

  auto g_direct = [&](double v) {
    double s = std::exp(v);
    return hitting_log_direct(nu_, xi_, 1.0, s).first - log_lead(s);
  };

  // Panels of width <= 2 in log s, split until a midpoint probe agrees.
  std::vector<std::pair<double, double>> todo;
  const int n0 = std::max(1, int(std::ceil((v_hi_ - v_lo_) / 2.0)));
  for (int i = n0 - 1; i >= 0; --i)
    todo.emplace_back(v_lo_ + (v_hi_ - v_lo_) * i / n0, v_lo_ + (v_hi_ - v_lo_) * (i + 1) / n0);
  while (!todo.empty()) {
    auto [a, b] = todo.back();
    todo.pop_back();
    auto xs = cheb::nodes(a, b);
    std::vector<double> g(xs.size());
    for (std::size_t j = 0; j < xs.size(); ++j) g[j] = g_direct(xs[j]);
    double worst = 0.0;
    for (int probe : {0, cheb::kPoints / 2}) {
      double v = 0.5 * (xs[probe] + xs[probe + 1]);
      worst = std::max(worst, std::abs(cheb::eval(g, a, b, v) - g_direct(v)));
    }
    if (worst > kTableTol && b - a > 1e-2) {
      double m = 0.5 * (a + b);
      todo.emplace_back(m, b);
      todo.emplace_back(a, m);
      continue;
    }
    validation_err_ = std::max(validation_err_, worst);
    edges_.push_back(a);
    values_.push_back(std::move(g));
  }
  edges_.push_back(v_hi_);

  // Left: g = alpha s + beta s^2 through the first table point with matching slope.
  {
    const double h = 1e-3;
    double g0 = g_at(v_lo_), g1 = g_at(v_lo_ + h), g2 = g_at(v_lo_ + 2 * h);
    double dgdv = (-3 * g0 + 4 * g1 - g2) / (2 * h);
    double dgds = dgdv / s_lo_;
    beta_ = (dgds * s_lo_ - g0) / (s_lo_ * s_lo_);
    alpha_ = (2 * g0 - dgds * s_lo_) / s_lo_;
  }
  // Right: q = C s^{-nu-1} [1 + (r - 1)(s_hi/s)^kappa].
  tail_c_ = hitting_tail_coeff(nu_, xi_);
  tail_kappa_ = std::min(nu_, 1.0);
  tail_r_ = std::exp(g_at(v_hi_) + log_lead(s_hi_) - std::log(tail_c_) + (nu_ + 1.0) * v_hi_);
}

double HittingTable::g_at(double v) const {
  auto it = std::upper_bound(edges_.begin(), edges_.end(), v);
  std::size_t i = std::clamp<std::ptrdiff_t>(it - edges_.begin() - 1, 0, std::ptrdiff_t(values_.size()) - 1);
  return cheb::eval(values_[i], edges_[i], edges_[i + 1], v);
}

double HittingTable::log_value(double s) const {
  if (!(s > 0.0)) return -std::numeric_limits<double>::infinity();
  if (s < s_lo_) return log_lead(s) + alpha_ * s + beta_ * s * s;
  if (s > s_hi_) {
    double corr = (tail_r_ - 1.0) * std::pow(s_hi_ / s, tail_kappa_);
    return std::log(tail_c_) - (nu_ + 1.0) * std::log(s) + std::log1p(corr);
  }
  return log_lead(s) + g_at(std::log(s));
}

double HittingTable::operator()(double s) const { return std::exp(log_value(s)); }

std::shared_ptr<const HittingTable> hitting_table(double nu, double xi) {
  static std::shared_mutex mtx;
  static std::map<std::string, std::shared_ptr<const HittingTable>> cache;
  char key[64];
  std::snprintf(key, sizeof key, "%.12g|%.12g", nu, xi);
  {
    std::shared_lock lock(mtx);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  // Built outside the lock; only a complete table is ever published.
  auto table = std::make_shared<const HittingTable>(nu, xi);
  std::unique_lock lock(mtx);
  auto [it, inserted] = cache.emplace(key, table);
  return it->second;
}

EvalResult q_hitting_density(const DriftParams& dp, double x, double a, double s, Evaluation mode) {
  dp.validate();
  check_positive(a, "a");
  check_positive(x, "x");
  check_positive(s, "s");
  if (!(x > a)) throw Error(ErrorCode::InvalidArgument, "q_hitting_density needs x > a");
  const double nu = dp.nu();
  if (mode == Evaluation::Direct) return hitting_density_direct(nu, x, a, s);
  auto t = hitting_table(nu, x / a);
  double v = (*t)(s / (a * a)) / (a * a);
  return {v, (t->validation_error() + 1e-12) * v, Method::Inversion};
}

// ---------------------------------------------------------------------------
// Killed kernel

namespace {

double negligible_threshold(double nu, double x, double y, double a) {
  return 27.6 + 3.0 + std::abs(nu - 0.5) * std::log(std::max(x, y) / a);
}

}  // namespace

bool killing_negligible(double nu, double x, double y, double a, double u) {
  return 2.0 * (x - a) * (y - a) / u > negligible_threshold(nu, x, y, a);
}

namespace {

struct Ratio {
  double value = 0.0;  // (Q * q)(a, y; u) / Q(x, y; u)
  double err = 0.0;
};

Ratio killed_ratio(double nu, double x, double y, double a, double u, Evaluation mode) {
  std::shared_ptr<const HittingTable> table;
  if (mode == Evaluation::Tabulated) table = hitting_table(nu, x / a);
  const double a2 = a * a;
  auto log_q = [&](double s) {
    if (table) return table->log_value(s / a2) - std::log(a2);
    return hitting_log_direct(nu, x, a, s).first;
  };
  const double lq_xy = log_q_nu(nu, x, y, u);
  // Logit variable: s = u sigma(z), u - s = u sigma(-z), ds = u sigma sigma' dz.
  auto f = [&](double z) {
    double ls = -softplus(-z), lr = -softplus(z);
    double s = u * std::exp(ls), rest = u * std::exp(lr);
    if (!(s > 0.0) || !(rest > 0.0)) return 0.0;
    double l = log_q(s) + log_q_nu(nu, a, y, rest) - lq_xy + std::log(u) + ls + lr;
    return l < -745.0 ? 0.0 : std::exp(l);
  };
  // For large u the integrand has two separated peaks: s near the bulk of q
  // and u - s near the bulk of Q(a, y; .). Each half-line is walked from its own.
  const double dx = x - a, dy = y - a;
  double s_peak = std::min(u * dx / (dx + dy), dx * dx / 3.0);
  double w_peak = std::min(u * dy / (dx + dy), dy * dy / 3.0);
  double z1 = std::log(s_peak / u) - std::log1p(-s_peak / u);
  double z2 = std::log1p(-w_peak / u) - std::log(w_peak / u);
  quad::Result r = quad::line(f, z1, 1.0, 1e-11, 1e-15, -200.0, 0.0);
  quad::Result r2 = quad::line(f, z2, 1.0, 1e-11, 1e-15, 0.0, 200.0);
  r.value += r2.value;
  r.abs_err += r2.abs_err;
  r.converged = r.converged && r2.converged;
  Ratio out;
  out.value = r.value;
  double table_err = table ? table->validation_error() + 1e-12 : 1e-10;
  out.err = r.abs_err + table_err * r.value + 1e-14 * r.value;
  if (!r.converged) out.err = std::max(out.err, 1e-6 * r.value);
  return out;
}

}  // namespace

namespace {

// log Q_nu(x, y; u) and the surviving fraction 1 - (Q * q)/Q with its error.
struct KilledParts {
  double log_free = 0.0, keep = 1.0, err = 0.0;
  bool negligible = false;
};

KilledParts killed_parts(double nu, double x, double y, double a, double u, Evaluation mode) {
  check_nu(nu);
  check_positive(a, "a");
  check_positive(u, "u");
  if (!(x > a) || !(y > a)) throw Error(ErrorCode::InvalidArgument, "killed kernel needs x, y > a");
  KilledParts k;
  k.log_free = log_q_nu(nu, x, y, u);
  if (killing_negligible(nu, x, y, a, u)) {
    k.negligible = true;
    k.err = 1e-12;
    return k;
  }
  Ratio r = killed_ratio(nu, x, y, a, u, mode);
  k.keep = 1.0 - r.value;
  k.err = r.err;
  if (k.keep < 0.0) {
    if (-k.keep > r.err)
      throw Error(ErrorCode::ConvolutionGridTooCoarse,
                  "killed kernel negative beyond error estimate at u=" + std::to_string(u));
    k.keep = 0.0;
  }
  return k;
}

}  // namespace

EvalResult killed_q_nu(double nu, double x, double y, double a, double u, Evaluation mode, double* log_value) {
  KilledParts k = killed_parts(nu, x, y, a, u, mode);
  const double free = std::exp(k.log_free);
  if (log_value) *log_value = k.log_free + std::log(k.keep);
  return {free * k.keep, free * k.err, k.negligible ? Method::ClosedForm : Method::Quadrature};
}

EvalResult green_ab(const DriftParams& dp, const FunctionalState& st, double y, Evaluation mode) {
  dp.validate();
  check_positive(st.a, "a");
  check_positive(st.u, "u");
  if (!(st.x > st.a) || !(y > st.a))
    throw Error(ErrorCode::InvalidArgument, "green_ab needs x > a and y > a");
  const double nu = dp.nu(), mu = dp.mu;
  double x = st.x;
  EvalResult g;
  if (x <= y) {
    g = killed_q_nu(nu, x, y, st.a, st.u, mode);
  } else {
    // y^{2nu+1} G_nu(x, y) is symmetric in (x, y).
    g = killed_q_nu(nu, y, x, st.a, st.u, mode);
    double f = std::pow(x / y, 2.0 * nu + 1.0);
    g.value *= f;
    g.abs_err *= f;
  }
  double f = std::pow(x / y, mu - nu);
  return {g.value * f, g.abs_err * f, g.method};
}

// ---------------------------------------------------------------------------

namespace {
constexpr double kProfileTol = 1e-8;
constexpr double kProfileSpan = 1e8;
}  // namespace

KilledProfile::KilledProfile(double nu, double x, double y, double a) : nu_(nu), x_(x), y_(y), a_(a) {
  check_nu(nu);
  check_positive(a, "a");
  if (!(x > a) || !(y > a)) throw Error(ErrorCode::InvalidArgument, "killed profile needs x, y > a");
  const double theta = negligible_threshold(nu, x, y, a);
  v_lo_ = std::log(2.0 * (x - a) * (y - a) / theta);
  v_hi_ = std::max(v_lo_ + 1.0, std::log(kProfileSpan * std::max(x, y) * std::max(x, y)));
  double a2n = std::pow(a, 2.0 * nu);
  limit_ = std::log((std::pow(x, 2.0 * nu) - a2n) * (std::pow(y, 2.0 * nu) - a2n) / std::pow(x * y, 2.0 * nu));

  auto h_direct = [&](double v, double* err) {
    Ratio r = killed_ratio(nu, x, y, a, std::exp(v), Evaluation::Tabulated);
    double keep = 1.0 - r.value;
    if (!(keep > 0.0))
      throw Error(ErrorCode::ConvolutionGridTooCoarse, "killed profile lost all significance");
    if (err) *err = std::max(*err, r.err / keep);
    return std::log(keep);
  };

  std::vector<std::pair<double, double>> todo;
  const int n0 = std::max(1, int(std::ceil((v_hi_ - v_lo_) / 2.0)));
  for (int i = n0 - 1; i >= 0; --i)
    todo.emplace_back(v_lo_ + (v_hi_ - v_lo_) * i / n0, v_lo_ + (v_hi_ - v_lo_) * (i + 1) / n0);
  while (!todo.empty()) {
    auto [lo, hi] = todo.back();
    todo.pop_back();
    auto xs = cheb::nodes(lo, hi);
    std::vector<double> h(xs.size());
    double node_err = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) h[j] = h_direct(xs[j], &node_err);
    double worst = 0.0;
    for (int probe : {0, cheb::kPoints / 2}) {
      double v = 0.5 * (xs[probe] + xs[probe + 1]);
      worst = std::max(worst, std::abs(cheb::eval(h, lo, hi, v) - h_direct(v, &node_err)));
    }
    if (worst > kProfileTol + node_err && hi - lo > 1e-2) {
      double m = 0.5 * (lo + hi);
      todo.emplace_back(m, hi);
      todo.emplace_back(lo, m);
      continue;
    }
    err_ = std::max(err_, worst + node_err);
    edges_.push_back(lo);
    values_.push_back(std::move(h));
  }
  edges_.push_back(v_hi_);
}

double KilledProfile::log_ratio(double u) const {
  double v = std::log(u);
  if (v <= v_lo_) return 0.0;
  if (v >= v_hi_) {
    // Relax towards the exact large-u limit at the slowest correction rate.
    double h_hi = values_.back().back();
    double kappa = std::min(nu_, 1.0);
    return limit_ + (h_hi - limit_) * std::exp(-kappa * (v - v_hi_));
  }
  auto it = std::upper_bound(edges_.begin(), edges_.end(), v);
  std::size_t i = std::clamp<std::ptrdiff_t>(it - edges_.begin() - 1, 0, std::ptrdiff_t(values_.size()) - 1);
  return cheb::eval(values_[i], edges_[i], edges_[i + 1], v);
}

std::shared_ptr<const KilledProfile> killed_profile(double nu, double x, double y, double a) {
  static std::shared_mutex mtx;
  static std::map<std::string, std::shared_ptr<const KilledProfile>> cache;
  const double lo = std::min(x, y), hi = std::max(x, y);
  char key[128];
  std::snprintf(key, sizeof key, "%.15g|%.15g|%.15g|%.15g", nu, lo, hi, a);
  {
    std::shared_lock lock(mtx);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto prof = std::make_shared<const KilledProfile>(nu, lo, hi, a);
  std::unique_lock lock(mtx);
  auto [it, inserted] = cache.emplace(key, prof);
  return it->second;
}

}  // namespace hbmgreen::functionals
