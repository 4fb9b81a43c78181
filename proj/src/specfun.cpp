#include "hbmgreen/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

namespace hbmgreen::specfun {

namespace {

using cplx = std::complex<double>;

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kPi = std::numbers::pi;
constexpr int kMaxIter = 100000;

// Taylor coefficients of 1/Gamma(z) = sum_k c[k-1] z^k (Abramowitz & Stegun 6.1.34).
constexpr double kRecipGamma[26] = {
    1.0,
    0.5772156649015329,
    -0.6558780715202538,
    -0.0420026350340952,
    0.1665386113822915,
    -0.0421977345555443,
    -0.0096219715278770,
    0.0072189432466630,
    -0.0011651675918591,
    -0.0002152416741149,
    0.0001280502823882,
    -0.0000201348547807,
    -0.0000012504934821,
    0.0000011330272320,
    -0.0000002056338417,
    0.0000000061160950,
    0.0000000050020075,
    -0.0000000011812746,
    0.0000000001043427,
    0.0000000000077823,
    -0.0000000000036968,
    0.0000000000005100,
    -0.0000000000000206,
    -0.0000000000000054,
    0.0000000000000014,
    0.0000000000000001,
};

struct TemmeGammas {
  double gam1;    // (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu)
  double gam2;    // (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2
  double gampl;   // 1/Gamma(1+mu)
  double gammi;   // 1/Gamma(1-mu)
};

// |mu| <= 1/2.
TemmeGammas temme_gammas(double mu) {
  double odd = 0.0;   // sum over k odd (1-based) of c_k mu^{k-1}
  double even = 0.0;  // sum over k even of c_k mu^{k-2}
  for (int k = 26; k >= 1; --k) {
    if (k % 2 == 1) {
      odd = odd * mu * mu + kRecipGamma[k - 1];
    } else {
      even = even * mu * mu + kRecipGamma[k - 1];
    }
  }
  TemmeGammas g;
  g.gam1 = -even;
  g.gam2 = odd;
  g.gampl = g.gam2 - mu * g.gam1;
  g.gammi = g.gam2 + mu * g.gam1;
  return g;
}

double abs_of(double v) { return std::abs(v); }
double abs_of(const cplx& v) { return std::abs(v); }

// e^{z} K_mu(z) and e^{z} K_{mu+1}(z), |mu| <= 1/2, z real > 0 or complex with
// Re z > 0. Temme's series for |z| <= 2, Steed's continued fraction otherwise.
template <class T>
void temme_k_scaled(double mu, T z, T* kmu, T* kmu1) {
  const double absz = abs_of(z);
  if (absz <= 2.0) {
    const T x2 = z * 0.5;
    const double pimu = kPi * mu;
    const double fact = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
    T d = -std::log(x2);
    T e = mu * d;
    const T fact2 = abs_of(e) < 1e-8 ? T(1.0) + e * e / 6.0 : std::sinh(e) / e;
    const TemmeGammas g = temme_gammas(mu);
    T ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
    T sum = ff;
    e = std::exp(e);
    T p = 0.5 * e / g.gampl;
    T q = 0.5 / (e * g.gammi);
    T c = 1.0;
    d = x2 * x2;
    T sum1 = p;
    const double mu2 = mu * mu;
    int i = 1;
    for (; i < kMaxIter; ++i) {
      const double di = i;
      ff = (di * ff + p + q) / (di * di - mu2);
      c *= d / di;
      p /= (di - mu);
      q /= (di + mu);
      const T del = c * ff;
      sum += del;
      const T del1 = c * (p - di * ff);
      sum1 += del1;
      if (abs_of(del) < abs_of(sum) * kEps) break;
    }
    if (i == kMaxIter) {
      throw Error(ErrorCode::QuadratureNonConvergent, "Temme series for K did not converge");
    }
    const T scale = std::exp(z);
    *kmu = sum * scale;
    *kmu1 = sum1 * (2.0 / z) * scale;
    return;
  }
  T b = 2.0 * (1.0 + z);
  T d = 1.0 / b;
  T h = d;
  T delh = d;
  T q1 = 0.0;
  T q2 = 1.0;
  const double a1 = 0.25 - mu * mu;
  T q = a1;
  double c = a1;
  double a = -a1;
  T s = 1.0 + q * delh;
  int i = 2;
  for (; i < kMaxIter; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / i;
    const T qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const T dels = q * delh;
    s += dels;
    if (abs_of(dels) < abs_of(s) * kEps) break;
  }
  if (i == kMaxIter) {
    throw Error(ErrorCode::QuadratureNonConvergent, "Steed continued fraction for K did not converge");
  }
  h = a1 * h;
  *kmu = std::sqrt(kPi / (2.0 * z)) / s;
  *kmu1 = *kmu * (mu + z + 0.5 - h) / z;
}

// Scaled K_nu and K_{nu+1} for nu >= 0 by upward recurrence from |mu| <= 1/2.
template <class T>
T k_scaled_nonneg(double nu, T z, T* next_order = nullptr) {
  const int nl = static_cast<int>(std::floor(nu + 0.5));
  const double mu = nu - nl;
  T kmu;
  T kmu1;
  temme_k_scaled(mu, z, &kmu, &kmu1);
  for (int i = 1; i <= nl; ++i) {
    const T next = (mu + i) * (2.0 / z) * kmu1 + kmu;
    kmu = kmu1;
    kmu1 = next;
  }
  if (next_order != nullptr) *next_order = kmu1;
  return kmu;
}

// Large-argument expansion sum_k (-1)^k a_k(nu) / z^k for I (sign=-1) or
// sum_k a_k(nu)/z^k for K (sign=+1). Order may be complex.
template <class O, class Z>
auto hankel_sum(O nu, Z z, double sign, bool* converged) {
  using R = decltype(O{} * Z{});
  const O four_nu2 = 4.0 * nu * nu;
  R term = 1.0;
  R sum = 1.0;
  double last = std::numeric_limits<double>::infinity();
  *converged = false;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= sign * (four_nu2 - odd * odd) / (8.0 * k * z);
    const double mag = abs_of(term);
    if (mag > last) break;
    sum += term;
    last = mag;
    if (mag <= 0.5 * kEps * abs_of(sum)) {
      *converged = true;
      break;
    }
  }
  return sum;
}

void check_argument(double z) {
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw Error(ErrorCode::NonPositiveArgument, "argument must be positive and finite, got " + std::to_string(z));
  }
}

}  // namespace

Order::Order(double value) : value_(value) {
  if (!std::isfinite(value) || std::abs(value) > kMaxOrder) {
    throw Error(ErrorCode::OrderOutOfRange, "order " + std::to_string(value) + " outside [-200, 200]");
  }
}

double series_switch(double order) { return 20.0 + std::abs(order); }

double bessel_i_series_scaled(double nu, double z, int* terms) {
  const double q = 0.25 * z * z;
  double term = 1.0;
  double sum = 1.0;
  int k = 1;
  for (; k < kMaxIter; ++k) {
    term *= q / (k * (k + nu));
    sum += term;
    if (term < 0.5 * kEps * sum && k > 0.5 * z) break;
  }
  if (terms != nullptr) *terms = k + 1;
  const double log_pref = nu * std::log(0.5 * z) - std::lgamma(nu + 1.0) - z;
  return std::exp(log_pref) * sum;
}

double bessel_i_asymptotic_scaled(double nu, double z, bool* converged) {
  const double sum = hankel_sum(nu, z, -1.0, converged);
  return sum / std::sqrt(2.0 * kPi * z);
}

void bessel_ik_cf_scaled(double nu, double z, double* i_scaled, double* k_scaled) {
  const int nl = static_cast<int>(std::floor(nu + 0.5));
  const double mu = nu - nl;
  const double xi = 1.0 / z;
  const double xi2 = 2.0 * xi;
  constexpr double kTiny = 1e-300;

  // Continued fraction for I'_nu / I_nu (modified Lentz).
  double h = std::max(nu * xi, kTiny);
  double b = xi2 * nu;
  double d = 0.0;
  double c = h;
  int i = 1;
  for (; i < kMaxIter; ++i) {
    b += xi2;
    d = 1.0 / (b + d);
    c = b + 1.0 / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  if (i == kMaxIter) {
    throw Error(ErrorCode::QuadratureNonConvergent, "continued fraction for I'/I did not converge");
  }

  // Downward recurrence to mu, keeping values in range.
  double ril = 1.0;
  double ripl = h;
  double ril1 = ril;
  double rip1 = ripl;
  double fact = nu * xi;
  for (int l = nl; l >= 1; --l) {
    const double ritemp = fact * ril + ripl;
    fact -= xi;
    ripl = fact * ritemp + ril;
    ril = ritemp;
    const double mag = std::abs(ril);
    if (mag > 1e250 || mag < 1e-250) {
      const double s = 1.0 / mag;
      ril *= s;
      ripl *= s;
      ril1 *= s;
      rip1 *= s;
    }
  }
  const double f = ripl / ril;

  double kmu;
  double kmu1;
  temme_k_scaled(mu, z, &kmu, &kmu1);
  const double kmup = mu * xi * kmu - kmu1;
  const double imu = xi / (f * kmu - kmup);
  *i_scaled = imu * ril1 / ril;
  for (int j = 1; j <= nl; ++j) {
    const double next = (mu + j) * xi2 * kmu1 + kmu;
    kmu = kmu1;
    kmu1 = next;
  }
  *k_scaled = kmu;
}

double bessel_k_scaled(double nu, double z) { return k_scaled_nonneg(std::abs(nu), z); }

double bessel_i_scaled(double nu, double z) {
  if (nu < 0.0) {
    const double anu = -nu;
    const double base = bessel_i_scaled(anu, z);
    if (anu == std::floor(anu)) return base;
    return base + (2.0 / kPi) * std::sin(anu * kPi) * std::exp(-2.0 * z) * bessel_k_scaled(anu, z);
  }
  if (z <= series_switch(nu)) return bessel_i_series_scaled(nu, z);
  bool converged = false;
  const double asym = bessel_i_asymptotic_scaled(nu, z, &converged);
  if (converged) return asym;
  double i_s;
  double k_s;
  bessel_ik_cf_scaled(nu, z, &i_s, &k_s);
  return i_s;
}

SpecialValue bessel_i(Order order, double z, Scaling scaling) {
  check_argument(z);
  const double nu = order.value();
  const double scaled = bessel_i_scaled(nu, z);
  SpecialValue out;
  const double rel = 64.0 * kEps * (1.0 + std::abs(nu));
  if (scaling == Scaling::Exponential) {
    out.value = scaled;
    out.scaled = true;
  } else {
    out.value = scaled * std::exp(z);
    out.scaled = false;
  }
  out.abs_err = rel * std::abs(out.value);
  return out;
}

SpecialValue bessel_k(Order order, double z, Scaling scaling) {
  check_argument(z);
  const double scaled = bessel_k_scaled(order.value(), z);
  SpecialValue out;
  if (scaling == Scaling::Exponential) {
    out.value = scaled;
    out.scaled = true;
  } else {
    out.value = scaled * std::exp(-z);
    out.scaled = false;
  }
  out.abs_err = 64.0 * kEps * (1.0 + std::abs(order.value())) * std::abs(out.value);
  return out;
}

namespace {

// S(beta + h, beta) from the Taylor expansion of the Bessel equation about beta,
// with S = 0 and dS/dalpha = 1/beta at alpha = beta. Valid for h < beta.
double bracket_taylor(double nu, double beta, double h) {
  const double b2 = beta * beta;
  const double nu2 = nu * nu;
  double cm2 = 0.0;  // c_{m-2}
  double cm1 = 0.0;  // c_{m-1}
  double cm = 0.0;   // c_m, m = 0
  double cp1 = 1.0 / beta;  // c_{m+1}
  double sum = cp1 * h;
  double hp = h;  // h^{m+1}
  for (int m = 0; m < 200; ++m) {
    const double dm = m;
    const double cp2 = (-beta * (dm + 1.0) * (2.0 * dm + 1.0) * cp1 + (b2 + nu2 - dm * dm) * cm +
                        2.0 * beta * cm1 + cm2) /
                       (b2 * (dm + 1.0) * (dm + 2.0));
    hp *= h;
    const double term = cp2 * hp;
    sum += term;
    cm2 = cm1;
    cm1 = cm;
    cm = cp1;
    cp1 = cp2;
    if (m > 2 && std::abs(term) < 0.25 * kEps * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace

SpecialValue bracket_s(Order order, double alpha, double beta, Scaling scaling) {
  check_argument(alpha);
  check_argument(beta);
  if (beta > alpha) {
    throw Error(ErrorCode::ArgumentOrderViolated,
                "bracket_s requires beta <= alpha (got alpha=" + std::to_string(alpha) +
                    ", beta=" + std::to_string(beta) + ")");
  }
  const double nu = std::abs(order.value());
  const double h = alpha - beta;
  SpecialValue out;
  out.scaled = scaling == Scaling::Exponential;
  if (h == 0.0) {
    out.value = 0.0;
    return out;
  }
  double scaled;
  if (h < 0.1 * beta && h < 1.0) {
    scaled = bracket_taylor(nu, beta, h) * std::exp(-h);
  } else {
    const double ia = bessel_i_scaled(nu, alpha);
    const double kb = bessel_k_scaled(nu, beta);
    const double ka = bessel_k_scaled(nu, alpha);
    const double ib = bessel_i_scaled(nu, beta);
    scaled = ia * kb - std::exp(-2.0 * h) * ka * ib;
  }
  out.value = out.scaled ? scaled : scaled * std::exp(h);
  out.abs_err = 128.0 * kEps * (1.0 + nu) * std::abs(out.value);
  return out;
}

EvalResult incomplete_gamma(GammaKind kind, double exponent, double bound) {
  if (!(exponent > -1.0) || !std::isfinite(exponent)) {
    throw Error(ErrorCode::ExponentOutOfRange, "exponent must exceed -1, got " + std::to_string(exponent));
  }
  check_argument(bound);
  const double a = exponent + 1.0;
  EvalResult r;
  r.method = Method::ClosedForm;
  r.value = kind == GammaKind::Lower ? boost::math::tgamma_lower(a, bound) : boost::math::tgamma(a, bound);
  r.abs_err = 16.0 * kEps * std::abs(r.value);
  return r;
}

// ---------------------------------------------------------------------------
// Complex kernels used by contour inversion.

cplx lgamma(cplx z) {
  if (z.real() < 0.5) {
    // Reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z).
    return std::log(kPi / std::sin(kPi * z)) - lgamma(1.0 - z);
  }
  cplx shift = 0.0;
  while (std::abs(z) < 12.0) {
    shift += std::log(z);
    z += 1.0;
  }
  const cplx zi = 1.0 / z;
  const cplx zi2 = zi * zi;
  // Stirling series through the z^{-13} term.
  const cplx series =
      zi * (1.0 / 12.0 +
            zi2 * (-1.0 / 360.0 +
                   zi2 * (1.0 / 1260.0 +
                          zi2 * (-1.0 / 1680.0 +
                                 zi2 * (1.0 / 1188.0 + zi2 * (-691.0 / 360360.0 + zi2 * (1.0 / 156.0)))))));
  return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * kPi) + series - shift;
}

cplx bessel_k_scaled(double nu, cplx z) {
  const double anu = std::abs(nu);
  if (std::abs(z) > 25.0 + anu * anu) {
    bool converged = false;
    const cplx sum = hankel_sum(anu, z, 1.0, &converged);
    if (converged) return std::sqrt(kPi / (2.0 * z)) * sum;
  }
  return k_scaled_nonneg(anu, z);
}

cplx log_bessel_i_scaled(cplx nu, double r) {
  if (r > 30.0 + std::norm(nu)) {
    bool converged = false;
    const cplx sum = hankel_sum(nu, r, -1.0, &converged);
    if (converged) return std::log(sum) - 0.5 * std::log(2.0 * kPi * r);
  }
  const double q = 0.25 * r * r;
  cplx term = 1.0;
  cplx sum = 1.0;
  for (int k = 1; k < kMaxIter; ++k) {
    term *= q / (static_cast<double>(k) * (static_cast<double>(k) + nu));
    sum += term;
    if (std::abs(term) < 0.5 * kEps * std::abs(sum) && k > 0.5 * r) break;
  }
  return nu * std::log(0.5 * r) - lgamma(nu + 1.0) - r + std::log(sum);
}

cplx bessel_i_scaled(cplx nu, double r) { return std::exp(log_bessel_i_scaled(nu, r)); }

cplx bessel_i_scaled(double nu, cplx z) {
  nu = std::abs(nu);
  if (std::abs(z) <= 2.0) {
    const cplx q = 0.25 * z * z;
    cplx term = 1.0;
    cplx sum = 1.0;
    for (int k = 1; k < 200; ++k) {
      term *= q / (k * (k + nu));
      sum += term;
      if (std::abs(term) < 0.5 * kEps * std::abs(sum)) break;
    }
    return std::exp(nu * std::log(0.5 * z) - std::lgamma(nu + 1.0) - z) * sum;
  }
  // I_{nu+1}/I_nu by continued fraction (modified Lentz), then the Wronskian
  // I_nu K_{nu+1} + I_{nu+1} K_nu = 1/z.
  const cplx zi2 = 2.0 / z;
  constexpr double kTiny = 1e-300;
  cplx b = (nu + 1.0) * zi2;
  cplx f = b;
  cplx c = f;
  cplx d = 0.0;
  int i = 1;
  for (; i < kMaxIter; ++i) {
    b += zi2;
    d = b + d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + 1.0 / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const cplx del = c * d;
    f *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  if (i == kMaxIter) {
    throw Error(ErrorCode::QuadratureNonConvergent, "continued fraction for I_{nu+1}/I_nu did not converge");
  }
  const cplx ratio = 1.0 / f;
  cplx k1;
  const cplx k0 = k_scaled_nonneg(nu, z, &k1);
  return 1.0 / (z * (k1 + ratio * k0));
}

}  // namespace hbmgreen::specfun
