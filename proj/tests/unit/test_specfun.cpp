#include "doctest.h"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "common.hpp"
#include "hbmgreen/specfun.hpp"

using namespace hbmgreen;
using namespace hbmgreen::specfun;
using testutil::code_of;
using testutil::rel;

namespace {

// Defining series in long double, unscaled.
long double series_i(long double nu, long double z) {
  long double term = std::pow(z / 2, nu) / std::tgamma(nu + 1), sum = term;
  for (int k = 1; k < 400; ++k) {
    term *= (z * z / 4) / (k * (k + nu));
    sum += term;
    if (term < 1e-22L * sum) break;
  }
  return sum;
}

// K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt.
double integral_k(double nu, double z) {
  boost::math::quadrature::exp_sinh<double> q;
  return q.integrate([&](double t) {
    double c = z * std::cosh(t);
    if (!(c < 700.0)) return 0.0;
    return 0.5 * (std::exp(nu * t - c) + std::exp(-nu * t - c));
  });
}

}  // namespace

TEST_CASE("half-integer orders match elementary forms") {
  const double pi = std::numbers::pi;
  CHECK(bessel_i(Order(0.5), 1.0).value == doctest::Approx(std::sqrt(2 / pi) * std::sinh(1.0)).epsilon(1e-14));
  CHECK(bessel_i(Order(0.5), 1.0).value == doctest::Approx(0.937674).epsilon(1e-6));
  CHECK(bessel_k(Order(0.5), 1.0).value == doctest::Approx(std::sqrt(pi / 2) * std::exp(-1.0)).epsilon(1e-14));
  CHECK(bessel_k(Order(0.5), 1.0).value == doctest::Approx(0.461069).epsilon(1e-6));
}

TEST_CASE("I against its defining series") {
  for (double nu : {0.0, 0.3, 1.0, 2.5, 7.0, 30.0})
    for (double z : {0.01, 0.5, 2.0, 9.0, 25.0, 60.0}) {
      double ref = static_cast<double>(series_i(nu, z) * std::exp(-static_cast<long double>(z)));
      CHECK(rel(bessel_i(Order(nu), z, Scaling::Exponential).value, ref) < 1e-12);
    }
}

TEST_CASE("K against its integral representation") {
  CHECK(rel(bessel_k(Order(1.0), 2.0).value, integral_k(1.0, 2.0)) < 1e-12);
  for (double nu : {0.0, 0.3, 1.7, 4.0})
    for (double z : {0.05, 1.0, 3.0, 20.0}) CHECK(rel(bessel_k(Order(nu), z).value, integral_k(nu, z)) < 1e-11);
}

TEST_CASE("K is even in the order") {
  for (double z : {0.1, 2.0, 50.0}) CHECK(bessel_k(Order(0.3), z).value == bessel_k(Order(-0.3), z).value);
}

TEST_CASE("scaled values stay finite where unscaled ones overflow") {
  auto big = bessel_i(Order(1.0), 800.0, Scaling::Exponential);
  CHECK(big.scaled);
  // Hankel expansion, three terms: the remainder is O(z^-3).
  const double z = 800.0, m = 4.0;
  double hankel = (1.0 - (m - 1) / (8 * z) + (m - 1) * (m - 9) / (2 * 64 * z * z)) / std::sqrt(2 * std::numbers::pi * z);
  CHECK(rel(big.value, hankel) < 1e-8);
  auto k = bessel_k(Order(2.0), 800.0, Scaling::Exponential);
  CHECK(std::isfinite(k.value));
  CHECK(k.value > 0.0);
}

TEST_CASE("series and large-argument branches agree across the switch") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unu(0.0, 20.0), ufac(0.7, 1.3);
  for (int i = 0; i < 100; ++i) {
    double nu = unu(rng), z = series_switch(nu) * ufac(rng);
    double ci = 0.0, ck = 0.0;
    bessel_ik_cf_scaled(nu, z, &ci, &ck);
    CHECK(rel(bessel_i_series_scaled(nu, z), ci) < 1e-9);
  }
}

TEST_CASE("Wronskian I K' - I' K = -1/z") {
  for (double nu : {0.0, 1.5, 10.0})
    for (double z : {0.3, 4.0, 40.0}) {
      double k = bessel_k(Order(nu), z).value;
      double ip = bessel_i(Order(nu + 1), z).value + nu / z * bessel_i(Order(nu), z).value;
      double kp = -bessel_k(Order(nu + 1), z).value + nu / z * k;
      CHECK(rel(bessel_i(Order(nu), z).value * kp - ip * k, -1.0 / z) < 1e-12);
    }
}

TEST_CASE("bracket S") {
  CHECK(bracket_s(Order(1.0), 2.0, 2.0).value == 0.0);
  double s = bracket_s(Order(1.0), 2.0, 1.0).value;
  double ref = boost::math::cyl_bessel_i(1.0, 2.0) * boost::math::cyl_bessel_k(1.0, 1.0) -
               boost::math::cyl_bessel_k(1.0, 2.0) * boost::math::cyl_bessel_i(1.0, 1.0);
  CHECK(s > 0.0);
  CHECK(rel(s, ref) < 1e-13);
  // Near the diagonal: S(b + h, b) = h/b - h^2/(2 b^2) + O(h^3).
  for (double h : {1e-3, 1e-5, 1e-8}) {
    double b = 1.0;
    CHECK(rel(bracket_s(Order(0.7), b + h, b).value, h / b - h * h / (2 * b * b)) < 1e-5);
  }
  // Scaled form at large, well-separated arguments.
  auto sc = bracket_s(Order(2.0), 300.0, 200.0, Scaling::Exponential);
  // K(alpha) I(beta) is e^{-200} smaller than the leading product.
  double ref2 = boost::math::cyl_bessel_i(2.0, 300.0) * boost::math::cyl_bessel_k(2.0, 200.0) * std::exp(-100.0);
  CHECK(sc.scaled);
  CHECK(rel(sc.value, ref2) < 1e-12);
}

TEST_CASE("incomplete gamma") {
  auto lo = incomplete_gamma(GammaKind::Lower, 0.0, 1.0);
  CHECK(rel(lo.value, 1.0 - std::exp(-1.0)) < 1e-13);
  auto up = incomplete_gamma(GammaKind::Upper, 0.0, 2.0);
  CHECK(rel(up.value, std::exp(-2.0)) < 1e-13);
  auto g = incomplete_gamma(GammaKind::Lower, 1.5, 0.5);
  CHECK(rel(g.value, boost::math::tgamma_lower(2.5, 0.5)) < 1e-12);
  for (double e : {-0.9, -0.5, 0.0, 2.0, 10.0})
    for (double b : {0.01, 1.0, 5.0, 40.0}) {
      double sum = incomplete_gamma(GammaKind::Lower, e, b).value + incomplete_gamma(GammaKind::Upper, e, b).value;
      CHECK(rel(sum, std::tgamma(e + 1.0)) < 1e-12);
    }
}

TEST_CASE("incomplete gamma is comparable to its two-sided profile") {
  for (double e : {-0.5, 0.0, 1.0, 2.0}) {
    double lo_min = 1e300, lo_max = 0.0, up_min = 1e300, up_max = 0.0;
    for (double b = 1e-3; b < 1e3; b *= 1.5) {
      double rl = incomplete_gamma(GammaKind::Lower, e, b).value / std::pow(std::min(1.0, b), e + 1.0);
      double ru = incomplete_gamma(GammaKind::Upper, e, b).value / (std::pow(b + 1.0, e) * std::exp(-b));
      lo_min = std::min(lo_min, rl), lo_max = std::max(lo_max, rl);
      up_min = std::min(up_min, ru), up_max = std::max(up_max, ru);
    }
    CHECK(lo_max / lo_min < 10.0 * std::tgamma(e + 2.0));  // constants grow with the exponent
    CHECK(up_max / up_min < 10.0);
  }
}

TEST_CASE("argument validation") {
  CHECK(code_of([] { Order(250.0); }) == ErrorCode::OrderOutOfRange);
  CHECK(code_of([] { Order(std::nan("")); }) == ErrorCode::OrderOutOfRange);
  CHECK(code_of([] { bessel_i(Order(1.0), -1.0); }) == ErrorCode::NonPositiveArgument);
  CHECK(code_of([] { bessel_k(Order(1.0), 0.0); }) == ErrorCode::NonPositiveArgument);
  CHECK(code_of([] { bracket_s(Order(1.0), 1.0, 2.0); }) == ErrorCode::ArgumentOrderViolated);
  CHECK(code_of([] { incomplete_gamma(GammaKind::Lower, -1.5, 1.0); }) == ErrorCode::ExponentOutOfRange);
}

TEST_CASE("complex-argument K reduces to the real one on the axis") {
  for (double nu : {0.0, 0.5, 2.3})
    for (double z : {0.2, 3.0, 30.0}) {
      auto c = bessel_k_scaled(nu, std::complex<double>(z, 0.0));
      CHECK(rel(c.real(), bessel_k_scaled(nu, z)) < 1e-11);
      CHECK(std::abs(c.imag()) < 1e-12 * std::abs(c.real()));
    }
}
