#include "doctest.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "common.hpp"
#include "hbmgreen/besselproc.hpp"
#include "hbmgreen/laplace.hpp"

using namespace hbmgreen;
using namespace hbmgreen::besselproc;
using testutil::code_of;
using testutil::rel;

namespace {

double gauss(double t, double z) { return std::exp(-z * z / (2 * t)) / std::sqrt(2 * std::numbers::pi * t); }

KernelQuery lebesgue(double t, double x, double y, double a = 0.0) { return {t, x, y, a, Measure::Lebesgue}; }
KernelQuery speed(double t, double x, double y, double a = 0.0) { return {t, x, y, a, Measure::Speed}; }

}  // namespace

TEST_CASE("index one half is Brownian motion killed at the barrier") {
  auto idx = BesselIndex::make(0.5);
  const double a = 1.0;
  for (double t : {0.05, 0.5, 4.0})
    for (double x : {1.1, 2.0})
      for (double y : {1.05, 1.7, 4.0}) {
        double ref = gauss(t, y - x) - gauss(t, x + y - 2 * a);
        for (auto m : {KilledMethod::Decomposition, KilledMethod::Resolvent})
          CHECK(std::abs(killed_density(idx, lebesgue(t, x, y, a), m).value - ref) < 1e-8 * gauss(t, 0.0));
      }
  for (double s : {0.1, 1.0, 10.0})
    CHECK(rel(hitting_density(idx, 2.0, 1.0, s).value, 1.0 / std::sqrt(2 * std::numbers::pi * s * s * s) *
                                                           std::exp(-1.0 / (2 * s))) < 1e-7);
  // Free kernel: I_{1/2} gives the sinh form.
  CHECK(rel(free_density(idx, lebesgue(0.7, 1.3, 0.4)).value, gauss(0.7, 0.9) - gauss(0.7, 1.7)) < 1e-12);
}

TEST_CASE("Chapman-Kolmogorov for the killed kernel") {
  // p(s, x, z) p(t, z, y) m(dz) with the second factor flipped by speed-measure symmetry.
  auto idx = BesselIndex::make(1.0);
  const double a = 1.0, x = 2.0, y = 3.0, s = 0.5, t = 0.5;
  auto f = [&](double z) {
    if (z <= a) return 0.0;
    return killed_density(idx, speed(s, x, z, a)).value * killed_density(idx, speed(t, y, z, a)).value *
           speed_density(1.0, z);
  };
  using boost::math::quadrature::gauss_kronrod;
  double lhs = gauss_kronrod<double, 31>::integrate(f, a, 12.0, 10, 1e-9);
  double rhs = killed_density(idx, speed(s + t, x, y, a)).value;
  CHECK(rel(lhs, rhs) < 1e-5);
}

TEST_CASE("comparator") {
  auto idx = BesselIndex::make(1.0);
  CHECK(killed_density_comparator(idx, speed(1.0, 2.0, 2.0, 1.0)).value == doctest::Approx(2.0).epsilon(1e-14));
  for (double t : {0.1, 2.0})
    CHECK(killed_density_comparator(idx, speed(t, 1.5, 4.0, 1.0)).value ==
          doctest::Approx(killed_density_comparator(idx, speed(t, 4.0, 1.5, 1.0)).value).epsilon(1e-14));
  CHECK(std::exp(log_killed_density_comparator(idx, speed(0.3, 1.2, 2.5, 1.0))) ==
        doctest::Approx(killed_density_comparator(idx, speed(0.3, 1.2, 2.5, 1.0)).value).epsilon(1e-13));
  CHECK(code_of([&] { killed_density_comparator(idx, speed(1.0, 3.0, 4.0, 2.0)); }) == ErrorCode::BarrierNotUnit);
}

TEST_CASE("killing only removes mass") {
  for (double nu : {0.5, 1.0, 2.5}) {
    auto idx = BesselIndex::make(nu);
    for (double t : {0.1, 1.0, 10.0})
      for (double y : {1.2, 2.0, 5.0}) {
        double k = killed_density(idx, speed(t, 2.0, y, 1.0)).value;
        CHECK(k >= 0.0);
        CHECK(k <= free_density(idx, speed(t, 2.0, y)).value * (1 + 1e-12));
      }
  }
  // A tiny barrier is invisible from x = 2.
  auto idx = BesselIndex::make(1.5);
  CHECK(rel(killed_density(idx, speed(1.0, 2.0, 2.5, 1e-6)).value, free_density(idx, speed(1.0, 2.0, 2.5)).value) < 1e-8);
}

TEST_CASE("decomposition and resolvent routes agree") {
  for (double nu : {0.7, 2.0}) {
    auto idx = BesselIndex::make(nu);
    for (double t : {0.05, 1.0, 20.0})
      for (double y : {1.1, 3.0}) {
        auto q = speed(t, 1.6, y, 1.0);
        auto d = killed_density(idx, q, KilledMethod::Decomposition);
        auto r = killed_density(idx, q, KilledMethod::Resolvent);
        CHECK(std::abs(d.value - r.value) <= 1e-6 * d.value + 1e-14);
        CHECK(std::exp(d.log_value) == doctest::Approx(d.value).epsilon(1e-10));
      }
  }
}

TEST_CASE("hitting time of the barrier has unit mass") {
  for (double nu : {0.5, 1.0, 1.7}) {
    auto idx = BesselIndex::make(nu);
    auto f = [&](double s) { return hitting_density(idx, 2.0, 1.0, s).value; };
    auto mass = laplace::forward(f, 0.0, laplace::TailBound::power(nu + 1.0), 1e-8);
    CHECK(mass.value == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("positive index started at the origin") {
  // 2^{-mu} t^{-mu-1} y^{2mu+1} e^{-y^2/2t} / Gamma(mu+1)
  for (double mu : {0.0, 0.5, 2.0})
    for (double y : {0.3, 1.0, 3.0}) {
      const double t = 0.8;
      double ref = std::pow(2.0, -mu) * std::pow(t, -mu - 1) * std::pow(y, 2 * mu + 1) * std::exp(-y * y / (2 * t)) /
                   std::tgamma(mu + 1);
      CHECK(rel(free_density_positive_index(mu, t, 0.0, y), ref) < 1e-12);
      CHECK(rel(free_density_positive_index(mu, t, 1e-7, y), ref) < 1e-6);
    }
}

TEST_CASE("measure conversion") {
  auto idx = BesselIndex::make(1.3);
  auto s = free_density(idx, speed(0.6, 1.0, 2.0));
  auto l = free_density(idx, lebesgue(0.6, 1.0, 2.0));
  CHECK(rel(convert(s, 1.3, 2.0, Measure::Lebesgue).value, l.value) < 1e-13);
  CHECK(rel(convert(l, 1.3, 2.0, Measure::Speed).value, s.value) < 1e-13);
  CHECK(rel(l.value, s.value * speed_density(1.3, 2.0)) < 1e-13);
}

TEST_CASE("argument validation") {
  CHECK(code_of([] { BesselIndex::make(0.0); }) == ErrorCode::OrderOutOfRange);
  CHECK(code_of([] { BesselIndex::make(250.0); }) == ErrorCode::OrderOutOfRange);
  auto idx = BesselIndex::make(1.0);
  CHECK(code_of([&] { killed_density(idx, speed(1.0, 0.5, 2.0, 1.0)); }) == ErrorCode::BelowBarrier);
  CHECK(code_of([&] { free_density(idx, speed(-1.0, 1.0, 2.0)); }) == ErrorCode::NonPositiveArgument);
}
