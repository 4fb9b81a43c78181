#include "doctest.h"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "common.hpp"
#include "hbmgreen/hypgreen.hpp"

using namespace hbmgreen;
using namespace hbmgreen::hypgreen;
using testutil::code_of;
using testutil::rel;

namespace {

HyperbolicPoint pt(std::vector<double> tilde, double h) { return {std::move(tilde), h}; }

}  // namespace

TEST_CASE("hyperbolic distance") {
  CHECK(hyperbolic_distance(pt({0.0}, 1.0), pt({0.0}, std::exp(1.0))) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(hyperbolic_distance(pt({0.3, 1.0}, 2.0), pt({0.3, 1.0}, 2.0)) == 0.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uh(-2.0, 2.0), ulog(-3.0, 3.0);
  auto draw = [&] { return pt({uh(rng), uh(rng)}, std::exp(ulog(rng))); };
  for (int i = 0; i < 100; ++i) {
    auto x = draw(), y = draw(), z = draw();
    double dxy = hyperbolic_distance(x, y), dyz = hyperbolic_distance(y, z), dxz = hyperbolic_distance(x, z);
    CHECK(dxz <= dxy + dyz + 1e-12);
    CHECK(dxy == doctest::Approx(hyperbolic_distance(y, x)).epsilon(1e-14));
    CHECK(dxy == doctest::Approx(hyperbolic_distance(dilate(x, 3.7), dilate(y, 3.7))).epsilon(1e-12));
  }
}

TEST_CASE("distance to the boundary of the domain") {
  auto p = ModelParams::make(3, 0.0, 2.0);
  CHECK(boundary_distance(p, pt({1.0, 1.0}, 2.0)) == 0.0);
  CHECK(boundary_distance(p, pt({1.0, 1.0}, 2.0 * std::exp(1.0))) == doctest::Approx(1.0).epsilon(1e-14));
  // cosh of the distance to the mirror point below the barrier is cosh(2 delta).
  auto x = pt({0.5, -0.2}, 5.0);
  double delta = boundary_distance(p, x);
  auto mirror = pt({0.5, -0.2}, p.a * p.a / x.height);
  CHECK(hyperbolic_distance(x, mirror) == doctest::Approx(2.0 * delta).epsilon(1e-13));
  CHECK(code_of([&] { boundary_distance(p, pt({0.0, 0.0}, 1.0)); }) == ErrorCode::BelowBarrier);
}

TEST_CASE("comparators at simple points") {
  auto x = pt({0.0, 0.0}, 2.0), y = pt({0.0, 0.0}, 3.0);
  auto p = ModelParams::make(3, 0.0, 1.0);
  CHECK(potential_comparator(p, x, y).value == doctest::Approx(std::sqrt(12.0)).epsilon(1e-14));
  CHECK(green_comparator(p, x, y).value == doctest::Approx(std::sqrt(12.0)).epsilon(1e-14));
  // The comparators accept a = 0.
  CHECK(potential_comparator(ModelParams::make(3, 0.0, 0.0), x, y).value > 0.0);
  CHECK(code_of([&] { green_comparator_distance(p, x, y); }) == ErrorCode::DomainError);
  CHECK(code_of([&] { green_comparator(ModelParams::make(2, 0.5, 1.0), pt({0.0}, 2.0), pt({1.0}, 2.0)); }) ==
        ErrorCode::DimensionTooLow);
  auto q = ModelParams::make(3, 0.5, 1.0);
  CHECK(green_comparator_distance(q, x, y).value > 0.0);
}

TEST_CASE("potential kernel against closed forms") {
  // n = 3: e^{-nu d} / (2 pi sinh d);  n = 2, lambda = 0: (1/pi) ln coth(d/2).
  for (double lambda : {0.0, 0.5, 2.0}) {
    auto p = ModelParams::make(3, lambda, 1.0);
    for (auto y : {pt({0.5, 0.0}, 1.5), pt({3.0, -1.0}, 0.2), pt({0.0, 0.0}, 40.0)}) {
      auto x = pt({0.0, 0.0}, 1.0);
      double d = hyperbolic_distance(x, y);
      CHECK(rel(potential_kernel(p, x, y).value, std::exp(-p.nu() * d) / (2 * std::numbers::pi * std::sinh(d))) <
            1e-8);
    }
  }
  auto p2 = ModelParams::make(2, 0.0, 1.0);
  for (auto y : {pt({0.5}, 1.5), pt({2.0}, 0.3)}) {
    auto x = pt({0.0}, 1.0);
    double d = hyperbolic_distance(x, y);
    CHECK(rel(potential_kernel(p2, x, y).value, std::log(1.0 / std::tanh(d / 2)) / std::numbers::pi) < 1e-8);
  }
}

TEST_CASE("Green function: ordering, symmetry and isometries") {
  auto x = pt({0.0, 0.0}, 2.0);
  for (double lambda : {0.0, 0.5}) {
    auto p = ModelParams::make(3, lambda, 1.0);
    for (auto y : {pt({1.0, 0.0}, 3.0), pt({0.2, 0.3}, 1.1), pt({5.0, 0.0}, 8.0)}) {
      double g = green_function(p, x, y).value;
      CHECK(g > 0.0);
      CHECK(g <= potential_kernel(p, x, y).value);
      CHECK(rel(green_function(p, y, x).value, g) < 1e-6);
      CHECK(rel(green_function(p, x, y, Route::ViaBessel).value, g) < 1e-6);
      // Dilation maps {x_n > a} onto {x_n > c a}; horizontal shifts are isometries too.
      CHECK(rel(green_function(with_barrier(p, 2.5), dilate(x, 2.5), dilate(y, 2.5)).value, g) < 1e-6);
      auto xs = pt({1.0, -2.0}, x.height), ys = pt({y.tilde[0] + 1.0, y.tilde[1] - 2.0}, y.height);
      CHECK(rel(green_function(p, xs, ys).value, g) < 1e-9);
    }
  }
  auto y = pt({1.0, 0.0}, 3.0);
  double prev = 1e300;
  for (double lambda : {0.0, 0.1, 1.0, 5.0}) {
    double u = potential_kernel(ModelParams::make(4, lambda, 1.0), pt({0.0, 0.0, 0.0}, 2.0), pt({1.0, 0.0, 0.0}, 3.0)).value;
    CHECK(u < prev);
    prev = u;
  }
}

TEST_CASE("integral of the Green function over a cell") {
  auto p = ModelParams::make(3, 0.5, 1.0);
  auto x = pt({0.0, 0.0}, 2.0);
  Cell c{{0.6, -0.1}, {0.8, 0.1}, 2.2, 2.5};
  // Product Gauss rule against dV = dy / y_n^3.
  using G = boost::math::quadrature::gauss<double, 7>;  // odd order: abscissa()[0] == 0
  double sum = 0.0;
  for (std::size_t i = 0; i < G::abscissa().size(); ++i)
    for (int si : {-1, 1}) {
      if (i == 0 && si < 0) continue;  // the middle node is listed once
      double h = 0.5 * (c.h_lo + c.h_hi) + si * 0.5 * (c.h_hi - c.h_lo) * G::abscissa()[i];
      double wh = G::weights()[i] * 0.5 * (c.h_hi - c.h_lo);
      for (std::size_t j = 0; j < G::abscissa().size(); ++j)
        for (int sj : {-1, 1}) {
          if (j == 0 && sj < 0) continue;
          double u = 0.7 + sj * 0.1 * G::abscissa()[j], wu = G::weights()[j] * 0.1;
          for (std::size_t k = 0; k < G::abscissa().size(); ++k)
            for (int sk : {-1, 1}) {
              if (k == 0 && sk < 0) continue;
              double v = sk * 0.1 * G::abscissa()[k], wv = G::weights()[k] * 0.1;
              sum += wh * wu * wv * green_function(p, x, pt({u, v}, h)).value / (h * h * h);
            }
        }
    }
  CHECK(rel(green_cell_integral(p, x, c).value, sum) < 1e-5);
  CHECK(cell_volume(c) == doctest::Approx(0.2 * 0.2 * 0.5 * (1 / (2.2 * 2.2) - 1 / (2.5 * 2.5))).epsilon(1e-14));
}

TEST_CASE("argument validation") {
  auto p = ModelParams::make(3, 0.5, 1.0);
  CHECK(code_of([] { ModelParams::make(1, 0.0, 1.0); }) == ErrorCode::DimensionTooLow);
  CHECK(code_of([&] { green_function(p, pt({0.0, 0.0}, 0.5), pt({0.0, 0.0}, 2.0)); }) == ErrorCode::BelowBarrier);
  CHECK(code_of([&] { green_function(p, pt({0.0, 0.0}, 2.0), pt({0.0, 0.0}, 2.0)); }) == ErrorCode::DiagonalSingularity);
  CHECK(code_of([&] { potential_kernel(p, pt({0.0}, 2.0), pt({0.0, 0.0}, 3.0)); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { green_function(ModelParams::make(3, 0.5, 0.0), pt({0.0, 0.0}, 2.0), pt({1.0, 0.0}, 2.0)); }) ==
        ErrorCode::DomainError);
}
