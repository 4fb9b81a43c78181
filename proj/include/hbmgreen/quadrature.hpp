#pragma once

// Adaptive quadrature. Globally adaptive bisection on 21-point Gauss-Kronrod
// panels (nodes from Boost.Math), with the QUADPACK error heuristic and a
// roundoff floor so tolerances near machine precision terminate instead of
// recursing forever.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hbmgreen/types.hpp"

namespace hbmgreen::quad {

struct Result {
  double value = 0.0;
  double abs_err = 0.0;
  int intervals = 0;
  bool converged = true;
};

inline constexpr int kMaxIntervals = 400;

namespace detail {

struct Panel {
  double a, b, value, err, resabs;
};

template <class F>
Panel gk21(F& f, double a, double b) {
  using K = boost::math::quadrature::gauss_kronrod<double, 21>;
  using G = boost::math::quadrature::gauss<double, 10>;
  const auto& x = K::abscissa();
  const auto& wk = K::weights();
  const auto& wg = G::weights();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double fc = f(c);
  double rk = fc * wk[0], rabs = std::abs(rk);
  double fv[21];
  fv[0] = fc;
  double rg = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    double fp = f(c + h * x[i]), fm = f(c - h * x[i]);
    fv[2 * i - 1] = fp;
    fv[2 * i] = fm;
    rk += wk[i] * (fp + fm);
    rabs += wk[i] * (std::abs(fp) + std::abs(fm));
    if (i % 2 == 1) rg += wg[i / 2] * (fp + fm);
  }
  double mean = 0.5 * rk;
  double resasc = wk[0] * std::abs(fc - mean);
  for (std::size_t i = 1; i < x.size(); ++i)
    resasc += wk[i] * (std::abs(fv[2 * i - 1] - mean) + std::abs(fv[2 * i] - mean));
  rk *= h;
  rg *= h;
  rabs *= std::abs(h);
  resasc *= std::abs(h);
  double err = std::abs(rk - rg);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double eps = std::numeric_limits<double>::epsilon();
  if (rabs > std::numeric_limits<double>::min() / (50 * eps)) err = std::max(err, 50 * eps * rabs);
  return {a, b, rk, err, rabs};
}

}  // namespace detail

/// Adaptive integral of f over the finite interval [a, b]. Stops when the
/// summed error estimate is below max(abs_tol, rel_tol * |I|), when every
/// panel sits at its roundoff floor, or after max_intervals panels (in which
/// case `converged` is false).
template <class F>
Result gk(F&& f, double a, double b, double rel_tol, double abs_tol = 0.0,
          int max_intervals = kMaxIntervals) {
  Result out;
  if (!(b > a)) return out;
  std::vector<detail::Panel> panels;
  panels.reserve(64);
  panels.push_back(detail::gk21(f, a, b));
  const double eps = std::numeric_limits<double>::epsilon();
  for (;;) {
    double total = 0.0, err = 0.0, floor_err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      total += panels[i].value;
      err += panels[i].err;
      floor_err += 50 * eps * panels[i].resabs;
      if (panels[i].err > panels[worst].err) worst = i;
    }
    out.value = total;
    out.abs_err = err;
    out.intervals = static_cast<int>(panels.size());
    if (!std::isfinite(total)) {
      throw Error(ErrorCode::QuadratureNonConvergent, "non-finite integrand");
    }
    if (err <= std::max(abs_tol, rel_tol * std::abs(total))) break;
    if (err <= 2.0 * floor_err) break;
    if (static_cast<int>(panels.size()) >= max_intervals) {
      out.converged = false;
      break;
    }
    detail::Panel p = panels[worst];
    double m = 0.5 * (p.a + p.b);
    if (!(m > p.a && m < p.b)) {
      out.converged = false;
      break;
    }
    panels[worst] = detail::gk21(f, p.a, m);
    panels.push_back(detail::gk21(f, m, p.b));
  }
  return out;
}

/// gk, raising QuadratureNonConvergent when the panel budget runs out before
/// the requested accuracy is reached.
template <class F>
Result gk_checked(F&& f, double a, double b, double rel_tol, double abs_tol = 0.0,
                  int max_intervals = kMaxIntervals) {
  Result r = gk(f, a, b, rel_tol, abs_tol, max_intervals);
  if (!r.converged && r.abs_err > 100.0 * std::max(abs_tol, rel_tol * std::abs(r.value))) {
    throw Error(ErrorCode::QuadratureNonConvergent,
                "estimated error " + std::to_string(r.abs_err) + " on [" + std::to_string(a) +
                    ", " + std::to_string(b) + "]");
  }
  return r;
}

/// Integral over [lo, hi] (possibly wide) of a function that decays away from
/// `center`. Panels of the given width are added outward until a panel
/// contributes less than `tail` of the running total and the integrand at the
/// edge is below `tail` of the running maximum.
template <class F>
Result line(F&& f, double center, double width, double rel_tol, double tail = 1e-16,
            double lo = -800.0, double hi = 800.0) {
  Result total;
  total.intervals = 0;
  center = std::clamp(center, lo, hi);
  double running_max = std::abs(f(center));
  auto panel = [&](double a, double b) {
    Result r = gk(f, a, b, rel_tol);
    total.value += r.value;
    total.abs_err += r.abs_err;
    total.intervals += r.intervals;
    total.converged = total.converged && r.converged;
    return r.value;
  };
  for (int dir : {-1, 1}) {
    double edge = center;
    for (int k = 0; k < 100000; ++k) {
      double next = std::clamp(edge + dir * width, lo, hi);
      if (next == edge) break;
      double contrib = std::abs(panel(std::min(edge, next), std::max(edge, next)));
      double fe = std::abs(f(next));
      running_max = std::max(running_max, fe);
      edge = next;
      if (k > 0 && contrib <= tail * std::abs(total.value) && fe <= tail * running_max) break;
    }
  }
  return total;
}

}  // namespace hbmgreen::quad
