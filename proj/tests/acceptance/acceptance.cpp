// Acceptance runner: one PASS/FAIL line per criterion, exit status 0 iff all pass.
// Usage: hbmgreen_acceptance [criterion numbers...]   (default: all)
//
// Reference values come from Boost.Math special functions and Brownian closed
// forms written here, never from the library's own evaluators.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "hbmgreen/besselproc.hpp"
#include "hbmgreen/functionals.hpp"
#include "hbmgreen/hypgreen.hpp"
#include "hbmgreen/laplace.hpp"
#include "hbmgreen/mcsim.hpp"

namespace {

using namespace hbmgreen;
namespace bm = boost::math;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double I(double nu, double z) { return bm::cyl_bessel_i(nu, z); }
double K(double nu, double z) { return bm::cyl_bessel_k(nu, z); }

double gauss(double z, double t) { return std::exp(-z * z / (2 * t)) / std::sqrt(2 * M_PI * t); }

// Log-spaced points; level L+1 interleaves midpoints so level L is a subset.
std::vector<double> logspace(double lo, double hi, int count) {
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i) v[i] = lo * std::pow(hi / lo, count == 1 ? 0.0 : double(i) / (count - 1));
  return v;
}

struct Spread {
  double lo = INFINITY, hi = -INFINITY;
  bool bad = false;  // non-finite or non-positive ratio seen
  void add(double r) {
    if (!std::isfinite(r) || r <= 0) {
      bad = true;
      return;
    }
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  double spread() const { return hi / lo; }
};

// Refinement stability: empirical extremes move by less than 10%.
double shift(const Spread& coarse, const Spread& fine) {
  return std::max(std::abs(fine.lo / coarse.lo - 1), std::abs(fine.hi / coarse.hi - 1));
}
bool stable(const Spread& coarse, const Spread& fine) { return shift(coarse, fine) < 0.1; }

// ---------------------------------------------------------------------------

Outcome hartman_watson() {
  double worst = 0;
  for (double mu : {0.0, 0.5, 1.0, 2.0})
    for (double r : {0.5, 1.0, 5.0}) {
      auto f = [r](double t) { return functionals::hartman_watson_theta(r, t).value; };
      auto tail = mu == 0 ? laplace::TailBound::power(1.5) : laplace::TailBound::exponential(mu * mu / 2);
      double v = laplace::forward(f, mu * mu / 2, tail, 1e-8).value;
      worst = std::max(worst, std::abs(v - I(mu, r)) / I(mu, r));
    }
  return {worst <= 1e-3, fmt("max rel err %.2e over 12 (mu, r) (tol 1e-3)", worst)};
}

Outcome q_transform() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> U(0, 1);
  double worst = 0;
  for (int k = 0; k < 50; ++k) {
    double mu = 2 * U(rng), lam = 1.5 * U(rng), x = 0.2 + 4 * U(rng), y = 0.2 + 4 * U(rng),
           r = 0.3 + 2.7 * U(rng);
    auto dp = functionals::DriftParams::make(mu, lam);
    double nu = dp.nu(), lo = std::min(x, y), hi = std::max(x, y);
    double oracle = 2 / y * std::pow(x / y, mu) * I(nu, r * lo) * K(nu, r * hi);
    auto f = [&](double u) { return functionals::q_potential(dp, x, y, u).value; };
    double v = laplace::forward(f, r * r / 2, laplace::TailBound::exponential(r * r / 2), 1e-10, x * y).value;
    worst = std::max(worst, std::abs(v / oracle - 1));
  }
  return {worst <= 1e-6, fmt("max rel err %.2e over 50 tuples (tol 1e-6)", worst)};
}

Outcome g_transform() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> U(0, 1);
  double worst = 0;
  for (int k = 0; k < 20; ++k) {
    double mu = 2 * U(rng), lam = 1.5 * U(rng), a = 0.3 + 1.7 * U(rng);
    double x = a * (1.05 + 3 * U(rng)), y = a * (1.05 + 3 * U(rng)), r = (0.3 + 2.7 * U(rng)) / a;
    auto dp = functionals::DriftParams::make(mu, lam);
    double nu = dp.nu(), lo = std::min(x, y), hi = std::max(x, y);
    double oracle = 2 / y * std::pow(x / y, mu) *
                    (I(nu, r * lo) * K(nu, r * hi) - K(nu, r * x) * K(nu, r * y) * I(nu, r * a) / K(nu, r * a));
    auto f = [&](double u) { return functionals::green_ab(dp, {x, a, u}, y).value; };
    double v = laplace::forward(f, r * r / 2, laplace::TailBound::exponential(r * r / 2), 1e-8, x * y).value;
    worst = std::max(worst, std::abs(v / oracle - 1));
  }
  return {worst <= 1e-4, fmt("max rel err %.2e over 20 tuples (tol 1e-4)", worst)};
}

Outcome reflection() {
  // nu = 1/2: the process is Brownian motion until it hits a, speed measure = Lebesgue.
  const double a = 1.0;
  const auto idx = besselproc::BesselIndex::make(0.5);
  const std::vector<double> ts{0.1, 0.3, 1, 3, 10}, pts{1.1, 1.5, 2, 3, 5};
  double wk = 0, wr = 0, wh = 0;
  for (double t : ts)
    for (double x : pts) {
      double h = (x - a) / std::sqrt(2 * M_PI * t * t * t) * std::exp(-(x - a) * (x - a) / (2 * t));
      wh = std::max(wh, std::abs(besselproc::hitting_density(idx, x, a, t).value / h - 1));
      for (double y : pts) {
        double p = gauss(x - y, t) - gauss(x + y - 2 * a, t);
        besselproc::KernelQuery q{t, x, y, a};
        wk = std::max(wk, std::abs(besselproc::killed_density(idx, q).value / p - 1));
        wr = std::max(wr, std::abs(
                              besselproc::killed_density(idx, q, besselproc::KilledMethod::Resolvent).value / p - 1));
      }
    }
  double w = std::max({wk, wr, wh});
  return {w <= 1e-5, fmt("max rel err killed %.2e / resolvent %.2e / hitting %.2e on 5x5x5 (tol 1e-5)", wk, wr, wh)};
}

Outcome chapman() {
  const double a = 1.0;
  struct Case {
    double t, s, x, z;
  };
  const std::vector<Case> cases{{0.3, 0.5, 1.4, 2.0}, {1.0, 2.0, 2.0, 3.0}, {0.05, 0.1, 1.2, 1.3}};
  double worst = 0;
  for (double nu : {0.5, 1.0, 1.5}) {
    auto idx = besselproc::BesselIndex::make(nu);
    for (const auto& c : cases) {
      auto p = [&](double t, double x, double y) { return besselproc::killed_density(idx, {t, x, y, a}).value; };
      // p(s, y, z) = p(s, z, y) against the speed measure; both factors then
      // start from a fixed point, which keeps the first-passage tables reused.
      auto f = [&](double y) { return p(c.t, c.x, y) * p(c.s, c.z, y) * std::pow(y, 1 - 2 * nu); };
      double top = std::max(c.x, c.z) + 14 * std::sqrt(std::max(c.t, c.s));
      double lhs = bm::quadrature::gauss_kronrod<double, 31>::integrate(f, a, top, 10, 1e-9);
      double rhs = p(c.t + c.s, c.x, c.z);
      worst = std::max(worst, std::abs(lhs / rhs - 1));
    }
  }
  return {worst <= 1e-4, fmt("max relative defect %.2e over 9 cases (tol 1e-4)", worst)};
}

Outcome kernel_comparator() {
  // x, y in (1, 10] with x - 1 log-spaced from 1e-2; t in [0.05, 20].
  bool ok = true;
  std::string out;
  for (double nu : {0.5, 1.0, 2.0}) {
    auto idx = besselproc::BesselIndex::make(nu);
    auto ts = logspace(0.05, 20, 19), gs = logspace(0.01, 9, 19);
    Spread coarse, fine;
    for (int i = 0; i < 19; ++i)
      for (int j = 0; j < 19; ++j)
        for (int k = 0; k < 19; ++k) {
          besselproc::KernelQuery q{ts[k], 1 + gs[i], 1 + gs[j], 1.0};
          // In logs: at the far corners both sides fall below the double range.
          double r = std::exp(besselproc::killed_density(idx, q).log_value -
                              besselproc::log_killed_density_comparator(idx, q));
          fine.add(r);
          if (i % 2 == 0 && j % 2 == 0 && k % 2 == 0) coarse.add(r);
        }
    bool pass = !coarse.bad && !fine.bad && fine.spread() <= 100 && stable(coarse, fine);
    ok = ok && pass;
    out += fmt("nu=%g [%.3g, %.3g] spread %.3g (10^3: [%.3g, %.3g]); ", nu, fine.lo, fine.hi, fine.spread(),
               coarse.lo, coarse.hi);
  }
  return {ok, out + "tol spread 100, shift 10%"};
}

// Pair grid for the Green sweeps: x = (0, h_i), y = (rho e_1, h_j).
struct PairGrid {
  std::vector<double> heights, rhos;
  // Fine grid with (2 nh - 1) heights and (2 nr - 1) offsets; the coarse one is
  // every other node, nh * nh * nr pairs.
  static PairGrid make(int nh, int nr, double h_lo_gap, double h_hi_gap, double barrier) {
    nh = 2 * nh - 1;
    nr = 2 * nr - 1;
    PairGrid g;
    for (double v : logspace(h_lo_gap, h_hi_gap, nh)) g.heights.push_back(barrier + v);
    g.rhos = logspace(1e-3, 1e3, nr);
    return g;
  }
};

hypgreen::HyperbolicPoint point(int n, double rho, double h) {
  hypgreen::HyperbolicPoint p;
  p.tilde.assign(n - 1, 0.0);
  p.tilde[0] = rho;
  p.height = h;
  return p;
}

// Evaluates ratio(x, y) on the fine grid; the coarse grid is every other node.
template <class F>
std::pair<Spread, Spread> sweep(int n, const PairGrid& fine_grid, F&& ratio, std::size_t* count = nullptr) {
  Spread coarse, fine;
  std::size_t coarse_count = 0;
  const auto& H = fine_grid.heights;
  const auto& R = fine_grid.rhos;
  for (std::size_t i = 0; i < H.size(); ++i)
    for (std::size_t j = 0; j < H.size(); ++j)
      for (std::size_t k = 0; k < R.size(); ++k) {
        double r = ratio(point(n, 0.0, H[i]), point(n, R[k], H[j]));
        fine.add(r);
        if (i % 2 == 0 && j % 2 == 0 && k % 2 == 0) {
          coarse.add(r);
          ++coarse_count;
        }
      }
  if (count) *count = coarse_count;
  return {coarse, fine};
}

Outcome green_sweep() {
  bool ok = true;
  std::string out;
  auto grid = PairGrid::make(6, 14, 1e-3, 29, 1.0);
  std::size_t pairs = 0;
  for (int n : {3, 4})
    for (double lam : {0.0, 0.5, 2.0}) {
      auto p = hypgreen::ModelParams::make(n, lam, 1.0);
      auto [c, f] = sweep(n, grid, [&](const auto& x, const auto& y) {
        return hypgreen::green_function(p, x, y).value / hypgreen::green_comparator(p, x, y).value;
      }, &pairs);
      bool pass = !c.bad && !f.bad && f.spread() <= 100 && stable(c, f);
      ok = ok && pass;
      out += fmt("n=%d l=%g spread %.3g shift %.1f%%%s; ", n, lam, f.spread(), 100 * shift(c, f),
                 pass ? "" : " (fail)");
    }
  return {ok, out + fmt("%zu pairs (coarse), tol spread 100, shift 10%%", pairs)};
}

Outcome potential_sweep() {
  bool ok = true;
  std::string out;
  auto grid = PairGrid::make(8, 20, 1e-2, 1e2, 0.0);
  for (int n : {2, 3, 4})
    for (double lam : {0.0, 0.5, 2.0}) {
      auto p = hypgreen::ModelParams::make(n, lam, 1.0);
      auto [c, f] = sweep(n, grid, [&](const auto& x, const auto& y) {
        return hypgreen::potential_kernel(p, x, y).value / hypgreen::potential_comparator(p, x, y).value;
      });
      bool pass = !c.bad && !f.bad && f.spread() <= 100 && stable(c, f);
      ok = ok && pass;
      out += fmt("n=%d l=%g spread %.3g shift %.1f%%%s; ", n, lam, f.spread(), 100 * shift(c, f),
                 pass ? "" : " (fail)");
    }
  return {ok, out + "tol spread 100, shift 10%"};
}

Outcome distance_form() {
  double C = 1;
  auto grid = PairGrid::make(6, 14, 1e-3, 29, 1.0);
  bool bad = false;
  for (int n : {3, 4})
    for (double lam : {0.5, 2.0}) {
      auto p = hypgreen::ModelParams::make(n, lam, 1.0);
      auto [c, f] = sweep(n, grid, [&](const auto& x, const auto& y) {
        return hypgreen::green_comparator_distance(p, x, y).value / hypgreen::green_comparator(p, x, y).value;
      });
      bad = bad || f.bad;
      C = std::max({C, f.hi, 1 / f.lo});
    }
  return {!bad && C <= 50, fmt("C = %.3g (tol 50)", C)};
}

Outcome two_routes() {
  struct Conf {
    int n;
    double lam, a;
    std::vector<double> xt;
    double xh;
    std::vector<double> yt;
    double yh;
  };
  const std::vector<Conf> confs{
      {3, 0.0, 1.0, {0, 0}, 2.0, {1, 0}, 3.0},       {3, 0.5, 1.0, {0, 0}, 2.0, {1, 0}, 3.0},
      {3, 2.0, 1.0, {0, 0}, 1.05, {0.3, 0}, 1.2},    {3, 0.0, 0.5, {0, 0}, 0.8, {4, 1}, 0.6},
      {4, 0.0, 1.0, {0, 0, 0}, 1.5, {0.5, 0, 0}, 1.5}, {4, 0.5, 1.0, {0, 0, 0}, 5.0, {2, 2, 0}, 1.3},
      {4, 2.0, 2.0, {0, 0, 0}, 3.0, {10, 0, 0}, 8.0},  {5, 0.0, 1.0, {0, 0, 0, 0}, 2.0, {1, 1, 0, 0}, 2.5},
      {5, 1.0, 1.0, {0, 0, 0, 0}, 1.2, {0, 0, 0, 0}, 4.0}, {3, 0.25, 1.0, {0, 0}, 20.0, {3, 0}, 25.0},
  };
  double worst = 0;
  for (const auto& c : confs) {
    auto p = hypgreen::ModelParams::make(c.n, c.lam, c.a);
    hypgreen::HyperbolicPoint x{c.xt, c.xh}, y{c.yt, c.yh};
    double f = hypgreen::green_function(p, x, y, hypgreen::Route::ViaFunctional).value;
    double b = hypgreen::green_function(p, x, y, hypgreen::Route::ViaBessel).value;
    worst = std::max(worst, std::abs(f / b - 1));
  }
  return {worst <= 1e-3, fmt("max rel difference %.2e over 10 configurations (tol 1e-3)", worst)};
}

Outcome monte_carlo() {
  struct Conf {
    double lam;
    hypgreen::HyperbolicPoint x;
    hypgreen::Cell cell;
  };
  const std::vector<Conf> confs{
      {0.0, {{0, 0}, 2.0}, {{0.5, -0.5}, {1.5, 0.5}, 2.5, 3.5}},
      {0.5, {{0, 0}, 2.0}, {{0.5, -0.5}, {1.5, 0.5}, 2.5, 3.5}},
      {0.5, {{0, 0}, 1.5}, {{-0.25, -0.25}, {0.25, 0.25}, 1.1, 1.3}},
  };
  bool ok = true;
  std::string out;
  for (std::size_t k = 0; k < confs.size(); ++k) {
    auto p = hypgreen::ModelParams::make(3, confs[k].lam, 1.0);
    mcsim::SimConfig cfg;
    cfg.n_paths = 1000000;
    cfg.dt = 1e-3;
    cfg.horizon = 40;
    cfg.seed = 1000 + k;
    auto run = mcsim::simulate_hbm(p, confs[k].x, cfg, {confs[k].cell});
    auto est = mcsim::occupation_estimates(run, cfg.seed)[0];
    double exact = hypgreen::green_cell_integral(p, confs[k].x, confs[k].cell).value;
    double z = (est.value - exact) / est.std_err;
    ok = ok && std::abs(z) <= 3;
    out += fmt("cfg%zu z=%.2f; ", k + 1, z);
  }
  mcsim::SimConfig cfg;
  cfg.n_paths = 100000;
  cfg.dt = 1e-3;
  cfg.horizon = 10;
  cfg.seed = 42;
  auto dp = functionals::DriftParams::make(1.0, 0.0);
  auto same = mcsim::lamperti_check(dp, 2.0, 1.0, cfg);
  auto diff = mcsim::lamperti_check(dp, 2.0, 1.0, cfg, 1.5);
  ok = ok && same.ks.p_value > 0.01 && diff.ks.p_value < 0.01;
  return {ok, out + fmt("Lamperti KS p=%.3g (>0.01), control p=%.3g (<0.01)", same.ks.p_value, diff.ks.p_value)};
}

Outcome scaling() {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(0, 1);
  double wg = 0, wq = 0;
  for (int k = 0; k < 20; ++k) {
    const double lams[] = {0.0, 0.5, 2.0};
    auto p = hypgreen::ModelParams::make(3, lams[k % 3], 1.0);
    hypgreen::HyperbolicPoint x{{4 * U(rng) - 2, 4 * U(rng) - 2}, 1 + 4 * U(rng)};
    hypgreen::HyperbolicPoint y{{4 * U(rng) - 2, 4 * U(rng) - 2}, 1 + 4 * U(rng)};
    double c = std::exp(std::log(0.1) + std::log(100.0) * U(rng));
    double g1 = hypgreen::green_function(p, x, y).value;
    double gc = hypgreen::green_function(hypgreen::with_barrier(p, c), hypgreen::dilate(x, c), hypgreen::dilate(y, c)).value;
    wg = std::max(wg, std::abs(gc / g1 - 1));

    auto dp = functionals::DriftParams::make(2 * U(rng), U(rng));
    double a = 0.2 + 3 * U(rng), xx = a * (1.05 + 3 * U(rng)), u = a * a * (0.05 + 5 * U(rng));
    using functionals::Evaluation;
    double lhs = functionals::q_hitting_density(dp, xx, a, u, Evaluation::Direct).value;
    double rhs = functionals::q_hitting_density(dp, xx / a, 1.0, u / (a * a), Evaluation::Direct).value / (a * a);
    wq = std::max(wq, std::abs(lhs / rhs - 1));
  }
  return {wg <= 1e-10 && wq <= 1e-6,
          fmt("Green dilation %.2e (tol 1e-10), q scaling %.2e (tol 1e-6), 20 points each", wg, wq)};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::setvbuf(stdout, nullptr, _IONBF, 0);
  const std::vector<Criterion> all{
      {1, "Hartman-Watson identity", 60, hartman_watson},
      {2, "Q transform identity", 60, q_transform},
      {3, "G transform identity", 300, g_transform},
      {4, "reflection oracle", 120, reflection},
      {5, "Chapman-Kolmogorov", 300, chapman},
      {6, "killed-kernel comparator sweep", 600, kernel_comparator},
      {7, "Green function sweep", 1200, green_sweep},
      {8, "potential kernel sweep", 600, potential_sweep},
      {9, "distance-form comparator", 120, distance_form},
      {10, "two-route Green agreement", 600, two_routes},
      {11, "Monte Carlo cross-validation", 1800, monte_carlo},
      {12, "scaling properties", 60, scaling},
  };
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : all) {
    if (!pick.empty() && !pick.count(c.id)) continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = o.pass && secs <= c.limit_s;
    failed += pass ? 0 : 1;
    std::printf("criterion %2d %s  %s: %s [%.1f s, limit %.0f s]\n", c.id, pass ? "PASS" : "FAIL", c.name,
                o.detail.c_str(), secs, c.limit_s);
  }
  return failed == 0 ? 0 : 1;
}
