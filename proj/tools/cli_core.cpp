#include "cli_core.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <variant>

#include <CLI11.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "hbmgreen/besselproc.hpp"
#include "hbmgreen/functionals.hpp"
#include "hbmgreen/hypgreen.hpp"
#include "hbmgreen/laplace.hpp"
#include "hbmgreen/mcsim.hpp"
#include "hbmgreen/parallel.hpp"

namespace hbmgreen::cli {

namespace {

Error parse_error(const std::string& what) { return Error(ErrorCode::SpecParseError, what); }

double to_double(const std::string& s, const std::string& what) {
  std::istringstream is(s);
  is.imbue(std::locale::classic());
  double v;
  is >> v;
  if (is.fail() || !is.eof()) {
    is.clear();
    std::string rest;
    is >> rest;
    if (is.fail() || !rest.empty() || !std::isfinite(v)) throw parse_error("bad number '" + s + "' in " + what);
  }
  return v;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n"), e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

// ---------------------------------------------------------------------------
// Record output

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);  // the C locale is never changed
  return buf;
}

std::string json_num(double v) { return std::isfinite(v) ? num(v) : "null"; }

std::string json_str(const std::string& s) {
  std::string o = "\"";
  for (char c : s) {
    switch (c) {
      case '"': o += "\\\""; break;
      case '\\': o += "\\\\"; break;
      case '\n': o += "\\n"; break;
      case '\t': o += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char b[8];
          std::snprintf(b, sizeof b, "\\u%04x", c);
          o += b;
        } else {
          o += c;
        }
    }
  }
  return o + "\"";
}

struct Null {};
using Field = std::variant<Null, double, std::int64_t, bool, std::string, std::vector<double>>;

std::string csv_field(const Field& f) {
  struct V {
    std::string operator()(Null) const { return ""; }
    std::string operator()(double d) const { return num(d); }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string o = "\"";
      for (char c : s) o += c == '"' ? std::string("\"\"") : std::string(1, c);
      return o + "\"";
    }
    std::string operator()(const std::vector<double>& v) const {
      std::string o;
      for (std::size_t i = 0; i < v.size(); ++i) o += (i ? " " : "") + num(v[i]);
      return o;
    }
  };
  return std::visit(V{}, f);
}

std::string json_field(const Field& f) {
  struct V {
    std::string operator()(Null) const { return "null"; }
    std::string operator()(double d) const { return json_num(d); }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const std::string& s) const { return json_str(s); }
    std::string operator()(const std::vector<double>& v) const {
      std::string o = "[";
      for (std::size_t i = 0; i < v.size(); ++i) o += (i ? "," : "") + json_num(v[i]);
      return o + "]";
    }
  };
  return std::visit(V{}, f);
}

using Row = std::vector<std::pair<std::string, Field>>;

// Keys of point-record inputs; nested under "inputs" in JSON.
const std::set<std::string> kInputKeys{"n", "lambda", "a", "t", "nu", "x", "y"};

class Writer {
 public:
  Writer(std::ostream& os, Format f) : os_(os), format_(f) {}

  void row(const Row& r, bool nest_inputs = false) {
    if (format_ == Format::Csv) {
      std::string header;
      for (std::size_t i = 0; i < r.size(); ++i) header += (i ? "," : "") + r[i].first;
      if (header != header_) {
        if (!header_.empty()) os_ << '\n';  // a new block, e.g. the bounds summary
        os_ << header << '\n';
        header_ = header;
      }
      for (std::size_t i = 0; i < r.size(); ++i) os_ << (i ? "," : "") << csv_field(r[i].second);
      os_ << '\n';
      return;
    }
    std::string body, inputs;
    bool inputs_done = false;
    for (const auto& [k, v] : r) {
      if (nest_inputs && kInputKeys.count(k)) {
        inputs += (inputs.empty() ? "" : ",") + json_str(k) + ":" + json_field(v);
        continue;
      }
      if (nest_inputs && !inputs_done && !inputs.empty()) {
        body += (body.empty() ? "" : ",") + std::string("\"inputs\":{") + inputs + "}";
        inputs_done = true;
      }
      body += (body.empty() ? "" : ",") + json_str(k) + ":" + json_field(v);
    }
    if (nest_inputs && !inputs_done && !inputs.empty())
      body += (body.empty() ? "" : ",") + std::string("\"inputs\":{") + inputs + "}";
    os_ << '{' << body << "}\n";
  }

 private:
  std::ostream& os_;
  Format format_;
  std::string header_;
};

// ---------------------------------------------------------------------------
// Points and grids

struct Point {
  int n = 3;
  double lambda = 0.0, a = 1.0, t = 1.0;
  std::optional<double> nu;
  std::vector<double> x, y;

  double bessel_nu() const {
    if (nu) return *nu;
    double mu = 0.5 * (n - 1);
    return std::sqrt(2.0 * lambda + mu * mu);
  }
};

struct GridPoint {
  Point p;
  bool coarse = true;  // every axis index even
};

void apply_axis(Point& p, const std::string& axis, double v) {
  if (axis == "lambda") p.lambda = v;
  else if (axis == "t") p.t = v;
  else if (axis == "a") p.a = v;
  else if (axis == "nu") p.nu = v;
  else if (axis == "xn") p.x.back() = v;
  else if (axis == "yn") p.y.back() = v;
  else {
    auto& c = axis[0] == 'x' ? p.x : p.y;
    c[std::stoi(axis.substr(1)) - 1] = v;
  }
}

void check_axis(const GridAxis& g, int n) {
  static const std::set<std::string> named{"lambda", "t", "a", "nu", "xn", "yn"};
  if (named.count(g.axis)) return;
  if (g.axis.size() >= 2 && (g.axis[0] == 'x' || g.axis[0] == 'y') &&
      g.axis.find_first_not_of("0123456789", 1) == std::string::npos) {
    int i = std::stoi(g.axis.substr(1));
    if (i >= 1 && i <= n) return;
  }
  throw parse_error("grid axis '" + g.axis + "' does not name a parameter for n = " + std::to_string(n));
}

std::vector<double> axis_values(const GridAxis& g) {
  std::vector<double> v(g.count);
  for (int i = 0; i < g.count; ++i) {
    double f = double(i) / (g.count - 1);
    v[i] = g.log ? g.min * std::pow(g.max / g.min, f) : g.min + (g.max - g.min) * f;
  }
  return v;
}

Point base_point(const RunSpec& s) {
  Point p;
  p.n = s.n;
  p.lambda = s.lambda;
  p.a = s.a;
  p.t = s.t;
  p.nu = s.nu;
  p.x = s.x;
  p.y = s.y;
  return p;
}

// Cartesian product in canonical order (last axis fastest).
std::vector<GridPoint> expand(const RunSpec& s) {
  std::vector<GridPoint> out{{base_point(s), true}};
  for (const auto& g : s.grid) {
    auto vals = axis_values(g);
    std::vector<GridPoint> next;
    next.reserve(out.size() * vals.size());
    for (const auto& gp : out)
      for (std::size_t i = 0; i < vals.size(); ++i) {
        GridPoint q = gp;
        apply_axis(q.p, g.axis, vals[i]);
        q.coarse = gp.coarse && i % 2 == 0;
        next.push_back(std::move(q));
      }
    out = std::move(next);
  }
  return out;
}

hypgreen::HyperbolicPoint hpoint(const std::vector<double>& c) {
  hypgreen::HyperbolicPoint h;
  h.tilde.assign(c.begin(), c.end() - 1);
  h.height = c.back();
  return h;
}

Row input_fields(const Point& p) {
  return {{"n", std::int64_t(p.n)}, {"lambda", p.lambda}, {"a", p.a}, {"t", p.t},
          {"nu", p.bessel_nu()},    {"x", p.x},           {"y", p.y}};
}

// Errors about where a point lies are reported as DomainError.
bool is_domain(ErrorCode c) {
  switch (c) {
    case ErrorCode::BelowBarrier:
    case ErrorCode::DiagonalSingularity:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::DimensionTooLow:
    case ErrorCode::NonPositiveArgument:
    case ErrorCode::BarrierNotUnit:
    case ErrorCode::OrderOutOfRange:
    case ErrorCode::InvalidArgument:
    case ErrorCode::DomainError:
      return true;
    default:
      return false;
  }
}

void report_error(std::ostream& err, const Error& e, std::size_t index, const Point& p) {
  const char* kind = is_domain(e.code()) ? "DomainError" : to_string(e.code());
  Row r{{"error", std::string(kind)}, {"cause", std::string(to_string(e.code()))}, {"message", std::string(e.what())},
        {"index", std::int64_t(index)}};
  for (auto& f : input_fields(p)) r.push_back(f);
  Writer(err, Format::Json).row(r, true);
}

struct Evaluated {
  EvalResult value;
  double comparator = std::nan("");
  double log_ratio = std::nan("");  // for kernels, ratio taken in logs
  std::optional<Error> error;
  double wall = 0.0;
};

EvalResult eval_point(const std::string& target, const RunSpec& s, const Point& p) {
  if (target == "kernel" || (target == "comparator" && s.kind == "kernel")) {
    auto idx = besselproc::BesselIndex::make(p.bessel_nu());
    besselproc::KernelQuery q{p.t, p.x.back(), p.y.back(), p.a};
    if (target == "comparator") return besselproc::killed_density_comparator(idx, q);
    auto k = besselproc::killed_density(idx, q, s.route == "bessel" ? besselproc::KilledMethod::Resolvent
                                                                   : besselproc::KilledMethod::Decomposition);
    return {k.value, k.abs_err, k.method};
  }
  auto mp = hypgreen::ModelParams::make(p.n, p.lambda, p.a);
  if (static_cast<int>(p.x.size()) != p.n || static_cast<int>(p.y.size()) != p.n)
    throw Error(ErrorCode::DimensionMismatch, "x and y need n = " + std::to_string(p.n) + " coordinates");
  auto x = hpoint(p.x), y = hpoint(p.y);
  if (target == "green")
    return hypgreen::green_function(mp, x, y,
                                    s.route == "bessel" ? hypgreen::Route::ViaBessel : hypgreen::Route::ViaFunctional);
  if (target == "potential") return hypgreen::potential_kernel(mp, x, y);
  if (target == "comparator") {
    if (s.kind == "distance") return hypgreen::green_comparator_distance(mp, x, y);
    if (s.kind == "potential") return hypgreen::potential_comparator(mp, x, y);
    return hypgreen::green_comparator(mp, x, y);
  }
  throw parse_error("unknown eval target '" + target + "'");
}

double now() { return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count(); }

template <class F>
std::vector<Evaluated> evaluate_all(const std::vector<GridPoint>& pts, unsigned workers, F&& f) {
  std::vector<Evaluated> res(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    double t0 = now();
    try {
      f(pts[i].p, res[i]);
    } catch (const Error& e) {
      res[i].error = e;
    } catch (const std::exception& e) {
      res[i].error = Error(ErrorCode::InvalidArgument, e.what());
    }
    res[i].wall = now() - t0;
  }, workers);
  return res;
}

Row point_row(const RunSpec& s, std::size_t i, const Point& p, const Evaluated& e, bool ratio) {
  Row r{{"command", s.command}, {"target", s.target}, {"index", std::int64_t(i)}};
  for (auto& f : input_fields(p)) r.push_back(f);
  r.push_back({"value", e.value.value});
  r.push_back({"abs_err", e.value.abs_err});
  r.push_back({"comparator", ratio ? Field(e.comparator) : Field(Null{})});
  r.push_back({"ratio", ratio ? Field(std::exp(e.log_ratio)) : Field(Null{})});
  r.push_back({"method", std::string(to_string(e.value.method))});
  r.push_back({"wall_time", e.wall});
  return r;
}

// ---------------------------------------------------------------------------
// Commands

int run_eval(const RunSpec& s, Writer& w, std::ostream& err) {
  static const std::set<std::string> targets{"green", "potential", "comparator", "kernel"};
  if (!targets.count(s.target)) throw parse_error("eval target must be green, potential, comparator or kernel");
  auto pts = expand(s);
  auto res = evaluate_all(pts, s.workers, [&](const Point& p, Evaluated& e) { e.value = eval_point(s.target, s, p); });
  int status = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (res[i].error) {
      report_error(err, *res[i].error, i, pts[i].p);
      status = 1;
      continue;
    }
    w.row(point_row(s, i, pts[i].p, res[i], false), true);
  }
  return status;
}

int run_bounds(const RunSpec& s, Writer& w, std::ostream& err) {
  static const std::set<std::string> targets{"green", "potential", "kernel"};
  if (!targets.count(s.target)) throw parse_error("bounds target must be green, potential or kernel");
  if (s.grid.empty()) throw parse_error("bounds needs at least one --grid axis");
  if (s.target == "green" && s.n <= 2) throw Error(ErrorCode::DimensionTooLow, "Green bounds need n > 2");
  auto pts = expand(s);
  auto res = evaluate_all(pts, s.workers, [&](const Point& p, Evaluated& e) {
    if (s.target == "kernel") {
      auto idx = besselproc::BesselIndex::make(p.bessel_nu());
      besselproc::KernelQuery q{p.t, p.x.back(), p.y.back(), p.a};
      auto k = besselproc::killed_density(idx, q);
      double lc = besselproc::log_killed_density_comparator(idx, q);
      e.value = {k.value, k.abs_err, k.method};
      e.comparator = std::exp(lc);
      e.log_ratio = k.log_value - lc;
      return;
    }
    e.value = eval_point(s.target, s, p);
    auto mp = hypgreen::ModelParams::make(p.n, p.lambda, p.a);
    auto x = hpoint(p.x), y = hpoint(p.y);
    e.comparator = (s.target == "green" ? hypgreen::green_comparator(mp, x, y)
                                        : hypgreen::potential_comparator(mp, x, y)).value;
    e.log_ratio = std::log(e.value.value / e.comparator);
  });
  int status = 0;
  double lo = INFINITY, hi = -INFINITY, clo = INFINITY, chi = -INFINITY;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (res[i].error) {
      report_error(err, *res[i].error, i, pts[i].p);
      status = 1;
      continue;
    }
    double r = std::exp(res[i].log_ratio);
    if (!std::isfinite(r) || r <= 0.0) status = 1;
    else {
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      if (pts[i].coarse) {
        clo = std::min(clo, r);
        chi = std::max(chi, r);
      }
    }
    w.row(point_row(s, i, pts[i].p, res[i], true), true);
  }
  bool stable = std::abs(lo / clo - 1) < 0.1 && std::abs(hi / chi - 1) < 0.1;
  w.row({{"points", std::int64_t(pts.size())},
         {"min", lo},
         {"max", hi},
         {"spread", hi / lo},
         {"coarse_min", clo},
         {"coarse_max", chi},
         {"refinement_stable", stable}});
  return status;
}

mcsim::SimConfig sim_config(const RunSpec& s) {
  mcsim::SimConfig c;
  c.dt = s.dt;
  c.n_paths = s.paths;
  c.seed = s.seed;
  c.horizon = s.horizon;
  c.workers = s.workers;
  return c;
}

int run_simulate(const RunSpec& s, Writer& w, std::ostream& os) {
  std::vector<mcsim::PathFunctionalSample> samples;
  const double x0 = s.x.back();
  if (s.target == "bessel") {
    Point p = base_point(s);
    samples = mcsim::simulate_bessel(besselproc::BesselIndex::make(p.bessel_nu()), x0, s.a, sim_config(s)).samples;
  } else if (s.target == "gbm") {
    double mu = s.mu.value_or(0.5 * (s.n - 1));
    samples = mcsim::simulate_gbm_functional(functionals::DriftParams::make(mu, 0.0), x0, s.a, sim_config(s));
  } else if (s.target == "hbm") {
    if (static_cast<int>(s.x.size()) != s.n) throw Error(ErrorCode::DimensionMismatch, "x needs n coordinates");
    samples = mcsim::simulate_hbm(hypgreen::ModelParams::make(s.n, s.lambda, s.a), hpoint(s.x), sim_config(s)).samples;
  } else {
    throw parse_error("simulate target must be bessel, gbm or hbm");
  }
  if (s.format == Format::Csv) {
    mcsim::write_csv(os, samples);
    return 0;
  }
  for (const auto& p : samples)
    w.row({{"path_id", std::int64_t(p.path_id)},
           {"t", p.end_time},
           {"A", p.A},
           {"B", p.B},
           {"hit_time", p.hit_time ? Field(*p.hit_time) : Field(Null{})},
           {"survived", p.survived}});
  return 0;
}

// Identity suites. Reference values use Boost.Math and Brownian closed forms.
struct Check {
  std::string name;
  double measured, tolerance;
  bool pass;
};

double bI(double nu, double z) { return boost::math::cyl_bessel_i(nu, z); }
double bK(double nu, double z) { return boost::math::cyl_bessel_k(nu, z); }
double rel(double v, double ref) { return std::abs(v / ref - 1.0); }
std::string label(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::vector<Check> suite_hw() {
  std::vector<Check> out;
  for (double mu : {0.0, 0.5, 1.0, 2.0})
    for (double r : {0.5, 1.0, 5.0}) {
      auto f = [r](double t) { return functionals::hartman_watson_theta(r, t).value; };
      auto tail = mu == 0 ? laplace::TailBound::power(1.5) : laplace::TailBound::exponential(mu * mu / 2);
      double e = rel(laplace::forward(f, mu * mu / 2, tail, 1e-8).value, bI(mu, r));
      out.push_back({label("mu=%g r=%g", mu, r), e, 1e-3, e <= 1e-3});
    }
  return out;
}

std::vector<Check> suite_qpotential(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0, 1);
  std::vector<Check> out;
  for (int k = 0; k < 10; ++k) {
    double mu = 2 * U(rng), lam = 1.5 * U(rng), x = 0.2 + 4 * U(rng), y = 0.2 + 4 * U(rng), r = 0.3 + 2.7 * U(rng);
    auto dp = functionals::DriftParams::make(mu, lam);
    double nu = dp.nu();
    double ref = 2 / y * std::pow(x / y, mu) * bI(nu, r * std::min(x, y)) * bK(nu, r * std::max(x, y));
    auto f = [&](double u) { return functionals::q_potential(dp, x, y, u).value; };
    double e = rel(laplace::forward(f, r * r / 2, laplace::TailBound::exponential(r * r / 2), 1e-10, x * y).value, ref);
    out.push_back({label("mu=%.4g lambda=%.4g x=%.4g y=%.4g", mu, lam, x, y), e, 1e-6, e <= 1e-6});
  }
  return out;
}

std::vector<Check> suite_green_laplace(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0, 1);
  std::vector<Check> out;
  for (int k = 0; k < 5; ++k) {
    double mu = 2 * U(rng), lam = 1.5 * U(rng), a = 0.3 + 1.7 * U(rng);
    double x = a * (1.05 + 3 * U(rng)), y = a * (1.05 + 3 * U(rng)), r = (0.3 + 2.7 * U(rng)) / a;
    auto dp = functionals::DriftParams::make(mu, lam);
    double nu = dp.nu();
    double ref = 2 / y * std::pow(x / y, mu) *
                 (bI(nu, r * std::min(x, y)) * bK(nu, r * std::max(x, y)) -
                  bK(nu, r * x) * bK(nu, r * y) * bI(nu, r * a) / bK(nu, r * a));
    auto f = [&](double u) { return functionals::green_ab(dp, {x, a, u}, y).value; };
    double e = rel(laplace::forward(f, r * r / 2, laplace::TailBound::exponential(r * r / 2), 1e-8, x * y).value, ref);
    out.push_back({label("mu=%.4g lambda=%.4g a=%.4g x=%.4g", mu, lam, a, x), e, 1e-4, e <= 1e-4});
  }
  return out;
}

std::vector<Check> suite_chapman() {
  std::vector<Check> out;
  const double a = 1, t = 0.3, s = 0.5, x = 1.4, z = 2.0;
  for (double nu : {0.5, 1.0, 1.5}) {
    auto idx = besselproc::BesselIndex::make(nu);
    auto p = [&](double tt, double u, double v) { return besselproc::killed_density(idx, {tt, u, v, a}).value; };
    // p(s, y, z) = p(s, z, y) against the speed measure.
    auto f = [&](double y) { return p(t, x, y) * p(s, z, y) * std::pow(y, 1 - 2 * nu); };
    double lhs = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, z + 14, 10, 1e-9);
    double e = rel(lhs, p(t + s, x, z));
    out.push_back({label("nu=%g t=%g s=%g", nu, t, s), e, 1e-4, e <= 1e-4});
  }
  return out;
}

std::vector<Check> suite_reflection() {
  std::vector<Check> out;
  const double a = 1;
  auto idx = besselproc::BesselIndex::make(0.5);
  auto g = [](double z, double t) { return std::exp(-z * z / (2 * t)) / std::sqrt(2 * M_PI * t); };
  double wk = 0, wh = 0;
  for (double t : {0.1, 1.0, 10.0})
    for (double x : {1.1, 2.0, 5.0}) {
      double h = (x - a) / std::sqrt(2 * M_PI * t * t * t) * std::exp(-(x - a) * (x - a) / (2 * t));
      wh = std::max(wh, rel(besselproc::hitting_density(idx, x, a, t).value, h));
      for (double y : {1.1, 2.0, 5.0})
        wk = std::max(wk, rel(besselproc::killed_density(idx, {t, x, y, a}).value, g(x - y, t) - g(x + y - 2 * a, t)));
    }
  out.push_back({"killed kernel, 3x3x3", wk, 1e-5, wk <= 1e-5});
  out.push_back({"hitting density, 3x3", wh, 1e-5, wh <= 1e-5});
  return out;
}

std::vector<Check> suite_lamperti(const RunSpec& s) {
  double nu = base_point(s).bessel_nu();
  auto cfg = sim_config(s);
  auto dp = functionals::DriftParams::make(nu, 0.0);
  auto same = mcsim::lamperti_check(dp, s.x.back(), s.a, cfg);
  auto diff = mcsim::lamperti_check(dp, s.x.back(), s.a, cfg, nu + 0.5);
  return {{label("KS p-value, nu=%g", nu), same.ks.p_value, 0.01, same.ks.p_value > 0.01},
          {label("negative control p-value, nu'=%g", nu + 0.5), diff.ks.p_value, 0.01, diff.ks.p_value < 0.01}};
}

int run_verify(const RunSpec& s, Writer& w) {
  static const std::map<std::string, std::function<std::vector<Check>(const RunSpec&)>> suites{
      {"hw", [](const RunSpec&) { return suite_hw(); }},
      {"qpotential-laplace", [](const RunSpec& r) { return suite_qpotential(r.seed); }},
      {"green-laplace", [](const RunSpec& r) { return suite_green_laplace(r.seed); }},
      {"chapman", [](const RunSpec&) { return suite_chapman(); }},
      {"reflection", [](const RunSpec&) { return suite_reflection(); }},
      {"lamperti", suite_lamperti},
  };
  auto it = suites.find(s.target);
  if (it == suites.end()) throw Error(ErrorCode::UnknownSuite, "no verification suite named '" + s.target + "'");
  double t0 = now();
  auto checks = it->second(s);
  double wall = now() - t0;
  int status = 0;
  for (const auto& c : checks) {
    status |= c.pass ? 0 : 1;
    w.row({{"command", std::string("verify")},
           {"suite", s.target},
           {"check", c.name},
           {"measured", c.measured},
           {"tolerance", c.tolerance},
           {"pass", c.pass},
           {"wall_time", wall}});
  }
  return status;
}

}  // namespace

const std::vector<std::string>& point_columns() {
  static const std::vector<std::string> c{"command", "target", "index", "n",          "lambda", "a",      "t",        "nu",
                                          "x",       "y",      "value", "abs_err", "comparator", "ratio", "method", "wall_time"};
  return c;
}
const std::vector<std::string>& summary_columns() {
  static const std::vector<std::string> c{"points", "min", "max", "spread", "coarse_min", "coarse_max",
                                          "refinement_stable"};
  return c;
}
const std::vector<std::string>& verify_columns() {
  static const std::vector<std::string> c{"command", "suite", "check", "measured", "tolerance", "pass", "wall_time"};
  return c;
}
const std::vector<std::string>& path_columns() {
  static const std::vector<std::string> c{"path_id", "t", "A", "B", "hit_time", "survived"};
  return c;
}

GridAxis parse_grid_axis(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(trim(p));
  if (parts.size() != 4 && parts.size() != 5)
    throw parse_error("grid '" + text + "' must be axis:min:max:count[:lin|log]");
  GridAxis g;
  g.axis = parts[0];
  g.min = to_double(parts[1], "grid min");
  g.max = to_double(parts[2], "grid max");
  double c = to_double(parts[3], "grid count");
  if (c != std::floor(c) || c < 2 || c > 1e7) throw parse_error("grid count must be an integer >= 2");
  g.count = static_cast<int>(c);
  if (parts.size() == 5) {
    if (parts[4] == "log") g.log = true;
    else if (parts[4] != "lin" && parts[4] != "linear") throw parse_error("grid spacing must be lin or log");
  }
  if (g.log && !(g.min > 0 && g.max > 0)) throw parse_error("log grid needs positive bounds");
  return g;
}

std::vector<double> parse_point(const std::string& text) {
  std::string t = trim(text);
  if (!t.empty() && (t.front() == '(' || t.front() == '[')) t = t.substr(1);
  if (!t.empty() && (t.back() == ')' || t.back() == ']')) t.pop_back();
  std::replace(t.begin(), t.end(), ',', ' ');
  std::vector<double> out;
  std::stringstream ss(t);
  for (std::string tok; ss >> tok;) out.push_back(to_double(tok, "point '" + text + "'"));
  if (out.empty()) throw parse_error("empty point '" + text + "'");
  return out;
}

std::optional<RunSpec> parse_args(int argc, const char* const* argv, std::ostream& help_out) {
  std::vector<std::string> args(argv + 1, argv + argc);

  // A flat key=value file supplies defaults; keys given on the command line win.
  std::string config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) config = args[i].substr(9);
  }
  if (!config.empty()) {
    std::ifstream in(config);
    if (!in) throw parse_error("cannot read config file '" + config + "'");
    std::set<std::string> given;
    int positionals = 0;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i].rfind("--", 0) == 0) {
        given.insert(args[i].substr(2, args[i].find('=') - 2));
        if (args[i].find('=') == std::string::npos) ++i;
      } else {
        ++positionals;
      }
    }
    std::vector<std::string> pre, pos(2);
    int line_no = 0;
    for (std::string line; std::getline(in, line);) {
      ++line_no;
      line = trim(line.substr(0, line.find('#')));
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw parse_error(config + ":" + std::to_string(line_no) + ": expected key=value");
      std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
      if (k == "command") pos[0] = v;
      else if (k == "target") pos[1] = v;
      else if (k == "config") throw parse_error("config files do not nest");
      else if (!given.count(k)) {
        pre.push_back("--" + k);
        pre.push_back(v);
      }
    }
    if (positionals == 0)
      for (auto it = pos.rbegin(); it != pos.rend(); ++it)
        if (!it->empty()) args.insert(args.begin(), *it);
    args.insert(args.begin() + (positionals == 0 ? std::count_if(pos.begin(), pos.end(),
                                                                 [](auto& p) { return !p.empty(); })
                                                 : 0),
                pre.begin(), pre.end());
  }

  RunSpec s;
  std::string x, y, format = "json";
  std::vector<std::string> grid;
  double nu = NAN, mu = NAN;
  CLI::App app{"Green functions and potentials of hyperbolic Brownian motion"};
  app.add_option("command", s.command, "eval | bounds | simulate | verify")->required();
  app.add_option("target", s.target, "what to evaluate, simulate or verify")->required();
  app.add_option("--n", s.n, "dimension of H^n");
  app.add_option("--lambda", s.lambda, "lambda >= 0");
  app.add_option("--a", s.a, "barrier level");
  app.add_option("--x", x, "first point, e.g. 0,0,2");
  app.add_option("--y", y, "second point");
  app.add_option("--t", s.t, "time for the Bessel kernel");
  app.add_option("--nu", nu, "Bessel index (default sqrt(2 lambda + mu^2))");
  app.add_option("--mu", mu, "GBM drift (default (n-1)/2)");
  app.add_option("--kind", s.kind, "comparator: green | distance | potential | kernel");
  app.add_option("--route", s.route, "functional | bessel");
  app.add_option("--grid", grid, "axis:min:max:count[:lin|log]; repeat for more axes");
  app.add_option("--paths", s.paths, "number of Monte Carlo paths");
  app.add_option("--dt", s.dt, "time step");
  app.add_option("--horizon", s.horizon, "simulation horizon");
  app.add_option("--seed", s.seed, "random seed");
  app.add_option("--workers", s.workers, "worker threads (0 = all cores)");
  app.add_option("--out", s.out, "output file, - for stdout");
  app.add_option("--format", format, "csv | json");
  std::string config_dummy;
  app.add_option("--config", config_dummy, "flat key=value file; command-line flags override it");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    help_out << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw parse_error(e.what());
  }

  static const std::set<std::string> commands{"eval", "bounds", "simulate", "verify"};
  if (!commands.count(s.command)) throw parse_error("unknown command '" + s.command + "'");
  if (format == "csv") s.format = Format::Csv;
  else if (format != "json") throw parse_error("format must be csv or json");
  if (s.route != "functional" && s.route != "bessel") throw parse_error("route must be functional or bessel");
  static const std::set<std::string> kinds{"green", "distance", "potential", "kernel"};
  if (!kinds.count(s.kind)) throw parse_error("unknown comparator kind '" + s.kind + "'");
  if (!std::isnan(nu)) s.nu = nu;
  if (!std::isnan(mu)) s.mu = mu;
  if (!x.empty()) s.x = parse_point(x);
  if (!y.empty()) s.y = parse_point(y);
  if (x.empty() && s.n != 3) {
    s.x.assign(s.n, 0.0);
    s.x.back() = 2.0;
  }
  if (y.empty() && s.n != 3) {
    s.y.assign(s.n, 0.0);
    s.y.front() = 1.0;
    s.y.back() = 3.0;
  }
  for (const auto& g : grid) {
    s.grid.push_back(parse_grid_axis(g));
    check_axis(s.grid.back(), s.n);
  }
  if (!(s.dt > 0) || !(s.horizon > 0) || s.paths < 1) throw parse_error("dt, horizon and paths must be positive");
  return s;
}

int run(const RunSpec& s, std::ostream& out, std::ostream& err) {
  Writer w(out, s.format);
  if (s.command == "eval") return run_eval(s, w, err);
  if (s.command == "bounds") return run_bounds(s, w, err);
  if (s.command == "simulate") return run_simulate(s, w, out);
  return run_verify(s, w);
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    auto spec = parse_args(argc, argv, out);
    if (!spec) return 0;
    if (spec->out == "-") return run(*spec, out, err);
    std::ofstream file(spec->out);
    if (!file) throw parse_error("cannot open output file '" + spec->out + "'");
    int status = run(*spec, file, err);
    file.flush();
    return file ? status : 1;
  } catch (const Error& e) {
    Writer(err, Format::Json)
        .row({{"error", std::string(is_domain(e.code()) && e.code() != ErrorCode::SpecParseError
                                        ? "DomainError"
                                        : to_string(e.code()))},
              {"cause", std::string(to_string(e.code()))},
              {"message", std::string(e.what())}});
    return e.code() == ErrorCode::SpecParseError ? 2 : 1;
  } catch (const std::exception& e) {
    err << "{\"error\":\"InternalError\",\"message\":" << json_str(e.what()) << "}\n";
    return 1;
  }
}

}  // namespace hbmgreen::cli
