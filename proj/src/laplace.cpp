#include "hbmgreen/laplace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "hbmgreen/quadrature.hpp"

namespace hbmgreen::laplace {

TransformSpec TransformSpec::real_only(RealFn f) {
  TransformSpec s;
  s.real_ = std::move(f);
  return s;
}

TransformSpec TransformSpec::complex_capable(ComplexFn f) {
  TransformSpec s;
  s.complex_ = std::move(f);
  return s;
}

double TransformSpec::operator()(double s) const {
  if (real_) return real_(s);
  return complex_(cplx(s, 0.0)).real();
}

cplx TransformSpec::operator()(cplx s) const {
  if (!complex_) throw Error(ErrorCode::DomainMismatch, "transform is real-only");
  return complex_(s);
}

InversionConfig InversionConfig::real_node(int order) {
  InversionConfig c;
  c.method = InversionMethod::RealNode;
  c.order = order;
  return c;
}

InversionConfig InversionConfig::complex_contour(int order) {
  InversionConfig c;
  c.method = InversionMethod::ComplexContour;
  c.order = order;
  return c;
}

void InversionConfig::validate() const {
  if (order < 4 || order > 64)
    throw Error(ErrorCode::InvalidArgument, "inversion order must lie in [4, 64]");
  if (method == InversionMethod::RealNode && (order % 2 != 0 || order > 30))
    throw Error(ErrorCode::InvalidArgument, "real-node order must be even and <= 30");
  if (!(target_rel_err > 0.0 && target_rel_err <= 1e-2))
    throw Error(ErrorCode::InvalidArgument, "target_rel_err must lie in (0, 1e-2]");
}

namespace {

// Stehfest weights V_1..V_N in long double.
std::vector<long double> stehfest_weights(int n) {
  const int h = n / 2;
  auto fact = [](int k) {
    long double r = 1.0L;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
  };
  std::vector<long double> v(n + 1, 0.0L);
  for (int k = 1; k <= n; ++k) {
    long double sum = 0.0L;
    for (int j = (k + 1) / 2; j <= std::min(k, h); ++j) {
      sum += std::pow(static_cast<long double>(j), h) * fact(2 * j) /
             (fact(h - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
    }
    v[k] = ((k + h) % 2 == 0 ? 1.0L : -1.0L) * sum;
  }
  return v;
}

const std::vector<long double>& weights_cached(int n) {
  // Orders are validated to even values <= 30; build every table once.
  static const std::array<std::vector<long double>, 16> table = [] {
    std::array<std::vector<long double>, 16> t;
    for (int i = 1; i < 16; ++i) t[i] = stehfest_weights(2 * i);
    return t;
  }();
  return table.at(n / 2);
}

// Cotangent contour s(theta) = (N/t)(c0 + c1 theta cot(c2 theta) + i c3 theta).
constexpr double kC0 = -0.6122, kC1 = 0.5017, kC2 = 0.6407, kC3 = 0.2645;

}  // namespace

double stehfest(const TransformSpec::RealFn& F, double t, int order) {
  const auto& v = weights_cached(order);
  const long double ln2t = std::numbers::ln2_v<long double> / t;
  long double sum = 0.0L;
  for (int k = 1; k <= order; ++k) sum += v[k] * static_cast<long double>(F(double(k * ln2t)));
  return static_cast<double>(sum * ln2t);
}

double contour(const TransformSpec::ComplexFn& F, double t, int order) {
  const double h = 2.0 * std::numbers::pi / order;
  const double scale = order / t;
  double sum = 0.0;
  // Conjugate symmetry: only the upper half of the contour is evaluated.
  for (int k = 0; k < order / 2; ++k) {
    double th = (k + 0.5) * h;
    double ct = std::cos(kC2 * th) / std::sin(kC2 * th);
    double sn = std::sin(kC2 * th);
    cplx s = scale * cplx(kC0 + kC1 * th * ct, kC3 * th);
    cplx ds = scale * cplx(kC1 * (ct - kC2 * th / (sn * sn)), kC3);
    sum += (std::exp(s * t) * F(s) * ds).imag();
  }
  return sum * 2.0 / order;
}

EvalResult invert(const TransformSpec& spec, double t, const InversionConfig& cfg) {
  cfg.validate();
  if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorCode::NonPositiveArgument, "t must be > 0");
  double f = 0.0, err = 0.0;
  if (cfg.method == InversionMethod::RealNode) {
    auto F = [&](double s) { return spec(s); };
    f = stehfest(F, t, cfg.order);
    err = std::abs(f - stehfest(F, t, cfg.order - 2));
  } else {
    if (!spec.is_complex_capable())
      throw Error(ErrorCode::DomainMismatch, "contour inversion needs complex frequencies");
    auto F = [&](cplx s) { return spec(s); };
    // Perturb the node count; the finer rule is returned.
    double coarse = contour(F, t, cfg.order);
    f = contour(F, t, cfg.order + 8);
    err = std::abs(f - coarse);
  }
  if (!std::isfinite(f)) throw Error(ErrorCode::InversionUnstable, "non-finite inversion");
  if (err > cfg.target_rel_err * std::abs(f) + cfg.abs_floor) {
    throw Error(ErrorCode::InversionUnstable,
                "order disagreement " + std::to_string(err) + " at t=" + std::to_string(t));
  }
  if (cfg.density && f < 0.0) {
    if (-f > err + cfg.abs_floor)
      throw Error(ErrorCode::InversionUnstable, "negative density beyond error estimate");
    f = 0.0;
  }
  return {f, err, Method::Inversion};
}

EvalResult forward(const std::function<double(double)>& f, double s, TailBound tail,
                   double rel_tol, double scale) {
  if (!(s >= 0.0)) throw Error(ErrorCode::InvalidArgument, "s must be >= 0");
  if (!(scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "scale must be > 0");
  if (s == 0.0 && tail.kind != TailBound::Kind::Power && tail.kind != TailBound::Kind::Exponential)
    throw Error(ErrorCode::QuadratureNonConvergent, "s = 0 needs a decay description");
  const double c = std::log(scale);
  // Log time axis: the integrand picks up a Jacobian e^v and decays in both
  // directions for any f bounded near 0.
  auto g = [&](double v) {
    double t = std::exp(v);
    double e = s * t;
    if (e > 745.0) return 0.0;
    return std::exp(-e) * f(t) * t;
  };
  quad::Result r;
  double tail_value = 0.0;
  if (s == 0.0 && tail.kind == TailBound::Kind::Power) {
    if (!(tail.value > 1.0)) throw Error(ErrorCode::QuadratureNonConvergent, "power tail exponent must exceed 1");
    // Truncate far out and add the leading-order remainder.
    double vmax = c + 14.0;
    r = quad::line(g, c, 1.0, rel_tol, 1e-16, c - 60.0, vmax);
    double tmax = std::exp(vmax);
    tail_value = f(tmax) * tmax / (tail.value - 1.0);
  } else {
    double hi = c + 60.0;
    if (s > 0.0) hi = std::min(hi, std::log(800.0 / s));
    double center = std::min(c, hi - 1.0);
    r = quad::line(g, center, 1.0, rel_tol, 1e-16, c - 60.0, hi);
  }
  double value = r.value + tail_value;
  double err = r.abs_err + 1e-3 * std::abs(tail_value);
  if (!std::isfinite(value)) throw Error(ErrorCode::QuadratureNonConvergent, "non-finite transform");
  if (err > 100.0 * rel_tol * std::abs(value) + 1e-300)
    throw Error(ErrorCode::QuadratureNonConvergent, "forward transform did not converge");
  return {value, err, Method::Quadrature};
}

LogGridDensity::LogGridDensity(const TransformSpec& spec, double t_min, double t_max,
                               int points_per_decade, const InversionConfig& cfg) {
  if (!(t_min > 0.0 && t_max > t_min) || points_per_decade < 2)
    throw Error(ErrorCode::InvalidArgument, "bad density grid");
  const int n = std::max(2, int(std::ceil(std::log10(t_max / t_min) * points_per_decade)) + 1);
  t_.resize(n);
  f_.resize(n);
  for (int i = 0; i < n; ++i) {
    t_[i] = t_min * std::pow(t_max / t_min, double(i) / (n - 1));
    InversionConfig c = cfg;
    c.density = true;
    EvalResult r = invert(spec, t_[i], c);
    f_[i] = r.value;
    max_err_ = std::max(max_err_, r.abs_err);
  }
  // Log-log values; Fritsch-Carlson limited slopes keep the interpolant
  // monotone wherever the data are.
  logf_.resize(n);
  for (int i = 0; i < n; ++i) logf_[i] = std::log(std::max(f_[i], 1e-300));
  std::vector<double> d(n - 1);
  for (int i = 0; i + 1 < n; ++i)
    d[i] = (logf_[i + 1] - logf_[i]) / (std::log(t_[i + 1]) - std::log(t_[i]));
  slope_.assign(n, 0.0);
  slope_[0] = d[0];
  slope_[n - 1] = d[n - 2];
  for (int i = 1; i + 1 < n; ++i) {
    if (d[i - 1] * d[i] <= 0.0) {
      slope_[i] = 0.0;
    } else {
      slope_[i] = 2.0 / (1.0 / d[i - 1] + 1.0 / d[i]);  // harmonic mean
    }
  }
}

double LogGridDensity::operator()(double t) const {
  if (!(t >= t_.front() && t <= t_.back())) return 0.0;
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - t_.begin() - 1, 0), t_.size() - 2);
  double x0 = std::log(t_[i]), x1 = std::log(t_[i + 1]);
  double h = x1 - x0, u = (std::log(t) - x0) / h;
  double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
  double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
  double lf = h00 * logf_[i] + h10 * h * slope_[i] + h01 * logf_[i + 1] + h11 * h * slope_[i + 1];
  return std::exp(lf);
}

}  // namespace hbmgreen::laplace
