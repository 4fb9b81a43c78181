#pragma once

// Forward and inverse Laplace transforms.
//
// Inversion comes in two flavours: Gaver-Stehfest (real nodes only, extended
// precision accumulation) and a trapezoid rule on a cotangent-shaped complex
// contour. The contour rule needs the transform at complex frequencies but is
// far better conditioned.

#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "hbmgreen/types.hpp"

namespace hbmgreen::laplace {

using cplx = std::complex<double>;

class TransformSpec {
 public:
  using RealFn = std::function<double(double)>;
  using ComplexFn = std::function<cplx(cplx)>;

  /// Transform known only on the positive real axis.
  static TransformSpec real_only(RealFn f);
  /// Transform that extends analytically to Re s > 0 (and satisfies
  /// F(conj s) = conj F(s)). The real restriction is derived from it.
  static TransformSpec complex_capable(ComplexFn f);

  bool is_complex_capable() const noexcept { return static_cast<bool>(complex_); }
  double operator()(double s) const;
  cplx operator()(cplx s) const;

 private:
  RealFn real_;
  ComplexFn complex_;
};

enum class InversionMethod { RealNode, ComplexContour };

struct InversionConfig {
  InversionMethod method = InversionMethod::ComplexContour;
  int order = 24;
  double target_rel_err = 1e-6;
  /// Absolute slack added to the relative budget; useful where f(t) is tiny.
  double abs_floor = 0.0;
  /// Treat the result as a probability density: small negative values inside
  /// the error estimate are clipped to 0, larger ones are an error.
  bool density = false;

  static InversionConfig real_node(int order = 14);
  static InversionConfig complex_contour(int order = 24);
  void validate() const;
};

/// f(t) from its transform. The error estimate compares order N with N-2
/// (real nodes) or with a perturbed node count (contour).
EvalResult invert(const TransformSpec& spec, double t, const InversionConfig& cfg);

// Raw rules without error control, for table building.
double stehfest(const TransformSpec::RealFn& F, double t, int order);
double contour(const TransformSpec::ComplexFn& F, double t, int order);

/// How the integrand behaves beyond the last quadrature panel.
struct TailBound {
  enum class Kind {
    /// |f(t)| <= C e^{-rate t}: truncate once the remaining mass is negligible.
    Exponential,
    /// |f(t)| ~ C t^{-exponent}, exponent > 1 when s == 0: the remainder is
    /// added analytically from the last value.
    Power,
    /// No information beyond integrability against e^{-st}, s > 0.
    None,
  };
  Kind kind = Kind::None;
  double value = 0.0;

  static TailBound exponential(double rate) { return {Kind::Exponential, rate}; }
  static TailBound power(double exponent) { return {Kind::Power, exponent}; }
};

/// int_0^inf e^{-st} f(t) dt by adaptive quadrature on a logarithmic time axis,
/// with the tail handled according to `tail`. `scale` is a characteristic time
/// of f used to centre the quadrature.
EvalResult forward(const std::function<double(double)>& f, double s, TailBound tail,
                   double rel_tol = 1e-10, double scale = 1.0);

/// A density tabulated on a log-spaced time grid, with monotone cubic
/// interpolation in log-log coordinates between nodes. Values are zero outside
/// the tabulated range.
class LogGridDensity {
 public:
  LogGridDensity(const TransformSpec& spec, double t_min, double t_max, int points_per_decade,
                 const InversionConfig& cfg);

  double operator()(double t) const;
  double t_min() const noexcept { return t_.front(); }
  double t_max() const noexcept { return t_.back(); }
  double max_abs_err() const noexcept { return max_err_; }
  const std::vector<double>& nodes() const noexcept { return t_; }
  const std::vector<double>& values() const noexcept { return f_; }

 private:
  std::vector<double> t_, f_, logf_, slope_;
  double max_err_ = 0.0;
};

}  // namespace hbmgreen::laplace
