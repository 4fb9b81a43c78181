#pragma once

// Bessel processes BES^{(-nu)} of negative index, free and killed at a level a.
// Kernels are reported against the speed measure m^{(-nu)}(dy) = y^{1-2nu} dy
// unless Lebesgue is requested; convert() moves between the two.

#include <limits>

#include "hbmgreen/types.hpp"

namespace hbmgreen::besselproc {

struct BesselIndex {
  double nu = 0.5;  // the process has index -nu

  static BesselIndex make(double nu);
  double dimension() const noexcept { return 2.0 - 2.0 * nu; }
  void validate() const;
};

enum class Measure { Lebesgue, Speed };

const char* to_string(Measure m);

struct KernelQuery {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double a = 0.0;  // killing level; ignored by the free kernel
  Measure measure = Measure::Speed;
};

struct KernelValue {
  double value = 0.0;
  double abs_err = 0.0;
  Measure measure = Measure::Speed;
  Method method = Method::ClosedForm;
  /// log(value). The free kernel and the decomposition route keep it finite
  /// where value itself underflows.
  double log_value = -std::numeric_limits<double>::infinity();
};

/// m^{(-nu)}(y) = y^{1-2nu}.
double speed_density(double nu, double y);

/// Re-express a kernel value at endpoint y against the other measure.
KernelValue convert(const KernelValue& k, double nu, double y, Measure to);

/// Transition density of BES^{(-nu)}(x):
///   (y/t)(y/x)^{-nu} exp(-(x^2+y^2)/2t) I_nu(xy/t)  (Lebesgue).
KernelValue free_density(const BesselIndex& idx, const KernelQuery& q);

/// Transition density of BES^{(mu)}, mu >= 0, including the start x = 0.
double free_density_positive_index(double mu, double t, double x, double y);

/// Density of T_a for BES^{(-nu)}(x), x > a > 0.
EvalResult hitting_density(const BesselIndex& idx, double x, double a, double s);

enum class KilledMethod {
  /// p_a = p - int f_{T_a}(s) p(t-s, a, y) ds with tabulated hitting densities.
  Decomposition,
  /// Inversion of the closed-form killed resolvent: a Bromwich parabola for
  /// short times, the branch-cut (spectral) integral for long ones.
  Resolvent,
};

/// Transition density of BES^{(-nu)} killed at the first hitting time of a.
KernelValue killed_density(const BesselIndex& idx, const KernelQuery& q,
                           KilledMethod method = KilledMethod::Decomposition);

/// Two-sided comparator for the killed kernel at barrier 1 (speed measure):
///   (1 ^ (x-1)(y-1)/t)(1 ^ xy/t)^{nu-1/2}(xy)^{nu-1/2} t^{-1/2} e^{-(x-y)^2/2t}.
EvalResult killed_density_comparator(const BesselIndex& idx, const KernelQuery& q);
/// log of the comparator, finite for any admissible query.
double log_killed_density_comparator(const BesselIndex& idx, const KernelQuery& q);

}  // namespace hbmgreen::besselproc
