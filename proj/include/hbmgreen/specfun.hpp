#pragma once

// Modified Bessel functions of the first and third kind, the cross product
// S_nu(alpha, beta) = I(alpha)K(beta) - K(alpha)I(beta), and incomplete gamma
// integrals.
//
// Large-argument values are available in exponentially scaled form:
//   scaled I: e^{-z} I_nu(z)      scaled K: e^{z} K_nu(z)
//   scaled S: e^{-(alpha-beta)} S_nu(alpha, beta)

#include <complex>

#include "hbmgreen/types.hpp"

namespace hbmgreen::specfun {

inline constexpr double kMaxOrder = 200.0;

/// Real order of a Bessel function. Rejects non-finite values and |order| > 200.
class Order {
 public:
  explicit Order(double value);
  double value() const noexcept { return value_; }

 private:
  double value_;
};

struct SpecialValue {
  double value = 0.0;
  bool scaled = false;
  double abs_err = 0.0;
};

enum class Scaling { None, Exponential };

/// The series is used for z <= series_switch(order), the scaled large-argument
/// branch above it.
double series_switch(double order);

SpecialValue bessel_i(Order order, double z, Scaling scaling = Scaling::None);
SpecialValue bessel_k(Order order, double z, Scaling scaling = Scaling::None);

/// Requires 0 < beta <= alpha. Exactly zero when alpha == beta.
SpecialValue bracket_s(Order order, double alpha, double beta,
                       Scaling scaling = Scaling::None);

enum class GammaKind { Lower, Upper };

/// Lower: int_0^bound s^exponent e^{-s} ds. Upper: int_bound^inf s^exponent e^{-s} ds.
/// Both require exponent > -1 and bound > 0.
EvalResult incomplete_gamma(GammaKind kind, double exponent, double bound);

// ---------------------------------------------------------------------------
// Unchecked kernels. These skip argument validation and are meant for inner
// loops that have already established the domain.

/// e^{-z} I_nu(z), nu >= 0, z > 0. Dispatches series / large-argument branch.
double bessel_i_scaled(double nu, double z);
/// e^{z} K_nu(z), z > 0, any real nu.
double bessel_k_scaled(double nu, double z);

/// Defining power series for e^{-z} I_nu(z), nu >= 0. `terms` receives the
/// number of terms summed when non-null.
double bessel_i_series_scaled(double nu, double z, int* terms = nullptr);
/// Large-argument expansion for e^{-z} I_nu(z). Sets *converged to false when the
/// expansion cannot reach double precision at this (nu, z).
double bessel_i_asymptotic_scaled(double nu, double z, bool* converged);
/// Continued-fraction evaluation (Temme/Steed) of e^{-z} I_nu(z) and e^{z} K_nu(z).
void bessel_ik_cf_scaled(double nu, double z, double* i_scaled, double* k_scaled);

/// e^{z} K_nu(z) for complex z with Re z > 0 and real nu.
std::complex<double> bessel_k_scaled(double nu, std::complex<double> z);
/// e^{-z} I_nu(z) for complex z with Re z > 0 and real nu.
std::complex<double> bessel_i_scaled(double nu, std::complex<double> z);
/// e^{-r} I_nu(r) for complex order with Re nu >= 0 and real r > 0.
std::complex<double> bessel_i_scaled(std::complex<double> nu, double r);
/// log(e^{-r} I_nu(r)) for complex order; finite where the value underflows.
std::complex<double> log_bessel_i_scaled(std::complex<double> nu, double r);

/// log Gamma(z) for complex z, principal branch of the log for Re z > 0.
std::complex<double> lgamma(std::complex<double> z);

}  // namespace hbmgreen::specfun
