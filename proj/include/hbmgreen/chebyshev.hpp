#pragma once

// Polynomial interpolation on Chebyshev-Lobatto points, evaluated with the
// barycentric formula. Used for smooth tabulated functions on short panels.

#include <cmath>
#include <numbers>
#include <vector>

namespace hbmgreen::cheb {

inline constexpr int kPoints = 17;

/// Lobatto points mapped to [a, b], ascending.
inline std::vector<double> nodes(double a, double b, int n = kPoints) {
  std::vector<double> x(n);
  for (int j = 0; j < n; ++j) {
    double c = -std::cos(std::numbers::pi * j / (n - 1));
    x[j] = 0.5 * (a + b) + 0.5 * (b - a) * c;
  }
  x.front() = a;
  x.back() = b;
  return x;
}

/// Barycentric interpolant through values f at nodes(a, b, f.size()).
inline double eval(const std::vector<double>& f, double a, double b, double x) {
  const int n = static_cast<int>(f.size());
  const double t = (2.0 * x - a - b) / (b - a);
  double num = 0.0, den = 0.0;
  for (int j = 0; j < n; ++j) {
    double tj = -std::cos(std::numbers::pi * j / (n - 1));
    double d = t - tj;
    if (d == 0.0) return f[j];
    double w = (j % 2 == 0 ? 1.0 : -1.0) / d;
    if (j == 0 || j == n - 1) w *= 0.5;
    num += w * f[j];
    den += w;
  }
  return num / den;
}

}  // namespace hbmgreen::cheb
