#pragma once

// Hyperbolic Brownian motion on the half-space model H^n = {x_n > 0}:
// distances, the lambda-potential kernel U^lambda, the lambda-Green function
// G^lambda of D = {x_n > a}, and the two-sided comparators for both.
//
// Kernels are densities against the hyperbolic volume dV = dx / x_n^n.

#include <vector>

#include "hbmgreen/types.hpp"

namespace hbmgreen::hypgreen {

struct HyperbolicPoint {
  std::vector<double> tilde;  // horizontal part, n - 1 coordinates
  double height = 1.0;        // x_n > 0

  int dimension() const noexcept { return static_cast<int>(tilde.size()) + 1; }
};

struct ModelParams {
  int n = 3;
  double lambda = 0.0;
  double a = 1.0;  // barrier; 0 is accepted by the comparators only

  static ModelParams make(int n, double lambda, double a);
  double mu() const noexcept { return 0.5 * (n - 1); }
  double nu() const;
  void validate() const;
};

/// |x - y|^2 in the Euclidean sense of the model.
double euclidean_sq(const HyperbolicPoint& x, const HyperbolicPoint& y);

/// cosh d = 1 + |x - y|^2 / (2 x_n y_n).
double hyperbolic_distance(const HyperbolicPoint& x, const HyperbolicPoint& y);

/// Distance to {x_n = a}: ln(x_n / a). Requires x_n >= a > 0.
double boundary_distance(const ModelParams& p, const HyperbolicPoint& x);

/// The dilation x -> c x, an isometry mapping {x_n > a} onto {x_n > c a}.
HyperbolicPoint dilate(const HyperbolicPoint& x, double c);
ModelParams with_barrier(const ModelParams& p, double a);

/// U^lambda(x, y) = y_n^{2mu+1} (x_n/y_n)^{mu-nu} int (2 pi w)^{-(n-1)/2}
///                  exp(-|x~ - y~|^2 / 2w) Q_nu(x_n, y_n; w) dw.
EvalResult potential_kernel(const ModelParams& p, const HyperbolicPoint& x, const HyperbolicPoint& y);

/// n >= 3: (2 x_n y_n/|x-y|^2)^{mu-1/2} (1 ^ 2 x_n y_n/|x-y|^2)^{nu+1/2};
/// n = 2:  (1 ^ 2 x_n y_n/|x-y|^2)^{nu+1/2}.
EvalResult potential_comparator(const ModelParams& p, const HyperbolicPoint& x, const HyperbolicPoint& y);

enum class Route {
  ViaFunctional,  // killed kernel of (A, exp B) through first-passage convolution
  ViaBessel,      // killed Bessel kernel from its resolvent, speed measure
};

const char* to_string(Route r);

EvalResult green_function(const ModelParams& p, const HyperbolicPoint& x, const HyperbolicPoint& y,
                          Route route = Route::ViaFunctional);

/// (2x_ny_n/|x-y|^2)^{mu-1/2} (1 ^ 2(x_n-a)(y_n-a)/|x-y|^2) (1 ^ 2x_ny_n/|x-y|^2)^{nu-1/2}; n > 2.
EvalResult green_comparator(const ModelParams& p, const HyperbolicPoint& x, const HyperbolicPoint& y);

/// sinh^{1-2mu}(d/2) cosh^{-nu-1/2}(d) (1 ^ (1 ^ delta_a(x))(1 ^ delta_a(y)) / (1 ^ d^2));
/// n > 2 and lambda > 0.
EvalResult green_comparator_distance(const ModelParams& p, const HyperbolicPoint& x,
                                     const HyperbolicPoint& y);

/// Axis-aligned cell: a box in the horizontal coordinates times a height range.
struct Cell {
  std::vector<double> lo, hi;  // horizontal box, n - 1 coordinates each
  double h_lo = 1.0, h_hi = 2.0;
};

/// Hyperbolic volume of a cell.
double cell_volume(const Cell& c);

/// int_cell G^lambda(x, y) dV(y), with the horizontal integral in closed form.
/// x must lie outside the cell.
EvalResult green_cell_integral(const ModelParams& p, const HyperbolicPoint& x, const Cell& cell);

}  // namespace hbmgreen::hypgreen
