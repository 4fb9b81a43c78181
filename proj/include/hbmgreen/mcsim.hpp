#pragma once

// Monte Carlo oracles: Bessel paths via squared-Bessel Euler steps, geometric
// Brownian motion with its exponential functional, the Lamperti time change,
// and hyperbolic Brownian motion with occupation-time estimators.
//
// Every path draws from its own generator seeded from (seed, path index), so
// streams are bit-identical for any number of workers.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <vector>

#include "hbmgreen/besselproc.hpp"
#include "hbmgreen/functionals.hpp"
#include "hbmgreen/hypgreen.hpp"

namespace hbmgreen::mcsim {

struct SimConfig {
  double dt = 1e-3;
  std::uint64_t n_paths = 10000;
  std::uint64_t seed = 1;
  double horizon = 10.0;
  bool crossing_correction = true;
  /// Re-run survival at dt/2 and raise StepTooCoarse on a significant shift.
  bool bias_check = false;
  /// Worker threads; 0 means hardware concurrency.
  unsigned workers = 0;

  void validate() const;
};

struct MCEstimate {
  double value = 0.0;
  double std_err = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

struct PathFunctionalSample {
  std::uint64_t path_id = 0;
  double A = 0.0;                 // additive functional at the end of the path
  double B = 0.0;                 // log-level (GBM) or level (Bessel) at the end
  std::optional<double> hit_time;  // first hitting time of the barrier, if any
  bool survived = true;            // no hit before the horizon

  double end_time = 0.0;  // min(hit time, horizon)
};

/// Generator for path `path` of a run with `seed`.
std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path);

/// Mean and standard error of per-path values, summed in path order.
MCEstimate mean_estimate(const std::vector<double>& values, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Bessel process BES^{(-nu)} started at x0 > a >= 0, killed at a.
// B holds R at the end of the path, A holds int_0^t ds / R_s^2.
// The step is dt * max(R^2, a^2) / max(x0^2, a^2) when `relative_step` is on,
// which keeps the work per unit of log-time constant for long horizons.

struct BesselRun {
  std::vector<PathFunctionalSample> samples;
  std::vector<double> times;
  /// alive_at[j][path] = 1 if the path is alive at observation time j.
  std::vector<std::vector<float>> alive_at;
  std::vector<std::vector<float>> level_at;  // R at observation time j (NaN if killed)
};

BesselRun simulate_bessel(const besselproc::BesselIndex& idx, double x0, double a, const SimConfig& cfg,
                          const std::vector<double>& observe_times = {}, bool relative_step = false);

/// P(T_a > t) at each t with standard errors.
std::vector<MCEstimate> bessel_survival(const BesselRun& run, std::uint64_t seed);

/// Histogram estimate of the killed kernel p_a(t_j, x0, y) against Lebesgue
/// measure on [edges[k], edges[k+1]).
std::vector<MCEstimate> bessel_killed_histogram(const BesselRun& run, std::size_t j,
                                                const std::vector<double>& edges, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Geometric Brownian motion exp(B^{(-mu)}) with A_t = int_0^t exp(2 B_s) ds.
// The path stops at the first crossing of log a, at real time `horizon`, or
// when A exceeds `a_horizon` (if finite). a = 0 disables the barrier.

struct GbmOptions {
  double a_horizon = std::numeric_limits<double>::infinity();
};

std::vector<PathFunctionalSample> simulate_gbm_functional(const functionals::DriftParams& dp, double x0,
                                                          double a, const SimConfig& cfg,
                                                          GbmOptions opt = {});

// ---------------------------------------------------------------------------
// Two-sample and one-sample Kolmogorov-Smirnov tests. Censored values may be
// given as +infinity.

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::uint64_t n1 = 0, n2 = 0;
};

/// Asymptotic Kolmogorov tail Q(lambda) = 2 sum (-1)^{k-1} e^{-2 k^2 lambda^2}.
double kolmogorov_q(double lambda);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf);

struct LampertiReport {
  KsResult ks;
  double nu_gbm = 0.0, nu_bessel = 0.0;
  double censored_gbm = 0.0, censored_bessel = 0.0;  // fractions
};

/// Compares A_{tau_a} of GBM with drift -nu against T_a of BES^{(-nu')},
/// nu' = nu unless overridden (negative control). Both are censored at
/// cfg.horizon on their own clocks.
LampertiReport lamperti_check(const functionals::DriftParams& dp, double x0, double a, const SimConfig& cfg,
                              std::optional<double> bessel_nu = std::nullopt);

// ---------------------------------------------------------------------------
// Hyperbolic Brownian motion: log x_n is Brownian with drift -mu, the horizontal
// part is a Brownian motion run with clock A_t. Paths exit at x_n = a.

struct HbmRun {
  std::vector<PathFunctionalSample> samples;  // B = log x_n at the end
  /// Horizontal exit location, n - 1 entries per path (NaN if the path survived).
  std::vector<double> exit_tilde;
  /// occupation[c][path] = int_0^tau e^{-lambda t} 1{X_t in cell c} dt.
  std::vector<std::vector<double>> occupation;
};

HbmRun simulate_hbm(const hypgreen::ModelParams& p, const hypgreen::HyperbolicPoint& x, const SimConfig& cfg,
                    const std::vector<hypgreen::Cell>& cells = {});

/// Occupation estimate of int_cell G^lambda dV for each cell.
std::vector<MCEstimate> occupation_estimates(const HbmRun& run, std::uint64_t seed);

// ---------------------------------------------------------------------------

/// CSV with columns path_id,t,A,B,hit_time,survived.
void write_csv(std::ostream& os, const std::vector<PathFunctionalSample>& samples);

}  // namespace hbmgreen::mcsim
