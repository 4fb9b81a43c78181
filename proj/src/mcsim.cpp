#include "hbmgreen/mcsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "hbmgreen/parallel.hpp"

namespace hbmgreen::mcsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Draws {
  std::mt19937_64 rng;
  boost::random::normal_distribution<double> normal;
  boost::random::uniform_01<double> unif;
  explicit Draws(std::mt19937_64 r) : rng(std::move(r)) {}
  double gauss() { return normal(rng); }
  double u01() { return unif(rng); }
};

// Probability that a Brownian bridge with variance rate s2 over a step of
// length h between levels d0 > 0 and d1 > 0 above a barrier touches it.
double bridge_cross(double d0, double d1, double s2h) { return std::exp(-2.0 * d0 * d1 / s2h); }

double survival_fraction(const std::vector<PathFunctionalSample>& s) {
  double alive = 0.0;
  for (const auto& p : s) alive += p.survived ? 1.0 : 0.0;
  return alive / static_cast<double>(s.size());
}

void check_bias(const std::vector<PathFunctionalSample>& coarse, const std::vector<PathFunctionalSample>& fine,
                const char* what) {
  double s1 = survival_fraction(coarse), s2 = survival_fraction(fine);
  double n1 = static_cast<double>(coarse.size()), n2 = static_cast<double>(fine.size());
  double se = std::sqrt(s1 * (1 - s1) / n1 + s2 * (1 - s2) / n2);
  if (std::abs(s1 - s2) > 2.0 * se + 1.0 / std::min(n1, n2))
    throw Error(ErrorCode::StepTooCoarse, std::string(what) + ": survival moves from " + std::to_string(s1) +
                                              " to " + std::to_string(s2) + " when dt is halved");
}

}  // namespace

void SimConfig::validate() const {
  if (!(dt > 0.0) || !(horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt and horizon must be positive");
  if (dt > horizon / 10.0) throw Error(ErrorCode::StepTooCoarse, "dt must not exceed horizon / 10");
  if (n_paths < 1) throw Error(ErrorCode::InvalidArgument, "n_paths must be >= 1");
}

std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path) {
  std::uint64_t s = splitmix64(seed ^ splitmix64(path + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
  return std::mt19937_64(seq);
}

MCEstimate mean_estimate(const std::vector<double>& values, std::uint64_t seed) {
  MCEstimate e;
  e.samples = values.size();
  e.seed = seed;
  if (values.empty()) return e;
  double mean = 0.0, m2 = 0.0;
  std::uint64_t k = 0;
  for (double v : values) {  // Welford, in path order
    ++k;
    double d = v - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (v - mean);
  }
  e.value = mean;
  if (values.size() > 1) e.std_err = std::sqrt(m2 / static_cast<double>(values.size() - 1) / values.size());
  return e;
}

// ---------------------------------------------------------------------------

BesselRun simulate_bessel(const besselproc::BesselIndex& idx, double x0, double a, const SimConfig& cfg,
                          const std::vector<double>& observe_times, bool relative_step) {
  idx.validate();
  cfg.validate();
  if (!(a >= 0.0) || !(x0 > a)) throw Error(ErrorCode::InvalidArgument, "simulate_bessel needs x0 > a >= 0");
  std::vector<double> obs = observe_times;
  std::sort(obs.begin(), obs.end());
  for (double t : obs)
    if (!(t > 0.0) || t > cfg.horizon) throw Error(ErrorCode::InvalidArgument, "observation times must lie in (0, horizon]");

  const std::size_t n = cfg.n_paths;
  BesselRun run;
  run.samples.resize(n);
  run.times = obs;
  run.alive_at.assign(obs.size(), std::vector<float>(n, 0.0f));
  run.level_at.assign(obs.size(), std::vector<float>(n, std::numeric_limits<float>::quiet_NaN()));
  const double delta = idx.dimension(), a2 = a * a, ref = std::max(x0 * x0, a2);

  parallel_for(n, [&](std::size_t i) {
    Draws d(path_rng(cfg.seed, i));
    double z = x0 * x0, t = 0.0, A = 0.0;
    std::size_t next = 0;
    PathFunctionalSample& out = run.samples[i];
    out.path_id = i;
    for (;;) {
      double h = relative_step ? cfg.dt * std::max(z, std::max(a2, 1e-6 * ref)) / ref : cfg.dt;
      double stop = next < obs.size() ? obs[next] : cfg.horizon;
      bool land = false;
      if (t + h >= stop) {
        h = stop - t;
        land = true;
      }
      double zn = std::max(z + delta * h + 2.0 * std::sqrt(z) * std::sqrt(h) * d.gauss(), 0.0);
      double theta = -1.0;  // fraction of the step at which the barrier is hit
      if (zn <= a2) {
        theta = (z - a2) / (z - zn);
      } else if (cfg.crossing_correction && d.u01() < bridge_cross(z - a2, zn - a2, 4.0 * z * h)) {
        theta = 0.5;
      }
      if (theta >= 0.0) {
        double zh = std::max(a2, 1e-300);
        A += 0.5 * theta * h * (1.0 / z + 1.0 / zh);
        out.hit_time = t + theta * h;
        out.survived = false;
        out.A = A;
        out.B = a;
        out.end_time = *out.hit_time;
        return;
      }
      A += 0.5 * h * (1.0 / z + 1.0 / zn);
      z = zn;
      t = land ? stop : t + h;
      if (land) {
        if (next < obs.size()) {
          while (next < obs.size() && obs[next] <= t) {
            run.alive_at[next][i] = 1.0f;
            run.level_at[next][i] = static_cast<float>(std::sqrt(z));
            ++next;
          }
        }
        if (t >= cfg.horizon) break;
      }
    }
    out.survived = true;
    out.A = A;
    out.B = std::sqrt(z);
    out.end_time = cfg.horizon;
  }, cfg.workers);

  if (cfg.bias_check) {
    SimConfig half = cfg;
    half.dt *= 0.5;
    half.bias_check = false;
    check_bias(run.samples, simulate_bessel(idx, x0, a, half, {}, relative_step).samples, "Bessel survival");
  }
  return run;
}

std::vector<MCEstimate> bessel_survival(const BesselRun& run, std::uint64_t seed) {
  std::vector<MCEstimate> out;
  for (const auto& col : run.alive_at) out.push_back(mean_estimate(std::vector<double>(col.begin(), col.end()), seed));
  return out;
}

std::vector<MCEstimate> bessel_killed_histogram(const BesselRun& run, std::size_t j,
                                                const std::vector<double>& edges, std::uint64_t seed) {
  if (j >= run.times.size()) throw Error(ErrorCode::InvalidArgument, "no such observation time");
  std::vector<MCEstimate> out;
  const auto& lv = run.level_at[j];
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    double w = edges[k + 1] - edges[k];
    std::vector<double> v(lv.size());
    for (std::size_t i = 0; i < lv.size(); ++i)
      v[i] = (lv[i] >= edges[k] && lv[i] < edges[k + 1]) ? 1.0 / w : 0.0;
    out.push_back(mean_estimate(v, seed));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<PathFunctionalSample> simulate_gbm_functional(const functionals::DriftParams& dp, double x0,
                                                          double a, const SimConfig& cfg, GbmOptions opt) {
  dp.validate();
  cfg.validate();
  if (!(a >= 0.0) || !(x0 > a)) throw Error(ErrorCode::InvalidArgument, "simulate_gbm_functional needs x0 > a >= 0");
  const std::size_t n = cfg.n_paths;
  std::vector<PathFunctionalSample> samples(n);
  const double la = a > 0.0 ? std::log(a) : -kInf, a2 = a * a, mu = dp.mu;
  const double sq = std::sqrt(cfg.dt);
  const auto steps = static_cast<std::uint64_t>(std::ceil(cfg.horizon / cfg.dt - 1e-9));

  parallel_for(n, [&](std::size_t i) {
    Draws d(path_rng(cfg.seed, i));
    PathFunctionalSample& out = samples[i];
    out.path_id = i;
    double b = std::log(x0), A = 0.0, e2 = x0 * x0;
    for (std::uint64_t k = 0; k < steps; ++k) {
      const double t = k * cfg.dt;
      const double h = std::min(cfg.dt, cfg.horizon - t);
      const double bn = b - mu * h + (h == cfg.dt ? sq : std::sqrt(h)) * d.gauss();
      double theta = -1.0;
      if (bn <= la) {
        theta = (b - la) / (b - bn);
      } else if (cfg.crossing_correction && a > 0.0 && d.u01() < bridge_cross(b - la, bn - la, h)) {
        theta = 0.5;
      }
      if (theta >= 0.0) {
        A += 0.5 * theta * h * (e2 + a2);
        out.hit_time = t + theta * h;
        out.survived = false;
        out.A = A;
        out.B = la;
        out.end_time = *out.hit_time;
        return;
      }
      const double e2n = std::exp(2.0 * bn);
      A += 0.5 * h * (e2 + e2n);
      b = bn;
      e2 = e2n;
      if (A > opt.a_horizon) {  // censored on the A clock
        out.survived = true;
        out.A = A;
        out.B = b;
        out.end_time = t + h;
        return;
      }
    }
    out.survived = true;
    out.A = A;
    out.B = b;
    out.end_time = cfg.horizon;
  }, cfg.workers);

  if (cfg.bias_check) {
    SimConfig half = cfg;
    half.dt *= 0.5;
    half.bias_check = false;
    check_bias(samples, simulate_gbm_functional(dp, x0, a, half, opt), "GBM survival");
  }
  return samples;
}

// ---------------------------------------------------------------------------

double kolmogorov_q(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0, sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-17 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {
KsResult ks_finish(double D, double n1, double n2) {
  KsResult r;
  r.statistic = D;
  double ne = n2 > 0 ? n1 * n2 / (n1 + n2) : n1;
  double s = std::sqrt(ne);
  r.p_value = kolmogorov_q((s + 0.12 + 0.11 / s) * D);
  return r;
}
}  // namespace

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::InvalidArgument, "KS test needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n1 = a.size(), n2 = b.size();
  std::size_t i = 0, j = 0;
  double D = 0.0;
  while (i < a.size() && j < b.size()) {
    double v = std::min(a[i], b[j]);
    if (!std::isfinite(v)) break;
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    D = std::max(D, std::abs(i / n1 - j / n2));
  }
  // One sample exhausted its finite values: the other keeps climbing.
  while (i < a.size() && std::isfinite(a[i])) D = std::max(D, std::abs(++i / n1 - j / n2));
  while (j < b.size() && std::isfinite(b[j])) D = std::max(D, std::abs(i / n1 - ++j / n2));
  KsResult r = ks_finish(D, n1, n2);
  r.n1 = a.size();
  r.n2 = b.size();
  return r;
}

KsResult ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf) {
  if (a.empty()) throw Error(ErrorCode::InvalidArgument, "KS test needs a nonempty sample");
  std::sort(a.begin(), a.end());
  const double n = a.size();
  double D = 0.0;
  for (std::size_t i = 0; i < a.size() && std::isfinite(a[i]); ++i) {
    double F = cdf(a[i]);
    D = std::max({D, std::abs((i + 1) / n - F), std::abs(F - i / n)});
  }
  KsResult r = ks_finish(D, n, 0);
  r.n1 = a.size();
  return r;
}

LampertiReport lamperti_check(const functionals::DriftParams& dp, double x0, double a, const SimConfig& cfg,
                              std::optional<double> bessel_nu) {
  const double nu = dp.nu();
  LampertiReport rep;
  rep.nu_gbm = nu;
  rep.nu_bessel = bessel_nu.value_or(nu);

  // GBM with drift -nu on the real clock, stopped when A passes the horizon.
  SimConfig g = cfg;
  g.horizon = std::max(cfg.horizon, 1e4);
  g.bias_check = false;
  auto gs = simulate_gbm_functional(functionals::DriftParams::make(nu, 0.0), x0, a, g, GbmOptions{cfg.horizon});
  SimConfig bc = cfg;
  bc.seed = cfg.seed ^ 0x5bd1e995ULL;
  bc.bias_check = false;
  auto bs = simulate_bessel(besselproc::BesselIndex::make(rep.nu_bessel), x0, a, bc, {}, true).samples;

  std::vector<double> va, vb;
  va.reserve(gs.size());
  vb.reserve(bs.size());
  double cg = 0, cb = 0;
  for (const auto& s : gs) {
    bool hit = s.hit_time && s.A <= cfg.horizon;
    va.push_back(hit ? s.A : kInf);
    cg += hit ? 0 : 1;
  }
  for (const auto& s : bs) {
    vb.push_back(s.hit_time ? *s.hit_time : kInf);
    cb += s.hit_time ? 0 : 1;
  }
  rep.censored_gbm = cg / gs.size();
  rep.censored_bessel = cb / bs.size();
  rep.ks = ks_two_sample(std::move(va), std::move(vb));
  return rep;
}

// ---------------------------------------------------------------------------

HbmRun simulate_hbm(const hypgreen::ModelParams& p, const hypgreen::HyperbolicPoint& x, const SimConfig& cfg,
                    const std::vector<hypgreen::Cell>& cells) {
  p.validate();
  cfg.validate();
  if (x.dimension() != p.n) throw Error(ErrorCode::DimensionMismatch, "start point dimension differs from n");
  if (!(p.a > 0.0) || !(x.height > p.a)) throw Error(ErrorCode::BelowBarrier, "start must lie above a > 0");
  for (const auto& c : cells)
    if (static_cast<int>(c.lo.size()) != p.n - 1) throw Error(ErrorCode::DimensionMismatch, "cell dimension");

  const std::size_t n = cfg.n_paths, m = p.n - 1;
  HbmRun run;
  run.samples.resize(n);
  run.exit_tilde.assign(n * m, kNaN);
  run.occupation.assign(cells.size(), std::vector<double>(n, 0.0));
  const double la = std::log(p.a), mu = p.mu(), lam = p.lambda, a2 = p.a * p.a;
  const auto steps = static_cast<std::uint64_t>(std::ceil(cfg.horizon / cfg.dt - 1e-9));
  const double sq = std::sqrt(cfg.dt);

  parallel_for(n, [&](std::size_t i) {
    Draws d(path_rng(cfg.seed, i));
    std::vector<double> xt = x.tilde;
    double b = std::log(x.height), A = 0.0, e2 = x.height * x.height;
    auto in_cell = [&](const hypgreen::Cell& c, double height) {
      if (height < c.h_lo || height > c.h_hi) return false;
      for (std::size_t k = 0; k < m; ++k)
        if (xt[k] < c.lo[k] || xt[k] > c.hi[k]) return false;
      return true;
    };
    std::vector<double> prev(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) prev[c] = in_cell(cells[c], x.height) ? 1.0 : 0.0;
    PathFunctionalSample& out = run.samples[i];
    out.path_id = i;
    for (std::uint64_t k = 0; k < steps; ++k) {
      const double t = k * cfg.dt, h = std::min(cfg.dt, cfg.horizon - t);
      const double bn = b - mu * h + (h == cfg.dt ? sq : std::sqrt(h)) * d.gauss();
      double theta = -1.0;
      if (bn <= la) {
        theta = (b - la) / (b - bn);
      } else if (cfg.crossing_correction && d.u01() < bridge_cross(b - la, bn - la, h)) {
        theta = 0.5;
      }
      const double wt = std::exp(-lam * t);
      if (theta >= 0.0) {
        double dA = 0.5 * theta * h * (e2 + a2);
        for (std::size_t c = 0; c < cells.size(); ++c) run.occupation[c][i] += 0.5 * theta * h * wt * prev[c];
        A += dA;
        double s = std::sqrt(dA);
        for (std::size_t q = 0; q < m; ++q) run.exit_tilde[i * m + q] = xt[q] + s * d.gauss();
        out.hit_time = t + theta * h;
        out.survived = false;
        out.A = A;
        out.B = la;
        out.end_time = *out.hit_time;
        return;
      }
      const double e2n = std::exp(2.0 * bn), dA = 0.5 * h * (e2 + e2n), s = std::sqrt(dA);
      for (std::size_t q = 0; q < m; ++q) xt[q] += s * d.gauss();
      A += dA;
      b = bn;
      e2 = e2n;
      const double wn = std::exp(-lam * (t + h)), height = std::exp(b);
      for (std::size_t c = 0; c < cells.size(); ++c) {
        double now = in_cell(cells[c], height) ? 1.0 : 0.0;
        run.occupation[c][i] += 0.5 * h * (wt * prev[c] + wn * now);
        prev[c] = now;
      }
    }
    out.survived = true;
    out.A = A;
    out.B = b;
    out.end_time = cfg.horizon;
  }, cfg.workers);

  if (cfg.bias_check) {
    SimConfig half = cfg;
    half.dt *= 0.5;
    half.bias_check = false;
    check_bias(run.samples, simulate_hbm(p, x, half, {}).samples, "HBM exit");
  }
  return run;
}

std::vector<MCEstimate> occupation_estimates(const HbmRun& run, std::uint64_t seed) {
  std::vector<MCEstimate> out;
  for (const auto& col : run.occupation) out.push_back(mean_estimate(col, seed));
  return out;
}

void write_csv(std::ostream& os, const std::vector<PathFunctionalSample>& samples) {
  char buf[160];
  os << "path_id,t,A,B,hit_time,survived\n";
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g,%.17g,", static_cast<unsigned long long>(s.path_id),
                  s.end_time, s.A, s.B);
    os << buf;
    if (s.hit_time) {
      std::snprintf(buf, sizeof buf, "%.17g", *s.hit_time);
      os << buf;
    }
    os << ',' << (s.survived ? 1 : 0) << '\n';
  }
}

}  // namespace hbmgreen::mcsim
