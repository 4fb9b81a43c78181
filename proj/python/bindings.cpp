// Python bindings for the main operations. Points are plain sequences whose last
// entry is the height x_n.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <string>

#include "hbmgreen/besselproc.hpp"
#include "hbmgreen/functionals.hpp"
#include "hbmgreen/hypgreen.hpp"
#include "hbmgreen/mcsim.hpp"
#include "hbmgreen/specfun.hpp"

namespace py = pybind11;
using namespace hbmgreen;

namespace {

py::handle g_error_type;

hypgreen::HyperbolicPoint point(const std::vector<double>& v) {
  if (v.empty()) throw Error(ErrorCode::DimensionMismatch, "empty point");
  return {std::vector<double>(v.begin(), v.end() - 1), v.back()};
}

besselproc::Measure measure(const std::string& m) {
  if (m == "speed") return besselproc::Measure::Speed;
  if (m == "lebesgue") return besselproc::Measure::Lebesgue;
  throw Error(ErrorCode::InvalidArgument, "measure must be 'speed' or 'lebesgue'");
}

hypgreen::Route route(const std::string& r) {
  if (r == "functional") return hypgreen::Route::ViaFunctional;
  if (r == "bessel") return hypgreen::Route::ViaBessel;
  throw Error(ErrorCode::InvalidArgument, "route must be 'functional' or 'bessel'");
}

mcsim::SimConfig sim_config(std::uint64_t paths, double dt, double horizon, std::uint64_t seed, unsigned workers) {
  mcsim::SimConfig c;
  c.n_paths = paths;
  c.dt = dt;
  c.horizon = horizon;
  c.seed = seed;
  c.workers = workers;
  return c;
}

py::dict sample_arrays(const std::vector<mcsim::PathFunctionalSample>& s) {
  const auto n = static_cast<py::ssize_t>(s.size());
  py::array_t<double> A(n), B(n), hit(n), end(n);
  py::array_t<bool> survived(n);
  auto a = A.mutable_unchecked<1>(), b = B.mutable_unchecked<1>(), h = hit.mutable_unchecked<1>(),
       e = end.mutable_unchecked<1>();
  auto sv = survived.mutable_unchecked<1>();
  for (py::ssize_t i = 0; i < n; ++i) {
    a(i) = s[i].A;
    b(i) = s[i].B;
    h(i) = s[i].hit_time.value_or(std::nan(""));
    e(i) = s[i].end_time;
    sv(i) = s[i].survived;
  }
  py::dict d;
  d["A"] = A;
  d["B"] = B;
  d["hit_time"] = hit;
  d["end_time"] = end;
  d["survived"] = survived;
  return d;
}

}  // namespace

PYBIND11_MODULE(_hbmgreen, m) {
  m.doc() = "Green functions and potentials of hyperbolic Brownian motion";

  py::exception<Error> err(m, "HbmError", PyExc_RuntimeError);
  g_error_type = err;
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(g_error_type)(py::str(e.what()));
      inst.attr("code") = to_string(e.code());
      PyErr_SetObject(g_error_type.ptr(), inst.ptr());
    }
  });

  py::class_<EvalResult>(m, "EvalResult")
      .def_readonly("value", &EvalResult::value)
      .def_readonly("abs_err", &EvalResult::abs_err)
      .def_property_readonly("method", [](const EvalResult& r) { return std::string(to_string(r.method)); })
      .def("__float__", [](const EvalResult& r) { return r.value; })
      .def("__repr__", [](const EvalResult& r) {
        return "EvalResult(value=" + py::repr(py::float_(r.value)).cast<std::string>() +
               ", abs_err=" + py::repr(py::float_(r.abs_err)).cast<std::string>() + ", method='" +
               to_string(r.method) + "')";
      });

  // Special functions.
  m.def("bessel_i", [](double nu, double z, bool scaled) {
    return specfun::bessel_i(specfun::Order(nu), z, scaled ? specfun::Scaling::Exponential : specfun::Scaling::None).value;
  }, py::arg("nu"), py::arg("z"), py::arg("scaled") = false, "I_nu(z), or e^{-z} I_nu(z) when scaled.");
  m.def("bessel_k", [](double nu, double z, bool scaled) {
    return specfun::bessel_k(specfun::Order(nu), z, scaled ? specfun::Scaling::Exponential : specfun::Scaling::None).value;
  }, py::arg("nu"), py::arg("z"), py::arg("scaled") = false, "K_nu(z), or e^{z} K_nu(z) when scaled.");
  m.def("bracket_s", [](double nu, double alpha, double beta, bool scaled) {
    return specfun::bracket_s(specfun::Order(nu), alpha, beta,
                              scaled ? specfun::Scaling::Exponential : specfun::Scaling::None).value;
  }, py::arg("nu"), py::arg("alpha"), py::arg("beta"), py::arg("scaled") = false);
  m.def("incomplete_gamma", [](const std::string& kind, double exponent, double bound) {
    if (kind != "lower" && kind != "upper") throw Error(ErrorCode::InvalidArgument, "kind must be 'lower' or 'upper'");
    return specfun::incomplete_gamma(kind == "lower" ? specfun::GammaKind::Lower : specfun::GammaKind::Upper,
                                     exponent, bound);
  }, py::arg("kind"), py::arg("exponent"), py::arg("bound"));

  // Exponential functionals.
  m.def("hartman_watson_theta", &functionals::hartman_watson_theta, py::arg("r"), py::arg("t"));
  m.def("joint_density", [](double mu, double t, double x, double u, double y) {
    return functionals::joint_density(functionals::DriftParams::make(mu, 0.0), t, x, u, y);
  }, py::arg("mu"), py::arg("t"), py::arg("x"), py::arg("u"), py::arg("y"));
  m.def("q_potential", [](double mu, double lam, double x, double y, double u) {
    return functionals::q_potential(functionals::DriftParams::make(mu, lam), x, y, u);
  }, py::arg("mu"), py::arg("lam"), py::arg("x"), py::arg("y"), py::arg("u"));
  m.def("q_hitting_density", [](double mu, double lam, double x, double a, double s) {
    return functionals::q_hitting_density(functionals::DriftParams::make(mu, lam), x, a, s);
  }, py::arg("mu"), py::arg("lam"), py::arg("x"), py::arg("a"), py::arg("s"));
  m.def("green_ab", [](double mu, double lam, double x, double a, double u, double y) {
    return functionals::green_ab(functionals::DriftParams::make(mu, lam), {x, a, u}, y);
  }, py::arg("mu"), py::arg("lam"), py::arg("x"), py::arg("a"), py::arg("u"), py::arg("y"));

  // Bessel processes.
  m.def("bessel_free_density", [](double nu, double t, double x, double y, const std::string& m) {
    return besselproc::free_density(besselproc::BesselIndex::make(nu), {t, x, y, 0.0, measure(m)}).value;
  }, py::arg("nu"), py::arg("t"), py::arg("x"), py::arg("y"), py::arg("measure") = "speed");
  m.def("bessel_killed_density", [](double nu, double t, double x, double y, double a, const std::string& m,
                                    const std::string& method) {
    if (method != "decomposition" && method != "resolvent")
      throw Error(ErrorCode::InvalidArgument, "method must be 'decomposition' or 'resolvent'");
    auto k = besselproc::killed_density(besselproc::BesselIndex::make(nu), {t, x, y, a, measure(m)},
                                        method == "resolvent" ? besselproc::KilledMethod::Resolvent
                                                              : besselproc::KilledMethod::Decomposition);
    return EvalResult{k.value, k.abs_err, k.method};
  }, py::arg("nu"), py::arg("t"), py::arg("x"), py::arg("y"), py::arg("a"), py::arg("measure") = "speed",
        py::arg("method") = "decomposition");
  m.def("bessel_hitting_density", [](double nu, double x, double a, double s) {
    return besselproc::hitting_density(besselproc::BesselIndex::make(nu), x, a, s);
  }, py::arg("nu"), py::arg("x"), py::arg("a"), py::arg("s"));
  m.def("killed_density_comparator", [](double nu, double t, double x, double y) {
    return besselproc::killed_density_comparator(besselproc::BesselIndex::make(nu), {t, x, y, 1.0}).value;
  }, py::arg("nu"), py::arg("t"), py::arg("x"), py::arg("y"), "Comparator at barrier 1, speed measure.");

  // Hyperbolic space.
  m.def("hyperbolic_distance", [](const std::vector<double>& x, const std::vector<double>& y) {
    return hypgreen::hyperbolic_distance(point(x), point(y));
  }, py::arg("x"), py::arg("y"));
  m.def("potential_kernel", [](int n, double lam, const std::vector<double>& x, const std::vector<double>& y) {
    return hypgreen::potential_kernel(hypgreen::ModelParams::make(n, lam, 0.0), point(x), point(y));
  }, py::arg("n"), py::arg("lam"), py::arg("x"), py::arg("y"));
  m.def("potential_comparator", [](int n, double lam, const std::vector<double>& x, const std::vector<double>& y) {
    return hypgreen::potential_comparator(hypgreen::ModelParams::make(n, lam, 0.0), point(x), point(y)).value;
  }, py::arg("n"), py::arg("lam"), py::arg("x"), py::arg("y"));
  m.def("green_function", [](int n, double lam, double a, const std::vector<double>& x, const std::vector<double>& y,
                             const std::string& r) {
    return hypgreen::green_function(hypgreen::ModelParams::make(n, lam, a), point(x), point(y), route(r));
  }, py::arg("n"), py::arg("lam"), py::arg("a"), py::arg("x"), py::arg("y"), py::arg("route") = "functional");
  m.def("green_comparator", [](int n, double lam, double a, const std::vector<double>& x, const std::vector<double>& y) {
    return hypgreen::green_comparator(hypgreen::ModelParams::make(n, lam, a), point(x), point(y)).value;
  }, py::arg("n"), py::arg("lam"), py::arg("a"), py::arg("x"), py::arg("y"));
  m.def("green_comparator_distance", [](int n, double lam, double a, const std::vector<double>& x,
                                        const std::vector<double>& y) {
    return hypgreen::green_comparator_distance(hypgreen::ModelParams::make(n, lam, a), point(x), point(y)).value;
  }, py::arg("n"), py::arg("lam"), py::arg("a"), py::arg("x"), py::arg("y"));
  m.def("green_cell_integral", [](int n, double lam, double a, const std::vector<double>& x, std::vector<double> lo,
                                  std::vector<double> hi, double h_lo, double h_hi) {
    return hypgreen::green_cell_integral(hypgreen::ModelParams::make(n, lam, a), point(x),
                                         hypgreen::Cell{std::move(lo), std::move(hi), h_lo, h_hi});
  }, py::arg("n"), py::arg("lam"), py::arg("a"), py::arg("x"), py::arg("lo"), py::arg("hi"), py::arg("h_lo"),
        py::arg("h_hi"));

  // Simulation.
  m.def("simulate_gbm", [](double mu, double lam, double x0, double a, std::uint64_t paths, double dt, double horizon,
                           std::uint64_t seed, unsigned workers) {
    std::vector<mcsim::PathFunctionalSample> s;
    {
      py::gil_scoped_release nogil;
      s = mcsim::simulate_gbm_functional(functionals::DriftParams::make(mu, lam), x0, a,
                                         sim_config(paths, dt, horizon, seed, workers));
    }
    return sample_arrays(s);
  }, py::arg("mu"), py::arg("lam"), py::arg("x0"), py::arg("a"), py::arg("paths") = 10000, py::arg("dt") = 1e-3,
        py::arg("horizon") = 10.0, py::arg("seed") = 1, py::arg("workers") = 0,
        "Paths of exp(B^{(-mu)}) and A up to the first hit of a. Returns a dict of numpy arrays.");
  m.def("simulate_hbm", [](int n, double lam, double a, const std::vector<double>& x, std::uint64_t paths, double dt,
                           double horizon, std::uint64_t seed, unsigned workers,
                           const std::vector<std::tuple<std::vector<double>, std::vector<double>, double, double>>& cells) {
    std::vector<hypgreen::Cell> cs;
    for (const auto& [lo, hi, h_lo, h_hi] : cells) cs.push_back({lo, hi, h_lo, h_hi});
    auto p = hypgreen::ModelParams::make(n, lam, a);
    auto xp = point(x);
    mcsim::HbmRun run;
    std::vector<mcsim::MCEstimate> occ;
    {
      py::gil_scoped_release nogil;
      run = mcsim::simulate_hbm(p, xp, sim_config(paths, dt, horizon, seed, workers), cs);
      occ = mcsim::occupation_estimates(run, seed);
    }
    py::dict d = sample_arrays(run.samples);
    py::array_t<double> exit({static_cast<py::ssize_t>(run.samples.size()), static_cast<py::ssize_t>(n - 1)});
    std::copy(run.exit_tilde.begin(), run.exit_tilde.end(), exit.mutable_data());
    d["exit_tilde"] = exit;
    py::list est;
    for (const auto& e : occ) est.append(py::make_tuple(e.value, e.std_err));
    d["occupation"] = est;
    return d;
  }, py::arg("n"), py::arg("lam"), py::arg("a"), py::arg("x"), py::arg("paths") = 10000, py::arg("dt") = 1e-3,
        py::arg("horizon") = 10.0, py::arg("seed") = 1, py::arg("workers") = 0,
        py::arg("cells") = std::vector<std::tuple<std::vector<double>, std::vector<double>, double, double>>{},
        "Hyperbolic Brownian motion killed at x_n = a. cells: (lo, hi, h_lo, h_hi) tuples; "
        "'occupation' holds (estimate, std_err) of the integrated Green function per cell.");
  m.def("lamperti_check", [](double mu, double x0, double a, std::uint64_t paths, double dt, double horizon,
                             std::uint64_t seed, std::optional<double> bessel_nu) {
    mcsim::LampertiReport r;
    {
      py::gil_scoped_release nogil;
      r = mcsim::lamperti_check(functionals::DriftParams::make(mu, 0.0), x0, a,
                                sim_config(paths, dt, horizon, seed, 0), bessel_nu);
    }
    py::dict d;
    d["statistic"] = r.ks.statistic;
    d["p_value"] = r.ks.p_value;
    d["censored_gbm"] = r.censored_gbm;
    d["censored_bessel"] = r.censored_bessel;
    return d;
  }, py::arg("mu"), py::arg("x0"), py::arg("a"), py::arg("paths") = 10000, py::arg("dt") = 1e-3,
        py::arg("horizon") = 10.0, py::arg("seed") = 1, py::arg("bessel_nu") = py::none());
}
