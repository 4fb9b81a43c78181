#pragma once

// Command-line driver: parsing of run specifications and the four commands
// (eval, bounds, simulate, verify). Kept apart from main() so the tests can
// drive it in-process.
//
// Output schema (fixed; changing it breaks the golden test):
//   point records   command,target,index,n,lambda,a,t,nu,x,y,value,abs_err,comparator,ratio,method,wall_time
//   bounds summary  points,min,max,spread,coarse_min,coarse_max,refinement_stable
//   verify records  command,suite,check,measured,tolerance,pass,wall_time
//   path records    path_id,t,A,B,hit_time,survived
// JSON output carries the same keys, one object per line, with point inputs
// nested under "inputs". Coordinates are written space-separated in CSV.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hbmgreen::cli {

enum class Format { Csv, Json };

struct GridAxis {
  std::string axis;  // lambda, t, a, xn, yn, x1..x<n-1>, y1..y<n-1>
  double min = 0.0, max = 0.0;
  int count = 2;
  bool log = false;
};

struct RunSpec {
  std::string command;  // eval | bounds | simulate | verify
  std::string target;   // green, potential, ... or a verify suite name
  int n = 3;
  double lambda = 0.0;
  double a = 1.0;
  std::vector<double> x{0.0, 0.0, 2.0};
  std::vector<double> y{1.0, 0.0, 3.0};
  double t = 1.0;                 // time for the Bessel kernel
  std::optional<double> nu;       // Bessel index; default sqrt(2 lambda + mu^2)
  std::optional<double> mu;       // GBM drift; default (n - 1) / 2
  std::string kind = "green";     // comparator flavour: green | distance | potential | kernel
  std::string route = "functional";
  std::vector<GridAxis> grid;
  std::uint64_t paths = 10000;
  double dt = 1e-3;
  double horizon = 10.0;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::string out = "-";
  Format format = Format::Json;
};

/// Column names of the record kinds above, in output order.
const std::vector<std::string>& point_columns();
const std::vector<std::string>& summary_columns();
const std::vector<std::string>& verify_columns();
const std::vector<std::string>& path_columns();

/// "axis:min:max:count[:lin|log]".
GridAxis parse_grid_axis(const std::string& text);
/// "(0,0,2)", "0,0,2" or "0 0 2".
std::vector<double> parse_point(const std::string& text);

/// Parses argv (flags plus an optional flat key=value file given with
/// --config). Throws Error(SpecParseError) on malformed input. Returns
/// nullopt if help was printed.
std::optional<RunSpec> parse_args(int argc, const char* const* argv, std::ostream& help_out);

/// Runs a specification, writing records to `out` and diagnostics to `err`.
/// Returns 0 iff every computation succeeded and every check passed.
int run(const RunSpec& spec, std::ostream& out, std::ostream& err);

/// parse_args + run with --out handling; the body of main().
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hbmgreen::cli
