#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli_core.hpp"
#include "hbmgreen/types.hpp"
#include "json.hpp"

using json = nlohmann::ordered_json;  // keeps key order as written
using namespace hbmgreen;

#ifndef HBMGREEN_GOLDEN_DIR
#error "HBMGREEN_GOLDEN_DIR must point at tests/golden"
#endif

namespace {

struct Outcome {
  int status = 0;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "hbmgreen");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int status = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

std::vector<json> lines(const std::string& text) {
  std::vector<json> v;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) v.push_back(json::parse(line));
  return v;
}

std::vector<std::string> keys(const json& j) {
  std::vector<std::string> k;
  for (auto it = j.begin(); it != j.end(); ++it) k.push_back(it.key());
  return k;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> v;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) v.push_back(cell);
  return v;
}

const json& golden() {
  static json g = [] {
    std::ifstream f(std::string(HBMGREEN_GOLDEN_DIR) + "/cli_schema.json");
    return json::parse(f);
  }();
  return g;
}

std::vector<std::string> golden_list(const char* name) { return golden()[name].get<std::vector<std::string>>(); }

}  // namespace

TEST_CASE("column lists match the golden schema") {
  CHECK(cli::point_columns() == golden_list("point"));
  CHECK(cli::summary_columns() == golden_list("summary"));
  CHECK(cli::verify_columns() == golden_list("verify"));
  CHECK(cli::path_columns() == golden_list("path"));
}

TEST_CASE("eval: JSON record") {
  auto r = run({"eval", "green", "--n", "3", "--lambda", "0", "--a", "1", "--x", "0,0,2", "--y", "1,0,3"});
  REQUIRE(r.status == 0);
  auto recs = lines(r.out);
  REQUIRE(recs.size() == 1);
  CHECK(keys(recs[0]) == golden_list("point_json"));
  CHECK(keys(recs[0]["inputs"]) == golden_list("inputs"));
  CHECK(recs[0]["value"].get<double>() > 0.0);
  CHECK(recs[0]["inputs"]["x"] == json::array({0, 0, 2}));
  CHECK(recs[0]["method"] == "quadrature");
}

TEST_CASE("eval: CSV with full precision") {
  auto r = run({"eval", "comparator", "--a", "0", "--kind", "potential", "--x", "0,0,2", "--y", "0,0,3", "--format",
                "csv"});
  REQUIRE(r.status == 0);
  std::istringstream is(r.out);
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  CHECK(split(header) == golden_list("point"));
  auto cells = split(row);
  REQUIRE(cells.size() == cli::point_columns().size());
  CHECK(std::stod(cells[10]) == doctest::Approx(std::sqrt(12.0)).epsilon(1e-15));
  CHECK(cells[10].size() >= 17);  // printed with 17 significant digits
}

TEST_CASE("domain errors are structured and keep going") {
  auto r = run({"eval", "potential", "--x", "0,0,2", "--y", "0,0,2"});
  CHECK(r.status == 1);
  auto errs = lines(r.err);
  REQUIRE(errs.size() == 1);
  CHECK(keys(errs[0]) == golden_list("error"));
  CHECK(errs[0]["error"] == "DomainError");
  CHECK(errs[0]["cause"] == "DiagonalSingularity");
  CHECK(errs[0]["inputs"]["y"] == json::array({0, 0, 2}));
  // In a grid the bad point is reported, the others are still computed.
  auto g = run({"bounds", "potential", "--x", "0,0,2", "--y", "0,0,1", "--grid", "yn:1:2:2"});
  CHECK(g.status == 1);
  auto recs = lines(g.out);
  CHECK(recs.size() >= 2);  // one point and the summary
  CHECK(lines(g.err).size() == 1);
}

TEST_CASE("bounds: grid expansion and summary") {
  auto r = run({"bounds", "green", "--grid", "yn:1.5:3:3", "--grid", "y1:0.5:1:2"});
  REQUIRE(r.status == 0);
  auto recs = lines(r.out);
  REQUIRE(recs.size() == 7);
  // Last axis varies fastest.
  CHECK(recs[0]["inputs"]["y"] == json::array({0.5, 0, 1.5}));
  CHECK(recs[1]["inputs"]["y"] == json::array({1, 0, 1.5}));
  CHECK(keys(recs[6]) == golden_list("summary"));
  CHECK(recs[6]["points"] == 6);
  double lo = recs[6]["min"], hi = recs[6]["max"];
  CHECK(recs[6]["spread"].get<double>() == doctest::Approx(hi / lo));
  for (int i = 0; i < 6; ++i) {
    double ratio = recs[i]["ratio"];
    CHECK(ratio >= lo);
    CHECK(ratio <= hi);
  }
}

TEST_CASE("verify and simulate") {
  auto v = run({"verify", "reflection", "--format", "csv"});
  CHECK(v.status == 0);
  std::istringstream is(v.out);
  std::string header;
  std::getline(is, header);
  CHECK(split(header) == golden_list("verify"));
  auto s = run({"simulate", "gbm", "--paths", "50", "--seed", "3"});
  CHECK(s.status == 0);
  auto recs = lines(s.out);
  REQUIRE(recs.size() == 50);
  CHECK(keys(recs[0]) == golden_list("path"));
  CHECK(s.out == run({"simulate", "gbm", "--paths", "50", "--seed", "3", "--workers", "1"}).out);
}

TEST_CASE("exit codes") {
  CHECK(run({"verify", "no-such-suite"}).status == 1);
  CHECK(lines(run({"verify", "no-such-suite"}).err)[0]["error"] == "UnknownSuite");
  auto bad = run({"eval", "green", "--lambda", "abc"});
  CHECK(bad.status == 2);
  CHECK(lines(bad.err)[0]["error"] == "SpecParseError");
  CHECK(run({"eval", "green", "--grid", "yn:1:2"}).status == 2);
  CHECK(run({"eval", "green", "--format", "xml"}).status == 2);
  CHECK(run({"--help"}).status == 0);
}

TEST_CASE("config file with command-line override") {
  const std::string path = "hbmgreen_cli_test.cfg";
  {
    std::ofstream f(path);
    f << "# flat key=value\ncommand = eval\ntarget = potential\nlambda = 0.5\nx = 0,0,2\ny = 1,0,3\n";
  }
  auto r = run({"--config", path});
  auto o = run({"--config", path, "--lambda", "2"});
  std::remove(path.c_str());
  REQUIRE(r.status == 0);
  REQUIRE(o.status == 0);
  CHECK(lines(r.out)[0]["inputs"]["lambda"] == 0.5);
  CHECK(lines(o.out)[0]["inputs"]["lambda"] == 2);
  CHECK(lines(o.out)[0]["value"].get<double>() < lines(r.out)[0]["value"].get<double>());
}
