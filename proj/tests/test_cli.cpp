#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lpnest/csv.hpp"
#include "lpnest/model_io.hpp"
#include "lpnest/rng.hpp"
#include "lpnest/stats.hpp"

using namespace lpnest;
namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "lpnest_cli_tests";

int run(const std::string& args) {
  const std::string cmd = std::string(LPNEST_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("csv writer/reader round-trips doubles exactly") {
  fs::create_directories(kWork);
  Rng rng(401);
  Dataset data = Dataset::zeros(64, 3);
  for (double& v : data.values) v = rng.normal() * std::exp(rng.uniform(-20.0, 20.0));
  const fs::path path = kWork / "roundtrip.csv";
  write_csv_file(path.string(), data);
  const Dataset back = read_csv_file(path.string());
  CHECK(back.values == data.values);
  CHECK(back.columns == data.columns);
}

TEST_CASE("model json round-trips") {
  const std::string text =
      "{\"schema\": 1, \"tree\": \"(2.0 0 (1.0 1 2))\","
      " \"radial\": {\"family\": \"gammap\", \"shape\": 1.5, \"scale\": 2.0, \"exponent\": 2.0},"
      " \"W\": null}";
  const LpNestedModel model = model_from_json(text);
  const LpNestedModel again = model_from_json(model_to_json(model));
  CHECK(model_to_json(again) == model_to_json(model));
  CHECK(again.tree.serialize() == "(2.0 0 (1.0 1 2))");
  CHECK_THROWS(model_from_json("{\"schema\": 2, \"tree\": \"0\", \"radial\": null}"));
  CHECK_THROWS(radial_from_json("{\"family\": \"cauchy\"}"));
}

TEST_CASE("cli: sample, fit, eval, transform round trip") {
  fs::create_directories(kWork);
  write(kWork / "model.json",
        "{\"schema\": 1, \"tree\": \"(2.0 0 (1.0 1 2))\","
        " \"radial\": {\"family\": \"lognormal\", \"mu\": 0.0, \"sigma\": 0.4}, \"W\": null}");
  write(kWork / "tree.txt", "(2.0 0 (1.0 1 2))\n");
  write(kWork / "cfg.json", "{\"whiten\": false, \"blocks\": [\"radial\", \"p\"]}");

  const std::string model = (kWork / "model.json").string();
  const std::string tree = (kWork / "tree.txt").string();
  const std::string data = (kWork / "data.csv").string();

  CHECK(run("sample --model " + model + " --n-samples 5000 --seed 3 --out " + data) == 0);
  CHECK(run("fit --data " + data + " --tree " + tree + " --radial lognormal --config " +
            (kWork / "cfg.json").string() + " --out " + (kWork / "fitted.json").string() +
            " --trace " + (kWork / "trace.csv").string()) == 0);
  CHECK(run("eval --model " + (kWork / "fitted.json").string() + " --data " + data + " --out " +
            (kWork / "ll.csv").string()) == 0);
  CHECK(run("transform --model " + (kWork / "fitted.json").string() + " --data " + data +
            " --out " + (kWork / "z.csv").string()) == 0);

  // The fitted model reloads identically through the JSON schema.
  const LpNestedModel fitted = load_model((kWork / "fitted.json").string());
  save_model((kWork / "fitted2.json").string(), fitted);
  CHECK(slurp(kWork / "fitted.json") == slurp(kWork / "fitted2.json"));

  // Fitted exponents land near the generating ones.
  const std::vector<double> p = fitted.tree.exponents();
  CHECK(std::fabs(p[0] - 2.0) < 0.25);
  CHECK(std::fabs(p[1] - 1.0) < 0.25);

  // The transform output carries the extra Jacobian column.
  const Dataset z = read_csv_file((kWork / "z.csv").string());
  CHECK(z.cols == 4);
  CHECK(z.columns.back() == "log_jacobian");
  CHECK(z.rows == 5000);
}

TEST_CASE("cli: deterministic outputs under a fixed seed") {
  fs::create_directories(kWork);
  write(kWork / "model.json",
        "{\"schema\": 1, \"tree\": \"(2.0 0 (1.0 1 2))\","
        " \"radial\": {\"family\": \"lognormal\", \"mu\": 0.0, \"sigma\": 0.4}, \"W\": null}");
  const std::string model = (kWork / "model.json").string();
  CHECK(run("sample --model " + model + " --n-samples 200 --seed 11 --out " +
            (kWork / "a.csv").string()) == 0);
  CHECK(run("sample --model " + model + " --n-samples 200 --seed 11 --out " +
            (kWork / "b.csv").string()) == 0);
  CHECK(slurp(kWork / "a.csv") == slurp(kWork / "b.csv"));
}

TEST_CASE("cli: eval agrees with an independent sample within 3 standard errors") {
  fs::create_directories(kWork);
  write(kWork / "model.json",
        "{\"schema\": 1, \"tree\": \"(1.5 0 (2.5 1 2))\","
        " \"radial\": {\"family\": \"gammap\", \"shape\": 2.0, \"scale\": 1.0, \"exponent\": 1.5},"
        " \"W\": null}");
  const std::string model = (kWork / "model.json").string();
  CHECK(run("sample --model " + model + " --n-samples 40000 --seed 21 --out " +
            (kWork / "s1.csv").string()) == 0);
  CHECK(run("sample --model " + model + " --n-samples 40000 --seed 22 --out " +
            (kWork / "s2.csv").string()) == 0);
  CHECK(run("eval --model " + model + " --data " + (kWork / "s1.csv").string() + " --out " +
            (kWork / "l1.csv").string()) == 0);
  CHECK(run("eval --model " + model + " --data " + (kWork / "s2.csv").string() + " --out " +
            (kWork / "l2.csv").string()) == 0);
  const Dataset l1 = read_csv_file((kWork / "l1.csv").string());
  const Dataset l2 = read_csv_file((kWork / "l2.csv").string());
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < l1.rows; ++i) m1 += l1.at(i, 0);
  for (std::size_t i = 0; i < l2.rows; ++i) m2 += l2.at(i, 0);
  m1 /= static_cast<double>(l1.rows);
  m2 /= static_cast<double>(l2.rows);
  double v = 0.0;
  for (std::size_t i = 0; i < l2.rows; ++i) v += (l2.at(i, 0) - m2) * (l2.at(i, 0) - m2);
  v /= static_cast<double>(l2.rows) * static_cast<double>(l2.rows - 1);
  CHECK(std::fabs(m1 - m2) < 3.0 * std::sqrt(2.0 * v));
}

TEST_CASE("cli: contour with equal exponents draws a circle") {
  fs::create_directories(kWork);
  write(kWork / "circle.txt", "(2.0 0 1)\n");
  CHECK(run("contour --tree " + (kWork / "circle.txt").string() +
            " --levels 0.5,1.0 --resolution 41 --out " + (kWork / "grid.csv").string()) == 0);
  const Dataset grid = read_csv_file((kWork / "grid.csv").string());
  CHECK(grid.rows == 41 * 41);
  for (std::size_t i = 0; i < grid.rows; ++i) {
    const double f = std::hypot(grid.at(i, 0), grid.at(i, 1));
    CHECK(grid.at(i, 2) == doctest::Approx(f).epsilon(1e-12));
    const double band = grid.at(i, 3);
    if (f < 0.5) CHECK(band == 0.0);
    if (f > 0.5 && f < 1.0) CHECK(band == 1.0);
    if (f > 1.0) CHECK(band == 2.0);
  }
}

TEST_CASE("cli: exit codes for usage and data errors") {
  fs::create_directories(kWork);
  CHECK(run("nonsense") == 1);
  CHECK(run("sample --model /nonexistent.json --n-samples 10 --out " +
            (kWork / "x.csv").string()) == 2);
  write(kWork / "badtree.txt", "(2.0 0)\n");
  write(kWork / "tiny.csv", "x0,x1\n0.1,0.2\n");
  CHECK(run("posterior --tree " + (kWork / "badtree.txt").string() + " --data " +
            (kWork / "tiny.csv").string() + " --grid /nonexistent.json --out " +
            (kWork / "x.csv").string()) == 2);
  write(kWork / "flat3.txt", "(2.0 0 1 2)\n");
  CHECK(run("contour --tree " + (kWork / "flat3.txt").string() + " --levels 1.0 --out " +
            (kWork / "x.csv").string()) == 2);
}
