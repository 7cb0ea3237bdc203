// Command-line front end: fit, sample, transform, eval, posterior,
// contour, and a built-in check battery.
//
// Exit codes: 0 ok, 1 usage error, 2 data error, 3 numeric failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lpnest/bayes.hpp"
#include "lpnest/csv.hpp"
#include "lpnest/density.hpp"
#include "lpnest/fitting.hpp"
#include "lpnest/geometry.hpp"
#include "lpnest/model_io.hpp"
#include "lpnest/nrf.hpp"
#include "lpnest/polar.hpp"
#include "lpnest/sampler.hpp"
#include "lpnest/stats.hpp"

namespace {

using namespace lpnest;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

LpTree tree_from_file(const std::string& path) {
  std::string text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  const auto last = text.find_last_not_of(" \t\r\n");
  if (first == std::string::npos) throw std::runtime_error("empty tree file");
  return LpTree::parse(text.substr(first, last - first + 1));
}

RadialModel radial_template(const std::string& tag, const LpTree& tree) {
  if (tag == "lognormal") return LogNormalRadial{0.0, 1.0};
  if (tag == "gammap") {
    const double p = tree.node(LpTree::root_id()).p;
    return GammaPRadial{tree.dimension() / p, 1.0, p};
  }
  if (tag.rfind("lnmix:", 0) == 0) {
    const int k = std::stoi(tag.substr(6));
    if (k < 1) throw std::runtime_error("lnmix: component count must be >= 1");
    LogNormalMixtureRadial mix;
    mix.weights.assign(static_cast<std::size_t>(k), 1.0 / k);
    mix.mus.assign(static_cast<std::size_t>(k), 0.0);
    mix.sigmas.assign(static_cast<std::size_t>(k), 1.0);
    return mix;
  }
  throw std::runtime_error("unknown radial tag '" + tag + "' (use lognormal|gammap|lnmix:K)");
}

FitConfig config_from_json(const std::string& path) {
  FitConfig cfg;
  if (path.empty()) return cfg;
  const json j = json::parse(read_file(path));
  if (j.contains("max_iters")) cfg.max_iters = j["max_iters"].get<int>();
  if (j.contains("tolerance")) cfg.tol = j["tolerance"].get<double>();
  if (j.contains("p_min")) cfg.p_min = j["p_min"].get<double>();
  if (j.contains("armijo_c")) cfg.armijo_c = j["armijo_c"].get<double>();
  if (j.contains("shrink")) cfg.shrink = j["shrink"].get<double>();
  if (j.contains("blocks")) cfg.blocks = j["blocks"].get<std::vector<std::string>>();
  if (j.contains("max_cycles")) cfg.max_cycles = j["max_cycles"].get<int>();
  if (j.contains("n_starts")) cfg.n_starts = j["n_starts"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("whiten")) cfg.whiten = j["whiten"].get<bool>();
  if (j.contains("mixture_components")) {
    cfg.mixture_components = j["mixture_components"].get<int>();
  }
  return cfg;
}

int run_fit(const std::string& data_path, const std::string& tree_path,
            const std::string& radial_tag, const std::string& config_path,
            const std::string& model_out, const std::string& trace_out) {
  const Dataset data = read_csv_file(data_path);
  const LpTree tree = tree_from_file(tree_path);
  if (data.cols != static_cast<std::size_t>(tree.dimension())) {
    throw std::runtime_error("data has " + std::to_string(data.cols) +
                             " columns but the tree has " + std::to_string(tree.dimension()) +
                             " leaves");
  }
  const FitConfig cfg = config_from_json(config_path);
  const LpNestedModel model_template(tree, radial_template(radial_tag, tree));
  const FitResult result = fit(model_template, data, cfg);
  save_model(model_out, result.model);

  if (!trace_out.empty()) {
    std::ofstream out(trace_out);
    if (!out) throw std::runtime_error("cannot open '" + trace_out + "' for writing");
    out << "step,block,loglik\n";
    for (std::size_t i = 0; i < result.trace.loglik.size(); ++i) {
      out << i << ',' << result.trace.block[i] << ',' << format_double(result.trace.loglik[i])
          << '\n';
    }
  }
  std::printf("fitted model written to %s (log-likelihood %.6f, %.6f nats/dim)\n",
              model_out.c_str(), result.loglik,
              result.loglik / (static_cast<double>(data.rows) * tree.dimension()));
  return kExitOk;
}

int run_sample(const std::string& model_path, std::size_t count, std::uint64_t seed,
               const std::string& out_path) {
  const LpNestedModel model = load_model(model_path);
  Rng rng(seed);
  const Dataset samples = sample(model, rng, count);
  write_csv_file(out_path, samples);
  std::printf("%zu samples written to %s\n", samples.rows, out_path.c_str());
  return kExitOk;
}

int run_transform(const std::string& model_path, const std::string& data_path,
                  const std::string& out_path) {
  const LpNestedModel model = load_model(model_path);
  const Dataset data = read_csv_file(data_path);
  if (data.cols != static_cast<std::size_t>(model.tree.dimension())) {
    throw std::runtime_error("data/model dimension mismatch");
  }
  Dataset out = Dataset::zeros(data.rows, data.cols + 1);
  for (std::size_t j = 0; j < data.cols; ++j) out.columns[j] = "z" + std::to_string(j);
  out.columns.back() = "log_jacobian";
  for (std::size_t i = 0; i < data.rows; ++i) {
    const std::vector<double> y = model.map_through_W(data.row(i));
    const auto [z, logjac] = nrf_transform_with_jacobian(y, model.tree, model.radial);
    for (std::size_t j = 0; j < data.cols; ++j) out.at(i, j) = z[j];
    out.at(i, data.cols) = logjac;
  }
  write_csv_file(out_path, out);
  std::printf("transformed data written to %s\n", out_path.c_str());
  return kExitOk;
}

int run_eval(const std::string& model_path, const std::string& data_path,
             const std::string& out_path) {
  const LpNestedModel model = load_model(model_path);
  const Dataset data = read_csv_file(data_path);
  if (data.cols != static_cast<std::size_t>(model.tree.dimension())) {
    throw std::runtime_error("data/model dimension mismatch");
  }
  Dataset out = Dataset::zeros(data.rows, 1);
  out.columns[0] = "log_density";
  double total = 0.0;
  for (std::size_t i = 0; i < data.rows; ++i) {
    out.at(i, 0) = log_density(model, data.row(i));
    total += out.at(i, 0);
  }
  if (!out_path.empty()) write_csv_file(out_path, out);
  const double per_dim = total / (static_cast<double>(data.rows) * model.tree.dimension());
  std::printf("mean log-density: %.8f nats/sample, %.8f nats/dim\n",
              total / static_cast<double>(data.rows), per_dim);
  return kExitOk;
}

int run_posterior(const std::string& tree_path, const std::string& data_path,
                  const std::string& grid_path, const std::string& out_path) {
  const LpTree tree = tree_from_file(tree_path);
  const Dataset data = read_csv_file(data_path);
  const json j = json::parse(read_file(grid_path));
  GridSpec grid;
  grid.lo = j.at("lo").get<std::vector<double>>();
  grid.hi = j.at("hi").get<std::vector<double>>();
  grid.points = j.at("points").get<std::vector<int>>();
  const PosteriorGrid post =
      location_posterior_grid(tree, data, grid, [](std::span<const double>) { return 0.0; });

  Dataset out = Dataset::zeros(post.mu.size(), data.cols + 1);
  for (std::size_t a = 0; a < data.cols; ++a) out.columns[a] = "mu" + std::to_string(a);
  out.columns.back() = "log_posterior";
  for (std::size_t k = 0; k < post.mu.size(); ++k) {
    for (std::size_t a = 0; a < data.cols; ++a) out.at(k, a) = post.mu[k][a];
    out.at(k, data.cols) = post.log_posterior[k];
  }
  write_csv_file(out_path, out);
  std::printf("posterior grid written to %s\n", out_path.c_str());
  return kExitOk;
}

int run_contour(const std::string& tree_path, const std::string& levels_arg, int resolution,
                const std::string& out_path) {
  const LpTree tree = tree_from_file(tree_path);
  if (tree.dimension() != 2) {
    throw std::runtime_error("contour requires a 2-leaf tree");
  }
  if (resolution < 2) throw std::runtime_error("resolution must be >= 2");
  std::vector<double> levels;
  std::stringstream ss(levels_arg);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) levels.push_back(std::stod(item));
  }
  if (levels.empty()) throw std::runtime_error("no contour levels given");
  std::sort(levels.begin(), levels.end());

  Dataset out = Dataset::zeros(static_cast<std::size_t>(resolution) * resolution, 4);
  out.columns = {"x0", "x1", "f", "level_band"};
  std::size_t row = 0;
  std::vector<double> x(2);
  for (int i = 0; i < resolution; ++i) {
    x[0] = -1.5 + 3.0 * i / (resolution - 1.0);
    for (int j = 0; j < resolution; ++j) {
      x[1] = -1.5 + 3.0 * j / (resolution - 1.0);
      const double f = evaluate(tree, x);
      std::size_t band = 0;
      while (band < levels.size() && levels[band] < f) ++band;
      out.at(row, 0) = x[0];
      out.at(row, 1) = x[1];
      out.at(row, 2) = f;
      out.at(row, 3) = static_cast<double>(band);
      ++row;
    }
  }
  write_csv_file(out_path, out);
  std::printf("contour grid written to %s\n", out_path.c_str());
  return kExitOk;
}

// Built-in oracle battery: finite differences, Monte Carlo volume, KS
// batteries, and round trips. Prints one line per check.
int run_check(std::uint64_t seed) {
  int failures = 0;
  const auto report = [&](const char* name, bool pass) {
    std::printf("[%s] %s\n", pass ? "PASS" : "FAIL", name);
    if (!pass) ++failures;
  };
  Rng rng(seed);

  {
    bool ok = true;
    for (const char* text :
         {"(2.0 0 (1.0 1 2))", "(1.5 (0.5 0 1) (3.0 2 3 4))", "(0.8 0 1 2 3)"}) {
      const std::string canonical = LpTree::parse(text).serialize();
      ok = ok && LpTree::parse(canonical).serialize() == canonical;
    }
    report("tree parse/serialize round trip", ok);
  }

  {
    bool ok = true;
    for (int trial = 0; trial < 10 && ok; ++trial) {
      const LpTree tree = trial % 2 ? LpTree::parse("(1.7 0 1 2 3)")
                                    : LpTree::parse("(2.1 0 (0.9 1 2))");
      const int dim = tree.dimension();
      std::vector<double> x(static_cast<std::size_t>(dim));
      for (double& c : x) c = rng.uniform(0.2, 1.5) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
      const std::vector<double> gx = gradient_x(tree, x);
      for (int i = 0; i < dim && ok; ++i) {
        std::vector<double> xp = x, xm = x;
        xp[static_cast<std::size_t>(i)] += 1e-6;
        xm[static_cast<std::size_t>(i)] -= 1e-6;
        const double fd = (evaluate(tree, xp) - evaluate(tree, xm)) / 2e-6;
        ok = std::fabs(gx[static_cast<std::size_t>(i)] - fd) <= 1e-5 * std::max(1.0, std::fabs(fd));
      }
      const std::vector<double> gp = gradient_p(tree, x);
      const std::vector<double> p = tree.exponents();
      for (int j = 0; j < tree.inner_count() && ok; ++j) {
        std::vector<double> pp = p, pm = p;
        pp[static_cast<std::size_t>(j)] += 1e-6;
        pm[static_cast<std::size_t>(j)] -= 1e-6;
        const double fd = (evaluate(tree.with_exponents(pp), x) -
                           evaluate(tree.with_exponents(pm), x)) /
                          2e-6;
        ok = std::fabs(gp[static_cast<std::size_t>(j)] - fd) <= 1e-5 * std::max(1.0, std::fabs(fd));
      }
    }
    report("gradients vs central finite differences", ok);
  }

  {
    bool ok = true;
    for (const char* text : {"(2.0 0 (1.0 1 2))", "(1.5 (0.5 0 1) (3.0 2 3 4))"}) {
      const LpTree tree = LpTree::parse(text);
      const std::vector<double> ana = grad_p_log_surface(tree);
      const std::vector<double> p = tree.exponents();
      for (int j = 0; j < tree.inner_count() && ok; ++j) {
        std::vector<double> pp = p, pm = p;
        pp[static_cast<std::size_t>(j)] += 1e-6;
        pm[static_cast<std::size_t>(j)] -= 1e-6;
        const double fd = (log_surface_area(tree.with_exponents(pp)) -
                           log_surface_area(tree.with_exponents(pm))) /
                          2e-6;
        ok = std::fabs(ana[static_cast<std::size_t>(j)] - fd) <= 1e-5 * std::max(1.0, std::fabs(fd));
      }
      ok = ok && std::fabs(log_surface_area(tree) - log_surface_area_beta(tree)) < 1e-12;
    }
    report("surface-area exponent gradient and dual forms", ok);
  }

  {
    const LpTree tree = LpTree::parse("(2.0 0 (1.0 1 2))");
    std::size_t hits = 0;
    const std::size_t points = 1000000;
    std::vector<double> x(3);
    for (std::size_t i = 0; i < points; ++i) {
      for (double& c : x) c = rng.uniform(-1.0, 1.0);
      if (evaluate(tree, x) <= 1.0) ++hits;
    }
    const double mc = std::log(static_cast<double>(hits) / points) + 3.0 * std::log(2.0);
    report("Monte Carlo volume vs closed form (3%)", std::fabs(mc - log_volume(tree)) < 0.03);
  }

  {
    bool ok = true;
    const LpTree tree = LpTree::parse("(1.4 0 (2.3 1 2))");
    for (const RadialModel radial :
         {RadialModel{LogNormalRadial{0.0, 0.5}}, RadialModel{GammaPRadial{2.0, 1.0, 1.4}}}) {
      const LpNestedModel model(tree, radial);
      Rng stream = rng.fork();
      const std::size_t m = 20000;
      const Dataset samples = sample(model, stream, m);
      std::vector<double> radius(m);
      for (std::size_t i = 0; i < m; ++i) radius[i] = evaluate(tree, samples.row(i));
      const double d = ks_statistic(radius, [&](double r) { return cdf(radial, r); });
      ok = ok && d < ks_critical(m, 0.01);
    }
    report("sampler radius KS battery", ok);
  }

  {
    bool ok = true;
    for (const RadialModel radial :
         {RadialModel{GammaPRadial{1.3, 0.9, 2.2}}, RadialModel{LogNormalRadial{0.1, 0.7}},
          RadialModel{UniformBallRadial{4}}}) {
      for (const double q : {0.01, 0.5, 0.99}) {
        const double r = quantile(radial, q);
        ok = ok && std::fabs(cdf(radial, r) - q) < 1e-8;
      }
    }
    report("radial quantile/cdf round trips", ok);
  }

  {
    bool ok = true;
    const LpTree tree = LpTree::parse("(2.0 0 (1.0 1 2))");
    for (int trial = 0; trial < 100 && ok; ++trial) {
      std::vector<double> x(3);
      for (double& c : x) c = rng.uniform(-2.0, 2.0);
      const PolarPoint p = to_polar(tree, x);
      const std::vector<double> back = from_polar(tree, p);
      for (std::size_t i = 0; i < 3; ++i) {
        ok = ok && std::fabs(back[i] - x[i]) < 1e-9 * std::max(1.0, p.r);
      }
    }
    report("polar round trip", ok);
  }

  std::printf("%s\n", failures == 0 ? "all checks passed" : "CHECK FAILURES PRESENT");
  return failures == 0 ? kExitOk : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"L_p-nested symmetric distributions toolkit"};
  app.require_subcommand(1);

  std::string data_path, tree_path, model_path, config_path, out_path, trace_path;
  std::string radial_tag = "lognormal";
  std::string grid_path, levels_arg;
  std::size_t n_samples = 1000;
  std::uint64_t seed = 0;
  int resolution = 101;

  auto* fit_cmd = app.add_subcommand("fit", "fit a model to CSV data");
  fit_cmd->add_option("--data", data_path, "input CSV")->required();
  fit_cmd->add_option("--tree", tree_path, "tree DSL file")->required();
  fit_cmd->add_option("--radial", radial_tag, "lognormal|gammap|lnmix:K");
  fit_cmd->add_option("--config", config_path, "fit config JSON");
  fit_cmd->add_option("--out", out_path, "output model JSON")->required();
  fit_cmd->add_option("--trace", trace_path, "likelihood trace CSV");

  auto* sample_cmd = app.add_subcommand("sample", "draw samples from a model");
  sample_cmd->add_option("--model", model_path, "model JSON")->required();
  sample_cmd->add_option("--n-samples", n_samples, "number of samples")->required();
  sample_cmd->add_option("--seed", seed, "RNG seed (default 0)");
  sample_cmd->add_option("--out", out_path, "output CSV")->required();

  auto* transform_cmd = app.add_subcommand("transform", "nested radial factorization");
  transform_cmd->add_option("--model", model_path, "model JSON")->required();
  transform_cmd->add_option("--data", data_path, "input CSV")->required();
  transform_cmd->add_option("--out", out_path, "output CSV")->required();

  auto* eval_cmd = app.add_subcommand("eval", "per-sample log-density");
  eval_cmd->add_option("--model", model_path, "model JSON")->required();
  eval_cmd->add_option("--data", data_path, "input CSV")->required();
  eval_cmd->add_option("--out", out_path, "output CSV");

  auto* posterior_cmd = app.add_subcommand("posterior", "location posterior on a grid");
  posterior_cmd->add_option("--tree", tree_path, "tree DSL file")->required();
  posterior_cmd->add_option("--data", data_path, "input CSV")->required();
  posterior_cmd->add_option("--grid", grid_path, "grid spec JSON {lo, hi, points}")->required();
  posterior_cmd->add_option("--out", out_path, "output CSV")->required();

  auto* contour_cmd = app.add_subcommand("contour", "f values over [-1.5, 1.5]^2");
  contour_cmd->add_option("--tree", tree_path, "tree DSL file (2 leaves)")->required();
  contour_cmd->add_option("--levels", levels_arg, "comma-separated level list")->required();
  contour_cmd->add_option("--resolution", resolution, "grid resolution per axis");
  contour_cmd->add_option("--out", out_path, "output CSV")->required();

  auto* check_cmd = app.add_subcommand("check", "run the built-in oracle suite");
  check_cmd->add_option("--seed", seed, "RNG seed (default 0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (fit_cmd->parsed()) {
      return run_fit(data_path, tree_path, radial_tag, config_path, out_path, trace_path);
    }
    if (sample_cmd->parsed()) return run_sample(model_path, n_samples, seed, out_path);
    if (transform_cmd->parsed()) return run_transform(model_path, data_path, out_path);
    if (eval_cmd->parsed()) return run_eval(model_path, data_path, out_path);
    if (posterior_cmd->parsed()) {
      return run_posterior(tree_path, data_path, grid_path, out_path);
    }
    if (contour_cmd->parsed()) {
      return run_contour(tree_path, levels_arg, resolution, out_path);
    }
    if (check_cmd->parsed()) return run_check(seed);
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
