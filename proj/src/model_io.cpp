#include "lpnest/model_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace lpnest {

namespace {

using nlohmann::json;

json radial_to_json_obj(const RadialModel& radial) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GammaPRadial>) {
          return {{"family", "gammap"},
                  {"shape", m.shape},
                  {"scale", m.scale},
                  {"exponent", m.exponent}};
        } else if constexpr (std::is_same_v<T, UniformBallRadial>) {
          return {{"family", "uniform_ball"}, {"dim", m.dim}};
        } else if constexpr (std::is_same_v<T, LogNormalRadial>) {
          return {{"family", "lognormal"}, {"mu", m.mu}, {"sigma", m.sigma}};
        } else {
          return {{"family", "lognormal_mixture"},
                  {"weights", m.weights},
                  {"mus", m.mus},
                  {"sigmas", m.sigmas}};
        }
      },
      radial);
}

RadialModel radial_from_json_obj(const json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "gammap") {
    return GammaPRadial{j.at("shape").get<double>(), j.at("scale").get<double>(),
                        j.at("exponent").get<double>()};
  }
  if (family == "uniform_ball") {
    return UniformBallRadial{j.at("dim").get<int>()};
  }
  if (family == "lognormal") {
    return LogNormalRadial{j.at("mu").get<double>(), j.at("sigma").get<double>()};
  }
  if (family == "lognormal_mixture") {
    LogNormalMixtureRadial m;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.mus = j.at("mus").get<std::vector<double>>();
    m.sigmas = j.at("sigmas").get<std::vector<double>>();
    if (m.weights.size() != m.mus.size() || m.mus.size() != m.sigmas.size()) {
      throw std::runtime_error("radial json: mixture arrays must have equal length");
    }
    return m;
  }
  throw std::runtime_error("radial json: unknown family '" + family + "'");
}

}  // namespace

std::string radial_to_json(const RadialModel& radial) {
  return radial_to_json_obj(radial).dump();
}

RadialModel radial_from_json(const std::string& text) {
  return radial_from_json_obj(json::parse(text));
}

std::string model_to_json(const LpNestedModel& model) {
  json j;
  j["schema"] = 1;
  j["tree"] = model.tree.serialize();
  j["radial"] = radial_to_json_obj(model.radial);
  if (model.has_W()) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(model.W.size()));
    for (Eigen::Index i = 0; i < model.W.rows(); ++i) {
      for (Eigen::Index k = 0; k < model.W.cols(); ++k) w.push_back(model.W(i, k));
    }
    j["W"] = w;
  } else {
    j["W"] = nullptr;
  }
  return j.dump(2);
}

LpNestedModel model_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (!j.contains("schema") || j.at("schema").get<int>() != 1) {
    throw std::runtime_error("model json: unsupported schema");
  }
  LpTree tree = LpTree::parse(j.at("tree").get<std::string>());
  RadialModel radial = radial_from_json_obj(j.at("radial"));
  LpNestedModel model(std::move(tree), std::move(radial));
  if (j.contains("W") && !j.at("W").is_null()) {
    const std::vector<double> w = j.at("W").get<std::vector<double>>();
    const int n = model.tree.dimension();
    if (w.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
      throw std::runtime_error("model json: W must have n*n entries");
    }
    Eigen::MatrixXd mat(n, n);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) mat(i, k) = w[static_cast<std::size_t>(i * n + k)];
    }
    model.set_W(mat);
  }
  return model;
}

LpNestedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("model json: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

void save_model(const std::string& path, const LpNestedModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("model json: cannot open '" + path + "' for writing");
  out << model_to_json(model) << '\n';
}

}  // namespace lpnest
