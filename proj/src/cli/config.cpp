#include "msde/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace msde::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("config: unknown key '" + where + it.key() + "'");
}

double num_or(const json& obj, const char* key, double dflt) {
  if (!obj.contains(key)) return dflt;
  if (!obj[key].is_number()) throw ConfigError(std::string("config: ") + key + " must be a number");
  return obj[key].get<double>();
}

int int_or(const json& obj, const char* key, int dflt) {
  if (!obj.contains(key)) return dflt;
  if (!obj[key].is_number_integer())
    throw ConfigError(std::string("config: ") + key + " must be an integer");
  return obj[key].get<int>();
}

Vec vec_of(const json& arr, const char* what) {
  if (!arr.is_array()) throw ConfigError(std::string("config: ") + what + " must be an array");
  Vec v;
  for (const auto& e : arr) {
    if (!e.is_number()) throw ConfigError(std::string("config: ") + what + " entries must be numbers");
    v.push_back(e.get<double>());
  }
  return v;
}

FieldSpec parse_field(const json& obj, const std::string& where) {
  reject_unknown(obj, {"name", "c0", "coeffs", "matrix", "v", "omega"}, where);
  FieldSpec spec;
  if (!obj.contains("name") || !obj["name"].is_string())
    throw ConfigError("config: " + where + "name is required");
  spec.name = obj["name"].get<std::string>();
  spec.c0 = num_or(obj, "c0", 1.0);
  spec.omega = num_or(obj, "omega", 1.0);
  if (obj.contains("coeffs")) spec.coeffs = vec_of(obj["coeffs"], "coeffs");
  if (obj.contains("v")) spec.v = vec_of(obj["v"], "v");
  if (obj.contains("matrix")) {
    const auto& m = obj["matrix"];
    if (!m.is_array() || m.empty()) throw ConfigError("config: matrix must be a 2-d array");
    const int rows = static_cast<int>(m.size());
    spec.matrix.resize(rows, rows);
    for (int i = 0; i < rows; ++i) {
      const Vec row = vec_of(m[i], "matrix row");
      if (static_cast<int>(row.size()) != rows)
        throw ConfigError("config: matrix must be square");
      for (int j = 0; j < rows; ++j) spec.matrix(i, j) = row[j];
    }
  }
  return spec;
}

}  // namespace

RunConfig parse_config_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown(root, {"model", "fields", "sim", "init", "seed"}, "");

  RunConfig cfg;

  if (!root.contains("model")) throw ConfigError("config: missing 'model'");
  {
    const auto& m = root["model"];
    reject_unknown(m, {"kind", "d", "r", "K", "extent"}, "model.");
    if (!m.contains("kind") || !m["kind"].is_string())
      throw ConfigError("config: model.kind is required");
    const std::string kind = m["kind"].get<std::string>();
    if (kind == "euclidean")
      cfg.model.kind = geometry::ModelKind::Euclidean;
    else if (kind == "sphere")
      cfg.model.kind = geometry::ModelKind::Sphere;
    else if (kind == "hyperbolic")
      cfg.model.kind = geometry::ModelKind::Hyperbolic;
    else if (kind == "torus")
      cfg.model.kind = geometry::ModelKind::FlatTorus;
    else
      throw ConfigError("config: model.kind must be euclidean|sphere|hyperbolic|torus");
    cfg.model.dim = int_or(m, "d", 2);
    if (cfg.model.dim < 1) throw ConfigError("config: model.d must be >= 1");
    cfg.model.shrink_r = num_or(m, "r", 0.9);
    if (!(cfg.model.shrink_r > 0.0 && cfg.model.shrink_r < 1.0))
      throw ConfigError("config: model.r must lie in (0, 1)");
    cfg.model.metric_K = num_or(m, "K", 0.0);
    if (cfg.model.metric_K != 0.0 && cfg.model.metric_K < 1.0)
      throw ConfigError("config: model.K must be >= 1");
    cfg.model.extent = num_or(m, "extent", 0.0);
    if (cfg.model.extent < 0.0) throw ConfigError("config: model.extent must be >= 0");
  }

  if (root.contains("fields")) {
    const auto& f = root["fields"];
    reject_unknown(f, {"a_field", "b_field"}, "fields.");
    if (f.contains("a_field")) cfg.a_field = parse_field(f["a_field"], "fields.a_field.");
    if (f.contains("b_field")) cfg.b_field = parse_field(f["b_field"], "fields.b_field.");
  }

  if (root.contains("sim")) {
    const auto& s = root["sim"];
    reject_unknown(s, {"T", "h", "scheme", "switch", "n_paths", "save_stride", "threads"}, "sim.");
    cfg.T = num_or(s, "T", 1.0);
    cfg.h = num_or(s, "h", 1e-3);
    if (cfg.T <= 0.0) throw ConfigError("config: sim.T must be > 0");
    if (!(cfg.h > 0.0 && cfg.h <= cfg.T)) throw ConfigError("config: need 0 < sim.h <= sim.T");
    if (s.contains("scheme")) {
      const std::string sc = s["scheme"].get<std::string>();
      if (sc == "strat_heun")
        cfg.scheme = integrator::StepScheme::StratHeun;
      else if (sc == "ito_euler")
        cfg.scheme = integrator::StepScheme::ItoEuler;
      else
        throw ConfigError("config: sim.scheme must be strat_heun|ito_euler");
    }
    if (s.contains("switch")) {
      const auto& sw = s["switch"];
      reject_unknown(sw, {"policy", "m", "threshold"}, "sim.switch.");
      const std::string pol = sw.contains("policy") ? sw["policy"].get<std::string>() : "event";
      if (pol == "event") {
        cfg.policy = integrator::SwitchPolicy::event(num_or(sw, "threshold", 0.0));
      } else if (pol == "grid") {
        int m = int_or(sw, "m", 0);
        if (m == 0) {
          // default density from the shell-escape heuristic: T/m << shell width^2
          const double shell = (1.0 - cfg.model.shrink_r) / 3.0;
          m = static_cast<int>(std::ceil(10.0 * cfg.T / (shell * shell)));
        }
        if (m < 1) throw ConfigError("config: sim.switch.m must be >= 1");
        cfg.policy = integrator::SwitchPolicy::grid(m);
      } else {
        throw ConfigError("config: sim.switch.policy must be grid|event");
      }
    }
    cfg.n_paths = int_or(s, "n_paths", 1);
    if (cfg.n_paths < 1) throw ConfigError("config: sim.n_paths must be >= 1");
    cfg.save_stride = int_or(s, "save_stride", 1);
    if (cfg.save_stride < 1) throw ConfigError("config: sim.save_stride must be >= 1");
    cfg.threads = int_or(s, "threads", 0);
    if (cfg.threads < 0) throw ConfigError("config: sim.threads must be >= 0");
  }

  if (root.contains("init")) {
    const auto& in = root["init"];
    reject_unknown(in, {"chart", "xi", "frame"}, "init.");
    cfg.init_chart = int_or(in, "chart", -1);
    if (in.contains("xi")) cfg.init_xi = vec_of(in["xi"], "init.xi");
    if (in.contains("frame")) {
      const std::string fr = in["frame"].get<std::string>();
      if (fr != "auto") throw ConfigError("config: init.frame supports only 'auto'");
    }
  }

  if (root.contains("seed")) {
    if (!root["seed"].is_number_integer() && !root["seed"].is_number_unsigned())
      throw ConfigError("config: seed must be an integer");
    cfg.seed = root["seed"].get<uint64_t>();
  }

  if (!cfg.init_xi.empty()) {
    if (static_cast<int>(cfg.init_xi.size()) != cfg.model.dim)
      throw ConfigError("config: init.xi length must equal model.d");
    if (norm2(cfg.init_xi) >= 1.0) throw ConfigError("config: init.xi must lie in the unit ball");
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_json(ss.str());
}

geometry::ModelPtr build_model(const RunConfig& cfg) {
  try {
    return geometry::make_model(cfg.model);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

fields::TensorFieldPtr build_a_field(const RunConfig& cfg, const geometry::ModelPtr& model) {
  const auto& s = cfg.a_field;
  try {
    if (s.name == "identity") return fields::identity_tensor(model->dim());
    if (s.name == "zero") return fields::zero_tensor(model->dim());
    if (s.name == "scaled_identity") {
      Vec coeffs = s.coeffs;
      if (coeffs.empty()) {
        coeffs.assign(model->world_dim(), 0.0);
        coeffs[0] = 0.25;
      }
      return fields::scaled_identity_tensor(model, s.c0, coeffs);
    }
    if (s.name == "constant") {
      if (s.matrix.rows != model->dim())
        throw ConfigError("config: a_field.matrix must be d x d");
      return fields::constant_tensor(s.matrix);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  throw ConfigError("config: a_field.name must be identity|zero|scaled_identity|constant");
}

fields::VectorFieldPtr build_b_field(const RunConfig& cfg, const geometry::ModelPtr& model) {
  const auto& s = cfg.b_field;
  try {
    if (s.name == "zero") return fields::zero_vector(model->dim());
    if (s.name == "constant") {
      if (static_cast<int>(s.v.size()) != model->dim())
        throw ConfigError("config: b_field.v must have length d");
      return fields::constant_vector(s.v);
    }
    if (s.name == "rotation") return fields::rotation_field(model, s.omega);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  throw ConfigError("config: b_field.name must be zero|constant|rotation");
}

std::string config_echo_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["model"]["kind"] = geometry::kind_name(cfg.model.kind);
  j["model"]["d"] = cfg.model.dim;
  j["model"]["r"] = cfg.model.shrink_r;
  j["model"]["K"] = cfg.model.metric_K;
  j["model"]["extent"] = cfg.model.extent;
  auto field_json = [](const FieldSpec& f) {
    nlohmann::ordered_json jf;
    jf["name"] = f.name;
    if (f.name == "scaled_identity") {
      jf["c0"] = f.c0;
      jf["coeffs"] = f.coeffs;
    }
    if (f.name == "rotation") jf["omega"] = f.omega;
    if (!f.v.empty()) jf["v"] = f.v;
    return jf;
  };
  j["fields"]["a_field"] = field_json(cfg.a_field);
  j["fields"]["b_field"] = field_json(cfg.b_field);
  j["sim"]["T"] = cfg.T;
  j["sim"]["h"] = cfg.h;
  j["sim"]["scheme"] = integrator::scheme_name(cfg.scheme);
  j["sim"]["switch"]["policy"] =
      cfg.policy.kind == integrator::SwitchPolicy::Kind::Grid ? "grid" : "event";
  if (cfg.policy.kind == integrator::SwitchPolicy::Kind::Grid)
    j["sim"]["switch"]["m"] = cfg.policy.grid_m;
  j["sim"]["n_paths"] = cfg.n_paths;
  j["sim"]["save_stride"] = cfg.save_stride;
  j["sim"]["threads"] = cfg.threads;
  j["init"]["chart"] = cfg.init_chart;
  j["init"]["xi"] = cfg.init_xi;
  j["seed"] = cfg.seed;
  return j.dump(2) + "\n";
}

}  // namespace msde::cli
