#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mfgs/cost_models.hpp"
#include "mfgs/errors.hpp"
#include "mfgs/horizon.hpp"
#include "mfgs/stationary.hpp"
#include "mfgs/types.hpp"
#include "mfgs/verification.hpp"

namespace mfgs::cli {

using json = nlohmann::json;

/// Malformed or semantically invalid run configuration. Messages carry the
/// offending key path (semantic errors) or line/column (parse errors).
class ConfigError : public InvalidInputError {
 public:
  using InvalidInputError::InvalidInputError;
};

struct OutputConfig {
  std::string result = "result.json";
  std::string trajectory = "trajectory.csv";
  std::string stationary = "stationary.csv";
  std::string report = "report.json";
};

/// A fully validated run request: command, instance data, solver settings,
/// output layout, and the effective config document (defaults filled) that
/// gets echoed into results.
struct RunConfig {
  std::string command;
  std::uint64_t seed = 0;
  int s = 2;
  int horizon = 1;
  Vec m0;
  Vec terminal_cost;
  std::shared_ptr<const CostModel> model;
  HorizonSolverConfig horizon_cfg;
  StationaryConfig stationary_cfg;
  verification::GridOracleConfig oracle_cfg;
  OutputConfig output;
  json effective;
};

namespace detail {

inline std::pair<int, int> line_col(const std::string& text,
                                    std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline void check_keys(const json& obj, const std::string& path,
                       std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError("unknown key '" + (path.empty() ? "" : path + ".") +
                        item.key() + "'");
  }
}

inline const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline double get_number(const json& obj, const char* key, double def,
                         const std::string& path) {
  const json* v = find(obj, key);
  if (!v) return def;
  if (!v->is_number())
    throw ConfigError(path + "." + key + ": expected a number");
  return v->get<double>();
}

inline int get_int(const json& obj, const char* key, int def,
                   const std::string& path) {
  const json* v = find(obj, key);
  if (!v) return def;
  if (!v->is_number_integer())
    throw ConfigError(path + "." + key + ": expected an integer");
  return v->get<int>();
}

inline std::string get_string(const json& obj, const char* key,
                              const std::string& def,
                              const std::string& path) {
  const json* v = find(obj, key);
  if (!v) return def;
  if (!v->is_string())
    throw ConfigError(path + "." + key + ": expected a string");
  return v->get<std::string>();
}

inline Vec get_vector(const json& obj, const char* key,
                      const std::string& path) {
  const json* v = find(obj, key);
  if (!v) throw ConfigError(path + "." + key + ": required");
  if (!v->is_array())
    throw ConfigError(path + "." + key + ": expected an array of numbers");
  Vec out;
  for (const auto& x : *v) {
    if (!x.is_number())
      throw ConfigError(path + "." + key + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline std::shared_ptr<const CostModel> parse_model(const json& j,
                                                    const std::string& path,
                                                    json& echo) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  const std::string name = get_string(j, "name", "", path);
  if (name.empty()) throw ConfigError(path + ".name: required");
  echo = json::object();
  echo["name"] = name;
  if (name == "zero") {
    check_keys(j, path, {"name"});
    return make_zero_cost();
  }
  if (name == "constant") {
    check_keys(j, path, {"name", "kappa"});
    const double kappa = get_number(j, "kappa", 1.0, path);
    echo["kappa"] = kappa;
    return make_constant_cost(kappa);
  }
  if (name == "example1") {
    check_keys(j, path, {"name", "alpha1", "alpha2", "alpha3"});
    Example1Params p;
    p.alpha1 = get_number(j, "alpha1", 1.0, path);
    p.alpha2 = get_number(j, "alpha2", 1.0, path);
    p.alpha3 = get_number(j, "alpha3", 1.0, path);
    echo["alpha1"] = p.alpha1;
    echo["alpha2"] = p.alpha2;
    echo["alpha3"] = p.alpha3;
    try {
      return make_example1(p);
    } catch (const InvalidInputError& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }
  if (name == "example1_variant") {
    check_keys(j, path, {"name", "alpha1", "alpha2"});
    const double a1 = get_number(j, "alpha1", 1.0, path);
    const double a2 = get_number(j, "alpha2", 1.0, path);
    echo["alpha1"] = a1;
    echo["alpha2"] = a2;
    try {
      return make_example1_variant(a1, a2);
    } catch (const InvalidInputError& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }
  if (name == "example2") {
    check_keys(j, path, {"name"});
    return make_example2();
  }
  if (name == "example2_variant") {
    check_keys(j, path, {"name"});
    return make_example2_variant();
  }
  std::string available;
  for (const std::string& n : available_model_names())
    available += (available.empty() ? "" : ", ") + n;
  throw ConfigError(path + ".name: unknown model '" + name +
                    "' (available: " + available + ")");
}

}  // namespace detail

/// Parses and validates a UTF-8 JSON run configuration. Unknown keys are
/// rejected with their full path; all solver settings default per the
/// library defaults. Throws ConfigError.
inline RunConfig parse_config(const std::string& text) {
  using detail::check_keys;
  using detail::find;
  using detail::get_int;
  using detail::get_number;
  using detail::get_string;
  using detail::get_vector;

  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = detail::line_col(text, e.byte);
    throw ConfigError("config parse error at line " + std::to_string(line) +
                      ", column " + std::to_string(col) + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  check_keys(doc, "",
             {"command", "seed", "instance", "inner", "horizon", "stationary",
              "oracle", "output"});

  RunConfig cfg;
  cfg.command = get_string(doc, "command", "", "");
  if (cfg.command != "solve-horizon" && cfg.command != "solve-stationary" &&
      cfg.command != "oracle" && cfg.command != "verify")
    throw ConfigError(
        "command: must be one of solve-horizon, solve-stationary, oracle, "
        "verify (got '" +
        cfg.command + "')");

  if (const json* v = find(doc, "seed")) {
    if (!v->is_number_unsigned() && !v->is_number_integer())
      throw ConfigError("seed: expected a non-negative integer");
    cfg.seed = v->get<std::uint64_t>();
  }

  const json* inst = find(doc, "instance");
  if (!inst) throw ConfigError("instance: required");
  if (!inst->is_object()) throw ConfigError("instance: expected an object");
  check_keys(*inst, "instance", {"s", "N", "m0", "terminal_cost", "model"});
  cfg.s = get_int(*inst, "s", 0, "instance");
  if (cfg.s < 2) throw ConfigError("instance.s: must be an integer >= 2");
  cfg.horizon = get_int(*inst, "N", 1, "instance");
  if (cfg.horizon < 1) throw ConfigError("instance.N: must be an integer >= 1");

  if (find(*inst, "m0")) {
    cfg.m0 = get_vector(*inst, "m0", "instance");
  } else {
    cfg.m0 = Distribution::uniform(cfg.s).values();
  }
  if (static_cast<int>(cfg.m0.size()) != cfg.s)
    throw ConfigError("instance.m0: expected " + std::to_string(cfg.s) +
                      " entries, got " + std::to_string(cfg.m0.size()));
  try {
    (void)Distribution(cfg.m0);
  } catch (const InvalidInputError& e) {
    throw ConfigError("instance.m0: " + std::string(e.what()));
  }

  if (find(*inst, "terminal_cost")) {
    cfg.terminal_cost = get_vector(*inst, "terminal_cost", "instance");
  } else {
    cfg.terminal_cost = Vec(cfg.s, 0.0);
  }
  if (static_cast<int>(cfg.terminal_cost.size()) != cfg.s)
    throw ConfigError("instance.terminal_cost: expected " +
                      std::to_string(cfg.s) + " entries, got " +
                      std::to_string(cfg.terminal_cost.size()));
  try {
    (void)CostVector(cfg.terminal_cost);
  } catch (const InvalidInputError& e) {
    throw ConfigError("instance.terminal_cost: " + std::string(e.what()));
  }

  const json* model = find(*inst, "model");
  if (!model) throw ConfigError("instance.model: required");
  json model_echo;
  cfg.model = detail::parse_model(*model, "instance.model", model_echo);

  if (const json* v = find(doc, "inner")) {
    if (!v->is_object()) throw ConfigError("inner: expected an object");
    check_keys(*v, "inner",
               {"max_iters", "grad_tol", "step_init", "armijo_c",
                "armijo_shrink", "interior_eps"});
    InnerSolverConfig& c = cfg.horizon_cfg.inner;
    c.max_iters = get_int(*v, "max_iters", c.max_iters, "inner");
    c.grad_tol = get_number(*v, "grad_tol", c.grad_tol, "inner");
    c.step_init = get_number(*v, "step_init", c.step_init, "inner");
    c.armijo_c = get_number(*v, "armijo_c", c.armijo_c, "inner");
    c.armijo_shrink = get_number(*v, "armijo_shrink", c.armijo_shrink, "inner");
    c.interior_eps = get_number(*v, "interior_eps", c.interior_eps, "inner");
    try {
      c.validate();
    } catch (const InvalidInputError& e) {
      throw ConfigError("inner: " + std::string(e.what()));
    }
  }
  cfg.stationary_cfg.inner = cfg.horizon_cfg.inner;

  if (const json* v = find(doc, "horizon")) {
    if (!v->is_object()) throw ConfigError("horizon: expected an object");
    check_keys(*v, "horizon",
               {"damping", "max_outer_iters", "fp_tol", "multistart_count"});
    HorizonSolverConfig& c = cfg.horizon_cfg;
    c.damping = get_number(*v, "damping", c.damping, "horizon");
    c.max_outer_iters =
        get_int(*v, "max_outer_iters", c.max_outer_iters, "horizon");
    c.fp_tol = get_number(*v, "fp_tol", c.fp_tol, "horizon");
    c.multistart_count =
        get_int(*v, "multistart_count", c.multistart_count, "horizon");
    try {
      c.validate();
    } catch (const InvalidInputError& e) {
      throw ConfigError("horizon: " + std::string(e.what()));
    }
  }

  if (const json* v = find(doc, "stationary")) {
    if (!v->is_object()) throw ConfigError("stationary: expected an object");
    check_keys(*v, "stationary",
               {"damping_m", "rvi_tol", "outer_tol", "max_outer", "max_rvi"});
    StationaryConfig& c = cfg.stationary_cfg;
    c.damping_m = get_number(*v, "damping_m", c.damping_m, "stationary");
    c.rvi_tol = get_number(*v, "rvi_tol", c.rvi_tol, "stationary");
    c.outer_tol = get_number(*v, "outer_tol", c.outer_tol, "stationary");
    c.max_outer = get_int(*v, "max_outer", c.max_outer, "stationary");
    c.max_rvi = get_int(*v, "max_rvi", c.max_rvi, "stationary");
    try {
      c.validate();
    } catch (const InvalidInputError& e) {
      throw ConfigError("stationary: " + std::string(e.what()));
    }
  }

  if (const json* v = find(doc, "oracle")) {
    if (!v->is_object()) throw ConfigError("oracle: expected an object");
    check_keys(*v, "oracle", {"resolution", "interior_eps"});
    verification::GridOracleConfig& c = cfg.oracle_cfg;
    c.resolution = get_number(*v, "resolution", c.resolution, "oracle");
    c.interior_eps = get_number(*v, "interior_eps", c.interior_eps, "oracle");
    try {
      c.validate();
    } catch (const InvalidInputError& e) {
      throw ConfigError("oracle: " + std::string(e.what()));
    }
  }

  if (const json* v = find(doc, "output")) {
    if (!v->is_object()) throw ConfigError("output: expected an object");
    check_keys(*v, "output", {"result", "trajectory", "stationary", "report"});
    cfg.output.result = get_string(*v, "result", cfg.output.result, "output");
    cfg.output.trajectory =
        get_string(*v, "trajectory", cfg.output.trajectory, "output");
    cfg.output.stationary =
        get_string(*v, "stationary", cfg.output.stationary, "output");
    cfg.output.report = get_string(*v, "report", cfg.output.report, "output");
  }

  cfg.effective = {
      {"command", cfg.command},
      {"seed", cfg.seed},
      {"instance",
       {{"s", cfg.s},
        {"N", cfg.horizon},
        {"m0", cfg.m0},
        {"terminal_cost", cfg.terminal_cost},
        {"model", model_echo}}},
      {"inner",
       {{"max_iters", cfg.horizon_cfg.inner.max_iters},
        {"grad_tol", cfg.horizon_cfg.inner.grad_tol},
        {"step_init", cfg.horizon_cfg.inner.step_init},
        {"armijo_c", cfg.horizon_cfg.inner.armijo_c},
        {"armijo_shrink", cfg.horizon_cfg.inner.armijo_shrink},
        {"interior_eps", cfg.horizon_cfg.inner.interior_eps}}},
      {"horizon",
       {{"damping", cfg.horizon_cfg.damping},
        {"max_outer_iters", cfg.horizon_cfg.max_outer_iters},
        {"fp_tol", cfg.horizon_cfg.fp_tol},
        {"multistart_count", cfg.horizon_cfg.multistart_count}}},
      {"stationary",
       {{"damping_m", cfg.stationary_cfg.damping_m},
        {"rvi_tol", cfg.stationary_cfg.rvi_tol},
        {"outer_tol", cfg.stationary_cfg.outer_tol},
        {"max_outer", cfg.stationary_cfg.max_outer},
        {"max_rvi", cfg.stationary_cfg.max_rvi}}},
      {"oracle",
       {{"resolution", cfg.oracle_cfg.resolution},
        {"interior_eps", cfg.oracle_cfg.interior_eps}}},
      {"output",
       {{"result", cfg.output.result},
        {"trajectory", cfg.output.trajectory},
        {"stationary", cfg.output.stationary},
        {"report", cfg.output.report}}}};
  return cfg;
}

inline void apply_seed_override(RunConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.effective["seed"] = seed;
}

}  // namespace mfgs::cli
