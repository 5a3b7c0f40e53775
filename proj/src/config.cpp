#include "fibreflow/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fibreflow/errors.hpp"
#include "json.hpp"

namespace fibreflow {

using nlohmann::json;

namespace {

// A JSON object whose keys must all be consumed.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_ + " must be an object");
  }

  template <class T>
  void get(const std::string& key, T& out) {
    used_.insert(key);
    const auto it = node_.find(key);
    if (it == node_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  void get_count(const std::string& key, std::size_t& out) {
    long long value = static_cast<long long>(out);
    get(key, value);
    if (value <= 0) throw ConfigError(where(key) + " must be a positive integer");
    out = static_cast<std::size_t>(value);
  }

  void get_int(const std::string& key, int& out) { get(key, out); }

  bool has(const std::string& key) const { return node_.contains(key); }

  std::optional<Section> child(const std::string& key) {
    used_.insert(key);
    const auto it = node_.find(key);
    if (it == node_.end()) return std::nullopt;
    return Section(*it, where(key));
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return node_.at(key);
  }

  void finish() const {
    for (const auto& item : node_.items())
      if (!used_.contains(item.key())) throw ConfigError("unknown key " + where(item.key()));
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> used_;
};

json parse_text(std::string_view text) {
  try {
    return json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void read_model(Section& root, ModelParams& p) {
  auto s = root.child("model");
  if (!s) return;
  s->get("a", p.a);
  s->get("b", p.b);
  s->get("c", p.c);
  std::string profile(to_string(p.profile));
  s->get("profile", profile);
  p.profile = parse_profile(profile);
  s->get("epsilon", p.epsilon);
  s->get("epsilon0", p.epsilon0);
  s->get("g_floor", p.g_floor);
  s->get("g_ref", p.g_ref);
  s->finish();
}

void read_grid(Section& root, double& length, std::size_t& nodes) {
  auto s = root.child("grid");
  if (!s) return;
  s->get("L", length);
  s->get_count("N", nodes);
  s->finish();
}

void read_ic(Section& root, InitialData& ic) {
  auto s = root.child("ic");
  if (!s) return;
  s->get("h0", ic.h0);
  s->get("amplitude", ic.amplitude);
  s->finish();
}

JacobianMode parse_jacobian(const std::string& name) {
  if (name == "analytic") return JacobianMode::Analytic;
  if (name == "finite_difference") return JacobianMode::FiniteDifference;
  throw ConfigError("unknown jacobian mode '" + name + "' (analytic, finite_difference)");
}

TimeScheme parse_scheme(const std::string& name) {
  if (name == "backward_euler") return TimeScheme::BackwardEuler;
  if (name == "crank_nicolson") return TimeScheme::CrankNicolson;
  throw ConfigError("unknown scheme '" + name + "' (backward_euler, crank_nicolson)");
}

const char* name_of(JacobianMode m) {
  return m == JacobianMode::Analytic ? "analytic" : "finite_difference";
}

const char* name_of(TimeScheme s) {
  return s == TimeScheme::BackwardEuler ? "backward_euler" : "crank_nicolson";
}

const char* name_of(GuessKind k) {
  switch (k) {
    case GuessKind::Pde: return "pde";
    case GuessKind::Cosine: return "cosine";
    case GuessKind::File: return "file";
  }
  return "";
}

json model_json(const ModelParams& p) {
  return {{"a", p.a},
          {"b", p.b},
          {"c", p.c},
          {"profile", std::string(to_string(p.profile))},
          {"epsilon", p.epsilon},
          {"epsilon0", p.epsilon0},
          {"g_floor", p.g_floor},
          {"g_ref", p.g_ref}};
}

json grid_json(double length, std::size_t nodes) { return {{"L", length}, {"N", nodes}}; }

json ic_json(const InitialData& ic) { return {{"h0", ic.h0}, {"amplitude", ic.amplitude}}; }

void validate_ic(const InitialData& ic) {
  if (!std::isfinite(ic.h0) || !std::isfinite(ic.amplitude))
    throw ConfigError("ic values must be finite");
  if (!(ic.h0 - std::abs(ic.amplitude) > 1.0))
    throw ConfigError("ic: h0 - |amplitude| must exceed 1 (film touches the fibre)");
}

void validate_grid(double length, std::size_t nodes) {
  if (!(length > 0.0) || !std::isfinite(length)) throw ConfigError("grid.L must be positive");
  if (nodes < 8) throw ConfigError("grid.N must be at least 8");
}

}  // namespace

double InitialData::mass(double length) const {
  return length * (h0 * h0 - 1.0) + 0.5 * amplitude * amplitude * length;
}

void RunConfig::validate() const {
  params.validate();
  validate_grid(length, nodes);
  stepper.validate();
  validate_ic(ic);
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be non-negative");
  if (output.every) {
    if (!(*output.every > 0.0)) throw ConfigError("output.every must be positive");
  } else {
    for (std::size_t k = 0; k < output.times.size(); ++k) {
      const double t = output.times[k];
      if (!(t >= 0.0 && t <= t_end)) throw ConfigError("output.times must lie in [0, t_end]");
      if (k > 0 && !(t > output.times[k - 1]))
        throw ConfigError("output.times must be strictly increasing");
    }
  }
}

std::vector<double> RunConfig::output_times() const {
  if (!output.every) return output.times;
  std::vector<double> times;
  const double every = *output.every;
  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * every;
    if (t > t_end * (1.0 + 1e-12)) break;
    times.push_back(std::min(t, t_end));
  }
  if (times.back() < t_end) times.push_back(t_end);
  return times;
}

void TwConfig::validate() const {
  params.validate();
  validate_grid(length, nodes);
  if (mass && !(*mass > 0.0)) throw ConfigError("mass must be positive");
  if (!mass) validate_ic(ic);
  if (!(solver.tol > 0.0)) throw ConfigError("solver.tol must be positive");
  if (solver.max_iter < 1) throw ConfigError("solver.max_iter must be at least 1");
  if (solver.max_halvings < 0) throw ConfigError("solver.max_halvings must be non-negative");
  if (solver.pin_index >= nodes) throw ConfigError("solver.pin_index outside the grid");
  switch (guess.kind) {
    case GuessKind::Pde:
      validate_ic(ic);
      if (!(guess.dt > 0.0)) throw ConfigError("guess.dt must be positive");
      if (!(guess.t_end > 0.0)) throw ConfigError("guess.t_end must be positive");
      break;
    case GuessKind::Cosine:
      if (!(guess.amplitude >= 0.0)) throw ConfigError("guess.amplitude must be non-negative");
      break;
    case GuessKind::File:
      if (guess.path.empty()) throw ConfigError("guess.path is required for a file guess");
      break;
  }
}

RunConfig parse_run_config(std::string_view text) {
  const json doc = parse_text(text);
  Section root(doc, "config");
  RunConfig cfg;
  read_model(root, cfg.params);
  read_grid(root, cfg.length, cfg.nodes);
  if (auto s = root.child("stepper")) {
    s->get("dt", cfg.stepper.dt);
    s->get("newton_tol", cfg.stepper.newton_tol);
    s->get_int("newton_max_iter", cfg.stepper.newton_max_iter);
    std::string jacobian = name_of(cfg.stepper.jacobian_mode);
    s->get("jacobian", jacobian);
    cfg.stepper.jacobian_mode = parse_jacobian(jacobian);
    std::string scheme = name_of(cfg.stepper.scheme);
    s->get("scheme", scheme);
    cfg.stepper.scheme = parse_scheme(scheme);
    s->get("v_floor", cfg.stepper.v_floor);
    s->get_int("max_halvings", cfg.stepper.max_halvings);
    s->finish();
  }
  root.get("t_end", cfg.t_end);
  if (auto s = root.child("output")) {
    if (s->has("every") && s->has("times"))
      throw ConfigError("output: give either 'every' or 'times', not both");
    if (s->has("times")) {
      cfg.output.every.reset();
      s->get("times", cfg.output.times);
    } else {
      double every = *cfg.output.every;
      s->get("every", every);
      cfg.output.every = every;
    }
    s->finish();
  }
  read_ic(root, cfg.ic);
  root.get("out_dir", cfg.out_dir);
  root.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_file(path));
}

TwConfig parse_tw_config(std::string_view text) {
  const json doc = parse_text(text);
  Section root(doc, "config");
  TwConfig cfg;
  read_model(root, cfg.params);
  read_grid(root, cfg.length, cfg.nodes);
  if (root.has("mass")) {
    double m = 0.0;
    root.get("mass", m);
    cfg.mass = m;
  }
  read_ic(root, cfg.ic);
  if (auto s = root.child("solver")) {
    s->get("tol", cfg.solver.tol);
    s->get_int("max_iter", cfg.solver.max_iter);
    s->get_int("max_halvings", cfg.solver.max_halvings);
    long long pin = static_cast<long long>(cfg.solver.pin_index);
    s->get("pin_index", pin);
    if (pin < 0) throw ConfigError("solver.pin_index must be non-negative");
    cfg.solver.pin_index = static_cast<std::size_t>(pin);
    if (s->has("pin_value")) {
      double value = 0.0;
      s->get("pin_value", value);
      cfg.solver.pin_value = value;
    }
    s->finish();
  }
  if (auto s = root.child("guess")) {
    std::string kind = name_of(cfg.guess.kind);
    s->get("kind", kind);
    if (kind == "pde") {
      cfg.guess.kind = GuessKind::Pde;
      s->get("t_end", cfg.guess.t_end);
      s->get("dt", cfg.guess.dt);
    } else if (kind == "cosine") {
      cfg.guess.kind = GuessKind::Cosine;
      s->get("amplitude", cfg.guess.amplitude);
    } else if (kind == "file") {
      cfg.guess.kind = GuessKind::File;
      s->get("path", cfg.guess.path);
    } else {
      throw ConfigError("unknown guess kind '" + kind + "' (pde, cosine, file)");
    }
    s->finish();
  }
  root.get("out", cfg.out);
  root.finish();
  cfg.validate();
  return cfg;
}

TwConfig load_tw_config(const std::filesystem::path& path) {
  return parse_tw_config(read_file(path));
}

std::string dump(const RunConfig& cfg) {
  json out;
  out["model"] = model_json(cfg.params);
  out["grid"] = grid_json(cfg.length, cfg.nodes);
  out["stepper"] = {{"dt", cfg.stepper.dt},
                    {"newton_tol", cfg.stepper.newton_tol},
                    {"newton_max_iter", cfg.stepper.newton_max_iter},
                    {"jacobian", name_of(cfg.stepper.jacobian_mode)},
                    {"scheme", name_of(cfg.stepper.scheme)},
                    {"v_floor", cfg.stepper.v_floor},
                    {"max_halvings", cfg.stepper.max_halvings}};
  out["t_end"] = cfg.t_end;
  if (cfg.output.every)
    out["output"] = {{"every", *cfg.output.every}};
  else
    out["output"] = {{"times", cfg.output.times}};
  out["ic"] = ic_json(cfg.ic);
  out["out_dir"] = cfg.out_dir;
  return out.dump(2);
}

std::string dump(const TwConfig& cfg) {
  json out;
  out["model"] = model_json(cfg.params);
  out["grid"] = grid_json(cfg.length, cfg.nodes);
  out["mass"] = cfg.resolved_mass();
  out["ic"] = ic_json(cfg.ic);
  json solver = {{"tol", cfg.solver.tol},
                 {"max_iter", cfg.solver.max_iter},
                 {"max_halvings", cfg.solver.max_halvings},
                 {"pin_index", cfg.solver.pin_index}};
  if (cfg.solver.pin_value) solver["pin_value"] = *cfg.solver.pin_value;
  out["solver"] = solver;
  json guess = {{"kind", name_of(cfg.guess.kind)}};
  switch (cfg.guess.kind) {
    case GuessKind::Pde:
      guess["t_end"] = cfg.guess.t_end;
      guess["dt"] = cfg.guess.dt;
      break;
    case GuessKind::Cosine: guess["amplitude"] = cfg.guess.amplitude; break;
    case GuessKind::File: guess["path"] = cfg.guess.path; break;
  }
  out["guess"] = guess;
  out["out"] = cfg.out;
  return out.dump(2);
}

}  // namespace fibreflow
