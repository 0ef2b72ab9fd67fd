#include "ppctl/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ppctl/csv.hpp"
#include "ppctl/errors.hpp"

namespace ppctl {

const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::kSimulate: return "simulate";
    case RunMode::kOptimizeQuality: return "optimize-quality";
    case RunMode::kOptimizeQuantity: return "optimize-quantity";
    case RunMode::kEnsemble: return "ensemble";
    case RunMode::kEquilibria: return "equilibria";
  }
  return "?";
}

bool RunConfig::has_explicit_target() const {
  return !std::isnan(target_x) && !std::isnan(target_y);
}

TargetSpec RunConfig::resolve_target() const {
  if (has_explicit_target()) {
    return TargetSpec{{target_x, target_y}, target_epsilon};
  }
  const auto eqs = equilibria(model);
  const Equilibrium* best = nullptr;
  for (const auto& eq : eqs) {
    if (eq.state.y <= 1e-9) continue;
    if (!best || eq.state.x > best->state.x) best = &eq;
  }
  if (!best) {
    for (const auto& eq : eqs) {
      if (eq.kind == EquilibriumKind::kAxialPrey) best = &eq;
    }
  }
  if (!best) throw ConfigError("target: no usable equilibrium found; set target.x/target.y");
  return TargetSpec{best->state, target_epsilon};
}

namespace {

struct KeyError : ConfigError {
  using ConfigError::ConfigError;
};

void constraint(bool ok, const std::string& key, const std::string& why) {
  if (!ok) throw ConfigError("config constraint violated: " + key + " " + why);
}

}  // namespace

void RunConfig::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  constraint(finite(model.r) && model.r > 0, "model.r", "must be finite and positive");
  constraint(!std::isnan(model.gamma) && model.gamma > 0, "model.gamma",
             "must be positive (inf allowed)");
  constraint(finite(model.omega) && model.omega >= 0, "model.omega", "must be >= 0");
  constraint(finite(model.e) && model.e > 0, "model.e", "must be finite and positive");
  constraint(finite(model.m1) && model.m1 >= 0, "model.m1", "must be >= 0");
  constraint(finite(model.m2) && model.m2 >= 0, "model.m2", "must be >= 0");
  constraint(finite(model.alpha) && model.alpha >= 0, "model.alpha", "must be >= 0");
  constraint(finite(model.xi) && model.xi >= 0, "model.xi", "must be >= 0");
  constraint(finite(noise.sigma1) && noise.sigma1 >= 0, "noise.sigma1", "must be >= 0");
  constraint(finite(noise.sigma2) && noise.sigma2 >= 0, "noise.sigma2", "must be >= 0");
  constraint(finite(noise.lambda) && noise.lambda >= 0, "noise.lambda", "must be >= 0");
  constraint(finite(noise.jump1) && noise.jump1 > -1, "noise.jump1", "must be > -1");
  constraint(finite(noise.jump2) && noise.jump2 > -1, "noise.jump2", "must be > -1");
  constraint(finite(sim.dt) && sim.dt > 0, "sim.dt", "must be positive");
  constraint(finite(sim.horizon) && sim.horizon >= 0, "sim.horizon", "must be >= 0");
  constraint(sim.horizon == 0 || sim.dt <= sim.horizon, "sim.dt", "must not exceed sim.horizon");
  constraint(sim.positivity_floor > 0 && sim.positivity_floor <= 1e-8, "sim.positivity_floor",
             "must be in (0, 1e-8]");
  constraint(sweep.max_iters >= 1, "sweep.max_iters", "must be >= 1");
  constraint(sweep.relaxation > 0 && sweep.relaxation <= 1, "sweep.relaxation",
             "must be in (0, 1]");
  constraint(sweep.tol > 0, "sweep.tol", "must be positive");
  constraint(alpha_bounds.lo >= 0 && alpha_bounds.lo <= alpha_bounds.hi, "bounds.alpha_min",
             "needs 0 <= alpha_min <= alpha_max");
  constraint(xi_bounds.lo >= 0 && xi_bounds.lo <= xi_bounds.hi, "bounds.xi_min",
             "needs 0 <= xi_min <= xi_max");
  constraint(target_epsilon > 0, "target.epsilon", "must be positive");
  constraint(x0 > 0 && std::isfinite(x0), "run.x0", "must be positive");
  constraint(y0 > 0 && std::isfinite(y0), "run.y0", "must be positive");
  constraint(paths >= 1, "run.paths", "must be >= 1");
  constraint(sweep_paths >= 1, "sweep.paths", "must be >= 1");
  constraint(threads >= 0, "run.threads", "must be >= 0");
  if (has_explicit_target()) {
    constraint(target_x >= 0 && std::isfinite(target_x), "target.x", "must be >= 0");
    constraint(target_y >= 0 && std::isfinite(target_y), "target.y", "must be >= 0");
  }
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0') {
    throw KeyError("key " + key + ": cannot parse number '" + value + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0') {
    throw KeyError("key " + key + ": cannot parse integer '" + value + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0') {
    throw KeyError("key " + key + ": cannot parse unsigned integer '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw KeyError("key " + key + ": expected true/false, got '" + value + "'");
}

void apply_key(RunConfig& cfg, const std::string& section, const std::string& key,
               const std::string& value) {
  const std::string full = section.empty() ? key : section + "." + key;
  using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"model.r", [](RunConfig& c, auto& k, auto& v) { c.model.r = parse_double(k, v); }},
      {"model.gamma", [](RunConfig& c, auto& k, auto& v) { c.model.gamma = parse_double(k, v); }},
      {"model.omega", [](RunConfig& c, auto& k, auto& v) { c.model.omega = parse_double(k, v); }},
      {"model.e", [](RunConfig& c, auto& k, auto& v) { c.model.e = parse_double(k, v); }},
      {"model.m1", [](RunConfig& c, auto& k, auto& v) { c.model.m1 = parse_double(k, v); }},
      {"model.m2", [](RunConfig& c, auto& k, auto& v) { c.model.m2 = parse_double(k, v); }},
      {"model.alpha", [](RunConfig& c, auto& k, auto& v) { c.model.alpha = parse_double(k, v); }},
      {"model.xi", [](RunConfig& c, auto& k, auto& v) { c.model.xi = parse_double(k, v); }},
      {"noise.sigma1", [](RunConfig& c, auto& k, auto& v) { c.noise.sigma1 = parse_double(k, v); }},
      {"noise.sigma2", [](RunConfig& c, auto& k, auto& v) { c.noise.sigma2 = parse_double(k, v); }},
      {"noise.lambda", [](RunConfig& c, auto& k, auto& v) { c.noise.lambda = parse_double(k, v); }},
      {"noise.jump1", [](RunConfig& c, auto& k, auto& v) { c.noise.jump1 = parse_double(k, v); }},
      {"noise.jump2", [](RunConfig& c, auto& k, auto& v) { c.noise.jump2 = parse_double(k, v); }},
      {"sim.dt", [](RunConfig& c, auto& k, auto& v) { c.sim.dt = parse_double(k, v); }},
      {"sim.horizon", [](RunConfig& c, auto& k, auto& v) { c.sim.horizon = parse_double(k, v); }},
      {"sim.positivity_floor",
       [](RunConfig& c, auto& k, auto& v) { c.sim.positivity_floor = parse_double(k, v); }},
      {"sim.record_noise",
       [](RunConfig& c, auto& k, auto& v) { c.sim.record_noise = parse_bool(k, v); }},
      {"sweep.max_iters",
       [](RunConfig& c, auto& k, auto& v) { c.sweep.max_iters = static_cast<int>(parse_int(k, v)); }},
      {"sweep.relaxation",
       [](RunConfig& c, auto& k, auto& v) { c.sweep.relaxation = parse_double(k, v); }},
      {"sweep.tol", [](RunConfig& c, auto& k, auto& v) { c.sweep.tol = parse_double(k, v); }},
      {"sweep.q_mode",
       [](RunConfig& c, auto& k, auto& v) {
         if (v == "pathwise-zero") {
           c.sweep.q_mode = QMode::kPathwiseZero;
         } else if (v == "regression") {
           c.sweep.q_mode = QMode::kRegression;
         } else {
           throw KeyError("key " + k + ": expected pathwise-zero or regression, got '" + v + "'");
         }
       }},
      {"sweep.paths", [](RunConfig& c, auto& k, auto& v) { c.sweep_paths = parse_int(k, v); }},
      {"bounds.alpha_min",
       [](RunConfig& c, auto& k, auto& v) { c.alpha_bounds.lo = parse_double(k, v); }},
      {"bounds.alpha_max",
       [](RunConfig& c, auto& k, auto& v) { c.alpha_bounds.hi = parse_double(k, v); }},
      {"bounds.xi_min", [](RunConfig& c, auto& k, auto& v) { c.xi_bounds.lo = parse_double(k, v); }},
      {"bounds.xi_max", [](RunConfig& c, auto& k, auto& v) { c.xi_bounds.hi = parse_double(k, v); }},
      {"target.x", [](RunConfig& c, auto& k, auto& v) { c.target_x = parse_double(k, v); }},
      {"target.y", [](RunConfig& c, auto& k, auto& v) { c.target_y = parse_double(k, v); }},
      {"target.epsilon",
       [](RunConfig& c, auto& k, auto& v) { c.target_epsilon = parse_double(k, v); }},
      {"run.x0", [](RunConfig& c, auto& k, auto& v) { c.x0 = parse_double(k, v); }},
      {"run.y0", [](RunConfig& c, auto& k, auto& v) { c.y0 = parse_double(k, v); }},
      {"run.seed", [](RunConfig& c, auto& k, auto& v) { c.seed = parse_u64(k, v); }},
      {"run.paths", [](RunConfig& c, auto& k, auto& v) { c.paths = parse_int(k, v); }},
      {"run.threads",
       [](RunConfig& c, auto& k, auto& v) { c.threads = static_cast<int>(parse_int(k, v)); }},
  };
  const auto it = setters.find(full);
  if (it == setters.end()) throw KeyError("unknown key '" + full + "'");
  it->second(cfg, full, value);
}

RunConfig parse_lines(std::istream& in, const RunConfig& base) {
  RunConfig cfg = base;
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
      }
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    try {
      apply_key(cfg, section, key, value);
    } catch (const KeyError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

}  // namespace

RunConfig parse_config(const std::filesystem::path& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_lines(in, base);
}

RunConfig parse_config_text(const std::string& text, const RunConfig& base) {
  std::istringstream in(text);
  return parse_lines(in, base);
}

std::string render_config(const RunConfig& cfg) {
  std::ostringstream os;
  auto num = [](double v) { return csv::num(v); };
  os << "# resolved ppctl configuration\n";
  os << "[model]\n";
  os << "r = " << num(cfg.model.r) << "\n";
  os << "gamma = " << num(cfg.model.gamma) << "\n";
  os << "omega = " << num(cfg.model.omega) << "\n";
  os << "e = " << num(cfg.model.e) << "\n";
  os << "m1 = " << num(cfg.model.m1) << "\n";
  os << "m2 = " << num(cfg.model.m2) << "\n";
  os << "alpha = " << num(cfg.model.alpha) << "\n";
  os << "xi = " << num(cfg.model.xi) << "\n";
  os << "[noise]\n";
  os << "sigma1 = " << num(cfg.noise.sigma1) << "\n";
  os << "sigma2 = " << num(cfg.noise.sigma2) << "\n";
  os << "lambda = " << num(cfg.noise.lambda) << "\n";
  os << "jump1 = " << num(cfg.noise.jump1) << "\n";
  os << "jump2 = " << num(cfg.noise.jump2) << "\n";
  os << "[sim]\n";
  os << "dt = " << num(cfg.sim.dt) << "\n";
  os << "horizon = " << num(cfg.sim.horizon) << "\n";
  os << "positivity_floor = " << num(cfg.sim.positivity_floor) << "\n";
  os << "record_noise = " << (cfg.sim.record_noise ? "true" : "false") << "\n";
  os << "[sweep]\n";
  os << "max_iters = " << cfg.sweep.max_iters << "\n";
  os << "relaxation = " << num(cfg.sweep.relaxation) << "\n";
  os << "tol = " << num(cfg.sweep.tol) << "\n";
  os << "q_mode = " << to_string(cfg.sweep.q_mode) << "\n";
  os << "paths = " << cfg.sweep_paths << "\n";
  os << "[bounds]\n";
  os << "alpha_min = " << num(cfg.alpha_bounds.lo) << "\n";
  os << "alpha_max = " << num(cfg.alpha_bounds.hi) << "\n";
  os << "xi_min = " << num(cfg.xi_bounds.lo) << "\n";
  os << "xi_max = " << num(cfg.xi_bounds.hi) << "\n";
  os << "[target]\n";
  if (cfg.has_explicit_target()) {
    os << "x = " << num(cfg.target_x) << "\n";
    os << "y = " << num(cfg.target_y) << "\n";
  }
  os << "epsilon = " << num(cfg.target_epsilon) << "\n";
  os << "[run]\n";
  os << "x0 = " << num(cfg.x0) << "\n";
  os << "y0 = " << num(cfg.y0) << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "paths = " << cfg.paths << "\n";
  os << "threads = " << cfg.threads << "\n";
  return os.str();
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = render_config(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ppctl
