#include "sawlab/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sawlab/errors.hpp"
#include "sawlab/exact.hpp"

namespace sawlab {

std::string engine_name(Engine engine) {
  switch (engine) {
    case Engine::exact:
      return "exact";
    case Engine::mcmc:
      return "mcmc";
    case Engine::saw_pivot:
      return "saw_pivot";
  }
  return "exact";
}

Engine parse_engine(const std::string& text) {
  if (text == "exact") return Engine::exact;
  if (text == "mcmc") return Engine::mcmc;
  if (text == "saw_pivot") return Engine::saw_pivot;
  throw InvalidConfig("unknown engine '" + text + "' (expected exact, mcmc or saw_pivot)");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto s = trim(text);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw InvalidConfig("bad value for " + key + ": '" + text + "'");
  }
  return value;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(key, item));
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const auto s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw InvalidConfig("bad boolean for " + key + ": '" + text + "'");
}

template <class T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

}  // namespace

std::map<std::string, std::string> ExperimentConfig::to_pairs() const {
  std::map<std::string, std::string> p;
  p["d"] = std::to_string(d);
  p["n_grid"] = join(n_grid);
  p["beta_grid"] = join(beta_grid);
  p["engine"] = engine_name(engine);
  p["sweeps"] = std::to_string(sweeps);
  p["burn_in"] = std::to_string(burn_in);
  p["move_mix"] = format_double(move_mix);
  p["chains"] = std::to_string(chains);
  p["seed"] = std::to_string(seed);
  p["cone"] = cone ? "true" : "false";
  p["cone_samples"] = std::to_string(cone_samples);
  p["thin"] = std::to_string(thin);
  p["v"] = format_double(v);
  if (a1) p["a1"] = format_double(*a1);
  if (a2) p["a2"] = format_double(*a2);
  if (b1) p["b1"] = format_double(*b1);
  if (b2) p["b2"] = format_double(*b2);
  p["delta"] = format_double(delta);
  p["rho"] = format_double(rho);
  p["gamma"] = format_double(gamma);
  p["epsilon"] = format_double(epsilon);
  return p;
}

std::string ExperimentConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : to_pairs()) out += k + "=" + v + "\n";
  return out;
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void ExperimentConfig::validate(std::uint64_t budget) const {
  if (d < 1) throw InvalidConfig("d must be at least 1");
  if (n_grid.empty()) throw InvalidConfig("n_grid must not be empty");
  if (beta_grid.empty()) throw InvalidConfig("beta_grid must not be empty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw InvalidConfig("every n must be at least 1");
    if (i && n_grid[i] <= n_grid[i - 1]) throw InvalidConfig("n_grid must be strictly increasing");
  }
  for (double b : beta_grid) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw InvalidConfig("every beta must be finite and >= 0");
  }
  if (engine != Engine::exact) {
    if (sweeps == 0 || burn_in >= sweeps) throw InvalidConfig("need 0 <= burn_in < sweeps");
    if (chains < 1) throw InvalidConfig("chains must be at least 1");
    if (!(move_mix >= 0.0 && move_mix <= 1.0)) throw InvalidConfig("move_mix must lie in [0,1]");
  }
  if (cone) {
    if (!(v > 0.0)) throw InvalidConfig("v must be positive");
    if (!(delta > 0.0) || !(rho > 0.0)) throw InvalidConfig("delta and rho must be positive");
    if (thin == 0 || cone_samples == 0) throw InvalidConfig("thin and cone_samples must be positive");
    if (a1 && a2 && *a1 >= *a2) throw InvalidConfig("need a1 < a2");
  }
  if (engine == Engine::exact) {
    for (int n : n_grid) {
      const double leaves = std::pow(2.0 * d, n - 1);
      if (leaves > static_cast<double>(budget)) {
        throw BudgetExceeded("exact enumeration of d=" + std::to_string(d) + ", n=" +
                             std::to_string(n) + " needs " + format_double(leaves) +
                             " paths, above the budget of " + std::to_string(budget) +
                             "; use engine=mcmc");
      }
    }
  }
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidConfig("line " + std::to_string(lineno) + ": expected key = value");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

ExperimentConfig apply_pairs(ExperimentConfig c, const std::map<std::string, std::string>& pairs) {
  for (const auto& [key, value] : pairs) {
    if (key == "d") {
      c.d = parse_number<int>(key, value);
    } else if (key == "n_grid" || key == "n") {
      c.n_grid = parse_list<int>(key, value);
    } else if (key == "beta_grid" || key == "beta") {
      c.beta_grid = parse_list<double>(key, value);
    } else if (key == "engine") {
      c.engine = parse_engine(trim(value));
    } else if (key == "sweeps") {
      c.sweeps = parse_number<std::uint64_t>(key, value);
    } else if (key == "burn_in") {
      c.burn_in = parse_number<std::uint64_t>(key, value);
    } else if (key == "move_mix") {
      c.move_mix = parse_number<double>(key, value);
    } else if (key == "chains") {
      c.chains = parse_number<int>(key, value);
    } else if (key == "seed") {
      c.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "cone") {
      c.cone = parse_bool(key, value);
    } else if (key == "cone_samples") {
      c.cone_samples = parse_number<std::uint64_t>(key, value);
    } else if (key == "thin") {
      c.thin = parse_number<std::uint64_t>(key, value);
    } else if (key == "v") {
      c.v = parse_number<double>(key, value);
    } else if (key == "a1") {
      c.a1 = parse_number<double>(key, value);
    } else if (key == "a2") {
      c.a2 = parse_number<double>(key, value);
    } else if (key == "b1") {
      c.b1 = parse_number<double>(key, value);
    } else if (key == "b2") {
      c.b2 = parse_number<double>(key, value);
    } else if (key == "delta") {
      c.delta = parse_number<double>(key, value);
    } else if (key == "rho") {
      c.rho = parse_number<double>(key, value);
    } else if (key == "gamma") {
      c.gamma = parse_number<double>(key, value);
    } else if (key == "epsilon") {
      c.epsilon = parse_number<double>(key, value);
    } else {
      throw InvalidConfig("unknown config key '" + key + "'");
    }
  }
  return c;
}

ExperimentConfig config_from_pairs(const std::map<std::string, std::string>& pairs) {
  return apply_pairs(ExperimentConfig{}, pairs);
}

std::uint64_t enumeration_budget_from_env() {
  const char* env = std::getenv("SAWLAB_BUDGET");
  if (env == nullptr || *env == '\0') return kDefaultEnumerationBudget;
  const std::string text(env);
  double value = 0.0;
  try {
    std::size_t used = 0;
    value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw InvalidConfig("SAWLAB_BUDGET is not a number: '" + text + "'");
  }
  if (!(value >= 1.0)) throw InvalidConfig("SAWLAB_BUDGET must be at least 1");
  return static_cast<std::uint64_t>(value);
}

}  // namespace sawlab
