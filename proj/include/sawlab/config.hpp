#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sawlab {

enum class Engine { exact, mcmc, saw_pivot };

std::string engine_name(Engine engine);
Engine parse_engine(const std::string& text);

/// Flat key=value settings of one experiment. Values left unset in the
/// optional cone fields follow default_class_params for each beta.
struct ExperimentConfig {
  int d = 2;
  std::vector<int> n_grid{4, 8};
  std::vector<double> beta_grid{1.0};
  Engine engine = Engine::exact;

  std::uint64_t sweeps = 20000;
  std::uint64_t burn_in = 2000;
  double move_mix = 0.2;
  int chains = 4;
  std::uint64_t seed = 1;

  bool cone = true;
  std::uint64_t cone_samples = 2000;
  std::uint64_t thin = 10;
  double v = 1.0;
  std::optional<double> a1, a2, b1, b2;
  double delta = 0.05;
  double rho = 0.05;
  double gamma = 1.0;
  double epsilon = 0.05;

  /// Every key with its normalised value; execution-only keys (threads,
  /// output directory) are not part of the configuration.
  std::map<std::string, std::string> to_pairs() const;
  /// Sorted "key=value" lines, the input of hash().
  std::string canonical() const;
  /// FNV-1a of canonical() as 16 hex digits.
  std::string hash() const;

  /// Throws InvalidConfig on bad values and BudgetExceeded when the exact
  /// engine cannot enumerate some n within `budget` leaf paths.
  void validate(std::uint64_t budget) const;
};

/// Parses "key = value" lines; '#' starts a comment. Unknown keys and
/// malformed values raise InvalidConfig.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> load_config_file(const std::filesystem::path& path);

/// Applies pairs on top of `base` (later keys win).
ExperimentConfig apply_pairs(ExperimentConfig base, const std::map<std::string, std::string>& pairs);
ExperimentConfig config_from_pairs(const std::map<std::string, std::string>& pairs);

/// The enumeration budget, overridden by the SAWLAB_BUDGET environment variable.
std::uint64_t enumeration_budget_from_env();

}  // namespace sawlab
