#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sawlab/config.hpp"
#include "sawlab/errors.hpp"
#include "sawlab/experiment.hpp"
#include "sawlab/exponent.hpp"
#include "sawlab/walk.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kInvalidConfig = 2, kBudget = 3, kIo = 4 };

struct Flags {
  std::string config;
  std::string out;
  std::string run_dir;
  std::string engine;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
  std::size_t max_cells = 0;
  std::vector<std::string> set;
  std::string paths;
};

sawlab::ExperimentConfig build_config(const Flags& f) {
  std::map<std::string, std::string> pairs;
  if (!f.config.empty()) pairs = sawlab::load_config_file(f.config);
  for (const auto& kv : f.set) {
    const auto more = sawlab::parse_config_text(kv);
    for (const auto& [k, v] : more) pairs[k] = v;
  }
  if (!f.engine.empty()) pairs["engine"] = f.engine;
  if (f.seed_set) pairs["seed"] = std::to_string(f.seed);
  return sawlab::config_from_pairs(pairs);
}

sawlab::RunOptions options(const Flags& f) {
  sawlab::RunOptions o;
  o.threads = f.threads;
  if (f.max_cells > 0) o.max_cells = f.max_cells;
  o.budget = sawlab::enumeration_budget_from_env();
  return o;
}

void print_record(const sawlab::RunRecord& r, const std::string& dir) {
  std::cout << (r.complete ? "complete" : "partial") << ": " << r.cells.size() << " cells in " << dir
            << " (config " << r.config_hash << ")\n";
}

int observe_paths(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw sawlab::IoError("cannot read " + file);
  std::string line;
  std::cout << "n,chi2,chi,hull_radius,J\n";
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto path = sawlab::parse_path(line);
    const auto o = sawlab::observe(path);
    std::cout << path.length() << ',' << o.chi2 << ',' << o.chi << ',' << o.hull_radius << ','
              << o.silt.total << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-avoiding and weakly self-avoiding walk experiments"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--max-cells", f.max_cells, "Stop after this many new cells");
  };

  auto* run = app.add_subcommand("run", "Run an experiment grid");
  run->add_option("--config", f.config, "Config file (key = value lines)");
  run->add_option("--out", f.out, "Output directory")->required();
  run->add_option("--engine", f.engine, "exact, mcmc or saw_pivot")
      ->check(CLI::IsMember({"exact", "mcmc", "saw_pivot"}));
  run->add_option("--seed", f.seed, "Master seed")->each([&](const std::string&) { f.seed_set = true; });
  run->add_option("--set", f.set, "Extra key=value overrides, applied after the config file");
  add_common(run);

  auto* res = app.add_subcommand("resume", "Complete a partial run directory");
  res->add_option("run_dir", f.run_dir, "Run directory")->required();
  res->add_option("--config", f.config, "Refuse to resume unless this config matches the run");
  add_common(res);

  auto* rep = app.add_subcommand("report", "Write CSV tables and SVG charts for a run");
  rep->add_option("run_dir", f.run_dir, "Run directory")->required();

  auto* obs = app.add_subcommand("observe", "Print observables of paths in the text format");
  obs->add_option("file", f.paths, "File with one d:n:steps path per line")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) {
      const auto config = build_config(f);
      print_record(sawlab::run(config, f.out, options(f)), f.out);
    } else if (*res) {
      if (!f.config.empty()) {
        const auto expected = build_config(f);
        print_record(sawlab::resume(f.run_dir, options(f), &expected), f.run_dir);
      } else {
        print_record(sawlab::resume(f.run_dir, options(f)), f.run_dir);
      }
    } else if (*rep) {
      for (const auto& p : sawlab::report(f.run_dir)) std::cout << p.string() << '\n';
      const auto config = sawlab::load_manifest(f.run_dir);
      const auto mu = sawlab::mu_formula(config.d);
      std::cout << "reference mu(" << config.d << ") = " << mu.num << "/" << mu.den << " = " << mu.value() << '\n';
      if (config.d == 3) std::cout << "simulation literature reference nu(3) = 0.59\n";
    } else if (*obs) {
      return observe_paths(f.paths);
    }
  } catch (const sawlab::InvalidConfig& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const sawlab::BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return kBudget;
  } catch (const sawlab::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const sawlab::CorruptState& e) {
    std::cerr << "corrupt run state: " << e.what() << '\n';
    return kIo;
  } catch (const sawlab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kOk;
}
