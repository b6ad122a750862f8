#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sawlab/cone.hpp"
#include "sawlab/config.hpp"
#include "sawlab/errors.hpp"
#include "sawlab/experiment.hpp"
#include "sawlab/mcmc.hpp"

using namespace sawlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("sawlab_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> csv_row(const std::string& text, std::size_t row) {
  std::stringstream ss(text);
  std::string line;
  for (std::size_t i = 0; i <= row; ++i) std::getline(ss, line);
  std::vector<std::string> out;
  std::stringstream ls(line);
  std::string field;
  while (std::getline(ls, field, ',')) out.push_back(field);
  return out;
}

ExperimentConfig small_exact() {
  return config_from_pairs(parse_config_text("d = 1\nn_grid = 1,2\nbeta = 1\nengine = exact\ncone_samples = 200\n"));
}

}  // namespace

TEST_CASE("config text format") {
  const auto pairs = parse_config_text("# comment\nd = 3   # trailing\n\nn_grid=4, 8,16\nengine = mcmc\n");
  const auto c = config_from_pairs(pairs);
  CHECK(c.d == 3);
  CHECK(c.n_grid == std::vector<int>{4, 8, 16});
  CHECK(c.engine == Engine::mcmc);
  CHECK_THROWS_AS(config_from_pairs(parse_config_text("colour = red\n")), InvalidConfig);
  CHECK_THROWS_AS(config_from_pairs(parse_config_text("d = two\n")), InvalidConfig);
  CHECK_THROWS_AS(parse_config_text("just words\n"), InvalidConfig);
  CHECK_THROWS_AS(config_from_pairs(parse_config_text("engine = quantum\n")), InvalidConfig);
}

TEST_CASE("config hash ignores key order") {
  const auto a = config_from_pairs(parse_config_text("d=2\nbeta=0.5,1\nseed=9\n"));
  const auto b = config_from_pairs(parse_config_text("seed = 9\nbeta = 0.5, 1\nd = 2\n"));
  CHECK(a.hash() == b.hash());
  const auto c = config_from_pairs(parse_config_text("d=2\nbeta=0.5,1\nseed=10\n"));
  CHECK(a.hash() != c.hash());
}

TEST_CASE("validation") {
  auto c = small_exact();
  c.n_grid = {};
  CHECK_THROWS_AS(c.validate(kDefaultEnumerationBudget), InvalidConfig);
  c = small_exact();
  c.d = 3;
  c.n_grid = {40};
  try {
    c.validate(kDefaultEnumerationBudget);
    FAIL("expected BudgetExceeded");
  } catch (const BudgetExceeded& e) {
    CHECK(std::string(e.what()).find("engine=mcmc") != std::string::npos);
  }
}

TEST_CASE("exact run writes the closed-form moment") {
  const auto dir = scratch("exact");
  const auto rec = run(small_exact(), dir);
  CHECK(rec.complete);
  CHECK(rec.cells.size() == 2);
  report(dir);
  const auto row = csv_row(slurp(dir / "moments.csv"), 2);
  REQUIRE(row.size() == 12);
  CHECK(row[1] == "2");
  CHECK(std::stod(row[5]) == doctest::Approx(2.0 / (1.0 + std::exp(-1.0))).epsilon(1e-15));
}

TEST_CASE("reruns are identical apart from the timestamp") {
  const auto a = scratch("rerun_a");
  const auto b = scratch("rerun_b");
  auto c = small_exact();
  c.n_grid = {2, 3, 4};
  auto ra = run(c, a).to_json();
  auto rb = run(c, b).to_json();
  ra.erase("timestamp");
  rb.erase("timestamp");
  CHECK(ra.dump() == rb.dump());
  CHECK(slurp(a / "cells.jsonl") == slurp(b / "cells.jsonl"));
}

TEST_CASE("resume completes only the missing cells") {
  const auto dir = scratch("resume");
  auto c = config_from_pairs(parse_config_text("d=2\nn_grid=2,3,4,5,6\nbeta=0.5\nengine=exact\ncone_samples=100\n"));
  RunOptions partial;
  partial.max_cells = 2;
  const auto first = run(c, dir, partial);
  CHECK_FALSE(first.complete);
  CHECK_FALSE(fs::exists(dir / "run.json"));
  const auto prefix = slurp(dir / "cells.jsonl");

  // An interrupted write leaves a partial line behind.
  {
    std::ofstream out(dir / "cells.jsonl", std::ios::binary | std::ios::app);
    out << "{\"index\": 2, \"trunc";
  }
  const auto done = resume(dir);
  CHECK(done.complete);
  CHECK(done.cells.size() == 5);
  const auto full = slurp(dir / "cells.jsonl");
  CHECK(full.substr(0, prefix.size()) == prefix);

  resume(dir);
  CHECK(slurp(dir / "cells.jsonl") == full);

  auto other = c;
  other.seed = 77;
  CHECK_THROWS_AS(resume(dir, {}, &other), CorruptState);

  auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  manifest["config"]["seed"] = "5";
  std::ofstream(dir / "manifest.json") << manifest.dump(2);
  CHECK_THROWS_AS(resume(dir), CorruptState);
}

TEST_CASE("report") {
  CHECK_THROWS_AS(report(scratch("missing")), IoError);
  const auto empty = scratch("empty");
  fs::create_directories(empty);
  CHECK_THROWS_AS(report(empty), IoError);

  const auto dir = scratch("srw");
  auto c = config_from_pairs(parse_config_text("d=2\nn_grid=2,4,6,8\nbeta=0\nengine=exact\n"));
  run(c, dir);
  report(dir);
  const auto fit = csv_row(slurp(dir / "exponents.csv"), 2);
  REQUIRE(fit.size() == 9);
  CHECK(fit[2] == "chi2");
  CHECK(std::abs(std::stod(fit[5]) - 0.5) <= 1e-12);
  CHECK(std::stod(fit[7]) == 0.75);
  const auto svg = slurp(dir / "chart_beta_0.svg");
  CHECK(svg.find("\"srw\":1.0") != std::string::npos);
  CHECK(svg.find("\"two_mu\":1.5") != std::string::npos);
}

TEST_CASE("pivot run reports the formula column") {
  const auto dir = scratch("pivot");
  auto c = config_from_pairs(
      parse_config_text("d=2\nn_grid=8,16,32\nengine=saw_pivot\nsweeps=2000\nburn_in=200\nchains=2\n"));
  run(c, dir);
  report(dir);
  const auto fit = csv_row(slurp(dir / "exponents.csv"), 1);
  REQUIRE(fit.size() == 9);
  CHECK(fit[1] == "inf");
  CHECK(fit[7] == "0.75");
}

TEST_CASE("thread count does not change the output") {
  auto c = config_from_pairs(
      parse_config_text("d=2\nn_grid=8,12\nbeta=0.5,1\nengine=mcmc\nsweeps=3000\nburn_in=300\nchains=2\n"
                        "cone_samples=300\nthin=2\n"));
  const auto a = scratch("threads_a");
  const auto b = scratch("threads_b");
  RunOptions one, three;
  three.threads = 3;
  run(c, a, one);
  run(c, b, three);
  report(a);
  report(b);
  for (const char* f : {"cells.jsonl", "moments.csv", "shape.csv", "conditionD.csv", "exponents.csv"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }
}

TEST_CASE("band conditioning keeps exactly the samples in the band") {
  const int d = 2, n = 32;
  const auto V = build_test_set(d, n);
  const auto p = default_class_params(d, 1.0);
  std::vector<ConeSample> samples;
  for (const auto& path : sample_srw_paths(d, n, 500, 3)) samples.push_back(make_cone_sample(path, V, p));
  const auto kept = condition_on_band(samples, p.b1, p.b2, n);
  std::size_t want = 0;
  for (const auto& s : samples) want += (s.silt >= p.b1 * n && s.silt <= p.b2 * n) ? 1 : 0;
  CHECK(kept.size() == want);
  for (const auto& s : kept) {
    CHECK(s.silt >= p.b1 * n);
    CHECK(s.silt <= p.b2 * n);
  }
}

TEST_CASE("command line exit codes") {
  const char* cli = std::getenv("SAWLAB_CLI");
  if (cli == nullptr) return;
  const auto dir = scratch("cli");
  fs::create_directories(dir);
  const auto conf = dir / "bad.conf";
  std::ofstream(conf) << "d = 3\nn_grid = 40\nengine = exact\n";
  auto status = [&](const std::string& args) {
    const int raw = std::system((std::string(cli) + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(raw);
  };
  CHECK(status("run --config " + conf.string() + " --out " + (dir / "r").string()) == 3);
  std::ofstream(conf) << "d = 0\n";
  CHECK(status("run --config " + conf.string() + " --out " + (dir / "r").string()) == 2);
  CHECK(status("report " + (dir / "nothing").string()) == 4);
  std::ofstream(conf) << "d = 1\nn_grid = 1,2\nbeta = 1\n";
  CHECK(status("run --config " + conf.string() + " --out " + (dir / "ok").string() + " --seed 3") == 0);
  CHECK(status("report " + (dir / "ok").string()) == 0);
  const std::string tiny = "SAWLAB_BUDGET=1 " + std::string(cli) + " run --config " + conf.string() +
                           " --out " + (dir / "tiny").string() + " > /dev/null 2>&1";
  CHECK(WEXITSTATUS(std::system(tiny.c_str())) == 3);
  std::ofstream(conf) << "d = 1\nn_grid = 1,2\nbeta = 2\n";
  CHECK(status("resume " + (dir / "ok").string() + " --config " + conf.string()) == 4);
}
