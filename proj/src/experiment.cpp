#include "sawlab/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "run_dir.hpp"
#include "sawlab/cone.hpp"
#include "sawlab/errors.hpp"
#include "sawlab/mcmc.hpp"
#include "sawlab/rng.hpp"

namespace sawlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace detail {

json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return nullptr;
  return v;
}

double number_of(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw CorruptState("unexpected number encoding '" + s + "'");
  }
  return j.get<double>();
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json read_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read " + file.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw CorruptState(file.string() + ": " + e.what());
  }
}

std::vector<json> read_cells(const fs::path& run_dir, bool repair) {
  const auto file = run_dir / kCellsFile;
  std::vector<json> out;
  if (!fs::exists(file)) return out;
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto last_newline = text.rfind('\n');
  const std::size_t complete = last_newline == std::string::npos ? 0 : last_newline + 1;
  std::size_t pos = 0;
  while (pos < complete) {
    const auto eol = text.find('\n', pos);
    const std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    json cell;
    try {
      cell = json::parse(line);
    } catch (const json::exception& e) {
      throw CorruptState(file.string() + ": malformed cell line " + std::to_string(out.size()));
    }
    if (!cell.contains("index") || cell["index"].get<std::size_t>() != out.size()) {
      throw CorruptState(file.string() + ": cell lines out of order");
    }
    out.push_back(std::move(cell));
  }
  if (complete < text.size() && repair) fs::resize_file(file, complete);
  return out;
}

}  // namespace detail

using detail::number;

std::vector<Cell> make_cells(const ExperimentConfig& config) {
  std::vector<double> betas = config.beta_grid;
  if (config.engine == Engine::saw_pivot) betas = {std::numeric_limits<double>::infinity()};
  std::vector<Cell> cells;
  for (double beta : betas) {
    for (int n : config.n_grid) {
      Cell c;
      c.index = cells.size();
      c.d = config.d;
      c.n = n;
      c.beta = beta;
      c.seed = stream_seed(config.seed, c.index);
      cells.push_back(c);
    }
  }
  return cells;
}

namespace {

json stats_json(const ObservableStats& s) {
  return {{"mean", number(s.mean)}, {"stderr", number(s.std_error)}, {"tau_int", number(s.tau_int)},
          {"samples", s.samples}};
}

ClassParams cell_class_params(const ExperimentConfig& config, const Cell& cell) {
  ClassParams p = default_class_params(cell.d, cell.beta);
  if (cell.d == 1) {
    p.a1 = p.b1;
    p.a2 = p.b2;
  }
  if (config.a1) p.a1 = *config.a1;
  if (config.a2) p.a2 = *config.a2;
  if (config.b1) p.b1 = *config.b1;
  if (config.b2) p.b2 = *config.b2;
  p.delta = config.delta;
  if (p.a1 >= p.a2) throw InvalidConfig("cone parameters need a1 < a2");
  return p;
}

json cone_diagnostics(const ExperimentConfig& config, const Cell& cell) {
  if (cell.beta == 0.0) return {{"skipped", "beta = 0"}};
  if (config.engine == Engine::saw_pivot) return {{"skipped", "self-avoiding ensemble has J = 0"}};
  const auto params = cell_class_params(config, cell);
  const auto V = build_test_set(cell.d, cell.n, config.v);
  const std::uint64_t seed = stream_seed(cell.seed, 1);

  std::vector<LatticePath> paths;
  if (config.engine == Engine::exact) {
    paths = sample_srw_paths(cell.d, cell.n, config.cone_samples, seed);
  } else {
    ChainConfig cc;
    cc.d = cell.d;
    cc.n = cell.n;
    cc.beta = cell.beta;
    cc.burn_in = config.burn_in;
    cc.sweeps = config.burn_in + config.cone_samples * config.thin;
    cc.move_mix = config.move_mix;
    cc.seed = seed;
    paths = collect_weakly_saw_paths(cc, config.thin);
  }
  std::vector<ConeSample> samples;
  samples.reserve(paths.size());
  for (const auto& p : paths) samples.push_back(make_cone_sample(p, V, params));
  const auto conditioned = condition_on_band(samples, params.b1, params.b2, cell.n);

  json out;
  out["test_set_size"] = V.size();
  out["params"] = {{"a1", params.a1}, {"a2", params.a2}, {"b1", params.b1},
                   {"b2", params.b2}, {"delta", params.delta}, {"rho", config.rho}};
  out["ensemble"] = samples.size();
  out["conditioned"] = conditioned.size();
  if (conditioned.empty()) return out;

  const auto grid = default_r_grid(config.delta);
  std::vector<double> size(grid.size()), silt(grid.size()), flagged(grid.size());
  for (const auto& s : conditioned) {
    const auto rep = shape_of(s.classes, s.silt, config.rho, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      size[i] += static_cast<double>(rep.rows[i].class_size);
      silt[i] += static_cast<double>(rep.rows[i].class_silt);
      flagged[i] += rep.rows[i].flagged ? 1.0 : 0.0;
    }
  }
  const double m = static_cast<double>(conditioned.size());
  json shape = json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    shape.push_back({{"r", grid[i]}, {"class_size", size[i] / m}, {"class_silt", silt[i] / m},
                     {"flagged", flagged[i] / m}});
  }
  out["shape"] = shape;

  const auto proc = cone_process_distance(conditioned, cell.beta);
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  out["process"] = {{"quotient_half", opt(proc.quotient_half)},
                    {"quotient_empty", opt(proc.quotient_empty)},
                    {"palm_half", proc.palm_half},
                    {"palm_empty", proc.palm_empty},
                    {"palm_minus_or_empty", proc.palm_minus_or_empty},
                    {"upper_skeleton", proc.upper_skeleton},
                    {"lower_skeleton", proc.lower_skeleton}};

  const double r = cell.d == 1 ? 1.0 : 0.5;
  const auto ax = estimate_ax(conditioned, select::r(r), r, cell.beta, cell.n);
  std::vector<DistancePoint> law;
  std::size_t empty_bins = 0;
  for (const auto& e : ax) {
    if (e.empty_class) {
      ++empty_bins;
      continue;
    }
    law.push_back({e.x, e.a_x, e.probability});
  }
  json cd = {{"class_r", r}, {"bins", ax.size()}, {"empty_bins", empty_bins}};
  if (!law.empty()) {
    const auto rep = condition_d_check(law, config.gamma, config.epsilon, cell.beta, cell.n, cell.d == 1);
    cd["r1"] = rep.r1;
    cd["r2"] = rep.r2;
    cd["rho_n"] = number(rep.rho_n);
    cd["degenerate"] = rep.degenerate;
    cd["I_over_g"] = number(rep.I_over_g);
  }
  out["condition_d"] = cd;
  return out;
}

std::uint64_t path_count(int d, int n) {
  std::uint64_t c = 1;
  for (int i = 0; i < n; ++i) c *= static_cast<std::uint64_t>(2 * d);
  return c;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

json run_cell(const ExperimentConfig& config, const Cell& cell, std::uint64_t budget) {
  json out;
  out["index"] = cell.index;
  out["d"] = cell.d;
  out["n"] = cell.n;
  out["beta"] = number(cell.beta);
  out["engine"] = engine_name(config.engine);
  out["seed"] = cell.seed;

  if (config.engine == Engine::exact) {
    const auto m = enumerate_ensemble(cell.d, cell.n, cell.beta, budget, 1);
    out["Z"] = m.Z;
    out["chi"] = {{"mean", m.mean_chi}, {"stderr", 0.0}};
    out["chi2"] = {{"mean", m.mean_chi2}, {"stderr", 0.0}};
    out["J"] = {{"mean", m.mean_J}, {"stderr", 0.0}};
    out["samples"] = path_count(cell.d, cell.n);
  } else {
    SampleStats s;
    if (config.engine == Engine::mcmc) {
      ChainConfig cc;
      cc.d = cell.d;
      cc.n = cell.n;
      cc.beta = cell.beta;
      cc.sweeps = config.sweeps;
      cc.burn_in = config.burn_in;
      cc.move_mix = config.move_mix;
      cc.seed = cell.seed;
      cc.chains = config.chains;
      cc.threads = 1;
      s = sample_weakly_saw(cc);
    } else {
      s = sample_saw_pivot(cell.d, cell.n, config.sweeps, config.burn_in, cell.seed, config.chains, 1);
    }
    out["Z"] = nullptr;
    out["chi"] = stats_json(s.get("chi"));
    out["chi2"] = stats_json(s.get("chi2"));
    out["J"] = stats_json(s.get("J"));
    out["hull_radius"] = stats_json(s.get("hull_radius"));
    out["samples"] = s.samples;
    out["acceptance"] = {{"single_step", s.acc_A}, {"pivot", s.acc_B}};
  }
  if (config.cone) out["cone"] = cone_diagnostics(config, cell);
  return out;
}

json RunRecord::to_json() const {
  return {{"config_hash", config_hash}, {"timestamp", timestamp}, {"tool_version", tool_version},
          {"complete", complete}, {"cells", cells}};
}

namespace {

json manifest_json(const ExperimentConfig& config) {
  return {{"config", config.to_pairs()}, {"config_hash", config.hash()}, {"tool_version", kToolVersion}};
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out << text;
  if (!out) throw IoError("write failed for " + file.string());
}

RunRecord execute(const ExperimentConfig& config, const fs::path& dir, const RunOptions& options) {
  const auto cells = make_cells(config);
  auto done = detail::read_cells(dir, true);
  if (done.size() > cells.size()) throw CorruptState("run directory holds more cells than the config");

  std::size_t stop = cells.size();
  if (options.max_cells) stop = std::min(stop, done.size() + *options.max_cells);
  const std::size_t first = done.size();
  const std::size_t todo = stop - first;

  if (todo > 0) {
    std::ofstream sink(dir / detail::kCellsFile, std::ios::binary | std::ios::app);
    if (!sink) throw IoError("cannot append to " + (dir / detail::kCellsFile).string());
    std::vector<std::optional<json>> results(todo);
    std::size_t flushed = 0;
    std::mutex mutex;
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    auto worker = [&] {
      while (true) {
        const std::size_t k = next.fetch_add(1);
        if (k >= todo) return;
        {
          std::lock_guard lock(mutex);
          if (error) return;
        }
        try {
          auto blob = run_cell(config, cells[first + k], options.budget);
          std::lock_guard lock(mutex);
          results[k] = std::move(blob);
          while (flushed < todo && results[flushed]) {
            sink << results[flushed]->dump() << '\n';
            sink.flush();
            done.push_back(std::move(*results[flushed]));
            results[flushed].reset();
            ++flushed;
          }
        } catch (...) {
          std::lock_guard lock(mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    };
    const int workers = std::max(1, std::min<int>(options.threads, static_cast<int>(todo)));
    std::vector<std::thread> pool;
    for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (!sink) throw IoError("write failed for " + (dir / detail::kCellsFile).string());
    if (error) std::rethrow_exception(error);
  }

  RunRecord record;
  record.config_hash = config.hash();
  record.timestamp = utc_timestamp();
  record.cells = std::move(done);
  record.complete = record.cells.size() == cells.size();
  if (record.complete) write_text(dir / detail::kRunFile, record.to_json().dump(2) + "\n");
  return record;
}

}  // namespace

ExperimentConfig load_manifest(const fs::path& run_dir) {
  const auto file = run_dir / detail::kManifestFile;
  if (!fs::exists(file)) throw IoError("no run manifest in " + run_dir.string());
  const auto m = detail::read_json(file);
  ExperimentConfig config;
  try {
    config = config_from_pairs(m.at("config").get<std::map<std::string, std::string>>());
    if (m.at("config_hash").get<std::string>() != config.hash()) {
      throw CorruptState("manifest config does not match its recorded hash");
    }
  } catch (const json::exception& e) {
    throw CorruptState(file.string() + ": " + e.what());
  } catch (const InvalidConfig& e) {
    throw CorruptState(file.string() + ": " + e.what());
  }
  return config;
}

RunRecord run(const ExperimentConfig& config, const fs::path& out, const RunOptions& options) {
  config.validate(options.budget);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
  const auto manifest = out / detail::kManifestFile;
  if (fs::exists(manifest)) {
    const auto stored = load_manifest(out);
    if (stored.hash() != config.hash()) {
      throw CorruptState(out.string() + " already holds a run with a different config");
    }
  } else {
    write_text(manifest, manifest_json(config).dump(2) + "\n");
  }
  return execute(config, out, options);
}

RunRecord resume(const fs::path& run_dir, const RunOptions& options, const ExperimentConfig* expected) {
  const auto config = load_manifest(run_dir);
  if (expected && expected->hash() != config.hash()) {
    throw CorruptState("config hash " + expected->hash() + " does not match the run's " + config.hash());
  }
  config.validate(options.budget);
  return execute(config, run_dir, options);
}

}  // namespace sawlab
