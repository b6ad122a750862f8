#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sawlab/config.hpp"
#include "sawlab/exact.hpp"

namespace sawlab {

inline constexpr const char* kToolVersion = "sawlab 0.1.0";

struct Cell {
  std::size_t index = 0;
  int d = 1;
  int n = 0;
  double beta = 0.0;
  std::uint64_t seed = 0;
};

/// Grid cells ordered by beta, then n.
std::vector<Cell> make_cells(const ExperimentConfig& config);

/// Moments (and, when enabled, cone diagnostics) of one cell as a JSON blob.
nlohmann::json run_cell(const ExperimentConfig& config, const Cell& cell,
                        std::uint64_t budget = kDefaultEnumerationBudget);

struct RunOptions {
  int threads = 1;
  std::optional<std::size_t> max_cells;  ///< stop after this many new cells
  std::uint64_t budget = kDefaultEnumerationBudget;
};

struct RunRecord {
  std::string config_hash;
  std::string timestamp;
  std::string tool_version = kToolVersion;
  std::vector<nlohmann::json> cells;
  bool complete = false;

  nlohmann::json to_json() const;
};

/// Executes every missing cell, appending one JSON line per cell to
/// cells.jsonl in cell order. run.json is written once all cells exist.
RunRecord run(const ExperimentConfig& config, const std::filesystem::path& out,
              const RunOptions& options = {});

/// Completes a partial run directory. Throws CorruptState if the manifest
/// does not match its hash, `expected` disagrees with it, or a cell line is
/// malformed.
RunRecord resume(const std::filesystem::path& run_dir, const RunOptions& options = {},
                 const ExperimentConfig* expected = nullptr);

/// Reads the stored config of a run directory.
ExperimentConfig load_manifest(const std::filesystem::path& run_dir);

/// Writes moments.csv, exponents.csv, shape.csv, conditionD.csv and SVG
/// charts into the run directory. Throws IoError when there is nothing to
/// report.
std::vector<std::filesystem::path> report(const std::filesystem::path& run_dir);

}  // namespace sawlab
