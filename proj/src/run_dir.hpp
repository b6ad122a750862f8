#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace sawlab::detail {

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kCellsFile = "cells.jsonl";
inline constexpr const char* kRunFile = "run.json";

/// Complete lines of cells.jsonl in order. A trailing line without a newline
/// is an interrupted write and is dropped from the file. Throws CorruptState
/// on unparsable lines or out-of-order indices.
std::vector<nlohmann::json> read_cells(const std::filesystem::path& run_dir, bool repair);

nlohmann::json read_json(const std::filesystem::path& file);

/// Doubles as JSON; infinities become the strings "inf" / "-inf".
nlohmann::json number(double v);
double number_of(const nlohmann::json& j);

std::string format_double(double v);

}  // namespace sawlab::detail
