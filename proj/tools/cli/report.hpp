#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "palign/archive.hpp"
#include "palign/sweep.hpp"

namespace palign::cli {

using Json = nlohmann::ordered_json;

/// Machine-readable record of one command invocation. `params` echoes every
/// option that affects the output, so re-running with them reproduces the
/// same files (wall_time_ms aside).
struct RunReport {
  std::string command;
  Json params = Json::object();
  Json inputs = Json::array();
  Json result = Json::object();
  double wall_time_ms = 0.0;

  Json to_json() const;
};

std::string_view version() noexcept;

Json summarize_archive(const Archive& archive, std::string_view role);
Json layer_pairs_to_json(const LayerPairMatrix& pairs);

void write_text_file(const std::filesystem::path& path, const std::string& text);
void write_report(const std::filesystem::path& path, const RunReport& report);

/// Archive subdirectories of `dir` (those holding a manifest.json), sorted by name.
std::vector<Archive> open_archive_dir(const std::filesystem::path& dir);

/// Reads an `item_id,label` CSV and returns the label of each id in
/// `item_ids` (in that order). Missing or duplicated ids are errors.
std::vector<std::string> read_labels_csv(const std::filesystem::path& path,
                                         const std::vector<std::string>& item_ids);

}  // namespace palign::cli
