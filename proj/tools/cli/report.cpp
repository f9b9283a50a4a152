#include "report.hpp"

#include <fstream>
#include <map>

#include "palign/csv.hpp"
#include "palign/error.hpp"

namespace palign::cli {

namespace fs = std::filesystem;

std::string_view version() noexcept { return PALIGN_VERSION; }

Json RunReport::to_json() const {
  Json doc;
  doc["command"] = command;
  doc["params"] = params;
  doc["version"] = std::string(version());
  doc["inputs"] = inputs;
  doc["result"] = result;
  doc["wall_time_ms"] = wall_time_ms;
  return doc;
}

Json summarize_archive(const Archive& archive, std::string_view role) {
  const auto& m = archive.manifest();
  Json variant = Json::object();
  for (const auto& [key, value] : m.variant) {
    std::visit([&](const auto& v) { variant[key] = v; }, value);
  }
  Json out;
  out["role"] = std::string(role);
  out["path"] = archive.path().string();
  out["name"] = archive.name();
  out["model_id"] = m.model_id;
  out["modality"] = std::string(to_string(m.modality));
  out["item_count"] = m.item_count;
  out["layer_count"] = m.layer_count;
  out["dim"] = m.dim;
  out["segment_count"] = m.segment_count;
  out["variant"] = std::move(variant);
  return out;
}

Json layer_pairs_to_json(const LayerPairMatrix& pairs) {
  Json scores = Json::array();
  for (std::size_t r = 0; r < pairs.rows(); ++r) {
    Json row = Json::array();
    for (std::size_t c = 0; c < pairs.cols(); ++c) row.push_back(pairs.at(r, c));
    scores.push_back(std::move(row));
  }
  Json out;
  out["layers_x"] = pairs.layers_x();
  out["layers_y"] = pairs.layers_y();
  out["scores"] = std::move(scores);
  return out;
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorKind::io, "cannot write '" + path.string() + "'");
  out << text;
  out.flush();
  if (!out) raise(ErrorKind::io, "failed writing '" + path.string() + "'");
}

void write_report(const fs::path& path, const RunReport& report) {
  write_text_file(path, report.to_json().dump(2) + "\n");
}

std::vector<Archive> open_archive_dir(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) raise(ErrorKind::io, "directory '" + dir.string() + "' not found");
  std::vector<fs::path> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / kManifestFile)) found.push_back(entry.path());
  }
  std::ranges::sort(found);
  if (found.empty()) raise(ErrorKind::io, "no archives found in '" + dir.string() + "'");
  std::vector<Archive> archives;
  for (const auto& p : found) archives.push_back(Archive::open(p));
  return archives;
}

std::vector<std::string> read_labels_csv(const fs::path& path,
                                         const std::vector<std::string>& item_ids) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::io, "cannot read labels file '" + path.string() + "'");
  const auto lines = csv::read_lines(in);
  if (lines.empty() || csv::split(lines.front()) != std::vector<std::string>{"item_id", "label"}) {
    raise(ErrorKind::format, "labels file '" + path.string() + "' must start with header 'item_id,label'");
  }
  std::map<std::string, std::string> labels;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = csv::split(lines[i]);
    if (fields.size() != 2) {
      raise(ErrorKind::format, "labels line " + std::to_string(i + 1) + " needs 2 fields");
    }
    if (!labels.emplace(fields[0], fields[1]).second) {
      raise(ErrorKind::format, "duplicate item id '" + fields[0] + "' in labels file");
    }
  }
  std::vector<std::string> out;
  out.reserve(item_ids.size());
  for (const auto& id : item_ids) {
    const auto it = labels.find(id);
    if (it == labels.end()) {
      raise(ErrorKind::parameter, "item '" + id + "' has no label in '" + path.string() + "'");
    }
    out.push_back(it->second);
  }
  return out;
}

}  // namespace palign::cli
