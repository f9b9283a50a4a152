#include "palign/archive.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "palign/error.hpp"

namespace palign {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::uint32_t byteswap32(std::uint32_t v) {
  return ((v & 0x000000FFu) << 24) | ((v & 0x0000FF00u) << 8) | ((v & 0x00FF0000u) >> 8) |
         ((v & 0xFF000000u) >> 24);
}

// Converts between host floats and little-endian on-disk words in place.
void to_little_endian(std::span<float> values) {
  if constexpr (std::endian::native == std::endian::big) {
    for (float& f : values) {
      f = std::bit_cast<float>(byteswap32(std::bit_cast<std::uint32_t>(f)));
    }
  }
}

std::size_t read_count(const json& doc, const char* key) {
  if (!doc.contains(key)) raise(ErrorKind::format, std::string("manifest missing field '") + key + "'");
  const json& v = doc.at(key);
  if (!v.is_number_integer()) {
    raise(ErrorKind::format, std::string("manifest field '") + key + "' must be an integer");
  }
  const auto n = v.get<std::int64_t>();
  if (n < 1) raise(ErrorKind::format, std::string("manifest field '") + key + "' must be >= 1");
  return static_cast<std::size_t>(n);
}

std::string read_string(const json& doc, const char* key) {
  if (!doc.contains(key)) raise(ErrorKind::format, std::string("manifest missing field '") + key + "'");
  const json& v = doc.at(key);
  if (!v.is_string()) {
    raise(ErrorKind::format, std::string("manifest field '") + key + "' must be a string");
  }
  return v.get<std::string>();
}

}  // namespace

std::string_view to_string(Modality modality) noexcept {
  return modality == Modality::vision ? "vision" : "text";
}

void validate_manifest(const ArchiveManifest& m) {
  if (m.dtype != kArchiveDtype) {
    raise(ErrorKind::format, "unsupported dtype '" + m.dtype + "', expected 'f32le'");
  }
  if (m.item_count < 1 || m.layer_count < 1 || m.dim < 1 || m.segment_count < 1) {
    raise(ErrorKind::format, "item_count, layer_count, dim and segment_count must all be >= 1");
  }
  if (m.modality == Modality::text && m.segment_count != 1) {
    raise(ErrorKind::format, "text archives must have segment_count 1, got " +
                                 std::to_string(m.segment_count));
  }
  if (m.item_ids.size() != m.item_count) {
    raise(ErrorKind::format, "item_ids has " + std::to_string(m.item_ids.size()) +
                                 " entries but item_count is " + std::to_string(m.item_count));
  }
  std::unordered_set<std::string_view> seen;
  seen.reserve(m.item_ids.size());
  for (const auto& id : m.item_ids) {
    if (!seen.insert(id).second) raise(ErrorKind::format, "duplicate item id '" + id + "'");
  }
}

std::string manifest_to_json(const ArchiveManifest& m) {
  json doc;
  doc["model_id"] = m.model_id;
  doc["modality"] = std::string(to_string(m.modality));
  doc["item_count"] = m.item_count;
  doc["layer_count"] = m.layer_count;
  doc["dim"] = m.dim;
  doc["segment_count"] = m.segment_count;
  json variant = json::object();
  for (const auto& [key, value] : m.variant) {
    std::visit([&](const auto& v) { variant[key] = v; }, value);
  }
  doc["variant"] = std::move(variant);
  doc["dtype"] = m.dtype;
  doc["item_ids"] = m.item_ids;
  return doc.dump(2) + "\n";
}

ArchiveManifest manifest_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    raise(ErrorKind::format, std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) raise(ErrorKind::format, "manifest must be a JSON object");

  ArchiveManifest m;
  m.model_id = read_string(doc, "model_id");
  const std::string modality = read_string(doc, "modality");
  if (modality == "vision") {
    m.modality = Modality::vision;
  } else if (modality == "text") {
    m.modality = Modality::text;
  } else {
    raise(ErrorKind::format, "unknown modality '" + modality + "'");
  }
  m.item_count = read_count(doc, "item_count");
  m.layer_count = read_count(doc, "layer_count");
  m.dim = read_count(doc, "dim");
  m.segment_count = read_count(doc, "segment_count");
  m.dtype = read_string(doc, "dtype");

  if (doc.contains("variant")) {
    const json& variant = doc.at("variant");
    if (!variant.is_object()) raise(ErrorKind::format, "manifest field 'variant' must be an object");
    for (const auto& [key, value] : variant.items()) {
      if (value.is_boolean()) {
        m.variant[key] = value.get<bool>();
      } else if (value.is_number_integer()) {
        m.variant[key] = value.get<std::int64_t>();
      } else if (value.is_number_float()) {
        m.variant[key] = value.get<double>();
      } else if (value.is_string()) {
        m.variant[key] = value.get<std::string>();
      } else {
        raise(ErrorKind::format, "variant entry '" + key + "' must be a scalar");
      }
    }
  }

  if (!doc.contains("item_ids") || !doc.at("item_ids").is_array()) {
    raise(ErrorKind::format, "manifest field 'item_ids' must be an array of strings");
  }
  for (const auto& id : doc.at("item_ids")) {
    if (!id.is_string()) raise(ErrorKind::format, "item_ids entries must be strings");
    m.item_ids.push_back(id.get<std::string>());
  }
  validate_manifest(m);
  return m;
}

SegmentedMatrix::SegmentedMatrix(std::size_t items, std::size_t segments, std::size_t dim,
                                 std::vector<float> values, std::size_t layer_index)
    : items_(items), segments_(segments), dim_(dim), layer_(layer_index), values_(std::move(values)) {
  if (values_.size() != items * segments * dim) {
    raise(ErrorKind::dimension, "segmented matrix [" + std::to_string(items) + ", " +
                                    std::to_string(segments) + ", " + std::to_string(dim) +
                                    "] needs " + std::to_string(items * segments * dim) +
                                    " values, got " + std::to_string(values_.size()));
  }
}

void write_archive(const ArchiveManifest& manifest, std::span<const float> tensor,
                   const fs::path& dir) {
  validate_manifest(manifest);
  if (tensor.size() != manifest.value_count()) {
    raise(ErrorKind::dimension,
          "tensor has " + std::to_string(tensor.size()) + " values but manifest shape [" +
              std::to_string(manifest.layer_count) + ", " + std::to_string(manifest.item_count) +
              ", " + std::to_string(manifest.segment_count) + ", " + std::to_string(manifest.dim) +
              "] needs " + std::to_string(manifest.value_count()));
  }
  for (std::size_t i = 0; i < tensor.size(); ++i) {
    if (!std::isfinite(tensor[i])) {
      raise(ErrorKind::data, "non-finite value at flat offset " + std::to_string(i));
    }
  }

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) raise(ErrorKind::io, "cannot create directory '" + dir.string() + "': " + ec.message());

  {
    std::ofstream out(dir / kManifestFile, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::io, "cannot write '" + (dir / kManifestFile).string() + "'");
    out << manifest_to_json(manifest);
    if (!out) raise(ErrorKind::io, "failed writing '" + (dir / kManifestFile).string() + "'");
  }

  std::ofstream out(dir / kTensorFile, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorKind::io, "cannot write '" + (dir / kTensorFile).string() + "'");
  // Stream one layer at a time to bound the staging buffer.
  const std::size_t layer_size = manifest.layer_size();
  std::vector<float> staging(layer_size);
  for (std::size_t l = 0; l < manifest.layer_count; ++l) {
    std::copy_n(tensor.begin() + static_cast<std::ptrdiff_t>(l * layer_size), layer_size,
                staging.begin());
    to_little_endian(staging);
    out.write(reinterpret_cast<const char*>(staging.data()),
              static_cast<std::streamsize>(layer_size * sizeof(float)));
  }
  out.flush();
  if (!out) raise(ErrorKind::io, "failed writing '" + (dir / kTensorFile).string() + "'");
}

Archive::Archive(fs::path dir, ArchiveManifest manifest)
    : dir_(std::move(dir)), manifest_(std::move(manifest)) {}

Archive Archive::open(const fs::path& dir) {
  const fs::path manifest_path = dir / kManifestFile;
  const fs::path tensor_path = dir / kTensorFile;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) raise(ErrorKind::io, "archive directory '" + dir.string() + "' not found");
  if (!fs::is_regular_file(manifest_path, ec)) {
    raise(ErrorKind::io, "missing '" + manifest_path.string() + "'");
  }
  if (!fs::is_regular_file(tensor_path, ec)) {
    raise(ErrorKind::io, "missing '" + tensor_path.string() + "'");
  }

  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) raise(ErrorKind::io, "cannot read '" + manifest_path.string() + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ArchiveManifest manifest = manifest_from_json(text);

  const std::uintmax_t actual = fs::file_size(tensor_path, ec);
  if (ec) raise(ErrorKind::io, "cannot stat '" + tensor_path.string() + "': " + ec.message());
  if (actual != manifest.tensor_bytes()) {
    raise(ErrorKind::format, "'" + tensor_path.string() + "' has " + std::to_string(actual) +
                                 " bytes, expected " + std::to_string(manifest.tensor_bytes()));
  }
  return Archive(dir, std::move(manifest));
}

std::string Archive::name() const {
  fs::path p = dir_;
  if (!p.has_filename()) p = p.parent_path();
  return p.filename().string();
}

SegmentedMatrix Archive::load_layer(std::size_t layer) const {
  if (layer >= manifest_.layer_count) {
    raise(ErrorKind::index, "layer " + std::to_string(layer) + " out of range for archive '" +
                                name() + "' with " + std::to_string(manifest_.layer_count) +
                                " layers");
  }
  const std::size_t count = manifest_.layer_size();
  std::vector<float> values(count);
  const fs::path tensor_path = dir_ / kTensorFile;
  std::ifstream in(tensor_path, std::ios::binary);
  if (!in) raise(ErrorKind::io, "cannot read '" + tensor_path.string() + "'");
  in.seekg(static_cast<std::streamoff>(layer * count * sizeof(float)));
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(count * sizeof(float)));
  if (!in) raise(ErrorKind::format, "short read of layer " + std::to_string(layer) + " in '" +
                                        tensor_path.string() + "'");
  to_little_endian(values);

  const std::size_t seg = manifest_.segment_count;
  const std::size_t dim = manifest_.dim;
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::isfinite(values[i])) {
      const std::size_t item = i / (seg * dim);
      const std::size_t segment = (i / dim) % seg;
      raise(ErrorKind::data, "non-finite value in layer " + std::to_string(layer) + ", item '" +
                                 manifest_.item_ids[item] + "', segment " +
                                 std::to_string(segment) + ", component " +
                                 std::to_string(i % dim));
    }
  }
  return SegmentedMatrix(manifest_.item_count, seg, dim, std::move(values), layer);
}

bool paired(const ArchiveManifest& a, const ArchiveManifest& b) noexcept {
  return a.item_ids == b.item_ids;
}

void require_paired(const Archive& a, const Archive& b) {
  const auto& ia = a.manifest().item_ids;
  const auto& ib = b.manifest().item_ids;
  if (ia == ib) return;
  std::ostringstream msg;
  msg << "archives '" << a.name() << "' and '" << b.name() << "' are not paired: ";
  const std::size_t common = std::min(ia.size(), ib.size());
  const auto mismatch = std::mismatch(ia.begin(), ia.begin() + static_cast<std::ptrdiff_t>(common), ib.begin());
  if (mismatch.first != ia.begin() + static_cast<std::ptrdiff_t>(common)) {
    msg << "item " << (mismatch.first - ia.begin()) << " is '" << *mismatch.first << "' vs '"
        << *mismatch.second << "'";
  } else {
    msg << "item counts differ (" << ia.size() << " vs " << ib.size() << ")";
  }
  raise(ErrorKind::pairing, msg.str());
}

}  // namespace palign
