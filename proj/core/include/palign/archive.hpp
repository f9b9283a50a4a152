#pragma once

// On-disk embedding archive: a directory holding `manifest.json` and
// `embeddings.bin`. The binary file is raw little-endian float32 laid out
// layer-major as [L][N][S][D] with no header or padding, so layer l occupies
// bytes [l*N*S*D*4, (l+1)*N*S*D*4).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace palign {

enum class Modality { vision, text };

std::string_view to_string(Modality modality) noexcept;

/// Scalar annotation stored in the manifest `variant` map (n_f, n_c, pooling, n_o ...).
using VariantValue = std::variant<std::int64_t, double, std::string, bool>;

inline constexpr std::string_view kArchiveDtype = "f32le";
inline constexpr std::string_view kManifestFile = "manifest.json";
inline constexpr std::string_view kTensorFile = "embeddings.bin";

struct ArchiveManifest {
  std::string model_id;
  Modality modality = Modality::vision;
  std::size_t item_count = 0;
  std::size_t layer_count = 0;
  std::size_t dim = 0;
  std::size_t segment_count = 1;
  std::map<std::string, VariantValue> variant;
  std::string dtype = std::string(kArchiveDtype);
  std::vector<std::string> item_ids;

  /// Number of floats in one layer, N*S*D.
  std::size_t layer_size() const noexcept { return item_count * segment_count * dim; }
  std::size_t value_count() const noexcept { return layer_count * layer_size(); }
  std::uintmax_t tensor_bytes() const noexcept {
    return static_cast<std::uintmax_t>(value_count()) * sizeof(float);
  }

  friend bool operator==(const ArchiveManifest&, const ArchiveManifest&) = default;
};

/// Throws a format error if any manifest invariant fails.
void validate_manifest(const ArchiveManifest& manifest);

std::string manifest_to_json(const ArchiveManifest& manifest);
ArchiveManifest manifest_from_json(const std::string& text);

/// Per-layer features of shape [N, S, D].
class SegmentedMatrix {
 public:
  SegmentedMatrix() = default;
  SegmentedMatrix(std::size_t items, std::size_t segments, std::size_t dim,
                  std::vector<float> values, std::size_t layer_index = 0);

  std::size_t items() const noexcept { return items_; }
  std::size_t segments() const noexcept { return segments_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t layer_index() const noexcept { return layer_; }

  std::span<const float> at(std::size_t item, std::size_t segment) const noexcept {
    return {values_.data() + (item * segments_ + segment) * dim_, dim_};
  }
  std::span<const float> values() const noexcept { return values_; }

  friend bool operator==(const SegmentedMatrix&, const SegmentedMatrix&) = default;

 private:
  std::size_t items_ = 0;
  std::size_t segments_ = 0;
  std::size_t dim_ = 0;
  std::size_t layer_ = 0;
  std::vector<float> values_;
};

/// Writes `tensor` (flattened [L, N, S, D]) with its manifest into `dir`,
/// creating the directory if needed.
void write_archive(const ArchiveManifest& manifest, std::span<const float> tensor,
                   const std::filesystem::path& dir);

/// Read-only handle. Layers are read on demand; concurrent load_layer calls
/// are safe since each call opens its own stream.
class Archive {
 public:
  static Archive open(const std::filesystem::path& dir);

  const ArchiveManifest& manifest() const noexcept { return manifest_; }
  const std::filesystem::path& path() const noexcept { return dir_; }
  /// Directory name; used as the archive's id in reports.
  std::string name() const;

  SegmentedMatrix load_layer(std::size_t layer) const;

 private:
  Archive(std::filesystem::path dir, ArchiveManifest manifest);

  std::filesystem::path dir_;
  ArchiveManifest manifest_;
};

inline Archive open_archive(const std::filesystem::path& dir) { return Archive::open(dir); }

/// Archives are paired iff their item_ids lists are identical element-wise.
bool paired(const ArchiveManifest& a, const ArchiveManifest& b) noexcept;

/// Throws a pairing error naming both archives and the first mismatched id.
void require_paired(const Archive& a, const Archive& b);

}  // namespace palign
