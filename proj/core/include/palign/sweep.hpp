#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "palign/aggregate.hpp"
#include "palign/archive.hpp"
#include "palign/knn.hpp"

namespace palign {

struct SweepOptions {
  std::size_t k = 10;
  Metric metric = Metric::cosine;
  std::size_t threads = 0;
  /// Upper bound on layer matrices held in memory at once, per archive.
  std::size_t max_resident_layers = 4;
};

struct LayerPair {
  std::size_t layer_x = 0;
  std::size_t layer_y = 0;
  double score = 0.0;
  friend bool operator==(const LayerPair&, const LayerPair&) = default;
};

/// Alignment score for every (layer_x, layer_y) combination swept, plus the
/// argmax (ties to the lexicographically lowest layer pair).
class LayerPairMatrix {
 public:
  LayerPairMatrix() = default;
  LayerPairMatrix(std::vector<std::size_t> layers_x, std::vector<std::size_t> layers_y,
                  std::vector<double> scores);

  std::size_t rows() const noexcept { return layers_x_.size(); }
  std::size_t cols() const noexcept { return layers_y_.size(); }
  const std::vector<std::size_t>& layers_x() const noexcept { return layers_x_; }
  const std::vector<std::size_t>& layers_y() const noexcept { return layers_y_; }
  /// Score at row r, column c (positions in layers_x / layers_y).
  double at(std::size_t r, std::size_t c) const noexcept { return scores_[r * layers_y_.size() + c]; }
  std::span<const double> scores() const noexcept { return scores_; }
  const LayerPair& best() const noexcept { return best_; }

  friend bool operator==(const LayerPairMatrix&, const LayerPairMatrix&) = default;

 private:
  std::vector<std::size_t> layers_x_;
  std::vector<std::size_t> layers_y_;
  std::vector<double> scores_;
  LayerPair best_;
};

/// Neighbor graph per requested layer, each built from the layer's
/// features averaged over the first `segments` sub-clips. At most
/// `options.max_resident_layers` layers are loaded at a time.
std::vector<NeighborGraph> layer_graphs(const Archive& archive, std::size_t segments,
                                        std::span<const std::size_t> layers,
                                        const SweepOptions& options);

/// Scores every pair of precomputed graphs.
LayerPairMatrix score_layer_pairs(std::span<const NeighborGraph> graphs_x,
                                  std::span<const std::size_t> layers_x,
                                  std::span<const NeighborGraph> graphs_y,
                                  std::span<const std::size_t> layers_y, std::size_t threads = 0);

std::vector<std::size_t> all_layers(const Archive& archive);

/// Exhaustive sweep over the given layers of both archives (all layers
/// when a list is empty).
LayerPairMatrix sweep_layers(const Archive& ax, const Archive& ay, const AggregationSpec& spec_x,
                             const AggregationSpec& spec_y, const SweepOptions& options,
                             std::span<const std::size_t> layers_x = {},
                             std::span<const std::size_t> layers_y = {});

/// Full L_x x L_y sweep; the pair of layers maximizing mutual k-NN alignment.
LayerPairMatrix best_layer_pair(const Archive& ax, const Archive& ay, const AggregationSpec& spec_x,
                                const AggregationSpec& spec_y, const SweepOptions& options);

struct ModelCell {
  double score = 0.0;
  std::size_t layer_x = 0;
  std::size_t layer_y = 0;
  friend bool operator==(const ModelCell&, const ModelCell&) = default;
};

struct ModelMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  std::vector<ModelCell> cells;  // row-major

  const ModelCell& at(std::size_t r, std::size_t c) const { return cells[r * col_ids.size() + c]; }
  friend bool operator==(const ModelMatrix&, const ModelMatrix&) = default;
};

/// Best layer-pair alignment for every (row archive, column archive) cell.
/// Rows are usually vision archives and columns text archives, but any two
/// lists of item-aligned archives work (e.g. video-video). Each archive
/// uses its first `segments` sub-clips (0 = all of them).
ModelMatrix model_matrix(std::span<const Archive> row_archives,
                         std::span<const Archive> col_archives, const SweepOptions& options,
                         std::size_t segments = 0);

}  // namespace palign
