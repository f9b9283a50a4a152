#include "palign/sweep.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

#include "palign/error.hpp"
#include "palign/parallel.hpp"

namespace palign {
namespace {

void check_layers(const Archive& archive, std::span<const std::size_t> layers) {
  for (std::size_t layer : layers) {
    if (layer >= archive.manifest().layer_count) {
      raise(ErrorKind::index, "layer " + std::to_string(layer) + " out of range for archive '" +
                                  archive.name() + "' with " +
                                  std::to_string(archive.manifest().layer_count) + " layers");
    }
  }
}

std::size_t resolve_segments(const Archive& archive, std::size_t segments) {
  const auto& m = archive.manifest();
  if (m.modality == Modality::text || segments == 0) return m.segment_count;
  if (segments > m.segment_count) {
    raise(ErrorKind::parameter, "archive '" + archive.name() + "' has " +
                                    std::to_string(m.segment_count) + " segments, " +
                                    std::to_string(segments) + " requested");
  }
  return segments;
}

}  // namespace

LayerPairMatrix::LayerPairMatrix(std::vector<std::size_t> layers_x, std::vector<std::size_t> layers_y,
                                 std::vector<double> scores)
    : layers_x_(std::move(layers_x)), layers_y_(std::move(layers_y)), scores_(std::move(scores)) {
  if (scores_.size() != layers_x_.size() * layers_y_.size() || scores_.empty()) {
    raise(ErrorKind::dimension, "layer-pair matrix needs one score per layer pair");
  }
  // Row-major scan with strict '>' keeps the lowest (layer_x, layer_y) on ties
  // as long as the layer lists are ascending.
  std::size_t best_r = 0, best_c = 0;
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < cols(); ++c) {
      const double s = at(r, c);
      const double b = at(best_r, best_c);
      const bool better = s > b || (s == b && std::pair(layers_x_[r], layers_y_[c]) <
                                                  std::pair(layers_x_[best_r], layers_y_[best_c]));
      if (better) {
        best_r = r;
        best_c = c;
      }
    }
  }
  best_ = {layers_x_[best_r], layers_y_[best_c], at(best_r, best_c)};
}

std::vector<std::size_t> all_layers(const Archive& archive) {
  std::vector<std::size_t> layers(archive.manifest().layer_count);
  std::iota(layers.begin(), layers.end(), std::size_t{0});
  return layers;
}

std::vector<NeighborGraph> layer_graphs(const Archive& archive, std::size_t segments,
                                        std::span<const std::size_t> layers,
                                        const SweepOptions& options) {
  check_layers(archive, layers);
  validate_aggregation(aggregation_for_segments(segments),
                       archive.manifest().segment_count);
  const std::size_t threads = resolve_threads(options.threads);
  const std::size_t batch = std::max<std::size_t>(
      1, std::min({options.max_resident_layers, threads, layers.size()}));
  const std::size_t inner_threads = std::max<std::size_t>(1, threads / batch);

  std::vector<NeighborGraph> graphs(layers.size());
  for (std::size_t start = 0; start < layers.size(); start += batch) {
    const std::size_t count = std::min(batch, layers.size() - start);
    parallel_for(count, batch, [&](std::size_t i) {
      const auto features = mean_segments(archive.load_layer(layers[start + i]), segments);
      graphs[start + i] = build_neighbor_graph(features, options.k, options.metric, inner_threads);
    });
  }
  return graphs;
}

LayerPairMatrix score_layer_pairs(std::span<const NeighborGraph> graphs_x,
                                  std::span<const std::size_t> layers_x,
                                  std::span<const NeighborGraph> graphs_y,
                                  std::span<const std::size_t> layers_y, std::size_t threads) {
  if (graphs_x.size() != layers_x.size() || graphs_y.size() != layers_y.size()) {
    raise(ErrorKind::dimension, "one graph per layer expected");
  }
  if (graphs_x.empty() || graphs_y.empty()) raise(ErrorKind::parameter, "no layers to sweep");
  std::vector<double> scores(graphs_x.size() * graphs_y.size());
  parallel_for(scores.size(), threads, [&](std::size_t cell) {
    const std::size_t r = cell / graphs_y.size();
    const std::size_t c = cell % graphs_y.size();
    scores[cell] = mutual_knn_alignment(graphs_x[r], graphs_y[c]).score;
  });
  return LayerPairMatrix({layers_x.begin(), layers_x.end()}, {layers_y.begin(), layers_y.end()},
                         std::move(scores));
}

LayerPairMatrix sweep_layers(const Archive& ax, const Archive& ay, const AggregationSpec& spec_x,
                             const AggregationSpec& spec_y, const SweepOptions& options,
                             std::span<const std::size_t> layers_x,
                             std::span<const std::size_t> layers_y) {
  require_paired(ax, ay);
  validate_aggregation(spec_x, ax.manifest().segment_count);
  validate_aggregation(spec_y, ay.manifest().segment_count);
  const std::size_t n = ax.manifest().item_count;
  if (options.k < 1 || options.k >= n) {
    raise(ErrorKind::parameter, "k = " + std::to_string(options.k) + " out of range [1, " +
                                    std::to_string(n - 1) + "] for " + std::to_string(n) + " items");
  }
  const auto lx = layers_x.empty() ? all_layers(ax) : std::vector(layers_x.begin(), layers_x.end());
  const auto ly = layers_y.empty() ? all_layers(ay) : std::vector(layers_y.begin(), layers_y.end());
  const auto gx = layer_graphs(ax, spec_x.segments_used, lx, options);
  const auto gy = layer_graphs(ay, spec_y.segments_used, ly, options);
  return score_layer_pairs(gx, lx, gy, ly, options.threads);
}

LayerPairMatrix best_layer_pair(const Archive& ax, const Archive& ay, const AggregationSpec& spec_x,
                                const AggregationSpec& spec_y, const SweepOptions& options) {
  return sweep_layers(ax, ay, spec_x, spec_y, options);
}

ModelMatrix model_matrix(std::span<const Archive> row_archives,
                         std::span<const Archive> col_archives, const SweepOptions& options,
                         std::size_t segments) {
  if (row_archives.empty() || col_archives.empty()) {
    raise(ErrorKind::parameter, "model matrix needs at least one archive on each axis");
  }
  std::vector<const Archive*> all;
  for (const auto& a : row_archives) all.push_back(&a);
  for (const auto& a : col_archives) all.push_back(&a);

  const Archive& reference = *all.front();
  for (const Archive* a : all) require_paired(reference, *a);
  const std::size_t n = reference.manifest().item_count;
  if (options.k < 1 || options.k >= n) {
    raise(ErrorKind::parameter, "k = " + std::to_string(options.k) + " out of range [1, " +
                                    std::to_string(n - 1) + "] for " + std::to_string(n) + " items");
  }

  // Graphs depend on one archive only; build them once per distinct directory.
  std::map<std::string, std::size_t> slot_of;
  std::vector<std::size_t> slot(all.size());
  std::vector<const Archive*> unique;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const std::string key = std::filesystem::weakly_canonical(all[i]->path()).string();
    auto [it, inserted] = slot_of.emplace(key, unique.size());
    if (inserted) unique.push_back(all[i]);
    slot[i] = it->second;
  }
  std::vector<std::vector<NeighborGraph>> graphs(unique.size());
  std::vector<std::vector<std::size_t>> layers(unique.size());
  for (std::size_t u = 0; u < unique.size(); ++u) {
    layers[u] = all_layers(*unique[u]);
    graphs[u] = layer_graphs(*unique[u], resolve_segments(*unique[u], segments), layers[u], options);
  }

  ModelMatrix out;
  for (const auto& a : row_archives) out.row_ids.push_back(a.name());
  for (const auto& a : col_archives) out.col_ids.push_back(a.name());
  out.cells.resize(row_archives.size() * col_archives.size());
  parallel_for(out.cells.size(), options.threads, [&](std::size_t cell) {
    const std::size_t r = slot[cell / col_archives.size()];
    const std::size_t c = slot[row_archives.size() + cell % col_archives.size()];
    const auto pairs = score_layer_pairs(graphs[r], layers[r], graphs[c], layers[c], 1);
    out.cells[cell] = {pairs.best().score, pairs.best().layer_x, pairs.best().layer_y};
  });
  return out;
}

}  // namespace palign
