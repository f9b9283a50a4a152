#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "palign/matrix.hpp"

namespace palign {

/// cosine: 1 - <x,y>/(|x||y|), computed on L2-normalized rows.
/// euclidean: |x - y|_2.
enum class Metric { cosine, euclidean };

std::string_view to_string(Metric metric) noexcept;
/// Parses "cosine" or "euclidean"; throws a parameter error otherwise.
Metric parse_metric(std::string_view text);

/// Top-k neighbor lists, one per query row. Each row holds exactly k
/// distinct indices ordered by ascending distance with ties broken by
/// ascending index.
class NeighborGraph {
 public:
  NeighborGraph() = default;
  NeighborGraph(std::size_t rows, std::size_t k, Metric metric, std::vector<std::uint32_t> indices);

  std::size_t size() const noexcept { return rows_; }
  std::size_t k() const noexcept { return k_; }
  Metric metric() const noexcept { return metric_; }

  std::span<const std::uint32_t> row(std::size_t i) const noexcept {
    return {indices_.data() + i * k_, k_};
  }
  std::span<const std::uint32_t> indices() const noexcept { return indices_; }

  friend bool operator==(const NeighborGraph&, const NeighborGraph&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t k_ = 0;
  Metric metric_ = Metric::cosine;
  std::vector<std::uint32_t> indices_;
};

/// Exact k-NN graph of the rows of `data`, self excluded. Requires
/// 1 <= k <= N-1 and finite rows; zero rows are rejected under cosine.
/// Parallel over rows; the result is identical for any thread count
/// (0 = default_thread_count()).
NeighborGraph build_neighbor_graph(const Matrix& data, std::size_t k, Metric metric,
                                   std::size_t threads = 0);

/// For each row q of `queries`, the k nearest rows of `reference`. With
/// `exclude_same_index`, reference row q is never a candidate for query q
/// (queries and reference must then have the same row count).
/// build_neighbor_graph(x) == query_neighbor_graph(x, x, k, metric, true).
NeighborGraph query_neighbor_graph(const Matrix& reference, const Matrix& queries, std::size_t k,
                                   Metric metric, bool exclude_same_index,
                                   std::size_t threads = 0);

struct AlignmentReport {
  double score = 0.0;
  std::size_t k = 0;
  std::size_t layer_x = 0;
  std::size_t layer_y = 0;
  std::size_t n = 0;
  Metric metric = Metric::cosine;
  /// Total number of shared neighbor entries, i.e. score * k * n.
  std::size_t shared = 0;
};

/// Mutual k-NN alignment: (1 / kN) * sum_i |row_i(gx) ∩ row_i(gy)|.
AlignmentReport mutual_knn_alignment(const NeighborGraph& gx, const NeighborGraph& gy);

struct CurvePoint {
  std::size_t k = 0;
  double score = 0.0;
  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

std::vector<CurvePoint> alignment_curve(const Matrix& x, const Matrix& y,
                                        std::span<const std::size_t> ks, Metric metric,
                                        std::size_t threads = 0);

inline constexpr std::size_t kDefaultRetrievalK = 8;
inline constexpr double kDefaultRetrievalTau = 0.07;

/// Weighted k-NN classification. Each test row retrieves its k most
/// cosine-similar train rows (ties by lower index); neighbor j votes for
/// its label with weight exp(s_j / tau). The prediction is the label with
/// the largest summed weight, ties going to the lowest label.
std::vector<int> weighted_knn_predict(const Matrix& train, std::span<const int> train_labels,
                                      const Matrix& test, std::size_t k,
                                      double tau = kDefaultRetrievalTau, std::size_t threads = 0);

/// Fraction of test rows whose weighted k-NN prediction equals its label.
double weighted_knn_retrieval(const Matrix& train, std::span<const int> train_labels,
                              const Matrix& test, std::span<const int> test_labels,
                              std::size_t k = kDefaultRetrievalK,
                              double tau = kDefaultRetrievalTau, std::size_t threads = 0);

}  // namespace palign
