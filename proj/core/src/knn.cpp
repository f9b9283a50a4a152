#include "palign/knn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "palign/error.hpp"
#include "palign/parallel.hpp"

namespace palign {
namespace {

using Candidate = std::pair<double, std::uint32_t>;

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) sum += a[d] * b[d];
  return sum;
}

double euclidean(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

void require_finite(const Matrix& m, std::string_view role) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (double v : m.row(i)) {
      if (!std::isfinite(v)) {
        raise(ErrorKind::data, std::string(role) + " row " + std::to_string(i) + " is not finite");
      }
    }
  }
}

Matrix normalized_rows(const Matrix& m, std::string_view role) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto src = m.row(i);
    const double norm = std::sqrt(dot(src, src));
    if (norm == 0.0) {
      raise(ErrorKind::data, std::string(role) + " row " + std::to_string(i) +
                                 " has zero norm; cosine distance is undefined");
    }
    auto dst = out.row(i);
    for (std::size_t d = 0; d < src.size(); ++d) dst[d] = src[d] / norm;
  }
  return out;
}

// Rows ready for distance evaluation under `metric`.
Matrix prepare(const Matrix& m, Metric metric, std::string_view role) {
  require_finite(m, role);
  return metric == Metric::cosine ? normalized_rows(m, role) : m;
}

double distance(std::span<const double> a, std::span<const double> b, Metric metric) {
  return metric == Metric::cosine ? 1.0 - dot(a, b) : euclidean(a, b);
}

// Sorts the k smallest candidates to the front, (distance, index) ascending.
void select_smallest(std::vector<Candidate>& candidates, std::size_t k) {
  auto kth = candidates.begin() + static_cast<std::ptrdiff_t>(k);
  if (kth != candidates.end()) std::nth_element(candidates.begin(), kth - 1, candidates.end());
  std::sort(candidates.begin(), kth);
}

}  // namespace

std::string_view to_string(Metric metric) noexcept {
  return metric == Metric::cosine ? "cosine" : "euclidean";
}

Metric parse_metric(std::string_view text) {
  if (text == "cosine") return Metric::cosine;
  if (text == "euclidean") return Metric::euclidean;
  raise(ErrorKind::parameter, "unknown metric '" + std::string(text) + "' (expected cosine or euclidean)");
}

NeighborGraph::NeighborGraph(std::size_t rows, std::size_t k, Metric metric,
                             std::vector<std::uint32_t> indices)
    : rows_(rows), k_(k), metric_(metric), indices_(std::move(indices)) {
  if (indices_.size() != rows * k) {
    raise(ErrorKind::dimension, "neighbor graph needs rows*k indices");
  }
}

NeighborGraph build_neighbor_graph(const Matrix& data, std::size_t k, Metric metric,
                                   std::size_t threads) {
  return query_neighbor_graph(data, data, k, metric, true, threads);
}

NeighborGraph query_neighbor_graph(const Matrix& reference, const Matrix& queries, std::size_t k,
                                   Metric metric, bool exclude_same_index, std::size_t threads) {
  const std::size_t n_ref = reference.rows();
  if (n_ref > std::numeric_limits<std::uint32_t>::max()) {
    raise(ErrorKind::parameter, "too many reference rows");
  }
  if (reference.cols() != queries.cols()) {
    raise(ErrorKind::parameter, "reference has " + std::to_string(reference.cols()) +
                                    " columns but queries have " + std::to_string(queries.cols()));
  }
  if (exclude_same_index && queries.rows() != n_ref) {
    raise(ErrorKind::parameter, "self-excluding search needs equal row counts");
  }
  const std::size_t available = exclude_same_index ? n_ref - (n_ref > 0 ? 1 : 0) : n_ref;
  if (k < 1 || k > available) {
    raise(ErrorKind::parameter, "k = " + std::to_string(k) + " out of range [1, " +
                                    std::to_string(available) + "] for " + std::to_string(n_ref) +
                                    " rows");
  }

  const Matrix ref = prepare(reference, metric, "reference");
  const bool same = &reference == &queries;
  const Matrix qry = same ? Matrix() : prepare(queries, metric, "query");
  const Matrix& q = same ? ref : qry;

  std::vector<std::uint32_t> indices(queries.rows() * k);
  parallel_for(queries.rows(), threads, [&](std::size_t i) {
    std::vector<Candidate> candidates;
    candidates.reserve(n_ref);
    const auto qi = q.row(i);
    for (std::size_t j = 0; j < n_ref; ++j) {
      if (exclude_same_index && j == i) continue;
      candidates.emplace_back(distance(qi, ref.row(j), metric), static_cast<std::uint32_t>(j));
    }
    select_smallest(candidates, k);
    for (std::size_t r = 0; r < k; ++r) indices[i * k + r] = candidates[r].second;
  });
  return NeighborGraph(queries.rows(), k, metric, std::move(indices));
}

AlignmentReport mutual_knn_alignment(const NeighborGraph& gx, const NeighborGraph& gy) {
  if (gx.size() != gy.size()) {
    raise(ErrorKind::parameter, "graphs cover different item counts (" + std::to_string(gx.size()) +
                                    " vs " + std::to_string(gy.size()) + ")");
  }
  if (gx.k() != gy.k()) {
    raise(ErrorKind::parameter, "graphs use different k (" + std::to_string(gx.k()) + " vs " +
                                    std::to_string(gy.k()) + ")");
  }
  if (gx.size() == 0) raise(ErrorKind::parameter, "empty neighbor graphs");

  const std::size_t k = gx.k();
  std::size_t shared = 0;
  std::vector<std::uint32_t> a(k), b(k);
  for (std::size_t i = 0; i < gx.size(); ++i) {
    std::ranges::copy(gx.row(i), a.begin());
    std::ranges::copy(gy.row(i), b.begin());
    std::ranges::sort(a);
    std::ranges::sort(b);
    std::size_t p = 0, q = 0;
    while (p < k && q < k) {
      if (a[p] < b[q]) {
        ++p;
      } else if (b[q] < a[p]) {
        ++q;
      } else {
        ++shared;
        ++p;
        ++q;
      }
    }
  }
  AlignmentReport report;
  report.k = k;
  report.n = gx.size();
  report.metric = gx.metric();
  report.shared = shared;
  report.score = static_cast<double>(shared) / static_cast<double>(k * gx.size());
  return report;
}

std::vector<CurvePoint> alignment_curve(const Matrix& x, const Matrix& y,
                                        std::span<const std::size_t> ks, Metric metric,
                                        std::size_t threads) {
  if (x.rows() != y.rows()) {
    raise(ErrorKind::parameter, "x and y have different row counts");
  }
  for (std::size_t k : ks) {
    if (k < 1 || k >= x.rows()) {
      raise(ErrorKind::parameter, "k = " + std::to_string(k) + " out of range [1, " +
                                      std::to_string(x.rows() - 1) + "]");
    }
  }
  std::vector<CurvePoint> curve;
  curve.reserve(ks.size());
  for (std::size_t k : ks) {
    const auto gx = build_neighbor_graph(x, k, metric, threads);
    const auto gy = build_neighbor_graph(y, k, metric, threads);
    curve.push_back({k, mutual_knn_alignment(gx, gy).score});
  }
  return curve;
}

std::vector<int> weighted_knn_predict(const Matrix& train, std::span<const int> train_labels,
                                      const Matrix& test, std::size_t k, double tau,
                                      std::size_t threads) {
  if (train.rows() == 0) raise(ErrorKind::parameter, "empty train set");
  if (test.rows() == 0) raise(ErrorKind::parameter, "empty test set");
  if (train_labels.size() != train.rows()) {
    raise(ErrorKind::parameter, "train label count does not match train rows");
  }
  if (train.cols() != test.cols()) raise(ErrorKind::parameter, "train and test widths differ");
  if (k < 1 || k > train.rows()) {
    raise(ErrorKind::parameter, "k = " + std::to_string(k) + " out of range [1, " +
                                    std::to_string(train.rows()) + "]");
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) raise(ErrorKind::parameter, "tau must be positive");

  const Matrix ref = prepare(train, Metric::cosine, "train");
  const Matrix qry = prepare(test, Metric::cosine, "test");

  std::vector<int> predictions(test.rows());
  parallel_for(test.rows(), threads, [&](std::size_t i) {
    // Order by descending similarity, then ascending index.
    std::vector<Candidate> candidates;
    candidates.reserve(ref.rows());
    for (std::size_t j = 0; j < ref.rows(); ++j) {
      candidates.emplace_back(-dot(qry.row(i), ref.row(j)), static_cast<std::uint32_t>(j));
    }
    select_smallest(candidates, k);
    std::map<int, double> votes;
    for (std::size_t r = 0; r < k; ++r) {
      const double similarity = -candidates[r].first;
      votes[train_labels[candidates[r].second]] += std::exp(similarity / tau);
    }
    auto best = votes.begin();
    for (auto it = votes.begin(); it != votes.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    predictions[i] = best->first;
  });
  return predictions;
}

double weighted_knn_retrieval(const Matrix& train, std::span<const int> train_labels,
                              const Matrix& test, std::span<const int> test_labels, std::size_t k,
                              double tau, std::size_t threads) {
  if (test_labels.size() != test.rows()) {
    raise(ErrorKind::parameter, "test label count does not match test rows");
  }
  const auto predictions = weighted_knn_predict(train, train_labels, test, k, tau, threads);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == test_labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

}  // namespace palign
