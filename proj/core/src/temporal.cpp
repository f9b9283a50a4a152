#include "palign/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "palign/csv.hpp"
#include "palign/error.hpp"

namespace palign {
namespace {

double norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

double pair_distance(std::span<const double> a, std::span<const double> b, Metric metric) {
  double sum = 0.0;
  if (metric == Metric::euclidean) {
    for (std::size_t d = 0; d < a.size(); ++d) sum += (a[d] - b[d]) * (a[d] - b[d]);
    return std::sqrt(sum);
  }
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) raise(ErrorKind::data, "zero vector under cosine distance");
  for (std::size_t d = 0; d < a.size(); ++d) sum += (a[d] / na) * (b[d] / nb);
  return 1.0 - sum;
}

}  // namespace

TemporalProbeResult negative_alignment(const Matrix& video, const Matrix& pos_text,
                                       const Matrix& neg_text, std::size_t k, Metric metric,
                                       std::size_t threads) {
  const std::size_t n = video.rows();
  if (pos_text.rows() != n || neg_text.rows() != n) {
    raise(ErrorKind::parameter, "video, positive and negative matrices must share N (" +
                                    std::to_string(n) + ", " + std::to_string(pos_text.rows()) +
                                    ", " + std::to_string(neg_text.rows()) + ")");
  }
  if (pos_text.cols() != neg_text.cols()) {
    raise(ErrorKind::parameter, "positive and negative text embeddings differ in width");
  }
  if (k < 1 || k >= n) {
    raise(ErrorKind::parameter, "k = " + std::to_string(k) + " out of range [1, " +
                                    std::to_string(n == 0 ? 0 : n - 1) + "]");
  }
  const auto video_graph = build_neighbor_graph(video, k, metric, threads);
  const auto positive_graph = build_neighbor_graph(pos_text, k, metric, threads);
  const auto negative_graph = query_neighbor_graph(pos_text, neg_text, k, metric, true, threads);

  TemporalProbeResult result;
  result.k = k;
  result.n = n;
  result.positive_score = mutual_knn_alignment(video_graph, positive_graph).score;
  result.negative_score = mutual_knn_alignment(video_graph, negative_graph).score;
  result.drop = result.positive_score - result.negative_score;
  return result;
}

std::vector<RelatedGroup> read_related_groups_csv(std::istream& in) {
  const auto lines = csv::read_lines(in);
  if (lines.empty() || csv::split(lines.front()) != std::vector<std::string>{"anchor", "related"}) {
    raise(ErrorKind::format, "group CSV must start with header 'anchor,related'");
  }
  std::vector<RelatedGroup> groups;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = csv::split(lines[i]);
    if (fields.size() != 2) {
      raise(ErrorKind::format, "group line " + std::to_string(i + 1) + " needs 2 fields");
    }
    RelatedGroup group;
    const auto anchor = csv::parse_int(fields[0], "anchor");
    if (anchor < 0) raise(ErrorKind::format, "negative anchor index on line " + std::to_string(i + 1));
    group.anchor = static_cast<std::size_t>(anchor);
    for (const auto& item : csv::split(fields[1], ';')) {
      const auto idx = csv::parse_int(item, "related index");
      if (idx < 0) raise(ErrorKind::format, "negative related index on line " + std::to_string(i + 1));
      group.related.push_back(static_cast<std::size_t>(idx));
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

RelatedRanking related_ranking(const Matrix& text, std::span<const RelatedGroup> groups,
                               Metric metric) {
  const std::size_t n = text.rows();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& group = groups[g];
    if (group.anchor >= n) {
      raise(ErrorKind::parameter, "group " + std::to_string(g) + ": anchor " +
                                      std::to_string(group.anchor) + " out of range");
    }
    if (group.related.empty()) {
      raise(ErrorKind::parameter, "group " + std::to_string(g) + " has no related items");
    }
    for (std::size_t idx : group.related) {
      if (idx >= n) {
        raise(ErrorKind::parameter, "group " + std::to_string(g) + ": related index " +
                                        std::to_string(idx) + " out of range");
      }
      if (idx == group.anchor) {
        raise(ErrorKind::parameter, "group " + std::to_string(g) + ": anchor listed as related");
      }
    }
    for (double v : text.row(group.anchor)) {
      if (!std::isfinite(v)) raise(ErrorKind::data, "non-finite text row");
    }
  }

  RelatedRanking ranking;
  ranking.orders.reserve(groups.size());
  for (const auto& group : groups) {
    std::vector<std::pair<double, std::size_t>> scored;  // (distance, slot)
    for (std::size_t slot = 0; slot < group.related.size(); ++slot) {
      const auto other = text.row(group.related[slot]);
      for (double v : other) {
        if (!std::isfinite(v)) raise(ErrorKind::data, "non-finite text row");
      }
      scored.emplace_back(pair_distance(text.row(group.anchor), other, metric), slot);
    }
    std::ranges::sort(scored, [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return group.related[a.second] < group.related[b.second];
    });
    std::vector<std::size_t> order;
    for (const auto& [dist, slot] : scored) order.push_back(group.related[slot]);
    if (ranking.first_slot_counts.size() < group.related.size()) {
      ranking.first_slot_counts.resize(group.related.size(), 0);
    }
    ++ranking.first_slot_counts[scored.front().second];
    ranking.orders.push_back(std::move(order));
  }
  return ranking;
}

}  // namespace palign
