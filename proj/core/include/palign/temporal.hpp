#pragma once

#include <cstddef>
#include <istream>
#include <span>
#include <vector>

#include "palign/knn.hpp"
#include "palign/matrix.hpp"

namespace palign {

struct TemporalProbeResult {
  double positive_score = 0.0;
  double negative_score = 0.0;
  double drop = 0.0;  // positive_score - negative_score
  std::size_t k = 0;
  std::size_t n = 0;
};

/// Reorder-negative probe. The positive score is the mutual k-NN alignment
/// of (video, pos_text). For the negative score the text-side neighbors of
/// item i are the k rows of pos_text (row i excluded) closest to
/// neg_text[i]; the video-side graph is shared.
TemporalProbeResult negative_alignment(const Matrix& video, const Matrix& pos_text,
                                       const Matrix& neg_text, std::size_t k, Metric metric,
                                       std::size_t threads = 0);

struct RelatedGroup {
  std::size_t anchor = 0;
  std::vector<std::size_t> related;
  friend bool operator==(const RelatedGroup&, const RelatedGroup&) = default;
};

/// CSV with header `anchor,related`; `related` is a ';'-separated index list.
std::vector<RelatedGroup> read_related_groups_csv(std::istream& in);

struct RelatedRanking {
  /// Per group, `related` sorted by ascending distance to the anchor (ties by index).
  std::vector<std::vector<std::size_t>> orders;
  /// first_slot_counts[s] = number of groups whose related[s] ranked first.
  std::vector<std::size_t> first_slot_counts;
};

RelatedRanking related_ranking(const Matrix& text, std::span<const RelatedGroup> groups,
                               Metric metric);

}  // namespace palign
