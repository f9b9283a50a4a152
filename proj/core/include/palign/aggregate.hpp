#pragma once

#include <cstddef>
#include <vector>

#include "palign/archive.hpp"
#include "palign/matrix.hpp"

namespace palign {

/// How many frames a vision representation is built from. An encoder that
/// consumes `native_clip_len` frames at once sees `segments_used` sub-clips,
/// whose features are averaged.
struct AggregationSpec {
  std::size_t native_clip_len = 1;
  std::size_t n_f = 1;
  std::size_t segments_used = 1;

  friend bool operator==(const AggregationSpec&, const AggregationSpec&) = default;
};

/// Spec for n_f frames at native clip length n_o. n_f < n_o (including the
/// single-frame case) maps to one segment; otherwise n_f must be a multiple
/// of n_o.
AggregationSpec aggregation_for_frames(std::size_t native_clip_len, std::size_t n_f);

/// Spec that uses the first `segments` sub-clips.
AggregationSpec aggregation_for_segments(std::size_t segments, std::size_t native_clip_len = 1);

/// Throws a parameter error unless 1 <= segments_used <= segment_count.
void validate_aggregation(const AggregationSpec& spec, std::size_t segment_count);

/// Frame indices picked by uniform linear interpolation over T frames:
/// [0] for n_f = 1, otherwise round_half_up(j*(T-1)/(n_f-1)) for j < n_f.
/// Indices repeat when n_f > T.
std::vector<std::size_t> frame_indices(std::size_t total_frames, std::size_t n_f);

/// Row i is the mean of m[i, 0..s) over the first s segments.
Matrix mean_segments(const SegmentedMatrix& m, std::size_t s);

}  // namespace palign
