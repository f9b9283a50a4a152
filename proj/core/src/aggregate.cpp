#include "palign/aggregate.hpp"

#include <string>

#include "palign/error.hpp"

namespace palign {

AggregationSpec aggregation_for_frames(std::size_t native_clip_len, std::size_t n_f) {
  if (native_clip_len < 1 || n_f < 1) {
    raise(ErrorKind::parameter, "native clip length and n_f must be >= 1");
  }
  if (n_f <= native_clip_len) return {native_clip_len, n_f, 1};
  if (n_f % native_clip_len != 0) {
    raise(ErrorKind::parameter, "n_f = " + std::to_string(n_f) +
                                    " is not a multiple of the native clip length " +
                                    std::to_string(native_clip_len));
  }
  return {native_clip_len, n_f, n_f / native_clip_len};
}

AggregationSpec aggregation_for_segments(std::size_t segments, std::size_t native_clip_len) {
  if (segments < 1 || native_clip_len < 1) {
    raise(ErrorKind::parameter, "segments and native clip length must be >= 1");
  }
  return {native_clip_len, segments * native_clip_len, segments};
}

void validate_aggregation(const AggregationSpec& spec, std::size_t segment_count) {
  if (spec.segments_used < 1 || spec.segments_used > segment_count) {
    raise(ErrorKind::parameter, "segments_used = " + std::to_string(spec.segments_used) +
                                    " out of range [1, " + std::to_string(segment_count) + "]");
  }
}

std::vector<std::size_t> frame_indices(std::size_t total_frames, std::size_t n_f) {
  if (total_frames < 1) raise(ErrorKind::parameter, "total frame count must be >= 1");
  if (n_f < 1) raise(ErrorKind::parameter, "n_f must be >= 1");
  if (n_f == 1) return {0};
  // round_half_up(j*(T-1)/(n_f-1)) in exact integer arithmetic.
  const std::size_t span = total_frames - 1;
  const std::size_t steps = n_f - 1;
  std::vector<std::size_t> indices(n_f);
  for (std::size_t j = 0; j < n_f; ++j) {
    indices[j] = (2 * j * span + steps) / (2 * steps);
  }
  return indices;
}

Matrix mean_segments(const SegmentedMatrix& m, std::size_t s) {
  if (s < 1 || s > m.segments()) {
    raise(ErrorKind::parameter, "segment count " + std::to_string(s) + " out of range [1, " +
                                    std::to_string(m.segments()) + "]");
  }
  Matrix out(m.items(), m.dim());
  for (std::size_t i = 0; i < m.items(); ++i) {
    auto dst = out.row(i);
    for (std::size_t seg = 0; seg < s; ++seg) {
      const auto src = m.at(i, seg);
      for (std::size_t d = 0; d < src.size(); ++d) dst[d] += static_cast<double>(src[d]);
    }
    if (s > 1) {
      for (double& v : dst) v /= static_cast<double>(s);
    }
  }
  return out;
}

}  // namespace palign
