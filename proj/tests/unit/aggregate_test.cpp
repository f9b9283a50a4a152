#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "palign/aggregate.hpp"
#include "support/expect_error.hpp"
#include "support/fixtures.hpp"

namespace palign {
namespace {

TEST(FrameIndices, SingleFrameIsFirst) { EXPECT_EQ(frame_indices(30, 1), std::vector<std::size_t>{0}); }

TEST(FrameIndices, TwoFramesAreEndpoints) {
  EXPECT_EQ(frame_indices(30, 2), (std::vector<std::size_t>{0, 29}));
}

TEST(FrameIndices, UniformInterpolation) {
  // round(j * 9 / 3) for j = 0..3
  EXPECT_EQ(frame_indices(10, 4), (std::vector<std::size_t>{0, 3, 6, 9}));
}

TEST(FrameIndices, RoundsHalfUp) {
  // j * 3 / 2 = 0, 1.5, 3 -> 0, 2, 3
  EXPECT_EQ(frame_indices(4, 3), (std::vector<std::size_t>{0, 2, 3}));
}

TEST(FrameIndices, RepeatsWhenOversampling) {
  const auto idx = frame_indices(3, 7);
  EXPECT_EQ(idx, (std::vector<std::size_t>{0, 0, 1, 1, 1, 2, 2}));
}

TEST(FrameIndices, MonotoneAndCoversEndpoints) {
  for (std::size_t total = 1; total <= 40; ++total) {
    for (std::size_t n_f = 1; n_f <= 90; ++n_f) {
      const auto idx = frame_indices(total, n_f);
      ASSERT_EQ(idx.size(), n_f);
      EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
      EXPECT_EQ(idx.front(), 0u);
      if (n_f >= 2) {
        EXPECT_EQ(idx.back(), total - 1);
      }
      for (std::size_t j = 0; j < n_f && n_f >= 2; ++j) {
        const double exact = static_cast<double>(j * (total - 1)) / static_cast<double>(n_f - 1);
        EXPECT_EQ(static_cast<double>(idx[j]), std::floor(exact + 0.5));
      }
    }
  }
}

TEST(FrameIndices, Errors) {
  EXPECT_PALIGN_ERROR(frame_indices(0, 3), ErrorKind::parameter);
  EXPECT_PALIGN_ERROR(frame_indices(5, 0), ErrorKind::parameter);
}

TEST(AggregationSpec, SegmentsFromFrames) {
  EXPECT_EQ(aggregation_for_frames(16, 80).segments_used, 5u);
  EXPECT_EQ(aggregation_for_frames(16, 16).segments_used, 1u);
  EXPECT_EQ(aggregation_for_frames(16, 1).segments_used, 1u);
  EXPECT_EQ(aggregation_for_frames(1, 8).segments_used, 8u);
  EXPECT_PALIGN_ERROR(aggregation_for_frames(16, 24), ErrorKind::parameter);
  EXPECT_PALIGN_ERROR(validate_aggregation(aggregation_for_frames(16, 80), 4), ErrorKind::parameter);
  EXPECT_NO_THROW(validate_aggregation(aggregation_for_frames(16, 64), 4));
}

TEST(MeanSegments, SingleSegmentIsCopy) {
  std::mt19937_64 rng(1);
  const auto values = testing::random_tensor(rng, 4 * 3 * 5);
  const SegmentedMatrix m(4, 3, 5, values);
  const Matrix out = mean_segments(m, 1);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t d = 0; d < 5; ++d) EXPECT_EQ(out(i, d), static_cast<double>(m.at(i, 0)[d]));
  }
}

TEST(MeanSegments, ArithmeticMean) {
  const SegmentedMatrix m(1, 2, 2, {1, 3, 3, 5});
  const Matrix out = mean_segments(m, 2);
  EXPECT_EQ(out(0, 0), 2.0);
  EXPECT_EQ(out(0, 1), 4.0);
}

TEST(MeanSegments, MatchesReassociatedSum) {
  std::mt19937_64 rng(2);
  const std::size_t n = 6, s = 5, d = 7;
  const SegmentedMatrix m(n, s, d, testing::random_tensor(rng, n * s * d));
  const Matrix out = mean_segments(m, s);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      // Pairwise summation in reverse order as an independent route.
      std::vector<double> terms;
      for (std::size_t seg = s; seg-- > 0;) terms.push_back(m.at(i, seg)[c]);
      while (terms.size() > 1) {
        std::vector<double> next;
        for (std::size_t t = 0; t + 1 < terms.size(); t += 2) next.push_back(terms[t] + terms[t + 1]);
        if (terms.size() % 2) next.push_back(terms.back());
        terms = next;
      }
      const double expected = terms[0] / static_cast<double>(s);
      EXPECT_NEAR(out(i, c), expected, 1e-6 * std::max(1.0, std::abs(expected)));
    }
  }
}

TEST(MeanSegments, CommutesWithItemPermutationAndSegmentOrder) {
  std::mt19937_64 rng(3);
  const std::size_t n = 5, s = 4, d = 3;
  const auto values = testing::random_tensor(rng, n * s * d);
  const SegmentedMatrix m(n, s, d, values);

  // Reverse the first 3 segments of every item.
  std::vector<float> swapped = values;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t seg = 0; seg < 3; ++seg) {
      std::copy_n(values.begin() + static_cast<std::ptrdiff_t>((i * s + seg) * d), d,
                  swapped.begin() + static_cast<std::ptrdiff_t>((i * s + (2 - seg)) * d));
    }
  }
  const Matrix a = mean_segments(m, 3);
  const Matrix b = mean_segments(SegmentedMatrix(n, s, d, swapped), 3);
  for (std::size_t e = 0; e < a.values().size(); ++e) {
    EXPECT_NEAR(a.values()[e], b.values()[e], 1e-6 * std::max(1.0, std::abs(a.values()[e])));
  }

  // Item permutation.
  const std::vector<std::size_t> perm{3, 0, 4, 1, 2};
  std::vector<float> permuted(values.size());
  for (std::size_t r = 0; r < n; ++r) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(perm[r] * s * d), s * d,
                permuted.begin() + static_cast<std::ptrdiff_t>(r * s * d));
  }
  EXPECT_EQ(mean_segments(SegmentedMatrix(n, s, d, permuted), 3), a.permute_rows(perm));
}

TEST(MeanSegments, OutOfRange) {
  const SegmentedMatrix m(1, 2, 2, {1, 3, 3, 5});
  EXPECT_PALIGN_ERROR(mean_segments(m, 0), ErrorKind::parameter);
  EXPECT_PALIGN_ERROR(mean_segments(m, 3), ErrorKind::parameter);
}

}  // namespace
}  // namespace palign
