#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "palign/temporal.hpp"
#include "support/expect_error.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/temporal_fixture.hpp"

namespace palign {
namespace {

using testing::random_matrix;

Matrix column(std::initializer_list<double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values));
}

TEST(NegativeAlignment, IdenticalNegativesGiveZeroDrop) {
  std::mt19937_64 rng(1);
  const Matrix video = random_matrix(rng, 40, 5);
  const Matrix text = random_matrix(rng, 40, 7);
  const auto r = negative_alignment(video, text, text, 5, Metric::cosine);
  EXPECT_EQ(r.negative_score, r.positive_score);
  EXPECT_EQ(r.drop, 0.0);
  EXPECT_EQ(r.k, 5u);
  EXPECT_EQ(r.n, 40u);
}

// Negative neighbor search: neg[i] against pos rows j != i.
//   neg[0]=10.5 -> {1: 9.5, 2: 0.5, 3: 0.5} -> 2 (tie, lower index)
//   neg[1]=0.2  -> {0: 0.2, 2: 9.8, 3: 10.8} -> 0
//   neg[2]=1    -> {0: 1, 1: 0, 3: 10}       -> 1
//   neg[3]=12   -> {0: 12, 1: 11, 2: 2}      -> 2
// Video graph [[1],[0],[3],[2]] shares rows 1 and 3.
TEST(NegativeAlignment, HandInstance) {
  const Matrix video = column({0, 1, 10, 11});
  const Matrix pos = column({0, 1, 10, 11});
  const Matrix neg = column({10.5, 0.2, 1, 12});
  const auto r = negative_alignment(video, pos, neg, 1, Metric::euclidean);
  EXPECT_EQ(r.positive_score, 1.0);
  EXPECT_EQ(r.negative_score, 0.5);
  EXPECT_EQ(r.drop, 0.5);

  const auto oracle = testing::oracle_neighbors(pos, neg, 1, Metric::euclidean, true);
  const auto video_oracle = testing::oracle_neighbors(video, 1, Metric::euclidean);
  EXPECT_EQ(testing::oracle_mknn_from_lists(video_oracle, oracle, 1), 0.5);
}

TEST(NegativeAlignment, ShuffledNegativesLowerTheScore) {
  std::mt19937_64 rng(2);
  // Well-separated clusters shared by video and text.
  const std::size_t clusters = 10, per = 6, n = clusters * per;
  Matrix video(n, 3), pos(n, 3);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t c = 0; c < clusters; ++c) {
    const double cx = 20 * normal(rng), cy = 20 * normal(rng), cz = 20 * normal(rng);
    for (std::size_t m = 0; m < per; ++m) {
      const std::size_t i = c * per + m;
      video(i, 0) = cx + normal(rng); video(i, 1) = cy + normal(rng); video(i, 2) = cz + normal(rng);
      pos(i, 0) = cx + normal(rng); pos(i, 1) = cy + normal(rng); pos(i, 2) = cz + normal(rng);
    }
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  const Matrix neg = pos.permute_rows(perm);
  const auto r = negative_alignment(video, pos, neg, 5, Metric::euclidean);
  EXPECT_LT(r.negative_score, r.positive_score);
  EXPECT_EQ(r.drop, r.positive_score - r.negative_score);
}

TEST(NegativeAlignment, OrderReversalDropsAlignment) {
  const auto f = testing::make_ordered_event_fixture(3);
  const auto r = negative_alignment(f.video, f.pos, f.neg, 5, Metric::cosine);
  EXPECT_GT(r.drop, 0.0);
  EXPECT_GE(r.negative_score, 0.0);
  EXPECT_LE(r.positive_score, 1.0);
}

TEST(NegativeAlignment, ShapeErrors) {
  std::mt19937_64 rng(4);
  const Matrix a = random_matrix(rng, 10, 3);
  const Matrix b = random_matrix(rng, 9, 3);
  const Matrix c = random_matrix(rng, 10, 4);
  EXPECT_PALIGN_ERROR(negative_alignment(a, a, b, 2, Metric::cosine), ErrorKind::parameter);
  EXPECT_PALIGN_ERROR(negative_alignment(a, a, c, 2, Metric::cosine), ErrorKind::parameter);
  EXPECT_PALIGN_ERROR(negative_alignment(a, a, a, 10, Metric::cosine), ErrorKind::parameter);
}

TEST(RelatedRanking, OrderedByDistance) {
  const Matrix text = column({0, 3, 1, 2});
  const std::vector<RelatedGroup> groups{{0, {1, 2, 3}}};
  const auto r = related_ranking(text, groups, Metric::euclidean);
  EXPECT_EQ(r.orders[0], (std::vector<std::size_t>{2, 3, 1}));
  EXPECT_EQ(r.first_slot_counts, (std::vector<std::size_t>{0, 1, 0}));
}

TEST(RelatedRanking, SlotZeroFirstWhenClosest) {
  const Matrix text = column({0, 1, 2, 3});
  const std::vector<RelatedGroup> groups{{0, {1, 2, 3}}};
  const auto r = related_ranking(text, groups, Metric::euclidean);
  EXPECT_EQ(r.orders[0], (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_EQ(r.first_slot_counts[0], 1u);
}

TEST(RelatedRanking, EquidistantTiesGoToLowerIndex) {
  const Matrix text = column({0, 1, -1});
  const std::vector<RelatedGroup> groups{{0, {2, 1}}};
  const auto r = related_ranking(text, groups, Metric::euclidean);
  EXPECT_EQ(r.orders[0], (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(r.first_slot_counts, (std::vector<std::size_t>{0, 1}));
}

// Caption embeddings are means of word vectors, so a word-permuted caption
// has exactly the anchor's bag of words and must rank first.
TEST(RelatedRanking, BagOfWordsRanksPermutationFirst) {
  std::mt19937_64 rng(5);
  const std::vector<std::string> shapes{"red circle", "blue square", "green triangle", "yellow star"};
  std::map<std::string, std::vector<double>> vocab;
  std::normal_distribution<double> normal(0.0, 1.0);
  auto embed = [&](const std::string& caption) {
    std::istringstream words(caption);
    std::vector<double> sum(16, 0.0);
    std::string w;
    int count = 0;
    while (words >> w) {
      auto& vec = vocab[w];
      if (vec.empty()) {
        vec.resize(16);
        for (double& v : vec) v = normal(rng);
      }
      for (std::size_t d = 0; d < 16; ++d) sum[d] += vec[d];
      ++count;
    }
    for (double& v : sum) v /= count;
    return sum;
  };

  std::vector<std::vector<double>> rows;
  std::vector<RelatedGroup> groups;
  std::size_t group_index = 0;
  for (std::size_t a = 0; a < shapes.size(); ++a) {
    for (std::size_t b = 0; b < shapes.size(); ++b) {
      if (a == b) continue;
      const std::string c1 = "the " + shapes[a] + " appears", c2 = "the " + shapes[b] + " appears";
      const std::size_t base = rows.size();
      rows.push_back(embed(c1 + " before " + c2));  // anchor
      std::vector<std::string> related{c2 + " after " + c1, c1 + " followed by " + c2,
                                       "first " + c1 + " then " + c2};
      // word-permuted caption: same words as the anchor, different order
      const std::string permuted = "before " + c2 + " " + c1;
      const std::size_t slot = group_index % 4;
      related.insert(related.begin() + static_cast<std::ptrdiff_t>(slot), permuted);
      RelatedGroup g{base, {}};
      for (const auto& caption : related) {
        g.related.push_back(rows.size());
        rows.push_back(embed(caption));
      }
      groups.push_back(g);
      ++group_index;
    }
  }
  Matrix text(rows.size(), 16);
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), text.row(i).begin());

  const auto r = related_ranking(text, groups, Metric::cosine);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    EXPECT_EQ(r.orders[g].front(), groups[g].related[g % 4]) << "group " << g;
    auto sorted_order = r.orders[g];
    auto sorted_related = groups[g].related;
    std::ranges::sort(sorted_order);
    std::ranges::sort(sorted_related);
    EXPECT_EQ(sorted_order, sorted_related);
  }
  EXPECT_EQ(r.first_slot_counts, (std::vector<std::size_t>{3, 3, 3, 3}));
}

TEST(RelatedRanking, InvalidGroups) {
  const Matrix text = column({0, 1, 2});
  const std::vector<RelatedGroup> bad_anchor{{3, {1}}};
  const std::vector<RelatedGroup> bad_related{{0, {5}}};
  const std::vector<RelatedGroup> self{{0, {0, 1}}};
  EXPECT_PALIGN_ERROR(related_ranking(text, bad_anchor, Metric::euclidean), ErrorKind::parameter);
  EXPECT_PALIGN_ERROR(related_ranking(text, bad_related, Metric::euclidean), ErrorKind::parameter);
  EXPECT_PALIGN_ERROR(related_ranking(text, self, Metric::euclidean), ErrorKind::parameter);
}

TEST(RelatedGroupsCsv, Parses) {
  std::istringstream in("anchor,related\n0,1;2;3\n4, 5 ; 6\n");
  const auto groups = read_related_groups_csv(in);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0], (RelatedGroup{0, {1, 2, 3}}));
  EXPECT_EQ(groups[1], (RelatedGroup{4, {5, 6}}));
  std::istringstream bad("anchor;related\n0,1\n");
  EXPECT_PALIGN_ERROR(read_related_groups_csv(bad), ErrorKind::format);
}

}  // namespace
}  // namespace palign
