#pragma once

#include <random>

#include "support/fixtures.hpp"

namespace palign::testing {

/// Each item is an ordered pair of events (a, b) drawn from `events`
/// distinct event vectors. Video and positive text encode [e_a, e_b];
/// the negative caption describes the same events reversed, [e_b, e_a].
struct OrderedEventFixture {
  Matrix video, pos, neg;
};

inline OrderedEventFixture make_ordered_event_fixture(std::uint64_t seed, std::size_t n = 96,
                                                      std::size_t events = 12,
                                                      std::size_t dim = 6) {
  std::mt19937_64 rng(seed);
  const Matrix event_vecs = random_matrix(rng, events, dim);
  std::uniform_int_distribution<std::size_t> pick(0, events - 1);
  std::normal_distribution<double> noise(0.0, 0.05);
  OrderedEventFixture f{Matrix(n, 2 * dim), Matrix(n, 2 * dim), Matrix(n, 2 * dim)};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    while (b == a) b = pick(rng);
    for (std::size_t d = 0; d < dim; ++d) {
      f.video(i, d) = event_vecs(a, d) + noise(rng);
      f.video(i, dim + d) = event_vecs(b, d) + noise(rng);
      f.pos(i, d) = event_vecs(a, d) + noise(rng);
      f.pos(i, dim + d) = event_vecs(b, d) + noise(rng);
      f.neg(i, d) = event_vecs(b, d) + noise(rng);
      f.neg(i, dim + d) = event_vecs(a, d) + noise(rng);
    }
  }
  return f;
}

}  // namespace palign::testing
