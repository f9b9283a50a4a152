#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "palign/scaling.hpp"

namespace palign::testing {

// Saturation laws of two video encoders on VaTeX captions (Gemma-2 text side).
inline constexpr ScalingLaw kVideoMaeV2HugeVatex{0.410, 0.146, 0.748, 0.128, 1.302};
inline constexpr ScalingLaw kDinoV2GiantVatex{0.365, 0.046, 1.762, 0.132, 1.400};

inline const std::vector<std::int64_t> kVideoFrames{1, 16, 32, 64, 80};
inline const std::vector<std::int64_t> kCaptionCounts{1, 2, 5, 10};
// Denser in the few-frame regime, where fast-decaying frame terms live.
inline const std::vector<std::int64_t> kDenseFrames{1, 2, 4, 8, 16, 32, 64, 80};
inline const std::vector<std::int64_t> kDenseCaptions{1, 2, 3, 5, 10};

inline double law_value(const ScalingLaw& law, double n_f, double n_c) {
  return law.s_inf - (law.c_f * std::pow(n_f, -law.alpha) + law.c_c * std::pow(n_c, -law.beta));
}

inline ScoreGrid make_grid(const ScalingLaw& law, const std::vector<std::int64_t>& frames,
                           const std::vector<std::int64_t>& captions, double noise_sigma = 0.0,
                           std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sigma > 0 ? noise_sigma : 1.0);
  ScoreGrid grid;
  for (auto nf : frames) {
    for (auto nc : captions) {
      double s = law_value(law, static_cast<double>(nf), static_cast<double>(nc));
      if (noise_sigma > 0) s += noise(rng);
      grid.points.push_back({nf, nc, s});
    }
  }
  return grid;
}

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

inline double max_rel_err(const ScalingLaw& got, const ScalingLaw& want) {
  return std::max({rel_err(got.s_inf, want.s_inf), rel_err(got.c_f, want.c_f),
                   rel_err(got.alpha, want.alpha), rel_err(got.c_c, want.c_c),
                   rel_err(got.beta, want.beta)});
}

}  // namespace palign::testing
