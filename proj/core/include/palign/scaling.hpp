#pragma once

// Test-time scaling law: score(n_f, n_c) = S_inf - (C_f * n_f^-alpha + C_c * n_c^-beta),
// fitted to observed alignment scores over frame and caption counts.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace palign {

struct GridPoint {
  std::int64_t n_f = 1;
  std::int64_t n_c = 1;
  double score = 0.0;
  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

struct ScoreGrid {
  std::vector<GridPoint> points;
};

/// Throws a parameter error unless the grid has >= 6 points, >= 2 distinct
/// n_f and n_c values, no duplicate (n_f, n_c) keys, counts >= 1 and scores
/// in [0, 1].
void validate_grid(const ScoreGrid& grid);

/// CSV with header `n_f,n_c,score`.
ScoreGrid read_score_grid_csv(std::istream& in);
void write_score_grid_csv(const ScoreGrid& grid, std::ostream& out);

struct ScalingLaw {
  double s_inf = 0.0;
  double c_f = 0.0;
  double alpha = 1.0;
  double c_c = 0.0;
  double beta = 1.0;
  friend bool operator==(const ScalingLaw&, const ScalingLaw&) = default;
};

struct ScalingLawBounds {
  ScalingLaw lower{0.0, 0.0, 1e-6, 0.0, 1e-6};
  ScalingLaw upper{1.0, 2.0, 5.0, 2.0, 5.0};
};

struct FitOptions {
  std::optional<ScalingLawBounds> bounds;  // defaults to ScalingLawBounds{}
  std::size_t restarts = 16;               // random starts on top of the data-driven one
  std::uint64_t seed = 0;
  std::size_t max_iterations = 500;
  double relative_tolerance = 1e-10;
  std::size_t threads = 0;
};

struct ScalingLawFit {
  ScalingLaw law;
  double r2 = 0.0;
  double residual_norm = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  /// All scores equal (zero total variance); r2 is reported as 1.
  bool degenerate = false;
  /// Which start produced the selected optimum (0 = data-driven start).
  std::size_t restart = 0;
};

/// Bounded damped least squares with deterministic multi-start; returns the
/// lowest-residual optimum (ties to the lowest restart index). R^2 is
/// computed on the fitting grid.
ScalingLawFit fit_scaling_law(const ScoreGrid& grid, const FitOptions& options = {});

struct ScorePrediction {
  double score = 0.0;
  /// Set when the prediction falls outside [0, 1]; the score is not clamped.
  bool out_of_range = false;
};

/// Evaluates the law at (n_f, n_c). Counts must be >= 1; +infinity gives
/// the saturation limit S_inf.
ScorePrediction predict_score(const ScalingLaw& law, double n_f, double n_c);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Pearson correlation; 0 when all y are equal (see zero_y_variance).
  double r = 0.0;
  bool zero_y_variance = false;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Ordinary least squares line through >= 2 points with non-constant x.
LineFit fit_line(std::span<const Point2> points);

}  // namespace palign
