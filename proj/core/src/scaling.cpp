#include "palign/scaling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "palign/csv.hpp"
#include "palign/error.hpp"
#include "palign/parallel.hpp"

namespace palign {
namespace {

constexpr std::size_t kParams = 5;
using Params = std::array<double, kParams>;  // s_inf, c_f, alpha, c_c, beta

Params to_array(const ScalingLaw& law) { return {law.s_inf, law.c_f, law.alpha, law.c_c, law.beta}; }
ScalingLaw from_array(const Params& p) { return {p[0], p[1], p[2], p[3], p[4]}; }

double model(const Params& p, double n_f, double n_c) {
  return p[0] - (p[1] * std::pow(n_f, -p[2]) + p[3] * std::pow(n_c, -p[4]));
}

struct Problem {
  std::vector<double> n_f, n_c, score;
  Params lower, upper;

  double cost(const Params& p) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < score.size(); ++i) {
      const double r = score[i] - model(p, n_f[i], n_c[i]);
      sum += r * r;
    }
    return sum;
  }

  Params clamp(Params p) const {
    for (std::size_t j = 0; j < kParams; ++j) p[j] = std::clamp(p[j], lower[j], upper[j]);
    return p;
  }
};

struct LocalResult {
  Params params{};
  double cost = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::size_t iterations = 0;
};

// Levenberg-Marquardt with Marquardt diagonal scaling. Parameters sitting on a
// bound whose gradient points outward are held fixed for the iteration; the
// remaining step is projected back into the box.
LocalResult levenberg_marquardt(const Problem& prob, Params p, std::size_t max_iterations,
                                double tolerance) {
  const std::size_t m = prob.score.size();
  p = prob.clamp(p);
  double cost = prob.cost(p);
  double lambda = 1e-3;
  LocalResult result;

  Eigen::MatrixXd jac(m, kParams);
  Eigen::VectorXd resid(m);
  std::size_t iter = 0;
  bool converged = false;
  for (; iter < max_iterations && !converged; ++iter) {
    if (cost <= 1e-30) {
      converged = true;
      break;
    }
    for (std::size_t i = 0; i < m; ++i) {
      const double tf = std::pow(prob.n_f[i], -p[2]);
      const double tc = std::pow(prob.n_c[i], -p[4]);
      resid(i) = prob.score[i] - (p[0] - (p[1] * tf + p[3] * tc));
      jac(i, 0) = 1.0;
      jac(i, 1) = -tf;
      jac(i, 2) = p[1] * tf * std::log(prob.n_f[i]);
      jac(i, 3) = -tc;
      jac(i, 4) = p[3] * tc * std::log(prob.n_c[i]);
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * resid;  // descent direction for the step

    std::vector<Eigen::Index> free;
    for (std::size_t j = 0; j < kParams; ++j) {
      const bool at_lower = p[j] <= prob.lower[j] && grad(j) < 0.0;
      const bool at_upper = p[j] >= prob.upper[j] && grad(j) > 0.0;
      if (!at_lower && !at_upper) free.push_back(static_cast<Eigen::Index>(j));
    }
    if (free.empty()) {
      converged = true;
      break;
    }
    const auto nf = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd a(nf, nf);
    Eigen::VectorXd b(nf);
    for (Eigen::Index r = 0; r < nf; ++r) {
      b(r) = grad(free[r]);
      for (Eigen::Index c = 0; c < nf; ++c) a(r, c) = jtj(free[r], free[c]);
    }
    if (b.norm() <= 1e-300) {
      converged = true;
      break;
    }

    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd damped = a;
      for (Eigen::Index r = 0; r < nf; ++r) damped(r, r) += lambda * (a(r, r) + 1e-12);
      const Eigen::VectorXd step = damped.ldlt().solve(b);
      Params trial = p;
      for (Eigen::Index r = 0; r < nf; ++r) trial[static_cast<std::size_t>(free[r])] += step(r);
      trial = prob.clamp(trial);
      const double trial_cost = prob.cost(trial);
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        const double change = (cost - trial_cost) / std::max(cost, 1e-300);
        p = trial;
        cost = trial_cost;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (change < tolerance) converged = true;
      } else {
        lambda *= 4.0;
        if (lambda > 1e16) {
          // No descent direction left at working precision.
          converged = true;
          break;
        }
      }
    }
  }
  result.params = p;
  result.cost = cost;
  result.converged = converged;
  result.iterations = iter;
  return result;
}

// Uniform in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Params data_driven_start(const Problem& prob) {
  std::size_t smallest = 0;
  for (std::size_t i = 1; i < prob.score.size(); ++i) {
    if (std::pair(prob.n_f[i], prob.n_c[i]) < std::pair(prob.n_f[smallest], prob.n_c[smallest])) {
      smallest = i;
    }
  }
  const double s_inf = std::min(1.0, *std::ranges::max_element(prob.score) + 0.02);
  const double deficit = std::max(0.0, s_inf - prob.score[smallest]);
  // With alpha = beta = 1 the start reproduces the score at the smallest point.
  Params p{s_inf, 0.5 * deficit * prob.n_f[smallest], 1.0, 0.5 * deficit * prob.n_c[smallest], 1.0};
  return prob.clamp(p);
}

Params perturbed_start(const Problem& prob, const Params& base, std::uint64_t seed,
                       std::size_t restart) {
  std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ull * (restart + 1)));
  Params p = base;
  p[0] = base[0] + 0.2 * (unit_uniform(rng) - 0.5);
  for (std::size_t j : {std::size_t{1}, std::size_t{3}}) {
    const double c = std::max(base[j], 1e-3);
    p[j] = c * std::exp(3.0 * (unit_uniform(rng) - 0.5));
  }
  for (std::size_t j : {std::size_t{2}, std::size_t{4}}) {
    // log-uniform over [0.1, 5]
    p[j] = 0.1 * std::exp(unit_uniform(rng) * std::log(50.0));
  }
  return prob.clamp(p);
}

void validate_bounds(const ScalingLawBounds& bounds) {
  const Params lo = to_array(bounds.lower);
  const Params hi = to_array(bounds.upper);
  for (std::size_t j = 0; j < kParams; ++j) {
    if (!(lo[j] <= hi[j]) || !std::isfinite(lo[j]) || !std::isfinite(hi[j])) {
      raise(ErrorKind::parameter, "invalid scaling-law bounds");
    }
  }
  if (lo[2] <= 0.0 || lo[4] <= 0.0) raise(ErrorKind::parameter, "exponent bounds must be positive");
  if (lo[1] < 0.0 || lo[3] < 0.0) raise(ErrorKind::parameter, "coefficient bounds must be >= 0");
}

}  // namespace

void validate_grid(const ScoreGrid& grid) {
  if (grid.points.size() < 6) {
    raise(ErrorKind::parameter, "score grid needs at least 6 points, got " +
                                    std::to_string(grid.points.size()));
  }
  std::set<std::int64_t> frames, captions;
  std::set<std::pair<std::int64_t, std::int64_t>> keys;
  for (const auto& pt : grid.points) {
    if (pt.n_f < 1 || pt.n_c < 1) raise(ErrorKind::parameter, "n_f and n_c must be >= 1");
    if (!(pt.score >= 0.0 && pt.score <= 1.0)) {
      raise(ErrorKind::parameter, "score " + csv::format_double(pt.score) + " outside [0, 1]");
    }
    if (!keys.emplace(pt.n_f, pt.n_c).second) {
      raise(ErrorKind::parameter, "duplicate grid point (n_f=" + std::to_string(pt.n_f) +
                                      ", n_c=" + std::to_string(pt.n_c) + ")");
    }
    frames.insert(pt.n_f);
    captions.insert(pt.n_c);
  }
  if (frames.size() < 2 || captions.size() < 2) {
    raise(ErrorKind::parameter, "score grid needs at least 2 distinct n_f and 2 distinct n_c values");
  }
}

ScoreGrid read_score_grid_csv(std::istream& in) {
  const auto lines = csv::read_lines(in);
  if (lines.empty() || csv::split(lines.front()) != std::vector<std::string>{"n_f", "n_c", "score"}) {
    raise(ErrorKind::format, "score grid CSV must start with header 'n_f,n_c,score'");
  }
  ScoreGrid grid;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = csv::split(lines[i]);
    if (fields.size() != 3) {
      raise(ErrorKind::format, "score grid line " + std::to_string(i + 1) + " needs 3 fields");
    }
    grid.points.push_back({csv::parse_int(fields[0], "n_f"), csv::parse_int(fields[1], "n_c"),
                           csv::parse_double(fields[2], "score")});
  }
  return grid;
}

void write_score_grid_csv(const ScoreGrid& grid, std::ostream& out) {
  out << "n_f,n_c,score\n";
  for (const auto& pt : grid.points) {
    out << pt.n_f << ',' << pt.n_c << ',' << csv::format_double(pt.score) << '\n';
  }
}

ScalingLawFit fit_scaling_law(const ScoreGrid& grid, const FitOptions& options) {
  validate_grid(grid);
  const ScalingLawBounds bounds = options.bounds.value_or(ScalingLawBounds{});
  validate_bounds(bounds);

  Problem prob;
  prob.lower = to_array(bounds.lower);
  prob.upper = to_array(bounds.upper);
  for (const auto& pt : grid.points) {
    prob.n_f.push_back(static_cast<double>(pt.n_f));
    prob.n_c.push_back(static_cast<double>(pt.n_c));
    prob.score.push_back(pt.score);
  }

  ScalingLawFit fit;
  const bool constant = std::all_of(prob.score.begin(), prob.score.end(),
                                    [&](double s) { return s == prob.score.front(); });
  if (constant) {
    // Constant scores: the saturated law with zero penalties fits exactly.
    const Params p{prob.score.front(), 0.0, 1.0, 0.0, 1.0};
    if (prob.clamp(p) != p) {
      raise(ErrorKind::fitting, "constant score grid lies outside the parameter bounds");
    }
    fit.law = from_array(p);
    fit.r2 = 1.0;
    fit.residual_norm = 0.0;
    fit.converged = true;
    fit.degenerate = true;
    return fit;
  }

  const Params base = data_driven_start(prob);
  std::vector<LocalResult> results(options.restarts + 1);
  parallel_for(results.size(), options.threads, [&](std::size_t r) {
    const Params start = r == 0 ? base : perturbed_start(prob, base, options.seed, r);
    results[r] = levenberg_marquardt(prob, start, options.max_iterations, options.relative_tolerance);
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < results.size(); ++r) {
    if (results[r].cost < results[best].cost) best = r;
  }
  const LocalResult& chosen = results[best];
  if (!std::isfinite(chosen.cost)) raise(ErrorKind::fitting, "scaling-law fit diverged");

  fit.law = from_array(chosen.params);
  fit.residual_norm = std::sqrt(chosen.cost);
  double mean = 0.0;
  for (double s : prob.score) mean += s;
  mean /= static_cast<double>(prob.score.size());
  double ss_tot = 0.0;
  for (double s : prob.score) ss_tot += (s - mean) * (s - mean);
  fit.r2 = 1.0 - chosen.cost / ss_tot;
  fit.converged = chosen.converged;
  fit.iterations = chosen.iterations;
  fit.restart = best;
  return fit;
}

ScorePrediction predict_score(const ScalingLaw& law, double n_f, double n_c) {
  if (!(n_f >= 1.0) || !(n_c >= 1.0)) {
    raise(ErrorKind::parameter, "n_f and n_c must be >= 1");
  }
  ScorePrediction out;
  out.score = model(to_array(law), n_f, n_c);
  out.out_of_range = !(out.score >= 0.0 && out.score <= 1.0);
  return out;
}

LineFit fit_line(std::span<const Point2> points) {
  if (points.size() < 2) raise(ErrorKind::parameter, "line fit needs at least 2 points");
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& pt : points) {
    if (!std::isfinite(pt.x) || !std::isfinite(pt.y)) raise(ErrorKind::data, "non-finite point");
    mx += pt.x;
    my += pt.y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& pt : points) {
    const double dx = pt.x - mx;
    const double dy = pt.y - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  const bool constant_x =
      std::ranges::all_of(points, [&](const Point2& pt) { return pt.x == points.front().x; });
  if (constant_x || sxx == 0.0) raise(ErrorKind::parameter, "line fit needs non-constant x");
  LineFit fit;
  const bool constant_y =
      std::ranges::all_of(points, [&](const Point2& pt) { return pt.y == points.front().y; });
  if (constant_y) {
    fit.intercept = points.front().y;
    fit.zero_y_variance = true;
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return fit;
}

}  // namespace palign
