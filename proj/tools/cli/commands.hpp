#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "report.hpp"

namespace palign::cli {

/// A layer flag value: an explicit index or "best" (sweep all layers).
struct LayerChoice {
  bool best = true;
  std::size_t index = 0;
};

LayerChoice parse_layer_choice(const std::string& text);

struct AlignOptions {
  std::string x, y;
  std::size_t k = 10;
  std::string metric = "cosine";
  std::string layer_x = "best", layer_y = "best";
  std::size_t segments_x = 0, segments_y = 0;  // 0 = all segments in the archive
  std::string out;
  std::size_t threads = 0;
};

struct MatrixOptions {
  std::string vision_dir, text_dir;
  std::size_t k = 10;
  std::string metric = "cosine";
  std::size_t segments = 0;
  std::string out_prefix;
  std::size_t threads = 0;
};

struct FitScalingOptions {
  std::string grid;
  std::size_t restarts = 16;
  std::uint64_t seed = 0;
  std::string out, csv;
  std::size_t threads = 0;
};

struct RetrievalOptions {
  std::string train, train_labels, test, test_labels;
  std::size_t k = 8;
  double tau = 0.07;
  std::string layer = "last";
  std::size_t segments = 0;
  std::string out, csv;
  std::size_t threads = 0;
};

struct TemporalOptions {
  std::string video, pos, neg, groups;
  std::size_t k = 5;
  std::string metric = "cosine";
  std::string layer_x = "best", layer_y = "best";
  std::size_t segments = 0;
  std::string out, csv;
  std::size_t threads = 0;
};

struct CurveOptions {
  std::string x, y;
  std::string ks;
  std::string metric = "cosine";
  std::string layer_x = "best", layer_y = "best";
  std::size_t segments_x = 0;
  std::string out, csv;
  std::size_t threads = 0;
};

// Each command validates its inputs, computes, writes its output files and
// returns the report that was written.
RunReport cmd_align(const AlignOptions& o);
RunReport cmd_matrix(const MatrixOptions& o);
RunReport cmd_fit_scaling(const FitScalingOptions& o);
RunReport cmd_retrieval(const RetrievalOptions& o);
RunReport cmd_temporal(const TemporalOptions& o);
RunReport cmd_curve(const CurveOptions& o);

}  // namespace palign::cli
